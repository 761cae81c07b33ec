/*
 * Copyright 2026 The RiskScope Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace riskscope::service {

enum class EventKind { kViewOpened, kHelpClicked, kChatQuery, kChatAnswer, kRecommendationRequested };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct InteractionEvent {
  std::string session;
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::kViewOpened;
  nlohmann::json payload = nlohmann::json::object();
  std::uint64_t seq = 0;

  nlohmann::json to_json() const;
  static InteractionEvent from_json(const nlohmann::json& doc);
};

// Append-only JSON-lines log, one file per UTC day (events-YYYY-MM-DD.jsonl).
// Appends are serialized by a single lock; timestamps are clamped so they
// never decrease within a session.
class EventLog {
 public:
  using Clock = std::function<std::int64_t()>;  // ms since epoch

  explicit EventLog(std::filesystem::path directory, Clock clock = {});

  // Fills timestamp and seq. Returns false (and keeps the event out of the
  // log) when the write fails; callers surface that as a warning.
  bool append(InteractionEvent event);

  // Every file in the directory, in file-name order, filtered to the session
  // and sorted by (timestamp, seq).
  std::vector<InteractionEvent> export_session(std::string_view session) const;
  std::vector<InteractionEvent> read_all() const;

  const std::filesystem::path& directory() const { return directory_; }
  std::size_t write_failures() const;

 private:
  std::filesystem::path directory_;
  Clock clock_;
  mutable std::mutex mu_;
  std::uint64_t next_seq_ = 0;
  std::size_t write_failures_ = 0;
  std::map<std::string, std::int64_t, std::less<>> last_timestamp_;
};

std::string day_file_name(std::int64_t timestamp_ms);

struct EngagementSummary {
  std::size_t sessions = 0;
  double mean_chat_queries = 0.0;
  double mean_view_events = 0.0;
};

// Per-session means of chat_query and view_opened counts.
EngagementSummary summarize_engagement(std::span<const InteractionEvent> events);

}  // namespace riskscope::service
