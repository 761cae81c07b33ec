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

#include "riskscope/service/event_log.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>

#include "riskscope/error.h"

namespace riskscope::service {
namespace {

constexpr std::pair<EventKind, std::string_view> kEventNames[] = {
    {EventKind::kViewOpened, "view_opened"},
    {EventKind::kHelpClicked, "help_clicked"},
    {EventKind::kChatQuery, "chat_query"},
    {EventKind::kChatAnswer, "chat_answer"},
    {EventKind::kRecommendationRequested, "recommendation_requested"},
};

std::int64_t system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool is_log_file(const std::filesystem::path& p) {
  const auto name = p.filename().string();
  return name.size() > 13 && name.rfind("events-", 0) == 0 &&
         name.compare(name.size() - 6, 6, ".jsonl") == 0;
}

std::vector<InteractionEvent> read_directory(const std::filesystem::path& dir) {
  std::vector<InteractionEvent> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && is_log_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto doc = nlohmann::json::parse(line, nullptr, false);
      if (doc.is_discarded()) continue;  // torn write
      try {
        out.push_back(InteractionEvent::from_json(doc));
      } catch (const Error&) {
        continue;
      }
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kEventNames) {
    if (k == kind) return name;
  }
  return "view_opened";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (const auto& [k, name] : kEventNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

nlohmann::json InteractionEvent::to_json() const {
  return {{"session", session},
          {"timestamp_ms", timestamp_ms},
          {"kind", std::string(to_string(kind))},
          {"seq", seq},
          {"payload", payload}};
}

InteractionEvent InteractionEvent::from_json(const nlohmann::json& doc) {
  try {
    InteractionEvent e;
    e.session = doc.at("session").get<std::string>();
    e.timestamp_ms = doc.at("timestamp_ms").get<std::int64_t>();
    const auto kind = parse_event_kind(doc.at("kind").get<std::string>());
    if (!kind) throw InvalidArgument("unknown event kind");
    e.kind = *kind;
    e.seq = doc.value("seq", std::uint64_t{0});
    e.payload = doc.value("payload", nlohmann::json::object());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("malformed event: ") + ex.what());
  }
}

std::string day_file_name(std::int64_t timestamp_ms) {
  const std::time_t secs = static_cast<std::time_t>(timestamp_ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "events-%04d-%02d-%02d.jsonl", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday);
  return buf;
}

EventLog::EventLog(std::filesystem::path directory, Clock clock)
    : directory_(std::move(directory)), clock_(clock ? std::move(clock) : Clock(system_now_ms)) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
}

bool EventLog::append(InteractionEvent event) {
  std::lock_guard lock(mu_);
  auto ts = clock_();
  auto it = last_timestamp_.find(event.session);
  if (it != last_timestamp_.end()) ts = std::max(ts, it->second);
  event.timestamp_ms = ts;
  event.seq = next_seq_;

  std::ofstream out(directory_ / day_file_name(ts), std::ios::app);
  if (out) out << event.to_json().dump() << '\n';
  out.flush();
  if (!out) {
    ++write_failures_;
    return false;
  }
  ++next_seq_;
  last_timestamp_.insert_or_assign(event.session, ts);
  return true;
}

std::vector<InteractionEvent> EventLog::read_all() const {
  std::lock_guard lock(mu_);
  return read_directory(directory_);
}

std::vector<InteractionEvent> EventLog::export_session(std::string_view session) const {
  auto all = read_all();
  std::vector<InteractionEvent> out;
  for (auto& e : all) {
    if (e.session == session) out.push_back(std::move(e));
  }
  // stable: file order then append order breaks timestamp ties
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.timestamp_ms < b.timestamp_ms;
  });
  return out;
}

std::size_t EventLog::write_failures() const {
  std::lock_guard lock(mu_);
  return write_failures_;
}

EngagementSummary summarize_engagement(std::span<const InteractionEvent> events) {
  std::set<std::string> sessions;
  std::size_t chats = 0;
  std::size_t views = 0;
  for (const auto& e : events) {
    sessions.insert(e.session);
    if (e.kind == EventKind::kChatQuery) ++chats;
    if (e.kind == EventKind::kViewOpened) ++views;
  }
  EngagementSummary s;
  s.sessions = sessions.size();
  if (s.sessions > 0) {
    s.mean_chat_queries = static_cast<double>(chats) / static_cast<double>(s.sessions);
    s.mean_view_events = static_cast<double>(views) / static_cast<double>(s.sessions);
  }
  return s;
}

}  // namespace riskscope::service
