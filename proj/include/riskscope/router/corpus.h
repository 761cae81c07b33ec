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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace riskscope::router {

enum class Intent {
  kPredict,
  kExplainImportance,
  kExplainRange,
  kCounterfactual,
  kRecommendation,
  kDataSummary,
  kEvidenceRequest,
};

inline constexpr std::size_t kIntentCount = 7;
inline constexpr std::size_t kMinEntriesPerIntent = 3;

std::string_view to_string(Intent intent);
std::optional<Intent> parse_intent(std::string_view s);

struct PromptEntry {
  std::string text;
  Intent intent = Intent::kPredict;
};

// Supported prompts. Invariants (checked on construction): unique texts and
// at least kMinEntriesPerIntent entries for every intent.
class PromptCorpus {
 public:
  explicit PromptCorpus(std::vector<PromptEntry> entries);

  static PromptCorpus from_json(const nlohmann::json& doc);
  static PromptCorpus load(const std::filesystem::path& path);

  std::span<const PromptEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::vector<std::string> texts() const;

 private:
  std::vector<PromptEntry> entries_;
};

struct LabeledQuery {
  std::string text;
  bool in_scope = false;
  std::optional<Intent> intent;  // required when in_scope
};

std::vector<LabeledQuery> labeled_set_from_json(const nlohmann::json& doc);
std::vector<LabeledQuery> load_labeled_set(const std::filesystem::path& path);

}  // namespace riskscope::router
