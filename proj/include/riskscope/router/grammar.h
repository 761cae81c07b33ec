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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "riskscope/evidence.h"
#include "riskscope/router/corpus.h"
#include "riskscope/schema.h"

namespace riskscope::router {

struct ParsedCommand {
  Intent action = Intent::kPredict;
  std::optional<std::int64_t> patient_id;
  std::optional<std::string> feature;  // canonical schema name
  std::optional<int> target_class;
  std::optional<int> count;
  std::optional<EvidenceKind> evidence_kind;

  nlohmann::json to_json() const;
};

// Either a command, or the reason parsing failed. Failure is soft: the
// router demotes the query to the fallback route.
struct ParseOutcome {
  std::optional<ParsedCommand> command;
  std::string failure;
};

class CommandParser {
 public:
  virtual ~CommandParser() = default;
  virtual ParseOutcome parse(std::string_view text, Intent intent,
                             std::optional<std::int64_t> session_patient) const = 0;
};

// Lowercase phrase -> canonical feature name.
std::map<std::string, std::string> default_feature_synonyms();

// Deterministic per-intent argument grammar.
//
//   patient_id  "patient 39", "id 39", "#39", "record 39", "person 39"
//   count       "top 3", "3 most", "3 features|factors"
//   class       "class 0|1", "positive|diabetic|high risk" -> 1,
//               "negative|non-diabetic|healthy|low risk" -> 0
//   feature     longest synonym phrase found on word boundaries
//   kind        range words ("range", "normal", "threshold", ...) -> range
//
// Required arguments: patient for predict, explain_importance,
// counterfactual and recommendation (falls back to the session patient);
// feature for evidence_request.
class GrammarParser final : public CommandParser {
 public:
  explicit GrammarParser(const FeatureSchema& schema,
                         std::map<std::string, std::string> synonyms = default_feature_synonyms());

  ParseOutcome parse(std::string_view text, Intent intent,
                     std::optional<std::int64_t> session_patient) const override;

  std::optional<std::string> resolve_feature(std::string_view normalized_text) const;

 private:
  std::vector<std::pair<std::string, std::string>> phrases_;  // longest first
};

}  // namespace riskscope::router
