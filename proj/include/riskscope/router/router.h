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
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "riskscope/router/corpus.h"
#include "riskscope/router/grammar.h"
#include "riskscope/router/matcher.h"
#include "riskscope/schema.h"

namespace riskscope::router {

enum class Route { kGrammar, kFallback };

std::string_view to_string(Route route);

struct RouteDecision {
  Route route = Route::kFallback;
  std::optional<Intent> intent;  // nearest intent, also kept on fallback
  double similarity = 0.0;
  std::optional<ParsedCommand> command;
  // Matched above threshold but the grammar could not resolve arguments.
  bool demoted = false;
  std::string note;

  nlohmann::json to_json() const;
};

// Semantic matcher in front of the command grammar. Pure and deterministic.
class Router {
 public:
  Router(IntentMatcher matcher, MatcherConfig config,
         std::shared_ptr<const CommandParser> parser);
  Router(const PromptCorpus& corpus, MatcherConfig config, const FeatureSchema& schema);

  RouteDecision route(std::string_view query,
                      std::optional<std::int64_t> session_patient) const;

  const IntentMatcher& matcher() const { return matcher_; }
  const MatcherConfig& config() const { return config_; }

 private:
  IntentMatcher matcher_;
  MatcherConfig config_;
  std::shared_ptr<const CommandParser> parser_;
};

}  // namespace riskscope::router
