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

#include "riskscope/router/router.h"

#include "riskscope/error.h"
#include "riskscope/router/vectorizer.h"

namespace riskscope::router {

std::string_view to_string(Route route) {
  return route == Route::kGrammar ? "grammar" : "fallback";
}

nlohmann::json RouteDecision::to_json() const {
  nlohmann::json j = {{"route", std::string(to_string(route))},
                      {"intent", intent ? nlohmann::json(std::string(to_string(*intent)))
                                        : nlohmann::json()},
                      {"similarity", similarity},
                      {"demoted", demoted}};
  if (command) j["command"] = command->to_json();
  if (!note.empty()) j["note"] = note;
  return j;
}

Router::Router(IntentMatcher matcher, MatcherConfig config,
               std::shared_ptr<const CommandParser> parser)
    : matcher_(std::move(matcher)), config_(std::move(config)), parser_(std::move(parser)) {
  config_.validate();
  if (!parser_) throw InvalidArgument("router needs a command parser");
}

Router::Router(const PromptCorpus& corpus, MatcherConfig config, const FeatureSchema& schema)
    : Router(IntentMatcher(corpus), std::move(config), std::make_shared<GrammarParser>(schema)) {}

RouteDecision Router::route(std::string_view query,
                            std::optional<std::int64_t> session_patient) const {
  RouteDecision d;
  if (normalize_text(query).empty()) {
    d.note = "empty query";
    return d;
  }
  const auto m = matcher_.match(query);
  d.intent = m.intent;
  d.similarity = m.similarity;
  if (m.similarity < config_.threshold) {
    d.note = "below threshold";
    return d;
  }
  auto parsed = parser_->parse(query, m.intent, session_patient);
  if (!parsed.command) {
    d.demoted = true;
    d.note = parsed.failure;
    return d;
  }
  d.route = Route::kGrammar;
  d.command = std::move(parsed.command);
  return d;
}

}  // namespace riskscope::router
