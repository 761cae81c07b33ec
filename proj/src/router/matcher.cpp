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

#include "riskscope/router/matcher.h"

#include <fstream>

#include "riskscope/error.h"

namespace riskscope::router {

MatcherConfig MatcherConfig::from_json(const nlohmann::json& doc) {
  MatcherConfig cfg;
  try {
    cfg.vectorizer = doc.value("vectorizer", cfg.vectorizer);
    cfg.threshold = doc.at("threshold").get<double>();
    cfg.calibration = doc.value("calibration", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("router config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

MatcherConfig MatcherConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open router config: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("router config is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

nlohmann::json MatcherConfig::to_json() const {
  return {{"vectorizer", vectorizer}, {"threshold", threshold}, {"calibration", calibration}};
}

void MatcherConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("router threshold must be in (0, 1)");
  if (vectorizer != "char_ngram_tfidf" && vectorizer != "external_embedding") {
    throw ConfigError("router vectorizer must be char_ngram_tfidf or external_embedding");
  }
}

IntentMatcher::IntentMatcher(PromptCorpus corpus, std::shared_ptr<const Vectorizer> vectorizer)
    : corpus_(std::move(corpus)), vectorizer_(std::move(vectorizer)) {
  if (!vectorizer_) throw InvalidArgument("matcher needs a vectorizer");
  entry_vectors_.reserve(corpus_.size());
  for (const auto& e : corpus_.entries()) entry_vectors_.push_back(vectorizer_->transform(e.text));
}

IntentMatcher::IntentMatcher(PromptCorpus corpus)
    : IntentMatcher(corpus, std::make_shared<CharNgramTfidf>(CharNgramTfidf::fit(corpus.texts()))) {}

IntentMatch IntentMatcher::match(std::string_view text) const {
  if (normalize_text(text).empty()) throw InvalidArgument("query text is empty");
  const auto query = vectorizer_->transform(text);
  IntentMatch best;
  best.similarity = -1.0;
  for (std::size_t i = 0; i < entry_vectors_.size(); ++i) {
    const double s = cosine(query, entry_vectors_[i]);
    if (s > best.similarity) best = {corpus_.entries()[i].intent, s, i};
  }
  best.similarity = std::max(best.similarity, 0.0);
  return best;
}

double routing_accuracy(std::span<const CalibrationItem> items, double threshold) {
  if (items.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& item : items) {
    const bool grammar = item.similarity >= threshold;
    if (item.in_scope ? (grammar && item.intent_correct) : !grammar) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

CalibrationResult calibrate_from_scores(std::span<const CalibrationItem> items) {
  bool any_in = false;
  bool any_out = false;
  for (const auto& item : items) (item.in_scope ? any_in : any_out) = true;
  if (!any_in || !any_out) {
    throw InvalidArgument("calibration needs both in-scope and out-of-scope items");
  }
  CalibrationResult best{0.0, -1.0};
  for (int step = 1; step <= 99; ++step) {
    const double t = static_cast<double>(step) / 100.0;
    const double acc = routing_accuracy(items, t);
    if (acc >= best.accuracy) best = {t, acc};
  }
  return best;
}

std::vector<CalibrationItem> score_labeled_set(const IntentMatcher& matcher,
                                               std::span<const LabeledQuery> labeled) {
  std::vector<CalibrationItem> out;
  out.reserve(labeled.size());
  for (const auto& q : labeled) {
    const auto m = matcher.match(q.text);
    out.push_back({m.similarity, q.in_scope, q.in_scope && q.intent == m.intent});
  }
  return out;
}

CalibrationResult calibrate_threshold(const IntentMatcher& matcher,
                                      std::span<const LabeledQuery> labeled) {
  const auto items = score_labeled_set(matcher, labeled);
  return calibrate_from_scores(items);
}

}  // namespace riskscope::router
