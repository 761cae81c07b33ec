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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "riskscope/router/corpus.h"
#include "riskscope/router/vectorizer.h"

namespace riskscope::router {

struct MatcherConfig {
  std::string vectorizer = "char_ngram_tfidf";
  double threshold = 0.5;
  nlohmann::json calibration = nlohmann::json::object();

  static MatcherConfig from_json(const nlohmann::json& doc);
  static MatcherConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;  // threshold in (0, 1)
};

struct IntentMatch {
  Intent intent = Intent::kPredict;
  double similarity = 0.0;
  std::size_t entry = 0;
};

// Nearest supported prompt under cosine similarity.
class IntentMatcher {
 public:
  IntentMatcher(PromptCorpus corpus, std::shared_ptr<const Vectorizer> vectorizer);
  // Fits the default character n-gram TF-IDF on the corpus texts.
  explicit IntentMatcher(PromptCorpus corpus);

  // Throws InvalidArgument on blank text. Ties go to the earlier entry.
  IntentMatch match(std::string_view text) const;

  const PromptCorpus& corpus() const { return corpus_; }
  const Vectorizer& vectorizer() const { return *vectorizer_; }

 private:
  PromptCorpus corpus_;
  std::shared_ptr<const Vectorizer> vectorizer_;
  std::vector<SparseVector> entry_vectors_;
};

struct CalibrationItem {
  double similarity = 0.0;
  bool in_scope = false;
  bool intent_correct = false;  // nearest entry carries the labeled intent
};

struct CalibrationResult {
  double threshold = 0.0;
  double accuracy = 0.0;
};

// Routing accuracy at threshold t: in-scope items must reach t with the
// right intent, out-of-scope items must fall below it.
double routing_accuracy(std::span<const CalibrationItem> items, double threshold);

// Grid search over t = 0.01 .. 0.99; ties resolve to the larger threshold.
// Throws InvalidArgument unless both in-scope and out-of-scope items exist.
CalibrationResult calibrate_from_scores(std::span<const CalibrationItem> items);

std::vector<CalibrationItem> score_labeled_set(const IntentMatcher& matcher,
                                               std::span<const LabeledQuery> labeled);

CalibrationResult calibrate_threshold(const IntentMatcher& matcher,
                                      std::span<const LabeledQuery> labeled);

}  // namespace riskscope::router
