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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "riskscope/attribution.h"
#include "riskscope/dataset.h"
#include "riskscope/fudge.h"
#include "riskscope/model.h"
#include "riskscope/scaling.h"

namespace riskscope {

enum class ExplainerKind { kLime, kKernelShap };

struct ExplainerCandidate {
  std::string id;
  ExplainerKind kind = ExplainerKind::kLime;
  double kernel_width = 0.0;  // LIME only
};

// LIME at widths 0.25, 0.50, 0.75, 1.0 followed by KernelSHAP.
std::vector<ExplainerCandidate> default_candidates();

struct SelectionConfig {
  std::size_t top_k = 0;
  double delta = 0.01;
  std::vector<ExplainerCandidate> candidates;

  // K = floor(d/2), delta = 0.01, default candidates.
  static SelectionConfig defaults(std::size_t d);
  void validate(std::size_t d) const;
};

struct CandidateOutcome {
  std::string id;
  bool ok = false;
  std::string error;
  Attribution attribution;
  double faithfulness = 0.0;
  std::vector<double> curve;
  std::optional<double> consensus_jaccard;  // set for candidates in a tie
};

struct FaithfulnessReport {
  std::vector<CandidateOutcome> candidates;
  std::size_t selected_index = 0;
  std::string selected;
  bool tiebreak_used = false;
  std::size_t top_k = 0;
  double delta = 0.0;

  const Attribution& selected_attribution() const {
    return candidates[selected_index].attribution;
  }
  nlohmann::json to_json() const;
};

struct ExplainerChoice {
  std::size_t index = 0;
  bool tiebreak_used = false;
  std::vector<std::optional<double>> consensus_jaccard;
};

// Top-K features of the consensus ranking: features ordered by their mean
// magnitude rank across all attributions, lower index first on ties.
std::vector<std::size_t> consensus_top_k(std::span<const std::vector<double>> phis,
                                         std::size_t top_k);

// argmax of scores; when the runner-up is within delta, every candidate
// scoring within delta of the best is compared by Jaccard similarity of its
// top-K set with the consensus top-K, then by position.
ExplainerChoice choose_explainer(std::span<const double> scores,
                                 std::span<const std::vector<double>> phis, std::size_t top_k,
                                 double delta);

// Everything an explainer run needs besides the instance.
struct ExplainerInputs {
  const ProbabilityModel& model;
  const FeatureScaling& scaling;
  std::span<const std::vector<double>> background;
};

Attribution run_explainer(const ExplainerCandidate& candidate, const ExplainerInputs& inputs,
                          std::span<const double> x, std::uint64_t seed);

// Runs every candidate, scores each by faithfulness under cfg, and picks one.
// Candidate failures are recorded; throws Error only if all of them fail.
FaithfulnessReport select_explainer(const ExplainerInputs& inputs, std::span<const double> x,
                                    const SelectionConfig& sel, const PerturbationConfig& cfg,
                                    std::int64_t target = -1);

inline constexpr std::size_t kDefaultBackgroundSize = 100;
inline constexpr std::uint64_t kBackgroundSeed = 42;

// Convenience form: scaling from the dataset, background of 100 rows.
FaithfulnessReport select_explainer(const ProbabilityModel& model, const Dataset& dataset,
                                    std::span<const double> x, const SelectionConfig& sel,
                                    const PerturbationConfig& cfg, std::int64_t target = -1);

}  // namespace riskscope
