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

#include "riskscope/selection.h"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "riskscope/error.h"
#include "riskscope/kernel_shap.h"
#include "riskscope/lime.h"

namespace riskscope {

std::vector<ExplainerCandidate> default_candidates() {
  std::vector<ExplainerCandidate> out;
  for (double width : {0.25, 0.50, 0.75, 1.0}) {
    char id[32];
    std::snprintf(id, sizeof(id), "lime_%.2f", width);
    out.push_back({id, ExplainerKind::kLime, width});
  }
  out.push_back({"kernel_shap", ExplainerKind::kKernelShap, 0.0});
  return out;
}

SelectionConfig SelectionConfig::defaults(std::size_t d) {
  return {std::max<std::size_t>(1, d / 2), 0.01, default_candidates()};
}

void SelectionConfig::validate(std::size_t d) const {
  if (top_k < 1 || top_k > d) throw InvalidArgument("K must be in [1, d]");
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be >= 0");
  if (candidates.empty()) throw InvalidArgument("at least one explainer candidate is required");
}

std::vector<std::size_t> consensus_top_k(std::span<const std::vector<double>> phis,
                                         std::size_t top_k) {
  if (phis.empty()) throw InvalidArgument("consensus needs at least one attribution");
  const std::size_t d = phis.front().size();
  if (top_k < 1 || top_k > d) throw InvalidArgument("K must be in [1, d]");
  std::vector<double> mean_rank(d, 0.0);
  for (const auto& phi : phis) {
    if (phi.size() != d) throw InvalidArgument("attributions differ in length");
    const auto order = rank_by_magnitude(phi);
    for (std::size_t pos = 0; pos < d; ++pos) mean_rank[order[pos]] += static_cast<double>(pos);
  }
  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), std::size_t{0});
  std::stable_sort(features.begin(), features.end(),
                   [&](std::size_t a, std::size_t b) { return mean_rank[a] < mean_rank[b]; });
  features.resize(top_k);
  std::sort(features.begin(), features.end());
  return features;
}

ExplainerChoice choose_explainer(std::span<const double> scores,
                                 std::span<const std::vector<double>> phis, std::size_t top_k,
                                 double delta) {
  if (scores.empty() || scores.size() != phis.size()) {
    throw InvalidArgument("need one attribution per score");
  }
  ExplainerChoice choice;
  choice.consensus_jaccard.assign(scores.size(), std::nullopt);
  const auto best = static_cast<std::size_t>(
      std::distance(scores.begin(), std::max_element(scores.begin(), scores.end())));
  choice.index = best;

  double runner_up = -1.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != best) runner_up = std::max(runner_up, scores[i]);
  }
  if (scores.size() < 2 || !(scores[best] - runner_up < delta)) return choice;

  choice.tiebreak_used = true;
  const auto consensus = consensus_top_k(phis, top_k);
  double best_jaccard = -1.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[best] - scores[i] < delta)) continue;
    const auto mask = top_k_mask(phis[i], top_k);
    std::size_t inter = 0;
    for (auto f : consensus) inter += mask[f] ? 1 : 0;
    const double jaccard =
        static_cast<double>(inter) / static_cast<double>(2 * top_k - inter);
    choice.consensus_jaccard[i] = jaccard;
    if (jaccard > best_jaccard) {
      best_jaccard = jaccard;
      choice.index = i;
    }
  }
  return choice;
}

Attribution run_explainer(const ExplainerCandidate& candidate, const ExplainerInputs& inputs,
                          std::span<const double> x, std::uint64_t seed) {
  Attribution out;
  switch (candidate.kind) {
    case ExplainerKind::kLime: {
      LimeConfig cfg;
      cfg.kernel_width = candidate.kernel_width;
      cfg.seed = seed;
      out = explain_lime(inputs.model, inputs.scaling, x, cfg);
      break;
    }
    case ExplainerKind::kKernelShap:
      out = explain_kernel_shap(inputs.model, x, inputs.background);
      break;
  }
  out.method_id = candidate.id;
  return out;
}

FaithfulnessReport select_explainer(const ExplainerInputs& inputs, std::span<const double> x,
                                    const SelectionConfig& sel, const PerturbationConfig& cfg,
                                    std::int64_t target) {
  const std::size_t d = inputs.model.num_features();
  validate_instance(x, d);
  sel.validate(d);
  cfg.validate();

  FaithfulnessReport report;
  report.top_k = sel.top_k;
  report.delta = sel.delta;
  std::vector<double> scores;
  std::vector<std::vector<double>> phis;
  std::vector<std::size_t> ok_index;
  std::string failures;
  for (const auto& candidate : sel.candidates) {
    CandidateOutcome outcome;
    outcome.id = candidate.id;
    try {
      outcome.attribution = run_explainer(candidate, inputs, x, cfg.seed);
      outcome.attribution.target = target;
      auto faith = faithfulness(inputs.model, x, outcome.attribution.phi, sel.top_k,
                                inputs.scaling, cfg);
      outcome.faithfulness = faith.score;
      outcome.curve = std::move(faith.curve);
      outcome.ok = true;
      scores.push_back(outcome.faithfulness);
      phis.push_back(outcome.attribution.phi);
      ok_index.push_back(report.candidates.size());
    } catch (const Error& e) {
      outcome.error = e.what();
      failures += (failures.empty() ? "" : "; ") + candidate.id + ": " + e.what();
    }
    report.candidates.push_back(std::move(outcome));
  }
  if (scores.empty()) throw Error("every explainer candidate failed: " + failures);

  const auto choice = choose_explainer(scores, phis, sel.top_k, sel.delta);
  for (std::size_t i = 0; i < ok_index.size(); ++i) {
    report.candidates[ok_index[i]].consensus_jaccard = choice.consensus_jaccard[i];
  }
  report.selected_index = ok_index[choice.index];
  report.selected = report.candidates[report.selected_index].id;
  report.tiebreak_used = choice.tiebreak_used;
  return report;
}

FaithfulnessReport select_explainer(const ProbabilityModel& model, const Dataset& dataset,
                                    std::span<const double> x, const SelectionConfig& sel,
                                    const PerturbationConfig& cfg, std::int64_t target) {
  const auto scaling = FeatureScaling::from_dataset(dataset);
  const auto background = sample_background(dataset, {}, kDefaultBackgroundSize, kBackgroundSeed);
  return select_explainer(ExplainerInputs{model, scaling, background}, x, sel, cfg, target);
}

nlohmann::json FaithfulnessReport::to_json() const {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    nlohmann::json j = {{"id", c.id}, {"ok", c.ok}};
    if (c.ok) {
      j["faithfulness"] = c.faithfulness;
      j["curve"] = c.curve;
      j["phi"] = c.attribution.phi;
      if (c.attribution.base_value) j["base_value"] = *c.attribution.base_value;
      if (c.consensus_jaccard) j["consensus_jaccard"] = *c.consensus_jaccard;
    } else {
      j["error"] = c.error;
    }
    cands.push_back(std::move(j));
  }
  return {{"selected", selected},
          {"tiebreak_used", tiebreak_used},
          {"top_k", top_k},
          {"delta", delta},
          {"candidates", std::move(cands)}};
}

}  // namespace riskscope
