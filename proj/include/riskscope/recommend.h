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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "riskscope/dataset.h"
#include "riskscope/model.h"
#include "riskscope/schema.h"

namespace riskscope {

enum class Feasibility { kEasy = 0, kModerate = 1, kHard = 2 };

std::string_view to_string(Feasibility f);

// Clinical-guideline stand-ins for one feature: the largest change a single
// step may make, and the |delta| ceilings of the easy and moderate badges.
struct StepRule {
  double max_step = 0.0;
  double easy_max = 0.0;
  double moderate_max = 0.0;
};

class StepRules {
 public:
  StepRules() = default;
  explicit StepRules(std::map<std::string, StepRule, std::less<>> rules) : rules_(std::move(rules)) {}

  // Every actionable schema feature must have a rule with
  // 0 <= easy_max <= moderate_max and max_step > 0; throws ConfigError otherwise.
  static StepRules from_json(const nlohmann::json& doc, const FeatureSchema& schema);
  static StepRules load(const std::filesystem::path& path, const FeatureSchema& schema);

  const StepRule& at(std::string_view feature) const;  // throws ConfigError
  bool contains(std::string_view feature) const;

 private:
  std::map<std::string, StepRule, std::less<>> rules_;
};

// easy when |delta| <= easy_max, moderate when <= moderate_max, else hard.
Feasibility badge_feasibility(double delta, const StepRule& rule);

struct FeatureChange {
  std::string feature;
  std::size_t index = 0;
  double from = 0.0;
  double to = 0.0;

  double delta() const { return to - from; }
};

struct Counterfactual {
  std::vector<FeatureChange> changes;  // ascending feature index
  double probability_after = 0.0;

  bool touches(std::size_t feature) const;
};

enum class CounterfactualStatus { kFound, kNoChangeNeeded, kNoFeasiblePlan };

std::string_view to_string(CounterfactualStatus s);

struct CounterfactualResult {
  CounterfactualStatus status = CounterfactualStatus::kNoFeasiblePlan;
  std::vector<Counterfactual> candidates;  // fewest features first, then smallest change
};

// Per-feature search box [p1, p99] and grid step (range / 20) from the data.
struct SearchBounds {
  std::vector<double> low;
  std::vector<double> high;
  std::vector<double> grid_step;

  static SearchBounds from_dataset(const Dataset& dataset);
};

inline constexpr std::size_t kMaxCounterfactualFeatures = 3;

// Greedy coordinate search over actionable features, each moved only in its
// healthy direction on its grid and kept inside the bounds. Singles are
// tried first, then pairs, then triples; within a feature set every
// iteration takes the grid step that lowers the probability most.
CounterfactualResult generate_counterfactual(const ProbabilityModel& model,
                                             std::span<const double> x,
                                             const FeatureSchema& schema,
                                             const SearchBounds& bounds,
                                             std::size_t max_features = kMaxCounterfactualFeatures);

// Drops candidates touching a non-actionable feature. Idempotent.
std::vector<Counterfactual> filter_immutable(std::vector<Counterfactual> candidates,
                                             const FeatureSchema& schema);

// Splits delta into steps of at most max_step (same sign), remainder last.
// Throws InvalidArgument unless max_step > 0.
std::vector<double> split_delta(double delta, double max_step);

struct RecommendationStep {
  std::string feature;
  double delta = 0.0;
  double cumulative_value = 0.0;
  Feasibility feasibility = Feasibility::kEasy;
  double predicted_probability_after = 0.0;
};

struct RecommendationPlan {
  std::int64_t patient = -1;
  std::vector<RecommendationStep> steps;
  std::size_t flips_at_step = 0;  // 1-based; steps beyond it are truncated
  std::string horizon_note;

  nlohmann::json to_json() const;
};

// Splits every change of `candidate` by the feature's step limit, orders the
// steps easiest first (stable: feature order, then step order), replays them
// cumulatively through the model and cuts the plan at the first step whose
// prediction is class 0. Throws InvalidArgument if the full candidate does
// not flip the prediction or touches an immutable feature.
RecommendationPlan decompose_steps(const ProbabilityModel& model, std::span<const double> x,
                                   const Counterfactual& candidate, const FeatureSchema& schema,
                                   const StepRules& rules, std::int64_t patient = -1);

}  // namespace riskscope
