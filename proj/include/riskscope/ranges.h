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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "riskscope/dataset.h"
#include "riskscope/interval.h"
#include "riskscope/model.h"

namespace riskscope {

class KnowledgeBase;

inline constexpr std::size_t kMinClassSamples = 10;

// Linear interpolation between closest ranks ("type 7"): position
// q * (n - 1) in the sorted sample. `sorted` must be non-empty and ascending.
double percentile_sorted(std::span<const double> sorted, double q);

struct ObservedRange {
  double low = 0.0;
  double high = 0.0;
  std::size_t n = 0;
  bool low_confidence = false;  // n < kMinClassSamples
};

// Percentile interval of each feature over the records whose prediction
// equals predicted_class. Throws DegenerateInput when that class is empty.
std::map<std::string, ObservedRange> compute_ai_ranges(
    const Dataset& dataset, std::span<const int> predictions, int predicted_class,
    std::span<const std::string> features, double lower_q = 0.25, double upper_q = 0.75);

std::map<std::string, ObservedRange> compute_ai_ranges(
    const ProbabilityModel& model, const Dataset& dataset, int predicted_class,
    std::span<const std::string> features, double lower_q = 0.25, double upper_q = 0.75);

// Interval Jaccard: |a intersect b| / |a union b|. A zero-length interval
// scores 1 when its point lies in the other interval, else 0.
double range_overlap(const Interval& a, const Interval& b);

struct FeatureRangeEntry {
  std::string feature;
  ObservedRange ai;
  std::optional<Interval> sci;
  std::optional<std::string> sci_kind;  // "normal" | "diagnostic"
  std::optional<double> overlap;
};

struct FeatureRangeReport {
  int predicted_class = 0;
  std::vector<FeatureRangeEntry> features;

  nlohmann::json to_json() const;
};

// Ranges for class `predicted_class`; the scientific interval is the KB's
// diagnostic interval for class 1 and its normal interval for class 0.
FeatureRangeReport build_range_report(const Dataset& dataset, std::span<const int> predictions,
                                      int predicted_class,
                                      std::span<const std::string> features,
                                      const KnowledgeBase& kb);

// Ranges for the class the model predicts for x.
FeatureRangeReport build_range_report(const ProbabilityModel& model, const Dataset& dataset,
                                      std::span<const double> x,
                                      std::span<const std::string> features,
                                      const KnowledgeBase& kb);

}  // namespace riskscope
