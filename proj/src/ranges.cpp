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

#include "riskscope/ranges.h"

#include <algorithm>
#include <cmath>

#include "riskscope/error.h"
#include "riskscope/evidence.h"

namespace riskscope {

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("percentile level must be in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::map<std::string, ObservedRange> compute_ai_ranges(const Dataset& dataset,
                                                       std::span<const int> predictions,
                                                       int predicted_class,
                                                       std::span<const std::string> features,
                                                       double lower_q, double upper_q) {
  if (dataset.empty()) throw InvalidArgument("dataset is empty");
  if (predictions.size() != dataset.size()) {
    throw InvalidArgument("one prediction per record is required");
  }
  if (!(lower_q <= upper_q)) throw InvalidArgument("lower percentile exceeds upper percentile");
  std::vector<std::size_t> columns;
  for (const auto& name : features) columns.push_back(dataset.schema().require_index(name));

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == predicted_class) members.push_back(i);
  }
  if (members.empty()) {
    throw DegenerateInput("no records are predicted in class " + std::to_string(predicted_class));
  }

  std::map<std::string, ObservedRange> out;
  std::vector<double> values(members.size());
  for (std::size_t f = 0; f < columns.size(); ++f) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      values[i] = dataset[members[i]].values[columns[f]];
    }
    std::sort(values.begin(), values.end());
    out[features[f]] = ObservedRange{percentile_sorted(values, lower_q),
                                     percentile_sorted(values, upper_q), members.size(),
                                     members.size() < kMinClassSamples};
  }
  return out;
}

std::map<std::string, ObservedRange> compute_ai_ranges(const ProbabilityModel& model,
                                                       const Dataset& dataset,
                                                       int predicted_class,
                                                       std::span<const std::string> features,
                                                       double lower_q, double upper_q) {
  if (dataset.empty()) throw InvalidArgument("dataset is empty");
  std::vector<std::vector<double>> rows;
  rows.reserve(dataset.size());
  for (const auto& r : dataset.records()) rows.push_back(r.values);
  const auto predictions = predict_batch(model, rows);
  return compute_ai_ranges(dataset, predictions, predicted_class, features, lower_q, upper_q);
}

double range_overlap(const Interval& a, const Interval& b) {
  if (a.low > a.high || b.low > b.high) throw InvalidArgument("interval low exceeds high");
  if (a.length() == 0.0) return b.contains(a.low) ? 1.0 : 0.0;
  if (b.length() == 0.0) return a.contains(b.low) ? 1.0 : 0.0;
  const double inter = std::max(0.0, std::min(a.high, b.high) - std::max(a.low, b.low));
  const double uni = std::max(a.high, b.high) - std::min(a.low, b.low);
  return inter / uni;
}

FeatureRangeReport build_range_report(const Dataset& dataset, std::span<const int> predictions,
                                      int predicted_class,
                                      std::span<const std::string> features,
                                      const KnowledgeBase& kb) {
  FeatureRangeReport report;
  report.predicted_class = predicted_class;
  if (features.empty()) return report;
  const auto ai = compute_ai_ranges(dataset, predictions, predicted_class, features);
  for (const auto& name : features) {
    FeatureRangeEntry entry;
    entry.feature = name;
    entry.ai = ai.at(name);
    if (const auto* ev = kb.find(name, EvidenceKind::kRange); ev && ev->range) {
      entry.sci = predicted_class == 1 ? ev->range->diagnostic : ev->range->normal;
      entry.sci_kind = predicted_class == 1 ? "diagnostic" : "normal";
      entry.overlap = range_overlap({entry.ai.low, entry.ai.high}, *entry.sci);
    }
    report.features.push_back(std::move(entry));
  }
  return report;
}

FeatureRangeReport build_range_report(const ProbabilityModel& model, const Dataset& dataset,
                                      std::span<const double> x,
                                      std::span<const std::string> features,
                                      const KnowledgeBase& kb) {
  const int cls = model.predict(x);
  FeatureRangeReport report;
  report.predicted_class = cls;
  if (features.empty()) return report;
  std::vector<std::vector<double>> rows;
  rows.reserve(dataset.size());
  for (const auto& r : dataset.records()) rows.push_back(r.values);
  const auto predictions = predict_batch(model, rows);
  return build_range_report(dataset, predictions, cls, features, kb);
}

nlohmann::json FeatureRangeReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& f : features) {
    nlohmann::json j = {{"feature", f.feature},
                        {"ai_low", f.ai.low},
                        {"ai_high", f.ai.high},
                        {"n_class_samples", f.ai.n},
                        {"low_confidence", f.ai.low_confidence}};
    if (f.sci) {
      j["sci_low"] = f.sci->low;
      j["sci_high"] = f.sci->high;
      j["sci_kind"] = *f.sci_kind;
      j["overlap"] = *f.overlap;
    }
    list.push_back(std::move(j));
  }
  return {{"predicted_class", predicted_class}, {"features", std::move(list)}};
}

}  // namespace riskscope
