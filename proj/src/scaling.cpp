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

#include "riskscope/scaling.h"

#include <cmath>

namespace riskscope {

FeatureScaling FeatureScaling::from_dataset(const Dataset& dataset) {
  const std::size_t d = dataset.schema().size();
  FeatureScaling s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  if (dataset.empty()) return s;
  const auto n = static_cast<double>(dataset.size());
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (const auto& r : dataset.records()) sum += r.values[j];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : dataset.records()) ss += (r.values[j] - mean) * (r.values[j] - mean);
    const double sd = std::sqrt(ss / n);
    s.mean[j] = mean;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

FeatureScaling FeatureScaling::identity(std::size_t d) {
  return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

}  // namespace riskscope
