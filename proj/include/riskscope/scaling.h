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
#include <vector>

#include "riskscope/dataset.h"

namespace riskscope {

// Per-feature z-score transform. Perturbations are drawn in z units and
// mapped back with x + z * scale before the model sees them.
struct FeatureScaling {
  std::vector<double> mean;
  std::vector<double> scale;  // population std; 1 where a feature is constant

  static FeatureScaling from_dataset(const Dataset& dataset);
  static FeatureScaling identity(std::size_t d);

  std::size_t size() const { return mean.size(); }
};

}  // namespace riskscope
