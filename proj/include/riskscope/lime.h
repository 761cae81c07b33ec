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
#include <span>

#include "riskscope/attribution.h"
#include "riskscope/dataset.h"
#include "riskscope/model.h"
#include "riskscope/scaling.h"

namespace riskscope {

struct LimeConfig {
  double kernel_width = 0.75;  // in units of sqrt(d)
  std::size_t n_samples = 1000;
  double ridge = 1e-6;
  std::uint64_t seed = 0;
};

// Local weighted linear surrogate.
//
// Samples x_z + e with e ~ N(0, I) in standardized space, weights each sample
// by exp(-|e|^2 / (kernel_width^2 * d)) and fits a ridge-regularized weighted
// least-squares model (unpenalized intercept) to the model's probabilities.
// phi holds the surrogate slopes in z units. Throws DegenerateInput when a
// column of the weighted design has no variance.
Attribution explain_lime(const ProbabilityModel& model, const FeatureScaling& scaling,
                         std::span<const double> x, const LimeConfig& cfg);

Attribution explain_lime(const ProbabilityModel& model, const Dataset& dataset,
                         std::span<const double> x, const LimeConfig& cfg);

}  // namespace riskscope
