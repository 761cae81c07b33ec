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
#include <vector>

#include "riskscope/attribution.h"
#include "riskscope/dataset.h"
#include "riskscope/model.h"

namespace riskscope {

inline constexpr std::size_t kMaxExactShapFeatures = 16;

// v(S) for every coalition S encoded as a bitmask (bit i set = feature i
// taken from x): the mean model output over the background with the
// remaining features taken from each background row. Parallel over
// coalitions; each v(S) is summed in background order.
std::vector<double> coalition_values(const ProbabilityModel& model, std::span<const double> x,
                                     std::span<const std::vector<double>> background);
std::vector<double> coalition_values_serial(const ProbabilityModel& model,
                                            std::span<const double> x,
                                            std::span<const std::vector<double>> background);

// Shapley-kernel weighted regression over all proper coalitions with the
// efficiency constraint sum(phi) = v(all) - v(empty) eliminated. With the
// full enumeration this reproduces the exact Shapley values.
std::vector<double> shapley_from_coalitions(std::span<const double> values, std::size_t d);

// Throws InvalidArgument for an empty background or d > kMaxExactShapFeatures.
Attribution explain_kernel_shap(const ProbabilityModel& model, std::span<const double> x,
                                std::span<const std::vector<double>> background);

// n of `rows` drawn without replacement (all of them when n >= rows.size());
// an empty `rows` means every record of the dataset.
std::vector<std::vector<double>> sample_background(const Dataset& dataset,
                                                   std::span<const std::size_t> rows,
                                                   std::size_t n, std::uint64_t seed);

}  // namespace riskscope
