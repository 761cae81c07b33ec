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
#include <span>
#include <vector>

namespace riskscope {

// Anything the explanation machinery can perturb: a function from a
// d-dimensional feature vector to a probability-like score. Implementations
// must be safe to call concurrently from several threads.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;

  virtual std::size_t num_features() const = 0;
  virtual double predict_proba(std::span<const double> x) const = 0;

  int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
};

// Row-parallel batch scoring (OpenMP). Output order matches `rows`.
std::vector<double> predict_proba_batch(const ProbabilityModel& model,
                                        std::span<const std::vector<double>> rows);
// Reference loop for the parallel kernel above.
std::vector<double> predict_proba_batch_serial(const ProbabilityModel& model,
                                               std::span<const std::vector<double>> rows);

std::vector<int> predict_batch(const ProbabilityModel& model,
                               std::span<const std::vector<double>> rows);

}  // namespace riskscope
