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

#include "riskscope/model.h"

namespace riskscope {

std::vector<double> predict_proba_batch(const ProbabilityModel& model,
                                        std::span<const std::vector<double>> rows) {
  std::vector<double> out(rows.size());
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = model.predict_proba(rows[i]);
  return out;
}

std::vector<double> predict_proba_batch_serial(const ProbabilityModel& model,
                                               std::span<const std::vector<double>> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(model.predict_proba(row));
  return out;
}

std::vector<int> predict_batch(const ProbabilityModel& model,
                               std::span<const std::vector<double>> rows) {
  auto proba = predict_proba_batch(model, rows);
  std::vector<int> out(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) out[i] = proba[i] >= 0.5 ? 1 : 0;
  return out;
}

}  // namespace riskscope
