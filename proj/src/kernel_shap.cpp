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

#include "riskscope/kernel_shap.h"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "riskscope/error.h"

namespace riskscope {
namespace {

void check_inputs(const ProbabilityModel& model, std::span<const double> x,
                  std::span<const std::vector<double>> background) {
  const std::size_t d = model.num_features();
  validate_instance(x, d);
  if (background.empty()) throw InvalidArgument("KernelSHAP background must not be empty");
  if (d > kMaxExactShapFeatures) {
    throw InvalidArgument("exact coalition enumeration supports at most " +
                          std::to_string(kMaxExactShapFeatures) + " features");
  }
  for (const auto& b : background) {
    if (b.size() != d) throw InvalidArgument("background row length does not match the model");
  }
}

double coalition_value(const ProbabilityModel& model, std::span<const double> x,
                       std::span<const std::vector<double>> background, std::uint32_t coalition,
                       std::vector<double>& point) {
  double sum = 0.0;
  for (const auto& b : background) {
    for (std::size_t j = 0; j < x.size(); ++j) point[j] = (coalition >> j) & 1U ? x[j] : b[j];
    sum += model.predict_proba(point);
  }
  return sum / static_cast<double>(background.size());
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

std::vector<double> coalition_values(const ProbabilityModel& model, std::span<const double> x,
                                     std::span<const std::vector<double>> background) {
  check_inputs(model, x, background);
  const std::size_t d = x.size();
  std::vector<double> values(std::size_t{1} << d);
  const auto count = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel
  {
    std::vector<double> point(d);
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t s = 0; s < count; ++s) {
      values[s] = coalition_value(model, x, background, static_cast<std::uint32_t>(s), point);
    }
  }
  return values;
}

std::vector<double> coalition_values_serial(const ProbabilityModel& model,
                                            std::span<const double> x,
                                            std::span<const std::vector<double>> background) {
  check_inputs(model, x, background);
  const std::size_t d = x.size();
  std::vector<double> values(std::size_t{1} << d);
  std::vector<double> point(d);
  for (std::size_t s = 0; s < values.size(); ++s) {
    values[s] = coalition_value(model, x, background, static_cast<std::uint32_t>(s), point);
  }
  return values;
}

std::vector<double> shapley_from_coalitions(std::span<const double> values, std::size_t d) {
  if (d == 0 || values.size() != (std::size_t{1} << d)) {
    throw InvalidArgument("coalition table must have 2^d entries");
  }
  const std::uint32_t full = (1U << d) - 1U;
  const double v_empty = values[0];
  const double total = values[full] - v_empty;
  std::vector<double> phi(d, 0.0);
  if (d == 1) {
    phi[0] = total;
    return phi;
  }

  // phi_last = total - sum(phi_0..phi_{d-2}); regress on u_i = z_i - z_last.
  const std::size_t m = d - 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u(m);
  for (std::uint32_t s = 1; s < full; ++s) {
    const auto size = static_cast<std::size_t>(std::popcount(s));
    const double weight = static_cast<double>(d - 1) /
                          (binomial(d, size) * static_cast<double>(size) *
                           static_cast<double>(d - size));
    const double z_last = (s >> (d - 1)) & 1U ? 1.0 : 0.0;
    for (std::size_t i = 0; i < m; ++i) u(i) = ((s >> i) & 1U ? 1.0 : 0.0) - z_last;
    const double target = values[s] - v_empty - z_last * total;
    gram.noalias() += weight * u * u.transpose();
    rhs.noalias() += weight * target * u;
  }
  const Eigen::VectorXd solved = gram.ldlt().solve(rhs);
  double partial = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    phi[i] = solved(i);
    partial += solved(i);
  }
  phi[m] = total - partial;
  return phi;
}

Attribution explain_kernel_shap(const ProbabilityModel& model, std::span<const double> x,
                                std::span<const std::vector<double>> background) {
  const auto values = coalition_values(model, x, background);
  Attribution out;
  out.phi = shapley_from_coalitions(values, x.size());
  out.method_id = "kernel_shap";
  out.base_value = values.front();
  return out;
}

std::vector<std::vector<double>> sample_background(const Dataset& dataset,
                                                   std::span<const std::size_t> rows,
                                                   std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> pool(rows.begin(), rows.end());
  if (pool.empty()) {
    pool.resize(dataset.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(n, pool.size()));
  std::sort(pool.begin(), pool.end());
  std::vector<std::vector<double>> out;
  out.reserve(pool.size());
  for (auto r : pool) out.push_back(dataset[r].values);
  return out;
}

}  // namespace riskscope
