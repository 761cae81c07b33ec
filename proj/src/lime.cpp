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

#include "riskscope/lime.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include "riskscope/error.h"
#include "riskscope/random.h"

namespace riskscope {

Attribution explain_lime(const ProbabilityModel& model, const FeatureScaling& scaling,
                         std::span<const double> x, const LimeConfig& cfg) {
  const std::size_t d = model.num_features();
  validate_instance(x, d);
  if (scaling.size() != d) throw InvalidArgument("scaling length does not match the model");
  if (!(cfg.kernel_width > 0.0)) throw InvalidArgument("kernel width must be > 0");
  if (cfg.ridge < 0.0) throw InvalidArgument("ridge must be >= 0");
  const std::size_t n = cfg.n_samples;

  // Offsets from x in z units.
  Eigen::MatrixXd offsets(n, d);
  std::mt19937_64 rng(derive_seed(cfg.seed, kStreamLime));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) offsets(i, j) = normal(rng);
  }

  Eigen::VectorXd y(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> point(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < d; ++j) point[j] = x[j] + offsets(i, j) * scaling.scale[j];
      y(i) = model.predict_proba(point);
    }
  }

  // exp(-dist^2 / width_eff^2), normalized so the largest weight is 1.
  const double width = cfg.kernel_width * std::sqrt(static_cast<double>(d));
  Eigen::VectorXd log_w(n);
  for (std::size_t i = 0; i < n; ++i) log_w(i) = -offsets.row(i).squaredNorm() / (width * width);
  const double max_log_w = n > 0 ? log_w.maxCoeff() : 0.0;
  Eigen::VectorXd w = (log_w.array() - max_log_w).exp().matrix();

  const double w_sum = w.sum();
  if (n < 2 || !(w_sum > 0.0)) throw DegenerateInput("LIME needs at least two weighted samples");
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = w.dot(offsets.col(j)) / w_sum;
    const double var = w.dot((offsets.col(j).array() - mean).square().matrix()) / w_sum;
    if (!(var > 1e-12)) {
      throw DegenerateInput("LIME design has no variation in feature " + std::to_string(j));
    }
  }

  Eigen::MatrixXd design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = offsets;
  const Eigen::MatrixXd weighted = design.array().colwise() * w.array();
  Eigen::MatrixXd gram = weighted.transpose() * design;
  for (std::size_t j = 1; j <= d; ++j) gram(j, j) += cfg.ridge;
  const Eigen::VectorXd rhs = weighted.transpose() * y;
  const Eigen::VectorXd beta = gram.ldlt().solve(rhs);
  if (!beta.allFinite()) throw DegenerateInput("LIME surrogate solve did not converge");

  Attribution out;
  out.phi.assign(beta.data() + 1, beta.data() + 1 + d);
  char id[32];
  std::snprintf(id, sizeof(id), "lime_%.2f", cfg.kernel_width);
  out.method_id = id;
  return out;
}

Attribution explain_lime(const ProbabilityModel& model, const Dataset& dataset,
                         std::span<const double> x, const LimeConfig& cfg) {
  return explain_lime(model, FeatureScaling::from_dataset(dataset), x, cfg);
}

}  // namespace riskscope
