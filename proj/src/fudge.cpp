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

#include "riskscope/fudge.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "riskscope/error.h"
#include "riskscope/random.h"

namespace riskscope {
namespace {

void check_inputs(const ProbabilityModel& model, std::span<const double> x,
                  const FeatureMask& mask, const FeatureScaling& scaling,
                  const NoiseMatrix& noise) {
  const std::size_t d = model.num_features();
  if (x.size() != d) throw InvalidArgument("instance length does not match the model");
  if (mask.size() != d) throw InvalidArgument("mask length does not match the model");
  if (scaling.size() != d) throw InvalidArgument("scaling length does not match the model");
  if (noise.cols() != d) throw InvalidArgument("noise width does not match the model");
}

// |f(x) - f(x + eps_n * m)| with eps_n given in z units.
double perturbation_term(const ProbabilityModel& model, std::span<const double> x, double fx,
                         const FeatureMask& mask, const FeatureScaling& scaling,
                         std::span<const double> eps, std::vector<double>& buffer) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    buffer[j] = mask[j] ? x[j] + eps[j] * scaling.scale[j] : x[j];
  }
  return std::abs(fx - model.predict_proba(buffer));
}

}  // namespace

void PerturbationConfig::validate() const {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
}

FeatureMask::FeatureMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw InvalidArgument("mask entries must be 0 or 1");
  }
}

std::size_t FeatureMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

NoiseMatrix::NoiseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw InvalidArgument("noise buffer has the wrong size");
}

NoiseMatrix NoiseMatrix::draw(std::size_t rows, std::size_t cols, double sigma,
                              std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, kStreamFudgeNoise));
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> data(rows * cols);
  for (auto& v : data) v = normal(rng);
  return NoiseMatrix(rows, cols, std::move(data));
}

double fudge_from_noise(const ProbabilityModel& model, std::span<const double> x,
                        const FeatureMask& mask, const FeatureScaling& scaling,
                        const NoiseMatrix& noise) {
  check_inputs(model, x, mask, scaling, noise);
  if (mask.count() == 0 || noise.rows() == 0) return 0.0;
  const double fx = model.predict_proba(x);
  std::vector<double> terms(noise.rows());
  const auto n = static_cast<std::ptrdiff_t>(noise.rows());
#pragma omp parallel
  {
    std::vector<double> buffer(x.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      terms[i] = perturbation_term(model, x, fx, mask, scaling, noise.row(i), buffer);
    }
  }
  // Reduce in draw order so the result does not depend on the thread count.
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum / static_cast<double>(noise.rows());
}

double fudge_from_noise_serial(const ProbabilityModel& model, std::span<const double> x,
                               const FeatureMask& mask, const FeatureScaling& scaling,
                               const NoiseMatrix& noise) {
  check_inputs(model, x, mask, scaling, noise);
  if (mask.count() == 0 || noise.rows() == 0) return 0.0;
  const double fx = model.predict_proba(x);
  std::vector<double> buffer(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < noise.rows(); ++i) {
    sum += perturbation_term(model, x, fx, mask, scaling, noise.row(i), buffer);
  }
  return sum / static_cast<double>(noise.rows());
}

double fudge_score(const ProbabilityModel& model, std::span<const double> x,
                   const FeatureMask& mask, const FeatureScaling& scaling,
                   const PerturbationConfig& cfg) {
  cfg.validate();
  const auto noise = NoiseMatrix::draw(cfg.n_samples, x.size(), cfg.sigma, cfg.seed);
  return fudge_from_noise(model, x, mask, scaling, noise);
}

double fudge_score_serial(const ProbabilityModel& model, std::span<const double> x,
                          const FeatureMask& mask, const FeatureScaling& scaling,
                          const PerturbationConfig& cfg) {
  cfg.validate();
  const auto noise = NoiseMatrix::draw(cfg.n_samples, x.size(), cfg.sigma, cfg.seed);
  return fudge_from_noise_serial(model, x, mask, scaling, noise);
}

std::vector<std::size_t> rank_by_magnitude(std::span<const double> phi) {
  std::vector<std::size_t> order(phi.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(phi[a]) > std::abs(phi[b]);
  });
  return order;
}

FeatureMask top_k_mask(std::span<const double> phi, std::size_t k) {
  if (k < 1 || k > phi.size()) {
    throw InvalidArgument("k must be in [1, " + std::to_string(phi.size()) + "]");
  }
  const auto order = rank_by_magnitude(phi);
  std::vector<std::uint8_t> bits(phi.size(), 0);
  for (std::size_t i = 0; i < k; ++i) bits[order[i]] = 1;
  return FeatureMask(std::move(bits));
}

FaithfulnessResult faithfulness(const ProbabilityModel& model, std::span<const double> x,
                                std::span<const double> phi, std::size_t top_k,
                                const FeatureScaling& scaling, const PerturbationConfig& cfg) {
  cfg.validate();
  if (phi.size() != x.size()) throw InvalidArgument("attribution length does not match instance");
  if (top_k < 1 || top_k > phi.size()) throw InvalidArgument("K must be in [1, d]");
  const auto noise = NoiseMatrix::draw(cfg.n_samples, x.size(), cfg.sigma, cfg.seed);
  FaithfulnessResult out;
  out.curve.reserve(top_k);
  for (std::size_t k = 1; k <= top_k; ++k) {
    out.curve.push_back(fudge_from_noise(model, x, top_k_mask(phi, k), scaling, noise));
    out.score += out.curve.back();
  }
  return out;
}

double jaccard_rankings(std::span<const double> phi_a, std::span<const double> phi_b,
                        std::size_t top_k) {
  if (phi_a.size() != phi_b.size()) throw InvalidArgument("attributions differ in length");
  const auto a = top_k_mask(phi_a, top_k);
  const auto b = top_k_mask(phi_b, top_k);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace riskscope
