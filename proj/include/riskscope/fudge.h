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

#include "riskscope/model.h"
#include "riskscope/scaling.h"

namespace riskscope {

struct PerturbationConfig {
  double sigma = 0.05;  // noise std in z units
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

class FeatureMask {
 public:
  FeatureMask() = default;
  explicit FeatureMask(std::vector<std::uint8_t> bits);
  static FeatureMask zeros(std::size_t d) { return FeatureMask(std::vector<std::uint8_t>(d, 0)); }

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  std::size_t count() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool operator==(const FeatureMask&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// N x d Gaussian draws, row-major. Depends only on (N, d, sigma, seed), so
// every mask evaluated with the same config sees the same noise.
class NoiseMatrix {
 public:
  static NoiseMatrix draw(std::size_t rows, std::size_t cols, double sigma, std::uint64_t seed);
  NoiseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t n) const {
    return {data_.data() + n * cols_, cols_};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Mean absolute change in model output when the masked features of x are
// perturbed by the given noise:  (1/N) sum_n |f(x) - f(x + eps_n * m)|.
// The OpenMP kernel stores per-draw terms and reduces them in draw order, so
// its result is bit-identical to the serial reference.
double fudge_from_noise(const ProbabilityModel& model, std::span<const double> x,
                        const FeatureMask& mask, const FeatureScaling& scaling,
                        const NoiseMatrix& noise);
double fudge_from_noise_serial(const ProbabilityModel& model, std::span<const double> x,
                               const FeatureMask& mask, const FeatureScaling& scaling,
                               const NoiseMatrix& noise);

double fudge_score(const ProbabilityModel& model, std::span<const double> x,
                   const FeatureMask& mask, const FeatureScaling& scaling,
                   const PerturbationConfig& cfg);
double fudge_score_serial(const ProbabilityModel& model, std::span<const double> x,
                          const FeatureMask& mask, const FeatureScaling& scaling,
                          const PerturbationConfig& cfg);

// Exactly k ones at the k largest |phi_i|; equal magnitudes go to the lower index.
FeatureMask top_k_mask(std::span<const double> phi, std::size_t k);

// Feature indices ordered by decreasing |phi|, lower index first on ties.
std::vector<std::size_t> rank_by_magnitude(std::span<const double> phi);

struct FaithfulnessResult {
  double score = 0.0;
  std::vector<double> curve;  // fudge at k = 1..K
};

// Area under the fudge curve of the top-k masks, k = 1..K.
FaithfulnessResult faithfulness(const ProbabilityModel& model, std::span<const double> x,
                                std::span<const double> phi, std::size_t top_k,
                                const FeatureScaling& scaling, const PerturbationConfig& cfg);

// |top-K(a) intersect top-K(b)| / |top-K(a) union top-K(b)|.
double jaccard_rankings(std::span<const double> phi_a, std::span<const double> phi_b,
                        std::size_t top_k);

}  // namespace riskscope
