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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "riskscope/dataset.h"
#include "riskscope/model.h"

namespace riskscope {

struct BoostingConfig {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  std::uint64_t seed = 42;
  std::size_t min_samples_leaf = 1;

  void validate() const;
};

struct SplitConfig {
  double holdout = 0.4;
  std::uint64_t seed = 42;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double weight = 1.0;

  double evaluate(std::span<const double> x) const;
};

struct TrainingMetadata {
  std::vector<std::string> feature_names;
  double holdout = 0.0;
  std::uint64_t split_seed = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double base_rate = 0.0;
  double test_accuracy = 0.0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Gradient-boosted regression trees on the logistic loss.
//
// The raw score is base_score + sum(tree.weight * tree(x)); the probability
// is its logistic transform. Split search is an exhaustive scan over the
// midpoints of sorted unique feature values, so training is deterministic.
class RiskModel final : public ProbabilityModel {
 public:
  RiskModel() = default;

  std::size_t num_features() const override { return metadata_.feature_names.size(); }
  // Throws InvalidArgument on a length mismatch or non-finite input.
  double predict_proba(std::span<const double> x) const override;
  double raw_score(std::span<const double> x) const;

  const BoostingConfig& config() const { return config_; }
  const TrainingMetadata& metadata() const { return metadata_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  double base_score() const { return base_score_; }

  nlohmann::json to_json() const;
  static RiskModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static RiskModel load(const std::filesystem::path& path);

 private:
  friend RiskModel fit_boosting(const Dataset&, std::span<const std::size_t>,
                                const BoostingConfig&);
  friend RiskModel train(const Dataset&, const BoostingConfig&, const SplitConfig&);

  BoostingConfig config_;
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
  TrainingMetadata metadata_;
};

inline constexpr int kModelFormatVersion = 1;

// Per-class shuffle then holdout of round(fraction * class_count) records.
// Throws InvalidArgument for a fraction outside (0,1) and DegenerateInput
// when either partition would be empty.
SplitIndices stratified_split(const Dataset& dataset, double holdout, std::uint64_t seed);

// Fits on the given rows only. Throws DegenerateInput unless both classes
// are present.
RiskModel fit_boosting(const Dataset& dataset, std::span<const std::size_t> rows,
                       const BoostingConfig& config);

// Stratified split, fit on the training partition, record holdout accuracy.
RiskModel train(const Dataset& dataset, const BoostingConfig& config, const SplitConfig& split);

double accuracy(const ProbabilityModel& model, const Dataset& dataset,
                std::span<const std::size_t> rows);

}  // namespace riskscope
