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

#include "riskscope/gbdt.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "riskscope/error.h"

namespace riskscope {
namespace {

using nlohmann::json;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t n_left = 0;
};

// Grows one least-squares regression tree on the gradient residuals with
// Newton-step leaf values sum(r) / sum(h).
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::span<const double> residual,
              std::span<const double> hessian, const BoostingConfig& config)
      : data_(data), residual_(residual), hessian_(hessian), config_(config) {}

  RegressionTree build(std::vector<std::size_t> samples) {
    RegressionTree tree;
    tree.weight = config_.learning_rate;
    grow(tree, std::move(samples), 0);
    return tree;
  }

 private:
  double value(std::size_t row, int feature) const { return data_[row].values[feature]; }

  BestSplit find_split(const std::vector<std::size_t>& samples) const {
    BestSplit best;
    const std::size_t n = samples.size();
    double total = 0.0;
    for (auto s : samples) total += residual_[s];
    const double parent = total * total / static_cast<double>(n);

    std::vector<std::size_t> order(samples);
    for (std::size_t f = 0; f < data_.schema().size(); ++f) {
      const int feature = static_cast<int>(f);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return value(a, feature) < value(b, feature);
      });
      double left_sum = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        left_sum += residual_[order[i - 1]];
        const double lo = value(order[i - 1], feature);
        const double hi = value(order[i], feature);
        if (!(lo < hi)) continue;
        if (i < config_.min_samples_leaf || n - i < config_.min_samples_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(i) +
                            right_sum * right_sum / static_cast<double>(n - i) - parent;
        if (gain > best.gain + 1e-12) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = {feature, mid, gain, i};
        }
      }
    }
    return best;
  }

  double leaf_value(const std::vector<std::size_t>& samples) const {
    double num = 0.0;
    double den = 0.0;
    for (auto s : samples) {
      num += residual_[s];
      den += hessian_[s];
    }
    return den > 1e-12 ? num / den : 0.0;
  }

  int grow(RegressionTree& tree, std::vector<std::size_t> samples, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[id].value = leaf_value(samples);
    if (depth >= config_.max_depth || samples.size() < 2 * config_.min_samples_leaf) return id;

    const BestSplit split = find_split(samples);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto s : samples) {
      (value(s, split.feature) <= split.threshold ? left : right).push_back(s);
    }
    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    const int l = grow(tree, std::move(left), depth + 1);
    const int r = grow(tree, std::move(right), depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  const Dataset& data_;
  std::span<const double> residual_;
  std::span<const double> hessian_;
  const BoostingConfig& config_;
};

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  }
  return {{"weight", tree.weight}, {"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json(const json& doc, std::size_t d) {
  RegressionTree tree;
  tree.weight = doc.at("weight").get<double>();
  for (const auto& n : doc.at("nodes")) {
    if (!n.is_array() || n.size() != 5) throw ConfigError("tree node must be a 5-element array");
    tree.nodes.push_back(TreeNode{n[0].get<int>(), n[1].get<double>(), n[2].get<int>(),
                                  n[3].get<int>(), n[4].get<double>()});
  }
  if (tree.nodes.empty()) throw ConfigError("tree has no nodes");
  const int count = static_cast<int>(tree.nodes.size());
  for (int i = 0; i < count; ++i) {
    const auto& n = tree.nodes[i];
    if (n.is_leaf()) continue;
    if (static_cast<std::size_t>(n.feature) >= d) throw ConfigError("tree split on unknown feature");
    // Children always follow their parent, which rules out cycles.
    if (n.left <= i || n.right <= i || n.left >= count || n.right >= count) {
      throw ConfigError("tree node has invalid child index");
    }
  }
  return tree;
}

}  // namespace

void BoostingConfig::validate() const {
  if (n_trees < 0) throw InvalidArgument("n_trees must be >= 0");
  if (max_depth < 0) throw InvalidArgument("max_depth must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
}

double RegressionTree::evaluate(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].value;
}

double RiskModel::raw_score(std::span<const double> x) const {
  double score = base_score_;
  for (const auto& t : trees_) score += t.weight * t.evaluate(x);
  return score;
}

double RiskModel::predict_proba(std::span<const double> x) const {
  validate_instance(x, num_features());
  return sigmoid(raw_score(x));
}

json RiskModel::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(tree_to_json(t));
  return {
      {"version", kModelFormatVersion},
      {"config",
       {{"n_trees", config_.n_trees},
        {"max_depth", config_.max_depth},
        {"learning_rate", config_.learning_rate},
        {"seed", config_.seed},
        {"min_samples_leaf", config_.min_samples_leaf},
        {"loss", "logistic"}}},
      {"trees", std::move(trees)},
      {"metadata",
       {{"feature_names", metadata_.feature_names},
        {"base_score", base_score_},
        {"base_rate", metadata_.base_rate},
        {"holdout", metadata_.holdout},
        {"split_seed", metadata_.split_seed},
        {"train_size", metadata_.train_size},
        {"test_size", metadata_.test_size},
        {"test_accuracy", metadata_.test_accuracy}}},
  };
}

RiskModel RiskModel::from_json(const json& doc) {
  try {
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw ConfigError("unsupported model format version");
    }
    RiskModel m;
    const auto& c = doc.at("config");
    if (c.value("loss", std::string("logistic")) != "logistic") {
      throw ConfigError("unsupported loss");
    }
    m.config_.n_trees = c.at("n_trees").get<int>();
    m.config_.max_depth = c.at("max_depth").get<int>();
    m.config_.learning_rate = c.at("learning_rate").get<double>();
    m.config_.seed = c.at("seed").get<std::uint64_t>();
    m.config_.min_samples_leaf = c.value("min_samples_leaf", std::size_t{1});
    m.config_.validate();
    const auto& md = doc.at("metadata");
    m.metadata_.feature_names = md.at("feature_names").get<std::vector<std::string>>();
    if (m.metadata_.feature_names.empty()) throw ConfigError("model has no feature names");
    m.base_score_ = md.at("base_score").get<double>();
    m.metadata_.base_rate = md.value("base_rate", 0.0);
    m.metadata_.holdout = md.value("holdout", 0.0);
    m.metadata_.split_seed = md.value("split_seed", std::uint64_t{0});
    m.metadata_.train_size = md.value("train_size", std::size_t{0});
    m.metadata_.test_size = md.value("test_size", std::size_t{0});
    m.metadata_.test_accuracy = md.value("test_accuracy", 0.0);
    for (const auto& t : doc.at("trees")) {
      m.trees_.push_back(tree_from_json(t, m.metadata_.feature_names.size()));
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  }
}

void RiskModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path.string());
  out << to_json().dump(2) << '\n';
}

RiskModel RiskModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("model file is not valid JSON: " + std::string(e.what()));
  }
  return from_json(doc);
}

SplitIndices stratified_split(const Dataset& dataset, double holdout, std::uint64_t seed) {
  if (!(holdout > 0.0 && holdout < 1.0)) throw InvalidArgument("holdout must be in (0, 1)");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& label = dataset[i].label;
    if (!label) throw InvalidArgument("record " + std::to_string(dataset[i].id) + " has no label");
    by_class[*label].push_back(i);
  }
  std::mt19937_64 rng(seed);
  SplitIndices out;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(holdout * static_cast<double>(members.size())));
    out.test.insert(out.test.end(), members.begin(), members.begin() + n_test);
    out.train.insert(out.train.end(), members.begin() + n_test, members.end());
  }
  if (out.train.empty() || out.test.empty()) {
    throw DegenerateInput("split leaves an empty train or test partition");
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

RiskModel fit_boosting(const Dataset& dataset, std::span<const std::size_t> rows,
                       const BoostingConfig& config) {
  config.validate();
  if (rows.size() < 2) throw DegenerateInput("training needs at least 2 records");
  std::vector<double> y(dataset.size(), 0.0);
  double positives = 0.0;
  for (auto r : rows) {
    if (!dataset[r].label) throw InvalidArgument("training record without label");
    y[r] = *dataset[r].label;
    positives += y[r];
  }
  if (positives == 0.0 || positives == static_cast<double>(rows.size())) {
    throw DegenerateInput("training data contains a single class");
  }

  RiskModel model;
  model.config_ = config;
  model.metadata_.feature_names = dataset.schema().names();
  model.metadata_.train_size = rows.size();
  const double base_rate = positives / static_cast<double>(rows.size());
  model.metadata_.base_rate = base_rate;
  model.base_score_ = std::log(base_rate / (1.0 - base_rate));

  std::vector<double> score(dataset.size(), model.base_score_);
  std::vector<double> residual(dataset.size(), 0.0);
  std::vector<double> hessian(dataset.size(), 0.0);
  std::vector<std::size_t> samples(rows.begin(), rows.end());
  for (int t = 0; t < config.n_trees; ++t) {
    for (auto r : rows) {
      const double p = sigmoid(score[r]);
      residual[r] = y[r] - p;
      hessian[r] = p * (1.0 - p);
    }
    TreeBuilder builder(dataset, residual, hessian, config);
    RegressionTree tree = builder.build(samples);
    for (auto r : rows) score[r] += tree.weight * tree.evaluate(dataset[r].values);
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

double accuracy(const ProbabilityModel& model, const Dataset& dataset,
                std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  std::size_t correct = 0;
  for (auto r : rows) {
    if (dataset[r].label && model.predict(dataset[r].values) == *dataset[r].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

RiskModel train(const Dataset& dataset, const BoostingConfig& config, const SplitConfig& split) {
  if (dataset.size() < 2) throw DegenerateInput("training needs at least 2 records");
  const SplitIndices parts = stratified_split(dataset, split.holdout, split.seed);
  RiskModel model = fit_boosting(dataset, parts.train, config);
  model.metadata_.holdout = split.holdout;
  model.metadata_.split_seed = split.seed;
  model.metadata_.test_size = parts.test.size();
  model.metadata_.test_accuracy = accuracy(model, dataset, parts.test);
  return model;
}

}  // namespace riskscope
