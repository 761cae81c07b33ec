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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "riskscope/error.h"
#include "riskscope/evidence.h"
#include "riskscope/gbdt.h"
#include "riskscope/ranges.h"
#include "test_support.h"

namespace riskscope {
namespace {

// Type-7 quantile written as interpolation over the points ((i)/(n-1), x_i).
double lerp_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const double step = 1.0 / static_cast<double>(v.size() - 1);
  std::size_t i = 0;
  while (i + 1 < v.size() - 1 && static_cast<double>(i + 1) * step <= q) ++i;
  const double t = (q - static_cast<double>(i) * step) / step;
  return std::lerp(v[i], v[i + 1], t);
}

TEST(Percentile, KnownValues) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_NEAR(percentile_sorted(v, 0.25), 25.75, 1e-12);
  EXPECT_NEAR(percentile_sorted(v, 0.75), 75.25, 1e-12);
  const std::vector<double> small{1, 1, 2, 3, 4, 5, 6, 9};
  EXPECT_NEAR(percentile_sorted(small, 0.25), 1.75, 1e-12);
  EXPECT_NEAR(percentile_sorted(small, 0.75), 5.25, 1e-12);
  EXPECT_EQ(percentile_sorted(small, 0.0), 1.0);
  EXPECT_EQ(percentile_sorted(small, 1.0), 9.0);
}

TEST(Percentile, MatchesInterpolationOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> len(1, 60);
  std::normal_distribution<double> z(10.0, 4.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(len(rng));
    for (auto& x : v) x = z(rng);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      EXPECT_NEAR(percentile_sorted(sorted, q), lerp_quantile(v, q), 1e-9);
    }
  }
}

TEST(Percentile, HalfContainedWhenQuartilesLandOnSamples) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t n : {5u, 9u, 41u, 101u}) {
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    std::sort(v.begin(), v.end());
    const double lo = percentile_sorted(v, 0.25);
    const double hi = percentile_sorted(v, 0.75);
    const auto inside = std::count_if(v.begin(), v.end(), [&](double x) { return lo <= x && x <= hi; });
    EXPECT_GE(2 * static_cast<std::size_t>(inside), n);
  }
}

TEST(Percentile, SingleValueIsDegenerateInterval) {
  const std::vector<double> one{4.2};
  EXPECT_EQ(percentile_sorted(one, 0.25), 4.2);
  EXPECT_EQ(percentile_sorted(one, 0.75), 4.2);
}

TEST(Overlap, Examples) {
  EXPECT_NEAR(range_overlap({0, 2}, {1, 3}), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(range_overlap({0, 1}, {2, 3}), 0.0);
  EXPECT_EQ(range_overlap({0, 1}, {1, 2}), 0.0);
  EXPECT_EQ(range_overlap({1, 4}, {1, 4}), 1.0);
  EXPECT_NEAR(range_overlap({0, 10}, {2, 4}), 0.2, 1e-15);
  EXPECT_EQ(range_overlap({3, 3}, {1, 4}), 1.0);
  EXPECT_EQ(range_overlap({5, 5}, {1, 4}), 0.0);
  EXPECT_EQ(range_overlap({2, 2}, {2, 2}), 1.0);
}

TEST(Overlap, SymmetricAndBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 500; ++trial) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const Interval x{std::min(a, b), std::max(a, b)};
    const Interval y{std::min(c, d), std::max(c, d)};
    const double o = range_overlap(x, y);
    EXPECT_EQ(o, range_overlap(y, x));
    EXPECT_GE(o, 0.0);
    EXPECT_LE(o, 1.0);
  }
}

class RangesOnPima : public ::testing::Test {
 protected:
  void SetUp() override {
    data = std::make_unique<Dataset>(testing::pima_dataset());
    model = std::make_unique<RiskModel>(RiskModel::load(testing::source_path("models/pima_gbdt.json")));
    kb = KnowledgeBase::load(testing::source_path("config/kb.json"));
    predictions = predict_batch(*model, testing::feature_rows(*data));
  }
  std::unique_ptr<Dataset> data;
  std::unique_ptr<RiskModel> model;
  KnowledgeBase kb;
  std::vector<int> predictions;
};

TEST_F(RangesOnPima, IntervalMatchesOracleAndHoldsHalfTheClass) {
  const std::vector<std::string> features = data->schema().names();
  for (int cls : {0, 1}) {
    const auto ranges = compute_ai_ranges(*data, predictions, cls, features);
    for (std::size_t j = 0; j < features.size(); ++j) {
      std::vector<double> col;
      for (std::size_t i = 0; i < data->size(); ++i) {
        if (predictions[i] == cls) col.push_back((*data)[i].values[j]);
      }
      const auto& r = ranges.at(features[j]);
      EXPECT_EQ(r.n, col.size());
      EXPECT_FALSE(r.low_confidence);
      EXPECT_NEAR(r.low, lerp_quantile(col, 0.25), 1e-9);
      EXPECT_NEAR(r.high, lerp_quantile(col, 0.75), 1e-9);
      const auto inside = std::count_if(col.begin(), col.end(),
                                        [&](double v) { return r.low <= v && v <= r.high; });
      // sample positions covered by [0.25 (n-1), 0.75 (n-1)]; ties only add to it
      const double m = static_cast<double>(col.size() - 1);
      const auto covered = static_cast<long>(std::floor(0.75 * m) - std::ceil(0.25 * m)) + 1;
      EXPECT_GE(inside, covered) << features[j];
      EXPECT_GE(static_cast<double>(inside) / static_cast<double>(col.size()),
                0.5 - 1.0 / static_cast<double>(col.size()))
          << features[j];
    }
  }
}

TEST_F(RangesOnPima, GlucoseOverlapsDiagnosticInterval) {
  const std::vector<std::string> features{"Glucose"};
  const auto report = build_range_report(*data, predictions, 1, features, kb);
  ASSERT_EQ(report.features.size(), 1u);
  const auto& g = report.features[0];
  ASSERT_TRUE(g.sci.has_value());
  EXPECT_EQ(*g.sci_kind, "diagnostic");
  EXPECT_EQ(*g.sci, (Interval{140, 199}));
  ASSERT_TRUE(g.overlap.has_value());
  EXPECT_GT(*g.overlap, 0.0);
  const double inter = std::max(0.0, std::min(g.ai.high, 199.0) - std::max(g.ai.low, 140.0));
  const double uni = std::max(g.ai.high, 199.0) - std::min(g.ai.low, 140.0);
  EXPECT_NEAR(*g.overlap, inter / uni, 1e-12);

  const auto healthy = build_range_report(*data, predictions, 0, features, kb);
  EXPECT_EQ(*healthy.features[0].sci_kind, "normal");
}

TEST_F(RangesOnPima, FeatureWithoutKbRangeHasNoOverlap) {
  const std::vector<std::string> features{"Pregnancies", "Age"};
  const auto report = build_range_report(*data, predictions, 1, features, kb);
  for (const auto& e : report.features) {
    EXPECT_FALSE(e.sci.has_value());
    EXPECT_FALSE(e.overlap.has_value());
    EXPECT_GT(e.ai.n, 0u);
  }
  const auto json = report.to_json();
  EXPECT_FALSE(json["features"][0].contains("overlap"));
  EXPECT_FALSE(json["features"][0].contains("sci_low"));
}

TEST_F(RangesOnPima, ZeroFeaturesGivesEmptyReport) {
  const auto report = build_range_report(*data, predictions, 1, {}, kb);
  EXPECT_TRUE(report.features.empty());
}

TEST_F(RangesOnPima, EmptyClassIsAnError) {
  const std::vector<int> all_healthy(data->size(), 0);
  const std::vector<std::string> features{"Glucose"};
  EXPECT_THROW(compute_ai_ranges(*data, all_healthy, 1, features), DegenerateInput);
}

TEST_F(RangesOnPima, UnknownFeatureIsAnError) {
  const std::vector<std::string> features{"Cholesterol"};
  EXPECT_ANY_THROW(compute_ai_ranges(*data, predictions, 1, features));
}

TEST_F(RangesOnPima, InvariantUnderRowPermutation) {
  std::vector<std::size_t> order(data->size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(4));
  std::vector<PatientRecord> rows;
  std::vector<int> preds;
  for (auto i : order) {
    rows.push_back((*data)[i]);
    preds.push_back(predictions[i]);
  }
  const Dataset shuffled(data->schema(), std::move(rows));
  const auto features = data->schema().names();
  const auto a = compute_ai_ranges(*data, predictions, 1, features);
  const auto b = compute_ai_ranges(shuffled, preds, 1, features);
  for (const auto& f : features) {
    EXPECT_EQ(a.at(f).low, b.at(f).low);
    EXPECT_EQ(a.at(f).high, b.at(f).high);
  }
}

TEST_F(RangesOnPima, WideningPercentilesNestsIntervals) {
  const auto features = data->schema().names();
  const auto inner = compute_ai_ranges(*data, predictions, 1, features, 0.25, 0.75);
  const auto outer = compute_ai_ranges(*data, predictions, 1, features, 0.10, 0.90);
  for (const auto& f : features) {
    EXPECT_LE(outer.at(f).low, inner.at(f).low);
    EXPECT_GE(outer.at(f).high, inner.at(f).high);
  }
}

TEST(Ranges, SmallClassIsFlaggedLowConfidence) {
  const auto data = testing::random_dataset(testing::numbered_schema(2), 30, 1);
  std::vector<int> preds(30, 0);
  for (int i = 0; i < 5; ++i) preds[i] = 1;
  const std::vector<std::string> features{"f0"};
  const auto r = compute_ai_ranges(data, preds, 1, features);
  EXPECT_TRUE(r.at("f0").low_confidence);
  EXPECT_EQ(r.at("f0").n, 5u);
  EXPECT_THROW(compute_ai_ranges(data, preds, 1, features, 0.8, 0.2), InvalidArgument);
}

}  // namespace
}  // namespace riskscope
