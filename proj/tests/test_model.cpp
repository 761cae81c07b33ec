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
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "riskscope/dataset.h"
#include "riskscope/error.h"
#include "riskscope/gbdt.h"
#include "riskscope/model.h"
#include "test_support.h"

namespace riskscope {
namespace {

using testing::pima_dataset;
using testing::source_path;

constexpr const char* kHeader =
    "Pregnancies,Glucose,BloodPressure,SkinThickness,Insulin,BMI,DiabetesPedigreeFunction,Age,"
    "Outcome\n";

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, FeatureSchema::pima());
}

// 200 records, label = Glucose > 120, other columns noise.
Dataset glucose_rule_dataset() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> glucose(60.0, 200.0);
  std::uniform_real_distribution<double> noise(0.0, 50.0);
  std::vector<PatientRecord> records;
  for (int i = 0; i < 200; ++i) {
    PatientRecord r;
    r.id = i;
    r.values.resize(8);
    for (auto& v : r.values) v = noise(rng);
    r.values[1] = glucose(rng);
    r.label = r.values[1] > 120.0 ? 1 : 0;
    records.push_back(std::move(r));
  }
  return Dataset(FeatureSchema::pima(), std::move(records));
}

TEST(Schema, PimaDefaults) {
  const auto s = FeatureSchema::pima();
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(s.names(), (std::vector<std::string>{"Pregnancies", "Glucose", "BloodPressure",
                                                 "SkinThickness", "Insulin", "BMI",
                                                 "DiabetesPedigreeFunction", "Age"}));
  for (const char* immutable : {"Age", "Pregnancies", "DiabetesPedigreeFunction"}) {
    EXPECT_FALSE(s[s.require_index(immutable)].actionable) << immutable;
  }
  for (const char* actionable : {"Glucose", "BloodPressure", "SkinThickness", "Insulin", "BMI"}) {
    EXPECT_TRUE(s[s.require_index(actionable)].actionable) << actionable;
  }
}

TEST(Schema, RejectsDuplicatesAndEmpty) {
  EXPECT_THROW(FeatureSchema({}), InvalidArgument);
  EXPECT_THROW(FeatureSchema({{"a", "", true, HealthyDirection::kNone},
                              {"a", "", true, HealthyDirection::kNone}}),
               InvalidArgument);
  EXPECT_THROW(FeatureSchema::pima().require_index("Weight"), NotFound);
}

TEST(Dataset, CanonicalPimaFile) {
  const auto data = pima_dataset();
  EXPECT_EQ(data.size(), 768u);
  EXPECT_EQ(data.schema().size(), 8u);
  EXPECT_EQ(data[0].id, 0);
  EXPECT_EQ(data[0].values[1], 148.0);
  EXPECT_EQ(data[0].label, 1);
  const auto positives = std::count_if(data.records().begin(), data.records().end(),
                                       [](const auto& r) { return r.label == 1; });
  EXPECT_EQ(positives, 268);
}

TEST(Dataset, HistogramConservation) {
  const auto data = pima_dataset();
  for (std::size_t j = 0; j < data.schema().size(); ++j) {
    const auto& s = data.summary(j);
    EXPECT_LE(s.min, s.max);
    ASSERT_EQ(s.histogram.counts.size(), kHistogramBins);
    EXPECT_EQ(std::accumulate(s.histogram.counts.begin(), s.histogram.counts.end(), std::size_t{0}),
              768u);
    // every record lands in exactly one bin, the one bin_of reports
    std::vector<std::size_t> recount(kHistogramBins, 0);
    for (const auto& r : data.records()) ++recount[s.histogram.bin_of(r.values[j])];
    EXPECT_EQ(recount, s.histogram.counts);
  }
}

TEST(Dataset, EmptyCsvThenTrainFails) {
  const auto data = parse(kHeader);
  EXPECT_EQ(data.size(), 0u);
  EXPECT_THROW(train(data, BoostingConfig{}, SplitConfig{}), Error);
}

TEST(Dataset, SingleRecordStatistics) {
  const auto data = parse(std::string(kHeader) + "0,0,0,0,0,0,0,0,0\n");
  ASSERT_EQ(data.size(), 1u);
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_EQ(data.summary(j).min, 0.0);
    EXPECT_EQ(data.summary(j).max, 0.0);
  }
}

TEST(Dataset, Errors) {
  EXPECT_THROW(load_dataset(source_path("data/missing.csv"), FeatureSchema::pima()), DataError);
  EXPECT_THROW(parse("Glucose,Outcome\n1,0\n"), DataError);
  try {
    parse(std::string(kHeader) + "1,2,3,4,5,6,7,8,1\n1,2,x,4,5,6,7,8,0\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST(Gbdt, PimaAccuracyBand) {
  const auto data = pima_dataset();
  const auto model = train(data, BoostingConfig{}, SplitConfig{});
  EXPECT_GE(model.metadata().test_accuracy, 0.68);
  EXPECT_LE(model.metadata().test_accuracy, 0.78);
  EXPECT_EQ(model.metadata().test_size, 307u);
}

TEST(Gbdt, GeneratingRuleOracle) {
  const auto data = glucose_rule_dataset();
  const auto model = train(data, BoostingConfig{}, SplitConfig{});
  EXPECT_GE(model.metadata().test_accuracy, 0.95);
  auto x = data[0].values;
  x[1] = 200.0;
  EXPECT_GT(model.predict_proba(x), 0.5);
}

TEST(Gbdt, ConstantFeaturesPredictMajority) {
  std::vector<PatientRecord> records;
  for (int i = 0; i < 30; ++i) records.push_back({i, std::vector<double>(8, 1.0), i < 20 ? 0 : 1});
  const Dataset data(FeatureSchema::pima(), std::move(records));
  const auto model = train(data, BoostingConfig{}, SplitConfig{});
  for (const auto& r : data.records()) EXPECT_EQ(model.predict(r.values), 0);
  EXPECT_TRUE(model.trees().empty() || std::all_of(model.trees().begin(), model.trees().end(),
                                                   [](const auto& t) { return t.nodes.size() == 1; }));
}

TEST(Gbdt, PriorOnlyModelReturnsBaseRate) {
  const auto data = pima_dataset();
  BoostingConfig cfg;
  cfg.n_trees = 0;
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto model = fit_boosting(data, rows, cfg);
  EXPECT_NEAR(model.predict_proba(data[5].values), 268.0 / 768.0, 1e-12);
  EXPECT_NEAR(model.predict_proba(std::vector<double>(8, 0.0)), 268.0 / 768.0, 1e-12);
}

TEST(Gbdt, SingleClassRejected) {
  std::vector<PatientRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back({i, std::vector<double>(8, double(i)), 1});
  const Dataset data(FeatureSchema::pima(), std::move(records));
  EXPECT_THROW(train(data, BoostingConfig{}, SplitConfig{}), DegenerateInput);
  EXPECT_THROW(train(pima_dataset(), BoostingConfig{}, SplitConfig{1.0, 42}), InvalidArgument);
}

TEST(Gbdt, DeterministicAndByteEqual) {
  const auto data = pima_dataset();
  const auto a = train(data, BoostingConfig{}, SplitConfig{});
  const auto b = train(data, BoostingConfig{}, SplitConfig{});
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  const auto& x = data[39].values;
  const double p1 = a.predict_proba(x);
  const double p2 = a.predict_proba(x);
  EXPECT_EQ(std::memcmp(&p1, &p2, sizeof p1), 0);
}

TEST(Gbdt, JsonRoundTrip) {
  const auto data = pima_dataset();
  const auto model = train(data, BoostingConfig{}, SplitConfig{});
  const auto copy = RiskModel::from_json(model.to_json());
  EXPECT_EQ(copy.to_json().dump(), model.to_json().dump());
  for (std::size_t i = 0; i < data.size(); i += 17) {
    EXPECT_EQ(copy.predict_proba(data[i].values), model.predict_proba(data[i].values));
  }
  auto doc = model.to_json();
  doc["version"] = 99;
  EXPECT_THROW(RiskModel::from_json(doc), ConfigError);
}

TEST(Gbdt, BundledModelMatchesRetraining) {
  const auto data = pima_dataset();
  const auto bundled = RiskModel::load(source_path("models/pima_gbdt.json"));
  const auto fresh = train(data, BoostingConfig{}, SplitConfig{});
  EXPECT_EQ(bundled.to_json().dump(), fresh.to_json().dump());
}

TEST(Gbdt, StratifiedSplitPreservesRatio) {
  const auto data = pima_dataset();
  for (double holdout : {0.2, 0.4, 0.5}) {
    const auto split = stratified_split(data, holdout, 42);
    EXPECT_EQ(split.train.size() + split.test.size(), data.size());
    auto positives = [&](const std::vector<std::size_t>& rows) {
      return static_cast<double>(std::count_if(rows.begin(), rows.end(),
                                               [&](auto i) { return data[i].label == 1; }));
    };
    EXPECT_LE(std::fabs(positives(split.test) - holdout * 268.0), 1.0);
    EXPECT_LE(std::fabs(positives(split.train) - (1.0 - holdout) * 268.0), 1.0);
  }
}

TEST(Gbdt, PredictFlipsAtHalf) {
  const auto data = pima_dataset();
  const auto model = train(data, BoostingConfig{}, SplitConfig{});
  for (const auto& r : data.records()) {
    const double p = model.predict_proba(r.values);
    ASSERT_GE(p, 0.0);
    ASSERT_LE(p, 1.0);
    EXPECT_EQ(model.predict(r.values), p >= 0.5 ? 1 : 0);
  }
}

TEST(Gbdt, InputValidation) {
  const auto model = RiskModel::load(source_path("models/pima_gbdt.json"));
  EXPECT_THROW(model.predict_proba(std::vector<double>(7, 0.0)), InvalidArgument);
  auto x = std::vector<double>(8, 1.0);
  x[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(model.predict_proba(x), InvalidArgument);
}

TEST(Model, BatchKernelMatchesSerial) {
  const auto data = pima_dataset();
  const auto model = RiskModel::load(source_path("models/pima_gbdt.json"));
  std::vector<std::vector<double>> rows;
  for (const auto& r : data.records()) rows.push_back(r.values);
  EXPECT_EQ(predict_proba_batch(model, rows), predict_proba_batch_serial(model, rows));
}

}  // namespace
}  // namespace riskscope
