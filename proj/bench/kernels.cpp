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

// Serial reference vs OpenMP kernel, on the bundled model and data.

#include <benchmark/benchmark.h>

#include <filesystem>

#include "riskscope/dataset.h"
#include "riskscope/fudge.h"
#include "riskscope/gbdt.h"
#include "riskscope/kernel_shap.h"
#include "riskscope/scaling.h"
#include "riskscope/schema.h"

namespace {

using namespace riskscope;

struct Fixture {
  Dataset data;
  RiskModel model;
  FeatureScaling scaling;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> background;

  Fixture()
      : data(load_dataset(std::filesystem::path(RISKSCOPE_SOURCE_DIR) / "data/diabetes.csv",
                          FeatureSchema::pima())),
        model(RiskModel::load(std::filesystem::path(RISKSCOPE_SOURCE_DIR) / "models/pima_gbdt.json")),
        scaling(FeatureScaling::from_dataset(data)) {
    for (const auto& r : data.records()) rows.push_back(r.values);
    background = sample_background(data, {}, 100, 42);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_PredictBatchSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(predict_proba_batch_serial(f.model, f.rows));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rows.size()));
}
BENCHMARK(BM_PredictBatchSerial);

void BM_PredictBatchOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(predict_proba_batch(f.model, f.rows));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rows.size()));
}
BENCHMARK(BM_PredictBatchOmp);

void BM_FudgeSerial(benchmark::State& state) {
  const auto& f = fixture();
  const auto noise = NoiseMatrix::draw(static_cast<std::size_t>(state.range(0)), 8, 0.05, 1);
  const FeatureMask mask(std::vector<std::uint8_t>{0, 1, 0, 0, 0, 1, 0, 1});
  for (auto _ : state) {
    benchmark::DoNotOptimize(fudge_from_noise_serial(f.model, f.rows[39], mask, f.scaling, noise));
  }
}
BENCHMARK(BM_FudgeSerial)->Arg(1000)->Arg(10000);

void BM_FudgeOmp(benchmark::State& state) {
  const auto& f = fixture();
  const auto noise = NoiseMatrix::draw(static_cast<std::size_t>(state.range(0)), 8, 0.05, 1);
  const FeatureMask mask(std::vector<std::uint8_t>{0, 1, 0, 0, 0, 1, 0, 1});
  for (auto _ : state) {
    benchmark::DoNotOptimize(fudge_from_noise(f.model, f.rows[39], mask, f.scaling, noise));
  }
}
BENCHMARK(BM_FudgeOmp)->Arg(1000)->Arg(10000);

void BM_CoalitionsSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(coalition_values_serial(f.model, f.rows[39], f.background));
}
BENCHMARK(BM_CoalitionsSerial)->Unit(benchmark::kMillisecond);

void BM_CoalitionsOmp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(coalition_values(f.model, f.rows[39], f.background));
}
BENCHMARK(BM_CoalitionsOmp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
