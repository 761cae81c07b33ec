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
#include <istream>
#include <span>
#include <vector>

#include "riskscope/schema.h"

namespace riskscope {

inline constexpr std::size_t kHistogramBins = 20;

struct Histogram {
  std::vector<double> edges;         // kHistogramBins + 1 ascending edges
  std::vector<std::size_t> counts;   // kHistogramBins entries

  // Bin index for v; values outside [front, back] are clamped to the end bins.
  std::size_t bin_of(double v) const;
};

struct FeatureSummary {
  double min = 0.0;
  double max = 0.0;
  Histogram histogram;
};

class Dataset {
 public:
  Dataset(FeatureSchema schema, std::vector<PatientRecord> records);

  const FeatureSchema& schema() const { return schema_; }
  std::span<const PatientRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const PatientRecord& operator[](std::size_t i) const { return records_[i]; }

  const FeatureSummary& summary(std::size_t feature) const { return summaries_[feature]; }

  // nullptr when no record carries this id.
  const PatientRecord* find(std::int64_t id) const;
  std::vector<double> column(std::size_t feature) const;

 private:
  FeatureSchema schema_;
  std::vector<PatientRecord> records_;
  std::vector<FeatureSummary> summaries_;
};

inline constexpr const char* kLabelColumn = "Outcome";

// CSV with header `<schema names...>,Outcome`. Record ids are 0-based row
// indices. Throws DataError with the offending row/column.
Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema);
Dataset parse_dataset(std::istream& in, const FeatureSchema& schema);

}  // namespace riskscope
