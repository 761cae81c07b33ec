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

#include "riskscope/dataset.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "riskscope/error.h"

namespace riskscope {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

FeatureSummary summarize(std::span<const PatientRecord> records, std::size_t feature) {
  FeatureSummary s;
  s.histogram.counts.assign(kHistogramBins, 0);
  if (!records.empty()) {
    s.min = s.max = records.front().values[feature];
    for (const auto& r : records) {
      s.min = std::min(s.min, r.values[feature]);
      s.max = std::max(s.max, r.values[feature]);
    }
  }
  s.histogram.edges.resize(kHistogramBins + 1);
  const double width = (s.max - s.min) / static_cast<double>(kHistogramBins);
  for (std::size_t b = 0; b <= kHistogramBins; ++b) {
    s.histogram.edges[b] = s.min + width * static_cast<double>(b);
  }
  s.histogram.edges.back() = s.max;
  for (const auto& r : records) ++s.histogram.counts[s.histogram.bin_of(r.values[feature])];
  return s;
}

}  // namespace

std::size_t Histogram::bin_of(double v) const {
  const std::size_t bins = counts.size();
  if (bins == 0) return 0;
  const double lo = edges.front();
  const double hi = edges.back();
  if (!(hi > lo) || v <= lo) return 0;
  if (v >= hi) return bins - 1;
  auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
  return std::min(b, bins - 1);
}

Dataset::Dataset(FeatureSchema schema, std::vector<PatientRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  for (const auto& r : records_) {
    validate_instance(r.values, schema_.size());
    if (r.label && *r.label != 0 && *r.label != 1) {
      throw InvalidArgument("record " + std::to_string(r.id) + " has a label outside {0,1}");
    }
  }
  summaries_.reserve(schema_.size());
  for (std::size_t j = 0; j < schema_.size(); ++j) summaries_.push_back(summarize(records_, j));
}

const PatientRecord* Dataset::find(std::int64_t id) const {
  if (id >= 0 && static_cast<std::size_t>(id) < records_.size() && records_[id].id == id) {
    return &records_[id];
  }
  for (const auto& r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::vector<double> Dataset::column(std::size_t feature) const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.values[feature]);
  return out;
}

Dataset parse_dataset(std::istream& in, const FeatureSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header row", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  auto expected = schema.names();
  expected.emplace_back(kLabelColumn);
  if (header != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw DataError("header mismatch: expected '" + want + "'", 1);
  }

  std::vector<PatientRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != expected.size()) {
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                          " cells, expected " + std::to_string(expected.size()),
                      row);
    }
    PatientRecord rec;
    rec.id = static_cast<std::int64_t>(records.size());
    rec.values.resize(schema.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(trim(cells[c]), v)) {
        throw DataError("non-numeric value '" + cells[c] + "' at row " + std::to_string(row) +
                            ", column " + std::to_string(c + 1) + " (" + expected[c] + ")",
                        row, c + 1);
      }
      if (c < schema.size()) {
        rec.values[c] = v;
      } else if (v == 0.0 || v == 1.0) {
        rec.label = static_cast<int>(v);
      } else {
        throw DataError("label at row " + std::to_string(row) + " must be 0 or 1", row, c + 1);
      }
    }
    records.push_back(std::move(rec));
  }
  return Dataset(schema, std::move(records));
}

Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());
  return parse_dataset(in, schema);
}

}  // namespace riskscope
