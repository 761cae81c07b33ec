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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace riskscope {

enum class HealthyDirection { kDecrease, kIncrease, kNone };

std::string_view to_string(HealthyDirection direction);

struct FeatureSpec {
  std::string name;
  std::string unit;
  bool actionable = false;
  HealthyDirection healthy_direction = HealthyDirection::kNone;
};

class FeatureSchema {
 public:
  // Throws InvalidArgument on an empty list or duplicate names.
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  // The eight Pima Indians Diabetes columns, in file order.
  static FeatureSchema pima();

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  std::span<const FeatureSpec> features() const { return features_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  // Like index_of but throws NotFound.
  std::size_t require_index(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::vector<FeatureSpec> features_;
};

struct PatientRecord {
  std::int64_t id = 0;
  std::vector<double> values;
  std::optional<int> label;
};

// Throws InvalidArgument when x does not have d finite entries.
void validate_instance(std::span<const double> x, std::size_t d);

}  // namespace riskscope
