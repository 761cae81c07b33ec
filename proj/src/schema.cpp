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

#include "riskscope/schema.h"

#include <cmath>
#include <set>

#include "riskscope/error.h"

namespace riskscope {

std::string_view to_string(HealthyDirection direction) {
  switch (direction) {
    case HealthyDirection::kDecrease: return "decrease";
    case HealthyDirection::kIncrease: return "increase";
    case HealthyDirection::kNone: return "none";
  }
  return "none";
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  if (features_.empty()) throw InvalidArgument("feature schema must have at least one feature");
  std::set<std::string_view> seen;
  for (const auto& f : features_) {
    if (f.name.empty()) throw InvalidArgument("feature name must not be empty");
    if (!seen.insert(f.name).second) throw InvalidArgument("duplicate feature name: " + f.name);
  }
}

FeatureSchema FeatureSchema::pima() {
  using enum HealthyDirection;
  return FeatureSchema({
      {"Pregnancies", "count", false, kNone},
      {"Glucose", "mg/dL", true, kDecrease},
      {"BloodPressure", "mm Hg", true, kDecrease},
      {"SkinThickness", "mm", true, kDecrease},
      {"Insulin", "mu U/ml", true, kDecrease},
      {"BMI", "kg/m2", true, kDecrease},
      {"DiabetesPedigreeFunction", "score", false, kNone},
      {"Age", "years", false, kNone},
  });
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t FeatureSchema::require_index(std::string_view name) const {
  auto i = index_of(name);
  if (!i) throw NotFound("unknown feature: " + std::string(name));
  return *i;
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

void validate_instance(std::span<const double> x, std::size_t d) {
  if (x.size() != d) {
    throw InvalidArgument("instance has " + std::to_string(x.size()) + " values, expected " +
                          std::to_string(d));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw InvalidArgument("instance value " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace riskscope
