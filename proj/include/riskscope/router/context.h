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

#include "json.hpp"
#include "riskscope/evidence.h"
#include "riskscope/schema.h"

namespace riskscope::router {

enum class ViewTag { kRecord, kImportance, kRanges, kRecommendation };

std::string_view to_string(ViewTag tag);
std::optional<ViewTag> parse_view_tag(std::string_view s);

struct Turn {
  std::string user;
  std::string system;
};

// What the dashboard's analysis area currently shows. `features` names the
// factors on screen; they select the evidence attached to the pack.
struct ActiveView {
  ViewTag tag = ViewTag::kRecord;
  nlohmann::json data = nlohmann::json::object();
  std::vector<std::string> features;
};

struct PatientValue {
  std::string name;
  std::string unit;
  double value = 0.0;
};

inline constexpr std::size_t kMaxRecentTurns = 3;
inline constexpr std::size_t kMaxContextBytes = 32 * 1024;

// Grounding bundle for the fallback assistant.
struct ContextPack {
  std::vector<Turn> recent_turns;
  std::optional<std::int64_t> patient_id;
  std::vector<PatientValue> patient_values;
  ActiveView active_view;
  std::vector<nlohmann::json> evidence_excerpts;
  bool truncated = false;

  nlohmann::json to_json() const;
  std::string serialize() const { return to_json().dump(); }
};

// Evidence attached to a view: importance entries for the importance view,
// range entries for the ranges and recommendation views, none for the record.
std::vector<nlohmann::json> evidence_for_view(const ActiveView& view, const KnowledgeBase& kb);

// Packs the last kMaxRecentTurns turns (oldest first), every feature value of
// the patient with units, the active view, and its evidence; then enforces
// the size bound.
ContextPack build_context(std::span<const Turn> history, const FeatureSchema& schema,
                          const PatientRecord* patient, const ActiveView& view,
                          const KnowledgeBase& kb, std::size_t max_bytes = kMaxContextBytes);

// Shrinks a pack until it serializes within max_bytes: drop the oldest turn,
// then histogram detail in the view data, then evidence excerpts (last
// first), then the view data itself. Patient values are never dropped.
void enforce_size_bound(ContextPack& pack, std::size_t max_bytes = kMaxContextBytes);

}  // namespace riskscope::router
