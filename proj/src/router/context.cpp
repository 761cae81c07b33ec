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

#include "riskscope/router/context.h"

#include <algorithm>

namespace riskscope::router {
namespace {

constexpr std::pair<ViewTag, std::string_view> kViewNames[] = {
    {ViewTag::kRecord, "record"},
    {ViewTag::kImportance, "importance"},
    {ViewTag::kRanges, "ranges"},
    {ViewTag::kRecommendation, "recommendation"},
};

// Returns true if anything was removed.
bool strip_histograms(nlohmann::json& j) {
  bool removed = false;
  if (j.is_object()) {
    for (const char* key : {"histogram", "histograms", "bins"}) removed |= j.erase(key) > 0;
    for (auto& [k, v] : j.items()) removed |= strip_histograms(v);
  } else if (j.is_array()) {
    for (auto& v : j) removed |= strip_histograms(v);
  }
  return removed;
}

}  // namespace

std::string_view to_string(ViewTag tag) {
  for (const auto& [t, name] : kViewNames) {
    if (t == tag) return name;
  }
  return "record";
}

std::optional<ViewTag> parse_view_tag(std::string_view s) {
  for (const auto& [t, name] : kViewNames) {
    if (name == s) return t;
  }
  return std::nullopt;
}

nlohmann::json ContextPack::to_json() const {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : recent_turns) turns.push_back({{"user", t.user}, {"system", t.system}});
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : patient_values) {
    values.push_back({{"name", v.name}, {"unit", v.unit}, {"value", v.value}});
  }
  nlohmann::json doc = {
      {"recent_turns", std::move(turns)},
      {"patient_id", patient_id ? nlohmann::json(*patient_id) : nlohmann::json()},
      {"patient_values", std::move(values)},
      {"active_view",
       {{"tag", std::string(to_string(active_view.tag))},
        {"features", active_view.features},
        {"data", active_view.data}}},
      {"evidence_excerpts", evidence_excerpts},
  };
  if (truncated) doc["truncated"] = true;
  return doc;
}

std::vector<nlohmann::json> evidence_for_view(const ActiveView& view, const KnowledgeBase& kb) {
  std::vector<nlohmann::json> out;
  std::optional<EvidenceKind> kind;
  switch (view.tag) {
    case ViewTag::kRecord:
      break;
    case ViewTag::kImportance:
      kind = EvidenceKind::kImportance;
      break;
    case ViewTag::kRanges:
    case ViewTag::kRecommendation:
      kind = EvidenceKind::kRange;
      break;
  }
  if (!kind) return out;
  for (const auto& feature : view.features) {
    if (kb.find(feature, *kind)) {
      out.push_back(nlohmann::json::parse(kb.serialized(feature, *kind)));
    }
  }
  return out;
}

ContextPack build_context(std::span<const Turn> history, const FeatureSchema& schema,
                          const PatientRecord* patient, const ActiveView& view,
                          const KnowledgeBase& kb, std::size_t max_bytes) {
  ContextPack pack;
  const std::size_t first = history.size() > kMaxRecentTurns ? history.size() - kMaxRecentTurns : 0;
  pack.recent_turns.assign(history.begin() + static_cast<std::ptrdiff_t>(first), history.end());
  if (patient != nullptr) {
    pack.patient_id = patient->id;
    for (std::size_t j = 0; j < schema.size() && j < patient->values.size(); ++j) {
      pack.patient_values.push_back({schema[j].name, schema[j].unit, patient->values[j]});
    }
  }
  pack.active_view = view;
  pack.evidence_excerpts = evidence_for_view(view, kb);
  enforce_size_bound(pack, max_bytes);
  return pack;
}

void enforce_size_bound(ContextPack& pack, std::size_t max_bytes) {
  auto fits = [&] { return pack.serialize().size() <= max_bytes; };
  while (!fits() && !pack.recent_turns.empty()) {
    pack.recent_turns.erase(pack.recent_turns.begin());
    pack.truncated = true;
  }
  if (!fits() && strip_histograms(pack.active_view.data)) pack.truncated = true;
  while (!fits() && !pack.evidence_excerpts.empty()) {
    pack.evidence_excerpts.pop_back();
    pack.truncated = true;
  }
  if (!fits() && !pack.active_view.data.empty()) {
    pack.active_view.data = nlohmann::json::object();
    pack.truncated = true;
  }
}

}  // namespace riskscope::router
