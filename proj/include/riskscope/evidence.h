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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "riskscope/interval.h"

namespace riskscope {

enum class EvidenceKind { kImportance, kRange };
enum class SourceType { kJournal, kGuideline, kSystematicReview, kEpidemiological };

std::string_view to_string(EvidenceKind kind);
std::optional<EvidenceKind> parse_evidence_kind(std::string_view s);
std::string_view to_string(SourceType type);

struct Citation {
  std::string marker;  // e.g. "[1]"
  std::string title;
  SourceType source_type = SourceType::kJournal;
  int year = 0;
  std::string locator;
};

struct RangePayload {
  Interval normal;
  Interval diagnostic;
  std::string units;
};

struct EvidenceEntry {
  std::string feature;
  EvidenceKind kind = EvidenceKind::kImportance;
  std::string summary;
  std::vector<Citation> citations;
  std::optional<RangePayload> range;

  nlohmann::json to_json() const;
};

// Inline markers ("[1]", "[12]") in order of appearance.
std::vector<std::string> citation_markers(std::string_view summary);

// Schema and consistency diagnostics for a KB document, one string per
// problem, prefixed with the entry it concerns. Empty means valid.
std::vector<std::string> lint_kb(const nlohmann::json& doc);

// "sha256:<hex>" over the canonical dump of {version, entries}.
std::string compute_kb_checksum(const nlohmann::json& doc);

// Curated, read-only evidence store. Lookups never synthesize content.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  // Throws ConfigError listing every lint diagnostic.
  static KnowledgeBase from_json(const nlohmann::json& doc);
  static KnowledgeBase load(const std::filesystem::path& path);

  // Throws NotFound.
  const EvidenceEntry& get(std::string_view feature, EvidenceKind kind) const;
  const EvidenceEntry* find(std::string_view feature, EvidenceKind kind) const;
  // The stored entry serialized; identical bytes on every call.
  const std::string& serialized(std::string_view feature, EvidenceKind kind) const;

  const std::string& version() const { return version_; }
  // Checksum recorded in the file (verified at load).
  const std::string& checksum() const { return checksum_; }
  // Recomputed from the in-memory entries.
  std::string current_checksum() const;

  std::size_t size() const { return entries_.size(); }
  std::vector<const EvidenceEntry*> entries() const;

 private:
  struct Stored {
    EvidenceEntry entry;
    std::string bytes;
  };
  using Key = std::pair<std::string, EvidenceKind>;

  std::string version_;
  std::string checksum_;
  nlohmann::json entries_doc_ = nlohmann::json::array();
  std::map<Key, Stored> entries_;
};

}  // namespace riskscope
