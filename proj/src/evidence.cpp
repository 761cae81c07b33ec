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

#include "riskscope/evidence.h"

#include <fstream>
#include <regex>
#include <set>

#include "riskscope/error.h"
#include "riskscope/util/sha256.h"

namespace riskscope {

std::string_view to_string(SourceType t) {
  switch (t) {
    case SourceType::kJournal: return "journal";
    case SourceType::kGuideline: return "guideline";
    case SourceType::kSystematicReview: return "systematic-review";
    case SourceType::kEpidemiological: return "epidemiological";
  }
  return "journal";
}

namespace {

using nlohmann::json;

constexpr const char* kKbFormat = "riskscope-kb";

std::optional<SourceType> parse_source_type(std::string_view s) {
  if (s == "journal") return SourceType::kJournal;
  if (s == "guideline") return SourceType::kGuideline;
  if (s == "systematic-review") return SourceType::kSystematicReview;
  if (s == "epidemiological") return SourceType::kEpidemiological;
  return std::nullopt;
}

bool is_marker(const std::string& s) {
  static const std::regex re(R"(\[[0-9]+\])");
  return std::regex_match(s, re);
}

// Checks a [low, high] pair; returns an empty string when valid.
std::string interval_problem(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    return "must be a [low, high] pair of numbers";
  }
  if (j[0].get<double>() > j[1].get<double>()) return "has low > high";
  return {};
}

Interval parse_interval(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

void lint_entry(const json& e, const std::string& where, std::vector<std::string>& out) {
  auto problem = [&](const std::string& msg) { out.push_back(where + ": " + msg); };
  if (!e.is_object()) return problem("entry must be an object");
  if (!e.contains("feature") || !e["feature"].is_string() || e["feature"].get<std::string>().empty()) {
    problem("missing or empty 'feature'");
  }
  std::optional<EvidenceKind> kind;
  if (e.contains("kind") && e["kind"].is_string()) kind = parse_evidence_kind(e["kind"].get<std::string>());
  if (!kind) problem("'kind' must be \"importance\" or \"range\"");
  if (!e.contains("summary") || !e["summary"].is_string() || e["summary"].get<std::string>().empty()) {
    problem("missing or empty 'summary'");
  }

  std::map<std::string, int> marker_count;
  if (!e.contains("citations") || !e["citations"].is_array() || e["citations"].empty()) {
    problem("'citations' must be a non-empty array");
  } else {
    for (std::size_t c = 0; c < e["citations"].size(); ++c) {
      const auto& cit = e["citations"][c];
      const std::string cw = "citations[" + std::to_string(c) + "]";
      if (!cit.is_object()) {
        problem(cw + " must be an object");
        continue;
      }
      if (!cit.contains("marker") || !cit["marker"].is_string() ||
          !is_marker(cit["marker"].get<std::string>())) {
        problem(cw + " marker must look like [n]");
      } else {
        ++marker_count[cit["marker"].get<std::string>()];
      }
      if (!cit.contains("title") || !cit["title"].is_string() || cit["title"].get<std::string>().empty()) {
        problem(cw + " missing title");
      }
      if (!cit.contains("source_type") || !cit["source_type"].is_string() ||
          !parse_source_type(cit["source_type"].get<std::string>())) {
        problem(cw + " source_type must be journal|guideline|systematic-review|epidemiological");
      }
      if (!cit.contains("year") || !cit["year"].is_number_integer() ||
          cit["year"].get<int>() < 1900 || cit["year"].get<int>() > 2100) {
        problem(cw + " year must be an integer in [1900, 2100]");
      }
      if (!cit.contains("locator") || !cit["locator"].is_string()) problem(cw + " missing locator");
    }
    for (const auto& [marker, count] : marker_count) {
      if (count > 1) problem("citation marker " + marker + " is defined " + std::to_string(count) + " times");
    }
  }
  if (e.contains("summary") && e["summary"].is_string()) {
    for (const auto& m : citation_markers(e["summary"].get<std::string>())) {
      if (!marker_count.contains(m)) problem("summary cites " + m + " which has no citation");
    }
  }

  if (kind == EvidenceKind::kRange) {
    if (!e.contains("range") || !e["range"].is_object()) {
      problem("range entry needs a 'range' object");
    } else {
      const auto& r = e["range"];
      for (const char* key : {"normal", "diagnostic"}) {
        if (!r.contains(key)) {
          problem(std::string("range.") + key + " is missing");
        } else if (auto p = interval_problem(r[key]); !p.empty()) {
          problem(std::string("range.") + key + " " + p);
        }
      }
      if (!r.contains("units") || !r["units"].is_string()) problem("range.units is missing");
    }
  } else if (kind == EvidenceKind::kImportance && e.contains("range")) {
    problem("importance entry must not carry a 'range' payload");
  }
}

EvidenceEntry parse_entry(const json& e) {
  EvidenceEntry out;
  out.feature = e["feature"].get<std::string>();
  out.kind = *parse_evidence_kind(e["kind"].get<std::string>());
  out.summary = e["summary"].get<std::string>();
  for (const auto& c : e["citations"]) {
    out.citations.push_back({c["marker"].get<std::string>(), c["title"].get<std::string>(),
                             *parse_source_type(c["source_type"].get<std::string>()),
                             c["year"].get<int>(), c["locator"].get<std::string>()});
  }
  if (out.kind == EvidenceKind::kRange) {
    const auto& r = e["range"];
    out.range = RangePayload{parse_interval(r["normal"]), parse_interval(r["diagnostic"]),
                             r["units"].get<std::string>()};
  }
  return out;
}

}  // namespace

std::string_view to_string(EvidenceKind kind) {
  return kind == EvidenceKind::kRange ? "range" : "importance";
}

std::optional<EvidenceKind> parse_evidence_kind(std::string_view s) {
  if (s == "importance") return EvidenceKind::kImportance;
  if (s == "range") return EvidenceKind::kRange;
  return std::nullopt;
}

std::vector<std::string> citation_markers(std::string_view summary) {
  static const std::regex re(R"(\[[0-9]+\])");
  std::vector<std::string> out;
  const std::string text(summary);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back(it->str());
  }
  return out;
}

json EvidenceEntry::to_json() const {
  json cits = json::array();
  for (const auto& c : citations) {
    cits.push_back({{"marker", c.marker},
                    {"title", c.title},
                    {"source_type", riskscope::to_string(c.source_type)},
                    {"year", c.year},
                    {"locator", c.locator}});
  }
  json j = {{"feature", feature},
            {"kind", riskscope::to_string(kind)},
            {"summary", summary},
            {"citations", std::move(cits)}};
  if (range) {
    j["range"] = {{"normal", {range->normal.low, range->normal.high}},
                  {"diagnostic", {range->diagnostic.low, range->diagnostic.high}},
                  {"units", range->units}};
  }
  return j;
}

std::string compute_kb_checksum(const json& doc) {
  const json canonical = {{"version", doc.at("version")}, {"entries", doc.at("entries")}};
  return "sha256:" + sha256_hex(canonical.dump());
}

std::vector<std::string> lint_kb(const json& doc) {
  std::vector<std::string> out;
  if (!doc.is_object()) return {"document must be a JSON object"};
  if (doc.value("format", std::string()) != kKbFormat) {
    out.push_back(std::string("'format' must be \"") + kKbFormat + "\"");
  }
  if (!doc.contains("version") || !doc["version"].is_string()) out.push_back("'version' must be a string");
  if (!doc.contains("checksum") || !doc["checksum"].is_string()) out.push_back("'checksum' must be a string");
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    out.push_back("'entries' must be an array");
    return out;
  }
  std::set<std::pair<std::string, std::string>> keys;
  for (std::size_t i = 0; i < doc["entries"].size(); ++i) {
    const auto& e = doc["entries"][i];
    std::string where = "entries[" + std::to_string(i) + "]";
    if (e.is_object() && e.contains("feature") && e["feature"].is_string()) {
      where += " (" + e["feature"].get<std::string>() + "/" +
               (e.contains("kind") && e["kind"].is_string() ? e["kind"].get<std::string>() : "?") + ")";
    }
    lint_entry(e, where, out);
    if (e.is_object() && e.contains("feature") && e.contains("kind") && e["feature"].is_string() &&
        e["kind"].is_string()) {
      if (!keys.emplace(e["feature"].get<std::string>(), e["kind"].get<std::string>()).second) {
        out.push_back(where + ": duplicate (feature, kind) key");
      }
    }
  }
  if (out.empty() && doc["checksum"].get<std::string>() != compute_kb_checksum(doc)) {
    out.push_back("checksum mismatch: file says " + doc["checksum"].get<std::string>() +
                  ", content hashes to " + compute_kb_checksum(doc));
  }
  return out;
}

KnowledgeBase KnowledgeBase::from_json(const json& doc) {
  const auto problems = lint_kb(doc);
  if (!problems.empty()) {
    std::string msg = "invalid knowledge base:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  KnowledgeBase kb;
  kb.version_ = doc["version"].get<std::string>();
  kb.checksum_ = doc["checksum"].get<std::string>();
  kb.entries_doc_ = doc["entries"];
  for (const auto& e : kb.entries_doc_) {
    EvidenceEntry entry = parse_entry(e);
    Key key{entry.feature, entry.kind};
    kb.entries_.emplace(std::move(key), Stored{std::move(entry), e.dump()});
  }
  return kb;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open knowledge base: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("knowledge base is not valid JSON: " + std::string(e.what()));
  }
  return from_json(doc);
}

const EvidenceEntry* KnowledgeBase::find(std::string_view feature, EvidenceKind kind) const {
  auto it = entries_.find(Key{std::string(feature), kind});
  return it == entries_.end() ? nullptr : &it->second.entry;
}

const EvidenceEntry& KnowledgeBase::get(std::string_view feature, EvidenceKind kind) const {
  const auto* e = find(feature, kind);
  if (!e) {
    throw NotFound("no " + std::string(to_string(kind)) + " evidence for feature '" +
                   std::string(feature) + "'");
  }
  return *e;
}

const std::string& KnowledgeBase::serialized(std::string_view feature, EvidenceKind kind) const {
  auto it = entries_.find(Key{std::string(feature), kind});
  if (it == entries_.end()) {
    throw NotFound("no " + std::string(to_string(kind)) + " evidence for feature '" +
                   std::string(feature) + "'");
  }
  return it->second.bytes;
}

std::string KnowledgeBase::current_checksum() const {
  return compute_kb_checksum(json{{"version", version_}, {"entries", entries_doc_}});
}

std::vector<const EvidenceEntry*> KnowledgeBase::entries() const {
  std::vector<const EvidenceEntry*> out;
  for (const auto& [key, stored] : entries_) out.push_back(&stored.entry);
  return out;
}

}  // namespace riskscope
