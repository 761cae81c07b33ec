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

#include "riskscope/router/corpus.h"

#include <array>
#include <fstream>
#include <set>

#include "riskscope/error.h"
#include "riskscope/router/vectorizer.h"

namespace riskscope::router {
namespace {

constexpr std::array<std::pair<Intent, std::string_view>, kIntentCount> kIntentNames{{
    {Intent::kPredict, "predict"},
    {Intent::kExplainImportance, "explain_importance"},
    {Intent::kExplainRange, "explain_range"},
    {Intent::kCounterfactual, "counterfactual"},
    {Intent::kRecommendation, "recommendation"},
    {Intent::kDataSummary, "data_summary"},
    {Intent::kEvidenceRequest, "evidence_request"},
}};

nlohmann::json read_json(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + path.string());
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

Intent require_intent(const nlohmann::json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": intent must be a string");
  auto intent = parse_intent(j.get<std::string>());
  if (!intent) throw ConfigError(where + ": unknown intent '" + j.get<std::string>() + "'");
  return *intent;
}

}  // namespace

std::string_view to_string(Intent intent) {
  for (const auto& [i, name] : kIntentNames) {
    if (i == intent) return name;
  }
  return "predict";
}

std::optional<Intent> parse_intent(std::string_view s) {
  for (const auto& [i, name] : kIntentNames) {
    if (name == s) return i;
  }
  return std::nullopt;
}

PromptCorpus::PromptCorpus(std::vector<PromptEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigError("prompt corpus is empty");
  std::set<std::string> texts;
  std::array<std::size_t, kIntentCount> per_intent{};
  for (const auto& e : entries_) {
    if (normalize_text(e.text).empty()) throw ConfigError("prompt corpus has a blank entry");
    if (!texts.insert(e.text).second) throw ConfigError("duplicate corpus prompt: " + e.text);
    ++per_intent[static_cast<std::size_t>(e.intent)];
  }
  for (const auto& [intent, name] : kIntentNames) {
    if (per_intent[static_cast<std::size_t>(intent)] < kMinEntriesPerIntent) {
      throw ConfigError("prompt corpus needs at least " + std::to_string(kMinEntriesPerIntent) +
                        " entries for intent " + std::string(name));
    }
  }
}

PromptCorpus PromptCorpus::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("prompts") || !doc["prompts"].is_array()) {
    throw ConfigError("prompt corpus: expected an object with a 'prompts' array");
  }
  std::vector<PromptEntry> entries;
  for (std::size_t i = 0; i < doc["prompts"].size(); ++i) {
    const auto& p = doc["prompts"][i];
    const std::string where = "prompts[" + std::to_string(i) + "]";
    if (!p.is_object() || !p.contains("text") || !p["text"].is_string() || !p.contains("intent")) {
      throw ConfigError(where + ": expected {text, intent}");
    }
    entries.push_back({p["text"].get<std::string>(), require_intent(p["intent"], where)});
  }
  return PromptCorpus(std::move(entries));
}

PromptCorpus PromptCorpus::load(const std::filesystem::path& path) {
  return from_json(read_json(path, "prompt corpus"));
}

std::vector<std::string> PromptCorpus::texts() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.text);
  return out;
}

std::vector<LabeledQuery> labeled_set_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("items") || !doc["items"].is_array()) {
    throw ConfigError("labeled set: expected an object with an 'items' array");
  }
  std::vector<LabeledQuery> out;
  for (std::size_t i = 0; i < doc["items"].size(); ++i) {
    const auto& item = doc["items"][i];
    const std::string where = "items[" + std::to_string(i) + "]";
    if (!item.is_object() || !item.contains("text") || !item["text"].is_string() ||
        !item.contains("in_scope") || !item["in_scope"].is_boolean()) {
      throw ConfigError(where + ": expected {text, in_scope, intent?}");
    }
    LabeledQuery q{item["text"].get<std::string>(), item["in_scope"].get<bool>(), std::nullopt};
    if (q.in_scope) q.intent = require_intent(item.value("intent", nlohmann::json()), where);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<LabeledQuery> load_labeled_set(const std::filesystem::path& path) {
  return labeled_set_from_json(read_json(path, "labeled set"));
}

}  // namespace riskscope::router
