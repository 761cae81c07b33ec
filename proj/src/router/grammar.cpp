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

#include "riskscope/router/grammar.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>

#include "riskscope/error.h"
#include "riskscope/router/vectorizer.h"

namespace riskscope::router {
namespace {

std::optional<std::int64_t> to_int(const std::string& s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool has_phrase(const std::string& padded, std::string_view phrase) {
  std::string needle;
  needle.reserve(phrase.size() + 2);
  needle += ' ';
  needle += phrase;
  needle += ' ';
  return padded.find(needle) != std::string::npos;
}

std::optional<std::int64_t> find_patient_id(std::string_view raw, const std::string& norm) {
  static const std::regex hash_re(R"(#\s*(\d+))");
  static const std::regex word_re(R"((?:^| )(?:patient|id|record|person|case)(?: number| no| id)? (\d+)(?: |$))");
  std::smatch m;
  const std::string raw_s(raw);
  if (std::regex_search(raw_s, m, hash_re)) return to_int(m[1]);
  if (std::regex_search(norm, m, word_re)) return to_int(m[1]);
  return std::nullopt;
}

std::optional<int> find_count(const std::string& norm) {
  static const std::regex top_re(R"((?:^| )top (\d+)(?: |$))");
  static const std::regex n_re(R"((?:^| )(\d+) (?:most|features|factors|top|main|key)(?: |$))");
  std::smatch m;
  for (const auto* re : {&top_re, &n_re}) {
    if (std::regex_search(norm, m, *re)) {
      const auto v = to_int(m[1]);
      if (v && *v > 0 && *v < 1000) return static_cast<int>(*v);
    }
  }
  return std::nullopt;
}

std::optional<int> find_class(const std::string& padded) {
  if (has_phrase(padded, "class 0")) return 0;
  if (has_phrase(padded, "class 1")) return 1;
  for (const char* p : {"non diabetic", "not diabetic", "nondiabetic", "negative", "healthy",
                        "low risk", "no diabetes"}) {
    if (has_phrase(padded, p)) return 0;
  }
  for (const char* p : {"diabetic", "diabetes class", "positive", "high risk", "at risk"}) {
    if (has_phrase(padded, p)) return 1;
  }
  return std::nullopt;
}

bool mentions_range(const std::string& padded) {
  for (const char* p : {"range", "ranges", "normal", "threshold", "thresholds", "diagnostic",
                        "cutoff", "cutoffs", "interval", "limits", "reference values"}) {
    if (has_phrase(padded, p)) return true;
  }
  return false;
}

bool needs_patient(Intent intent) {
  return intent == Intent::kPredict || intent == Intent::kExplainImportance ||
         intent == Intent::kCounterfactual || intent == Intent::kRecommendation;
}

}  // namespace

nlohmann::json ParsedCommand::to_json() const {
  nlohmann::json args = nlohmann::json::object();
  if (patient_id) args["patient_id"] = *patient_id;
  if (feature) args["feature"] = *feature;
  if (target_class) args["class"] = *target_class;
  if (count) args["count"] = *count;
  if (evidence_kind) args["kind"] = std::string(to_string(*evidence_kind));
  return {{"action", std::string(to_string(action))}, {"args", std::move(args)}};
}

std::map<std::string, std::string> default_feature_synonyms() {
  return {
      {"pregnancies", "Pregnancies"},
      {"pregnancy", "Pregnancies"},
      {"pregnant", "Pregnancies"},
      {"times pregnant", "Pregnancies"},
      {"number of pregnancies", "Pregnancies"},
      {"glucose", "Glucose"},
      {"blood sugar", "Glucose"},
      {"sugar", "Glucose"},
      {"plasma glucose", "Glucose"},
      {"glucose level", "Glucose"},
      {"blood pressure", "BloodPressure"},
      {"bloodpressure", "BloodPressure"},
      {"diastolic", "BloodPressure"},
      {"bp", "BloodPressure"},
      {"hypertension", "BloodPressure"},
      {"skin thickness", "SkinThickness"},
      {"skinthickness", "SkinThickness"},
      {"skinfold", "SkinThickness"},
      {"skin fold", "SkinThickness"},
      {"triceps", "SkinThickness"},
      {"insulin", "Insulin"},
      {"serum insulin", "Insulin"},
      {"bmi", "BMI"},
      {"body mass index", "BMI"},
      {"body mass", "BMI"},
      {"weight", "BMI"},
      {"diabetespedigreefunction", "DiabetesPedigreeFunction"},
      {"diabetes pedigree function", "DiabetesPedigreeFunction"},
      {"diabetes pedigree", "DiabetesPedigreeFunction"},
      {"pedigree", "DiabetesPedigreeFunction"},
      {"family history", "DiabetesPedigreeFunction"},
      {"dpf", "DiabetesPedigreeFunction"},
      {"genetics", "DiabetesPedigreeFunction"},
      {"age", "Age"},
      {"years old", "Age"},
  };
}

GrammarParser::GrammarParser(const FeatureSchema& schema,
                             std::map<std::string, std::string> synonyms) {
  for (const auto& f : schema.features()) synonyms.emplace(normalize_text(f.name), f.name);
  for (auto& [phrase, name] : synonyms) {
    if (!schema.index_of(name)) {
      throw ConfigError("synonym '" + phrase + "' names unknown feature " + name);
    }
    const auto norm = normalize_text(phrase);
    if (!norm.empty()) phrases_.emplace_back(norm, name);
  }
  std::stable_sort(phrases_.begin(), phrases_.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });
}

std::optional<std::string> GrammarParser::resolve_feature(std::string_view normalized_text) const {
  std::string padded = " ";
  padded += normalized_text;
  padded += ' ';
  for (const auto& [phrase, name] : phrases_) {
    if (has_phrase(padded, phrase)) return name;
  }
  return std::nullopt;
}

ParseOutcome GrammarParser::parse(std::string_view text, Intent intent,
                                  std::optional<std::int64_t> session_patient) const {
  const std::string norm = normalize_text(text);
  const std::string padded = " " + norm + " ";

  ParsedCommand cmd;
  cmd.action = intent;
  cmd.patient_id = find_patient_id(text, norm);
  if (!cmd.patient_id) cmd.patient_id = session_patient;
  if (cmd.patient_id && *cmd.patient_id < 0) return {std::nullopt, "negative patient id"};

  switch (intent) {
    case Intent::kPredict:
    case Intent::kCounterfactual:
    case Intent::kRecommendation:
      break;
    case Intent::kExplainImportance:
      cmd.count = find_count(norm);
      break;
    case Intent::kExplainRange:
      cmd.feature = resolve_feature(norm);
      cmd.target_class = find_class(padded);
      break;
    case Intent::kDataSummary:
      cmd.feature = resolve_feature(norm);
      cmd.target_class = find_class(padded);
      break;
    case Intent::kEvidenceRequest:
      cmd.feature = resolve_feature(norm);
      cmd.evidence_kind = mentions_range(padded) ? EvidenceKind::kRange : EvidenceKind::kImportance;
      break;
  }

  if (needs_patient(intent) && !cmd.patient_id) {
    return {std::nullopt, "no patient id in query and no patient selected"};
  }
  if (intent == Intent::kEvidenceRequest && !cmd.feature) {
    return {std::nullopt, "no recognizable feature in evidence request"};
  }
  return {std::move(cmd), {}};
}

}  // namespace riskscope::router
