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

#include "riskscope/service/engine.h"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>

#include "riskscope/error.h"
#include "riskscope/fudge.h"
#include "riskscope/kernel_shap.h"
#include "riskscope/model.h"
#include "riskscope/util/sha256.h"

namespace riskscope::service {
namespace {

using nlohmann::json;

std::string printf_string(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

std::string printf_string(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list copy;
  va_copy(copy, args);
  const int n = std::vsnprintf(nullptr, 0, fmt, copy);
  va_end(copy);
  std::string out(static_cast<std::size_t>(std::max(n, 0)), '\0');
  std::vsnprintf(out.data(), out.size() + 1, fmt, args);
  va_end(args);
  return out;
}

json read_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + path.string());
  try {
    json doc;
    in >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

std::string with_unit(double v, const std::string& unit) {
  auto s = printf_string("%.1f", v);
  if (!unit.empty()) s += " " + unit;
  return s;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string risk_word(double p) { return p >= 0.5 ? "high" : "low"; }

template <typename Fn>
auto load_step(const char* artifact, Fn&& fn) {
  try {
    return fn();
  } catch (const ArtifactError&) {
    throw;
  } catch (const std::exception& e) {
    throw ArtifactError(artifact, e.what());
  }
}

}  // namespace

ThresholdConfig ThresholdConfig::from_json(const json& doc, const FeatureSchema& schema) {
  if (!doc.is_object() || !doc.contains("bands") || !doc["bands"].is_object()) {
    throw ConfigError("thresholds: expected an object with a 'bands' object");
  }
  std::map<std::string, ThresholdBand, std::less<>> bands;
  for (const auto& [name, b] : doc["bands"].items()) {
    if (!schema.index_of(name)) throw ConfigError("thresholds: unknown feature " + name);
    ThresholdBand band;
    try {
      band.warning = b.at("warning").get<double>();
      band.critical = b.at("critical").get<double>();
      band.warning_label = b.value("warning_label", std::string("warning"));
      band.critical_label = b.value("critical_label", std::string("critical"));
    } catch (const json::exception& e) {
      throw ConfigError("thresholds." + name + ": " + e.what());
    }
    if (!(band.warning <= band.critical)) {
      throw ConfigError("thresholds." + name + ": warning must not exceed critical");
    }
    bands.emplace(name, std::move(band));
  }
  return ThresholdConfig(std::move(bands));
}

ThresholdConfig ThresholdConfig::load(const std::filesystem::path& path,
                                      const FeatureSchema& schema) {
  return from_json(read_json_file(path, "thresholds"), schema);
}

const ThresholdBand* ThresholdConfig::find(std::string_view feature) const {
  auto it = bands_.find(feature);
  return it == bands_.end() ? nullptr : &it->second;
}

ServiceConfig ServiceConfig::from_json(const json& doc, const std::filesystem::path& base) {
  if (!doc.is_object()) throw ConfigError("service config must be a JSON object");
  ServiceConfig cfg;
  auto path = [&](const char* key) {
    if (!doc.contains(key) || !doc[key].is_string()) {
      throw ConfigError(std::string("service config: missing path '") + key + "'");
    }
    std::filesystem::path p = doc[key].get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  cfg.model = path("model");
  cfg.data = path("data");
  cfg.kb = path("kb");
  cfg.corpus = path("corpus");
  cfg.router = path("router");
  cfg.step_rules = path("step_rules");
  cfg.thresholds = path("thresholds");
  cfg.log_dir = path("log_dir");
  if (doc.contains("port")) {
    if (!doc["port"].is_number_integer()) throw ConfigError("service config: port must be an integer");
    cfg.port = doc["port"].get<int>();
  }
  return cfg;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path, "service config"), path.parent_path());
}

EngineArtifacts load_artifacts(const ServiceConfig& config) {
  const auto schema = FeatureSchema::pima();
  auto dataset = load_step("data", [&] { return load_dataset(config.data, schema); });
  auto model = load_step("model", [&] {
    auto m = RiskModel::load(config.model);
    if (m.metadata().feature_names != schema.names()) {
      throw ConfigError("model feature names do not match the dataset schema");
    }
    return m;
  });
  auto kb = load_step("kb", [&] { return KnowledgeBase::load(config.kb); });
  auto corpus = load_step("corpus", [&] { return router::PromptCorpus::load(config.corpus); });
  auto matcher = load_step("router", [&] { return router::MatcherConfig::load(config.router); });
  auto rules = load_step("step_rules", [&] { return StepRules::load(config.step_rules, schema); });
  auto thresholds =
      load_step("thresholds", [&] { return ThresholdConfig::load(config.thresholds, schema); });

  std::map<std::string, std::string> checksums;
  for (const auto& [name, p] :
       {std::pair<const char*, const std::filesystem::path*>{"model", &config.model},
        {"data", &config.data},
        {"kb", &config.kb},
        {"corpus", &config.corpus},
        {"router", &config.router},
        {"step_rules", &config.step_rules},
        {"thresholds", &config.thresholds}}) {
    checksums[name] = "sha256:" + sha256_file(*p);
  }
  checksums["kb_content"] = kb.checksum();
  return EngineArtifacts{std::move(dataset), std::move(model),      std::move(kb),
                         std::move(corpus),  std::move(matcher),    std::move(rules),
                         std::move(thresholds), std::move(checksums)};
}

std::vector<std::vector<double>> explainer_background(const Dataset& dataset,
                                                      const RiskModel& model) {
  const auto& meta = model.metadata();
  std::vector<std::size_t> rows;
  if (meta.holdout > 0.0 && meta.holdout < 1.0 && meta.train_size + meta.test_size == dataset.size()) {
    try {
      rows = stratified_split(dataset, meta.holdout, meta.split_seed).train;
    } catch (const Error&) {
      rows.clear();
    }
  }
  return sample_background(dataset, rows, kDefaultBackgroundSize, kBackgroundSeed);
}

Engine::Engine(EngineArtifacts artifacts)
    : artifacts_(std::move(artifacts)),
      router_(artifacts_.corpus, artifacts_.matcher, artifacts_.dataset.schema()),
      scaling_(FeatureScaling::from_dataset(artifacts_.dataset)),
      background_(explainer_background(artifacts_.dataset, artifacts_.model)),
      bounds_(SearchBounds::from_dataset(artifacts_.dataset)) {
  std::vector<std::vector<double>> rows;
  rows.reserve(artifacts_.dataset.size());
  for (const auto& r : artifacts_.dataset.records()) rows.push_back(r.values);
  predictions_ = predict_batch(artifacts_.model, rows);
}

const PatientRecord& Engine::patient(std::int64_t id) const {
  const auto* r = artifacts_.dataset.find(id);
  if (r == nullptr) throw NotFound("unknown patient id " + std::to_string(id));
  return *r;
}

FaithfulnessReport Engine::importance_report(std::int64_t id, std::uint64_t seed) const {
  const auto& p = patient(id);
  const auto sel = SelectionConfig::defaults(schema().size());
  PerturbationConfig cfg;
  cfg.seed = seed;
  return select_explainer(ExplainerInputs{model(), scaling_, background_}, p.values, sel, cfg, id);
}

std::vector<std::string> Engine::top_features(const FaithfulnessReport& report) const {
  const auto order = rank_by_magnitude(report.selected_attribution().phi);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < report.top_k && i < order.size(); ++i) {
    out.push_back(schema()[order[i]].name);
  }
  return out;
}

FeatureRangeReport Engine::range_report(std::int64_t id, std::uint64_t seed) const {
  const auto& p = patient(id);
  const auto features = top_features(importance_report(id, seed));
  return build_range_report(dataset(), predictions_, model().predict(p.values), features, kb());
}

FeatureRangeReport Engine::class_range_report(int predicted_class,
                                              std::span<const std::string> features) const {
  return build_range_report(dataset(), predictions_, predicted_class, features, kb());
}

CounterfactualResult Engine::counterfactuals(std::int64_t id) const {
  const auto& p = patient(id);
  auto result = generate_counterfactual(model(), p.values, schema(), bounds_);
  result.candidates = filter_immutable(std::move(result.candidates), schema());
  if (result.status == CounterfactualStatus::kFound && result.candidates.empty()) {
    result.status = CounterfactualStatus::kNoFeasiblePlan;
  }
  return result;
}

Engine::Recommendation Engine::recommendation(std::int64_t id) const {
  const auto& p = patient(id);
  Recommendation rec{counterfactuals(id), std::nullopt};
  for (const auto& c : rec.search.candidates) {
    try {
      rec.plan = decompose_steps(model(), p.values, c, schema(), artifacts_.step_rules, id);
      break;
    } catch (const InvalidArgument&) {
      continue;
    }
  }
  return rec;
}

json Engine::health() const {
  return {{"status", "ok"},
          {"version", kServiceVersion},
          {"checksums", checksums()},
          {"kb_version", kb().version()},
          {"records", dataset().size()},
          {"model",
           {{"trees", model().trees().size()},
            {"test_accuracy", model().metadata().test_accuracy}}},
          {"router_threshold", router_.config().threshold}};
}

json Engine::patient_view(std::int64_t id) const {
  const auto& p = patient(id);
  const double prob = model().predict_proba(p.values);
  json features = json::array();
  for (std::size_t j = 0; j < schema().size(); ++j) {
    const auto& spec = schema()[j];
    const auto& summary = dataset().summary(j);
    json panel = {{"name", spec.name},
                  {"unit", spec.unit},
                  {"value", p.values[j]},
                  {"min", summary.min},
                  {"max", summary.max},
                  {"actionable", spec.actionable},
                  {"histogram",
                   {{"edges", summary.histogram.edges}, {"counts", summary.histogram.counts}}}};
    json bands = json::array();
    if (const auto* band = artifacts_.thresholds.find(spec.name)) {
      bands.push_back({{"level", "warning"}, {"from", band->warning}, {"label", band->warning_label}});
      bands.push_back(
          {{"level", "critical"}, {"from", band->critical}, {"label", band->critical_label}});
    }
    panel["bands"] = std::move(bands);
    features.push_back(std::move(panel));
  }
  json view = {{"patient_id", p.id},
               {"risk_probability", prob},
               {"risk_percent", std::round(prob * 1000.0) / 10.0},
               {"predicted_class", prob >= 0.5 ? 1 : 0},
               {"features", std::move(features)}};
  view["label"] = p.label ? json(*p.label) : json();
  return view;
}

json Engine::prediction_view(std::int64_t id) const {
  const auto& p = patient(id);
  const double prob = model().predict_proba(p.values);
  return {{"patient_id", p.id},
          {"probability", prob},
          {"risk_percent", std::round(prob * 1000.0) / 10.0},
          {"predicted_class", prob >= 0.5 ? 1 : 0},
          {"decision_threshold", 0.5}};
}

json Engine::importance_view(std::int64_t id, std::uint64_t seed) const {
  const auto report = importance_report(id, seed);
  const auto& phi = report.selected_attribution().phi;
  json bars = json::array();
  for (auto j : rank_by_magnitude(phi)) {
    bars.push_back({{"feature", schema()[j].name}, {"phi", phi[j]}});
  }
  return {{"patient_id", id},
          {"seed", seed},
          {"selected", report.selected},
          {"attribution", std::move(bars)},
          {"top_features", top_features(report)},
          {"report", report.to_json()}};
}

json Engine::ranges_view(std::int64_t id, std::uint64_t seed) const {
  const auto report = range_report(id, seed);
  return {{"patient_id", id}, {"seed", seed}, {"report", report.to_json()}};
}

json Engine::recommendation_view(std::int64_t id) const {
  const auto& p = patient(id);
  const auto rec = recommendation(id);
  json candidates = json::array();
  for (const auto& c : rec.search.candidates) {
    json changes = json::array();
    for (const auto& ch : c.changes) {
      changes.push_back({{"feature", ch.feature}, {"from", ch.from}, {"to", ch.to}});
    }
    candidates.push_back({{"changes", std::move(changes)}, {"probability_after", c.probability_after}});
  }
  return {{"patient_id", id},
          {"probability", model().predict_proba(p.values)},
          {"status", std::string(to_string(rec.search.status))},
          {"candidates", std::move(candidates)},
          {"plan", rec.plan ? rec.plan->to_json() : json()}};
}

json Engine::evidence_view(std::string_view feature, EvidenceKind kind) const {
  return json::parse(kb().serialized(feature, kind));
}

router::ActiveView Engine::active_view(router::ViewTag tag, std::optional<std::int64_t> patient_id,
                                       std::uint64_t seed) const {
  router::ActiveView view;
  view.tag = tag;
  const bool have_patient = patient_id && dataset().find(*patient_id) != nullptr;
  switch (tag) {
    case router::ViewTag::kRecord:
      if (have_patient) {
        view.data = patient_view(*patient_id);
        view.features = schema().names();
      }
      break;
    case router::ViewTag::kImportance:
      if (have_patient) {
        view.data = importance_view(*patient_id, seed);
        view.features = view.data["top_features"].get<std::vector<std::string>>();
      }
      break;
    case router::ViewTag::kRanges: {
      FeatureRangeReport report;
      if (have_patient) {
        report = range_report(*patient_id, seed);
      } else {
        std::vector<std::string> features;
        for (const auto* e : kb().entries()) {
          if (e->kind == EvidenceKind::kRange) features.push_back(e->feature);
        }
        report = class_range_report(1, features);
      }
      view.data = report.to_json();
      for (const auto& f : report.features) view.features.push_back(f.feature);
      break;
    }
    case router::ViewTag::kRecommendation:
      if (have_patient) {
        view.data = recommendation_view(*patient_id);
        const auto& plan = view.data["plan"];
        if (plan.is_object()) {
          for (const auto& step : plan["steps"]) {
            const auto name = step["feature"].get<std::string>();
            if (std::find(view.features.begin(), view.features.end(), name) == view.features.end()) {
              view.features.push_back(name);
            }
          }
        }
      }
      break;
  }
  return view;
}

std::string Engine::answer(const router::ParsedCommand& command, std::uint64_t seed) const {
  using router::Intent;
  if (command.patient_id && dataset().find(*command.patient_id) == nullptr) {
    return printf_string("Patient %lld was not found in the dataset.",
                         static_cast<long long>(*command.patient_id));
  }
  switch (command.action) {
    case Intent::kPredict:
      return answer_predict(*command.patient_id);
    case Intent::kExplainImportance:
      return answer_importance(*command.patient_id, command.count, seed);
    case Intent::kExplainRange:
      return answer_range(command, seed);
    case Intent::kCounterfactual:
      return answer_counterfactual(*command.patient_id);
    case Intent::kRecommendation:
      return answer_recommendation(*command.patient_id);
    case Intent::kDataSummary:
      return answer_data_summary(command);
    case Intent::kEvidenceRequest:
      return answer_evidence(command);
  }
  return {};
}

std::string Engine::answer_predict(std::int64_t id) const {
  const double p = model().predict_proba(patient(id).values);
  return printf_string("Patient %lld has a predicted diabetes risk of %.1f%% (%s risk, class %d).",
                       static_cast<long long>(id), p * 100.0, risk_word(p).c_str(),
                       p >= 0.5 ? 1 : 0);
}

std::string Engine::answer_importance(std::int64_t id, std::optional<int> count,
                                      std::uint64_t seed) const {
  const auto report = importance_report(id, seed);
  const auto& phi = report.selected_attribution().phi;
  const auto order = rank_by_magnitude(phi);
  const std::size_t n =
      std::min(order.size(), count ? static_cast<std::size_t>(*count) : report.top_k);
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = order[i];
    parts.push_back(printf_string("%zu. %s (%s risk, %+.3f)", i + 1, schema()[j].name.c_str(),
                                  phi[j] >= 0.0 ? "raises" : "lowers", phi[j]));
  }
  const auto& chosen = report.candidates[report.selected_index];
  return printf_string("Most influential factors for patient %lld: ", static_cast<long long>(id)) +
         join(parts, "; ") +
         printf_string(". Explainer %s was selected with faithfulness %.4f%s.",
                       report.selected.c_str(), chosen.faithfulness,
                       report.tiebreak_used ? " after a ranking tiebreak" : "");
}

std::string Engine::answer_range(const router::ParsedCommand& command, std::uint64_t seed) const {
  int cls = 1;
  if (command.target_class) {
    cls = *command.target_class;
  } else if (command.patient_id) {
    cls = model().predict(patient(*command.patient_id).values);
  }
  std::vector<std::string> features;
  if (command.feature) {
    features.push_back(*command.feature);
  } else if (command.patient_id) {
    features = top_features(importance_report(*command.patient_id, seed));
  } else {
    for (const auto* e : kb().entries()) {
      if (e->kind == EvidenceKind::kRange) features.push_back(e->feature);
    }
  }
  FeatureRangeReport report;
  try {
    report = class_range_report(cls, features);
  } catch (const DegenerateInput&) {
    return printf_string("No records are predicted in class %d, so no ranges can be observed.", cls);
  }
  std::vector<std::string> lines;
  for (const auto& f : report.features) {
    const auto& unit = schema()[schema().require_index(f.feature)].unit;
    std::string line = printf_string("%s: AI-observed range for class %d is %s to %s (%zu records%s)",
                                     f.feature.c_str(), cls, with_unit(f.ai.low, unit).c_str(),
                                     with_unit(f.ai.high, unit).c_str(), f.ai.n,
                                     f.ai.low_confidence ? ", low confidence" : "");
    if (f.sci) {
      line += printf_string("; scientific %s range is %s to %s; overlap %.2f.", f.sci_kind->c_str(),
                            with_unit(f.sci->low, unit).c_str(),
                            with_unit(f.sci->high, unit).c_str(), *f.overlap);
    } else {
      line += "; no scientific range is stored for this factor.";
    }
    lines.push_back(std::move(line));
  }
  if (lines.empty()) return "No factors were requested.";
  return join(lines, "\n");
}

std::string Engine::answer_counterfactual(std::int64_t id) const {
  const auto result = counterfactuals(id);
  switch (result.status) {
    case CounterfactualStatus::kNoChangeNeeded:
      return printf_string("Patient %lld is already predicted low risk; no change is needed.",
                           static_cast<long long>(id));
    case CounterfactualStatus::kNoFeasiblePlan:
      return printf_string(
          "No combination of up to %zu modifiable factors within the observed ranges lowers the "
          "prediction for patient %lld.",
          kMaxCounterfactualFeatures, static_cast<long long>(id));
    case CounterfactualStatus::kFound:
      break;
  }
  std::vector<std::string> lines;
  const std::size_t n = std::min<std::size_t>(result.candidates.size(), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = result.candidates[i];
    std::vector<std::string> changes;
    for (const auto& ch : c.changes) {
      const auto& unit = schema()[ch.index].unit;
      changes.push_back(ch.feature + " " + with_unit(ch.from, unit) + " to " + with_unit(ch.to, unit));
    }
    lines.push_back(printf_string("Option %zu: ", i + 1) + join(changes, ", ") +
                    printf_string(" (predicted risk %.1f%%).", c.probability_after * 100.0));
  }
  return printf_string("Changes that would move patient %lld to low risk:\n",
                       static_cast<long long>(id)) +
         join(lines, "\n");
}

std::string Engine::answer_recommendation(std::int64_t id) const {
  const auto rec = recommendation(id);
  if (rec.search.status == CounterfactualStatus::kNoChangeNeeded) {
    return printf_string("Patient %lld is already predicted low risk; no change is needed.",
                         static_cast<long long>(id));
  }
  if (!rec.plan) {
    return printf_string("No feasible step plan was found for patient %lld.",
                         static_cast<long long>(id));
  }
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < rec.plan->steps.size(); ++i) {
    const auto& s = rec.plan->steps[i];
    const auto& unit = schema()[schema().require_index(s.feature)].unit;
    lines.push_back(printf_string("Step %zu (%s): %s %s by %s to %s; predicted risk %.1f%%.", i + 1,
                                  std::string(to_string(s.feasibility)).c_str(),
                                  s.delta < 0.0 ? "lower" : "raise", s.feature.c_str(),
                                  with_unit(std::fabs(s.delta), unit).c_str(),
                                  with_unit(s.cumulative_value, unit).c_str(),
                                  s.predicted_probability_after * 100.0));
  }
  return printf_string("Recommended plan for patient %lld:\n", static_cast<long long>(id)) +
         join(lines, "\n") + "\n" + rec.plan->horizon_note;
}

std::string Engine::answer_data_summary(const router::ParsedCommand& command) const {
  const auto& records = dataset().records();
  if (!command.feature) {
    std::size_t positives = 0;
    std::size_t predicted = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].label && *records[i].label == 1) ++positives;
      if (predictions_[i] == 1) ++predicted;
    }
    return printf_string(
        "The dataset holds %zu records with %zu features; %zu are labeled diabetic and the model "
        "predicts high risk for %zu.",
        records.size(), schema().size(), positives, predicted);
  }
  const auto j = schema().require_index(*command.feature);
  std::vector<double> values;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!command.target_class || predictions_[i] == *command.target_class) {
      values.push_back(records[i].values[j]);
    }
  }
  const std::string scope =
      command.target_class ? printf_string(" among records predicted class %d", *command.target_class)
                           : std::string(" across all records");
  if (values.empty()) return *command.feature + ": no records" + scope + ".";
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  const auto& unit = schema()[j].unit;
  return printf_string("%s%s (n=%zu): mean %s, median %s, min %s, max %s.", command.feature->c_str(),
                       scope.c_str(), values.size(),
                       with_unit(sum / static_cast<double>(values.size()), unit).c_str(),
                       with_unit(percentile_sorted(values, 0.5), unit).c_str(),
                       with_unit(values.front(), unit).c_str(),
                       with_unit(values.back(), unit).c_str());
}

std::string Engine::answer_evidence(const router::ParsedCommand& command) const {
  const auto kind = command.evidence_kind.value_or(EvidenceKind::kImportance);
  const auto* entry = kb().find(*command.feature, kind);
  if (entry == nullptr) {
    return printf_string("The knowledge base has no %s evidence for %s.",
                         std::string(to_string(kind)).c_str(), command.feature->c_str());
  }
  std::string out = entry->summary;
  if (entry->range) {
    out += printf_string("\nNormal: %.1f to %.1f %s. Diagnostic: %.1f to %.1f %s.",
                         entry->range->normal.low, entry->range->normal.high,
                         entry->range->units.c_str(), entry->range->diagnostic.low,
                         entry->range->diagnostic.high, entry->range->units.c_str());
  }
  for (const auto& c : entry->citations) {
    out += printf_string("\n%s %s (%s, %d). %s", c.marker.c_str(), c.title.c_str(),
                         std::string(to_string(c.source_type)).c_str(), c.year,
                         c.locator.c_str());
  }
  return out;
}

}  // namespace riskscope::service
