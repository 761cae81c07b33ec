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

#include "riskscope/recommend.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "riskscope/error.h"
#include "riskscope/ranges.h"

namespace riskscope {
namespace {

using nlohmann::json;

double direction_sign(HealthyDirection d) {
  switch (d) {
    case HealthyDirection::kDecrease: return -1.0;
    case HealthyDirection::kIncrease: return 1.0;
    case HealthyDirection::kNone: return 0.0;
  }
  return 0.0;
}

bool movable(const FeatureSpec& f) {
  return f.actionable && f.healthy_direction != HealthyDirection::kNone;
}

// Candidate value after k grid steps, or nullopt once it would leave the box
// on the side the feature moves towards.
std::optional<double> grid_value(double start, std::size_t j, int k, double sign,
                                 const SearchBounds& bounds) {
  if (!(bounds.grid_step[j] > 0.0)) return std::nullopt;
  const double v = start + sign * static_cast<double>(k) * bounds.grid_step[j];
  if (sign < 0 && v < bounds.low[j]) return std::nullopt;
  if (sign > 0 && v > bounds.high[j]) return std::nullopt;
  return v;
}

std::optional<Counterfactual> greedy_search(const ProbabilityModel& model,
                                            std::span<const double> x,
                                            const FeatureSchema& schema,
                                            const SearchBounds& bounds,
                                            const std::vector<std::size_t>& features) {
  std::vector<double> current(x.begin(), x.end());
  std::vector<int> steps(x.size(), 0);
  std::vector<double> trial(x.size());
  double p = model.predict_proba(current);
  while (p >= 0.5) {
    std::optional<std::size_t> best;
    double best_p = p;
    double best_value = 0.0;
    for (auto j : features) {
      const double sign = direction_sign(schema[j].healthy_direction);
      auto next = grid_value(x[j], j, steps[j] + 1, sign, bounds);
      if (!next) continue;
      trial = current;
      trial[j] = *next;
      const double tp = model.predict_proba(trial);
      if (!best || tp < best_p) {
        best = j;
        best_p = tp;
        best_value = *next;
      }
    }
    if (!best) return std::nullopt;
    current[*best] = best_value;
    ++steps[*best];
    p = best_p;
  }
  Counterfactual cf;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (steps[j] > 0) cf.changes.push_back({schema[j].name, j, x[j], current[j]});
  }
  cf.probability_after = p;
  return cf;
}

void combinations(const std::vector<std::size_t>& pool, std::size_t size, std::size_t start,
                  std::vector<std::size_t>& current,
                  std::vector<std::vector<std::size_t>>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < pool.size(); ++i) {
    current.push_back(pool[i]);
    combinations(pool, size, i + 1, current, out);
    current.pop_back();
  }
}

double normalized_change(const Counterfactual& cf, const SearchBounds& bounds) {
  double total = 0.0;
  for (const auto& c : cf.changes) {
    const double range = bounds.grid_step[c.index] * 20.0;
    total += range > 0.0 ? std::abs(c.delta()) / range : 0.0;
  }
  return total;
}

}  // namespace

std::string_view to_string(Feasibility f) {
  switch (f) {
    case Feasibility::kEasy: return "easy";
    case Feasibility::kModerate: return "moderate";
    case Feasibility::kHard: return "hard";
  }
  return "hard";
}

std::string_view to_string(CounterfactualStatus s) {
  switch (s) {
    case CounterfactualStatus::kFound: return "found";
    case CounterfactualStatus::kNoChangeNeeded: return "no_change_needed";
    case CounterfactualStatus::kNoFeasiblePlan: return "no_feasible_plan";
  }
  return "no_feasible_plan";
}

StepRules StepRules::from_json(const json& doc, const FeatureSchema& schema) {
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_object()) {
    throw ConfigError("step rules: expected an object with a 'rules' object");
  }
  std::map<std::string, StepRule, std::less<>> rules;
  for (const auto& [name, r] : doc["rules"].items()) {
    if (!schema.index_of(name)) throw ConfigError("step rules: unknown feature '" + name + "'");
    StepRule rule;
    try {
      rule = {r.at("max_step").get<double>(), r.at("easy_max").get<double>(),
              r.at("moderate_max").get<double>()};
    } catch (const json::exception& e) {
      throw ConfigError("step rules: malformed rule for '" + name + "': " + e.what());
    }
    if (!(rule.max_step > 0.0)) throw ConfigError("step rules: max_step for '" + name + "' must be > 0");
    if (!(rule.easy_max >= 0.0 && rule.easy_max <= rule.moderate_max)) {
      throw ConfigError("step rules: '" + name + "' needs 0 <= easy_max <= moderate_max");
    }
    rules.emplace(name, rule);
  }
  for (const auto& f : schema.features()) {
    if (movable(f) && !rules.contains(f.name)) {
      throw ConfigError("step rules: actionable feature '" + f.name + "' has no rule");
    }
  }
  return StepRules(std::move(rules));
}

StepRules StepRules::load(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open step rules: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("step rules are not valid JSON: " + std::string(e.what()));
  }
  return from_json(doc, schema);
}

const StepRule& StepRules::at(std::string_view feature) const {
  auto it = rules_.find(feature);
  if (it == rules_.end()) throw ConfigError("no step rule for feature '" + std::string(feature) + "'");
  return it->second;
}

bool StepRules::contains(std::string_view feature) const { return rules_.find(feature) != rules_.end(); }

Feasibility badge_feasibility(double delta, const StepRule& rule) {
  const double magnitude = std::abs(delta);
  if (magnitude <= rule.easy_max) return Feasibility::kEasy;
  if (magnitude <= rule.moderate_max) return Feasibility::kModerate;
  return Feasibility::kHard;
}

bool Counterfactual::touches(std::size_t feature) const {
  return std::any_of(changes.begin(), changes.end(),
                     [&](const FeatureChange& c) { return c.index == feature; });
}

SearchBounds SearchBounds::from_dataset(const Dataset& dataset) {
  const std::size_t d = dataset.schema().size();
  SearchBounds b;
  b.low.assign(d, 0.0);
  b.high.assign(d, 0.0);
  b.grid_step.assign(d, 0.0);
  if (dataset.empty()) return b;
  for (std::size_t j = 0; j < d; ++j) {
    auto col = dataset.column(j);
    std::sort(col.begin(), col.end());
    b.low[j] = percentile_sorted(col, 0.01);
    b.high[j] = percentile_sorted(col, 0.99);
    b.grid_step[j] = (dataset.summary(j).max - dataset.summary(j).min) / 20.0;
  }
  return b;
}

CounterfactualResult generate_counterfactual(const ProbabilityModel& model,
                                             std::span<const double> x,
                                             const FeatureSchema& schema,
                                             const SearchBounds& bounds,
                                             std::size_t max_features) {
  validate_instance(x, schema.size());
  if (model.num_features() != schema.size()) throw InvalidArgument("model and schema disagree on d");
  CounterfactualResult result;
  if (model.predict(x) == 0) {
    result.status = CounterfactualStatus::kNoChangeNeeded;
    return result;
  }

  std::vector<std::size_t> pool;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (movable(schema[j])) pool.push_back(j);
  }
  std::set<std::vector<std::pair<std::size_t, double>>> seen;
  std::vector<Counterfactual> found;
  for (std::size_t size = 1; size <= std::min(max_features, pool.size()); ++size) {
    std::vector<std::vector<std::size_t>> sets;
    std::vector<std::size_t> scratch;
    combinations(pool, size, 0, scratch, sets);
    for (const auto& set : sets) {
      auto cf = greedy_search(model, x, schema, bounds, set);
      if (!cf) continue;
      std::vector<std::pair<std::size_t, double>> key;
      for (const auto& c : cf->changes) key.emplace_back(c.index, c.to);
      if (seen.insert(key).second) found.push_back(std::move(*cf));
    }
  }
  std::stable_sort(found.begin(), found.end(), [&](const Counterfactual& a, const Counterfactual& b) {
    if (a.changes.size() != b.changes.size()) return a.changes.size() < b.changes.size();
    return normalized_change(a, bounds) < normalized_change(b, bounds);
  });
  result.candidates = std::move(found);
  result.status = result.candidates.empty() ? CounterfactualStatus::kNoFeasiblePlan
                                            : CounterfactualStatus::kFound;
  return result;
}

std::vector<Counterfactual> filter_immutable(std::vector<Counterfactual> candidates,
                                             const FeatureSchema& schema) {
  std::erase_if(candidates, [&](const Counterfactual& cf) {
    return std::any_of(cf.changes.begin(), cf.changes.end(), [&](const FeatureChange& c) {
      auto idx = schema.index_of(c.feature);
      return !idx || !schema[*idx].actionable;
    });
  });
  return candidates;
}

std::vector<double> split_delta(double delta, double max_step) {
  if (!(max_step > 0.0) || !std::isfinite(max_step)) {
    throw InvalidArgument("step limit must be a positive number");
  }
  std::vector<double> out;
  const double sign = delta < 0 ? -1.0 : 1.0;
  const double magnitude = std::abs(delta);
  const auto full = static_cast<std::size_t>(std::floor(magnitude / max_step));
  for (std::size_t i = 0; i < full; ++i) out.push_back(sign * max_step);
  const double remainder = magnitude - static_cast<double>(full) * max_step;
  if (remainder > 1e-12 * std::max(1.0, magnitude)) out.push_back(sign * remainder);
  return out;
}

RecommendationPlan decompose_steps(const ProbabilityModel& model, std::span<const double> x,
                                   const Counterfactual& candidate, const FeatureSchema& schema,
                                   const StepRules& rules, std::int64_t patient) {
  validate_instance(x, schema.size());
  std::vector<double> target(x.begin(), x.end());
  for (const auto& c : candidate.changes) {
    const auto idx = schema.index_of(c.feature);
    if (!idx || *idx != c.index) throw InvalidArgument("change names an unknown feature: " + c.feature);
    if (!schema[c.index].actionable) {
      throw InvalidArgument("change touches immutable feature " + c.feature);
    }
    const double sign = direction_sign(schema[c.index].healthy_direction);
    if (c.delta() * sign < 0.0) {
      throw InvalidArgument("change to " + c.feature + " moves against its healthy direction");
    }
    target[c.index] = c.to;
  }
  if (model.predict(target) != 0) throw InvalidArgument("candidate does not flip the prediction");

  struct Pending {
    std::size_t change;
    std::size_t piece;
    std::size_t pieces;
    double delta;
    Feasibility badge;
  };
  std::vector<Pending> pending;
  for (std::size_t ci = 0; ci < candidate.changes.size(); ++ci) {
    const auto& c = candidate.changes[ci];
    const StepRule& rule = rules.at(c.feature);
    const auto pieces = split_delta(c.delta(), rule.max_step);
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      pending.push_back({ci, p, pieces.size(), pieces[p], badge_feasibility(pieces[p], rule)});
    }
  }
  if (pending.empty()) throw InvalidArgument("candidate contains no change");
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return static_cast<int>(a.badge) < static_cast<int>(b.badge);
  });

  RecommendationPlan plan;
  plan.patient = patient;
  std::vector<double> current(x.begin(), x.end());
  std::vector<std::size_t> applied(candidate.changes.size(), 0);
  for (const auto& step : pending) {
    const auto& c = candidate.changes[step.change];
    // The final piece of a change lands exactly on the target value.
    ++applied[step.change];
    current[c.index] = applied[step.change] == step.pieces ? c.to : current[c.index] + step.delta;
    const double p = model.predict_proba(current);
    plan.steps.push_back({c.feature, step.delta, current[c.index], step.badge, p});
    if (p < 0.5) {
      plan.flips_at_step = plan.steps.size();
      break;
    }
  }
  char note[128];
  std::snprintf(note, sizeof(note), "Predicted low risk after %zu of %zu steps (risk %.1f%%).",
                plan.flips_at_step, pending.size(),
                100.0 * plan.steps.back().predicted_probability_after);
  plan.horizon_note = note;
  return plan;
}

json RecommendationPlan::to_json() const {
  json list = json::array();
  for (const auto& s : steps) {
    list.push_back({{"feature", s.feature},
                    {"delta", s.delta},
                    {"cumulative_value", s.cumulative_value},
                    {"feasibility", to_string(s.feasibility)},
                    {"predicted_probability_after", s.predicted_probability_after}});
  }
  return {{"patient", patient},
          {"steps", std::move(list)},
          {"flips_at_step", flips_at_step},
          {"horizon_note", horizon_note}};
}

}  // namespace riskscope
