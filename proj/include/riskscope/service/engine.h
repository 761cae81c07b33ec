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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "riskscope/dataset.h"
#include "riskscope/error.h"
#include "riskscope/evidence.h"
#include "riskscope/gbdt.h"
#include "riskscope/ranges.h"
#include "riskscope/recommend.h"
#include "riskscope/router/context.h"
#include "riskscope/router/grammar.h"
#include "riskscope/router/router.h"
#include "riskscope/scaling.h"
#include "riskscope/selection.h"

namespace riskscope::service {

inline constexpr const char* kServiceVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultRequestSeed = 42;

// Warning / critical levels for one feature (values at or above each level).
struct ThresholdBand {
  double warning = 0.0;
  double critical = 0.0;
  std::string warning_label;
  std::string critical_label;
};

class ThresholdConfig {
 public:
  ThresholdConfig() = default;
  explicit ThresholdConfig(std::map<std::string, ThresholdBand, std::less<>> bands)
      : bands_(std::move(bands)) {}

  // Names must exist in the schema and warning <= critical.
  static ThresholdConfig from_json(const nlohmann::json& doc, const FeatureSchema& schema);
  static ThresholdConfig load(const std::filesystem::path& path, const FeatureSchema& schema);

  const ThresholdBand* find(std::string_view feature) const;

 private:
  std::map<std::string, ThresholdBand, std::less<>> bands_;
};

// Artifact paths; relative entries resolve against the config file's directory.
struct ServiceConfig {
  std::filesystem::path model;
  std::filesystem::path data;
  std::filesystem::path kb;
  std::filesystem::path corpus;
  std::filesystem::path router;
  std::filesystem::path step_rules;
  std::filesystem::path thresholds;
  std::filesystem::path log_dir;
  int port = 8080;

  static ServiceConfig load(const std::filesystem::path& path);
  static ServiceConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base);
};

// Startup failure naming the artifact that did not validate.
class ArtifactError : public ConfigError {
 public:
  ArtifactError(std::string artifact, const std::string& message)
      : ConfigError("artifact '" + artifact + "' failed validation: " + message),
        artifact_(std::move(artifact)) {}
  const std::string& artifact() const { return artifact_; }

 private:
  std::string artifact_;
};

struct EngineArtifacts {
  Dataset dataset;
  RiskModel model;
  KnowledgeBase kb;
  router::PromptCorpus corpus;
  router::MatcherConfig matcher;
  StepRules step_rules;
  ThresholdConfig thresholds;
  std::map<std::string, std::string> checksums;
};

// Loads and validates every artifact; throws ArtifactError on the first failure.
EngineArtifacts load_artifacts(const ServiceConfig& config);

// KernelSHAP background: kDefaultBackgroundSize rows of the model's training
// partition (recomputed from its split metadata), seed kBackgroundSeed.
std::vector<std::vector<double>> explainer_background(const Dataset& dataset,
                                                      const RiskModel& model);

// Shared, immutable analysis engine behind the HTTP API and the CLI.
class Engine {
 public:
  explicit Engine(EngineArtifacts artifacts);

  const FeatureSchema& schema() const { return artifacts_.dataset.schema(); }
  const Dataset& dataset() const { return artifacts_.dataset; }
  const RiskModel& model() const { return artifacts_.model; }
  const KnowledgeBase& kb() const { return artifacts_.kb; }
  const router::Router& router() const { return router_; }
  const std::map<std::string, std::string>& checksums() const { return artifacts_.checksums; }

  // Throws NotFound.
  const PatientRecord& patient(std::int64_t id) const;

  FaithfulnessReport importance_report(std::int64_t id, std::uint64_t seed) const;
  std::vector<std::string> top_features(const FaithfulnessReport& report) const;
  FeatureRangeReport range_report(std::int64_t id, std::uint64_t seed) const;
  FeatureRangeReport class_range_report(int predicted_class,
                                        std::span<const std::string> features) const;
  CounterfactualResult counterfactuals(std::int64_t id) const;

  struct Recommendation {
    CounterfactualResult search;
    std::optional<RecommendationPlan> plan;
  };
  Recommendation recommendation(std::int64_t id) const;

  // View-models served by the API.
  nlohmann::json health() const;
  nlohmann::json patient_view(std::int64_t id) const;
  nlohmann::json prediction_view(std::int64_t id) const;
  nlohmann::json importance_view(std::int64_t id, std::uint64_t seed) const;
  nlohmann::json ranges_view(std::int64_t id, std::uint64_t seed) const;
  nlohmann::json recommendation_view(std::int64_t id) const;
  nlohmann::json evidence_view(std::string_view feature, EvidenceKind kind) const;

  // What the dashboard shows for a view tag; feeds the fallback context.
  router::ActiveView active_view(router::ViewTag tag, std::optional<std::int64_t> patient,
                                 std::uint64_t seed) const;

  // Fixed-template answer for a grammar-routed command.
  std::string answer(const router::ParsedCommand& command, std::uint64_t seed) const;

 private:
  std::string answer_predict(std::int64_t id) const;
  std::string answer_importance(std::int64_t id, std::optional<int> count,
                                std::uint64_t seed) const;
  std::string answer_range(const router::ParsedCommand& command, std::uint64_t seed) const;
  std::string answer_counterfactual(std::int64_t id) const;
  std::string answer_recommendation(std::int64_t id) const;
  std::string answer_data_summary(const router::ParsedCommand& command) const;
  std::string answer_evidence(const router::ParsedCommand& command) const;

  EngineArtifacts artifacts_;
  router::Router router_;
  FeatureScaling scaling_;
  std::vector<std::vector<double>> background_;
  std::vector<int> predictions_;
  SearchBounds bounds_;
};

}  // namespace riskscope::service
