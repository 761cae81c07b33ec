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

// riskscope command line: training, explanations, ranges, recommendations,
// knowledge-base lint, router calibration and the HTTP service.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "riskscope/dataset.h"
#include "riskscope/error.h"
#include "riskscope/evidence.h"
#include "riskscope/gbdt.h"
#include "riskscope/ranges.h"
#include "riskscope/recommend.h"
#include "riskscope/router/matcher.h"
#include "riskscope/scaling.h"
#include "riskscope/selection.h"
#include "riskscope/service/engine.h"
#include "riskscope/service/server.h"

namespace {

using nlohmann::json;
using namespace riskscope;

service::ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

const PatientRecord& require_patient(const Dataset& data, std::int64_t id) {
  const auto* p = data.find(id);
  if (p == nullptr) throw NotFound("unknown patient id " + std::to_string(id));
  return *p;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    json doc;
    in >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw ConfigError(path + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"riskscope: explainable diabetes risk engine"};
  app.require_subcommand(1);

  // train
  std::string data_path = "data/diabetes.csv";
  std::string model_path = "models/pima_gbdt.json";
  std::string out_path;
  double holdout = 0.4;
  std::uint64_t seed = 42;
  BoostingConfig boosting;
  auto* train_cmd = app.add_subcommand("train", "Train the boosted-tree classifier");
  train_cmd->add_option("--data", data_path, "CSV with the Outcome column")->capture_default_str();
  train_cmd->add_option("--out", out_path, "Model JSON to write")->required();
  train_cmd->add_option("--holdout", holdout, "Stratified test fraction")->capture_default_str();
  train_cmd->add_option("--seed", seed, "Split and boosting seed")->capture_default_str();
  train_cmd->add_option("--trees", boosting.n_trees)->capture_default_str();
  train_cmd->add_option("--depth", boosting.max_depth)->capture_default_str();
  train_cmd->add_option("--learning-rate", boosting.learning_rate)->capture_default_str();

  // explain
  std::int64_t patient_id = 0;
  std::size_t n_samples = 1000;
  auto* explain_cmd = app.add_subcommand("explain", "Faithfulness-selected attribution for a patient");
  explain_cmd->add_option("--model", model_path)->capture_default_str();
  explain_cmd->add_option("--data", data_path)->capture_default_str();
  explain_cmd->add_option("--patient", patient_id, "0-based record id")->required();
  explain_cmd->add_option("--seed", seed)->capture_default_str();
  explain_cmd->add_option("--samples", n_samples, "Noise draws per fudge score")->capture_default_str();

  // ranges
  int target_class = 1;
  std::string kb_path = "config/kb.json";
  std::vector<std::string> features;
  double lower_q = 0.25;
  double upper_q = 0.75;
  auto* ranges_cmd = app.add_subcommand("ranges", "AI-observed vs scientific ranges for a class");
  ranges_cmd->add_option("--model", model_path)->capture_default_str();
  ranges_cmd->add_option("--data", data_path)->capture_default_str();
  ranges_cmd->add_option("--class", target_class)->check(CLI::Range(0, 1))->capture_default_str();
  ranges_cmd->add_option("--kb", kb_path)->capture_default_str();
  ranges_cmd->add_option("--features", features, "Defaults to every feature")->delimiter(',');
  ranges_cmd->add_option("--lower", lower_q)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ranges_cmd->add_option("--upper", upper_q)->check(CLI::Range(0.0, 1.0))->capture_default_str();

  // recommend
  std::string rules_path = "config/step_rules.json";
  auto* recommend_cmd = app.add_subcommand("recommend", "Step plan that lowers the predicted risk");
  recommend_cmd->add_option("--model", model_path)->capture_default_str();
  recommend_cmd->add_option("--data", data_path)->capture_default_str();
  recommend_cmd->add_option("--patient", patient_id)->required();
  recommend_cmd->add_option("--rules", rules_path)->capture_default_str();

  // kb-lint
  std::string lint_path;
  bool rehash = false;
  auto* lint_cmd = app.add_subcommand("kb-lint", "Validate a knowledge-base file");
  lint_cmd->add_option("file", lint_path)->required();
  lint_cmd->add_flag("--rehash", rehash, "Rewrite the checksum after editing entries");

  // calibrate
  std::string corpus_path = "config/prompts.json";
  std::string labeled_path = "config/calibration.json";
  std::string router_out;
  bool verbose = false;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate the router similarity threshold");
  calibrate_cmd->add_option("--corpus", corpus_path)->capture_default_str();
  calibrate_cmd->add_option("--labeled", labeled_path)->capture_default_str();
  calibrate_cmd->add_option("--out", router_out, "Write the router config here");
  calibrate_cmd->add_flag("--verbose", verbose, "List every item with its similarity");

  // serve
  std::string config_path = "config/service.json";
  int port = -1;
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--config", config_path)->capture_default_str();
  serve_cmd->add_option("--port", port, "Overrides the config port");
  serve_cmd->add_option("--host", host)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto schema = FeatureSchema::pima();

    if (*train_cmd) {
      boosting.seed = seed;
      const auto data = load_dataset(data_path, schema);
      const auto model = train(data, boosting, SplitConfig{holdout, seed});
      model.save(out_path);
      const auto& meta = model.metadata();
      std::printf("trained %zu trees on %zu records, test accuracy %.4f on %zu records\n",
                  model.trees().size(), meta.train_size, meta.test_accuracy, meta.test_size);
      return 0;
    }

    if (*explain_cmd) {
      const auto data = load_dataset(data_path, schema);
      const auto model = RiskModel::load(model_path);
      const auto& p = require_patient(data, patient_id);
      const auto scaling = FeatureScaling::from_dataset(data);
      const auto background = service::explainer_background(data, model);
      PerturbationConfig cfg;
      cfg.seed = seed;
      cfg.n_samples = n_samples;
      const auto report = select_explainer(ExplainerInputs{model, scaling, background}, p.values,
                                           SelectionConfig::defaults(schema.size()), cfg, p.id);
      json out = report.to_json();
      out["patient_id"] = p.id;
      out["probability"] = model.predict_proba(p.values);
      out["feature_names"] = schema.names();
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*ranges_cmd) {
      if (lower_q > upper_q) throw InvalidArgument("--lower must not exceed --upper");
      const auto data = load_dataset(data_path, schema);
      const auto model = RiskModel::load(model_path);
      const auto kb = KnowledgeBase::load(kb_path);
      if (features.empty()) features = schema.names();
      for (const auto& f : features) schema.require_index(f);
      std::vector<std::vector<double>> rows;
      for (const auto& r : data.records()) rows.push_back(r.values);
      const auto predictions = predict_batch(model, rows);
      json out;
      if (lower_q == 0.25 && upper_q == 0.75) {
        out = build_range_report(data, predictions, target_class, features, kb).to_json();
      } else {
        out = {{"predicted_class", target_class}, {"features", json::array()}};
        for (const auto& [name, r] :
             compute_ai_ranges(data, predictions, target_class, features, lower_q, upper_q)) {
          out["features"].push_back({{"feature", name},
                                     {"ai_low", r.low},
                                     {"ai_high", r.high},
                                     {"n_class_samples", r.n},
                                     {"low_confidence", r.low_confidence}});
        }
        out["lower_q"] = lower_q;
        out["upper_q"] = upper_q;
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*recommend_cmd) {
      const auto data = load_dataset(data_path, schema);
      const auto model = RiskModel::load(model_path);
      const auto rules = StepRules::load(rules_path, schema);
      const auto& p = require_patient(data, patient_id);
      auto result = generate_counterfactual(model, p.values, schema, SearchBounds::from_dataset(data));
      result.candidates = filter_immutable(std::move(result.candidates), schema);
      json out = {{"patient_id", p.id},
                  {"probability", model.predict_proba(p.values)},
                  {"status", std::string(to_string(result.status))},
                  {"plan", nullptr}};
      for (const auto& c : result.candidates) {
        try {
          out["plan"] = decompose_steps(model, p.values, c, schema, rules, p.id).to_json();
          break;
        } catch (const InvalidArgument&) {
          continue;
        }
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*lint_cmd) {
      auto doc = read_json(lint_path);
      if (rehash) {
        if (!doc.is_object() || !doc.contains("version") || !doc.contains("entries")) {
          std::fprintf(stderr, "%s: cannot rehash without version and entries\n", lint_path.c_str());
          return 1;
        }
        doc["checksum"] = compute_kb_checksum(doc);
      }
      const auto problems = lint_kb(doc);
      for (const auto& p : problems) std::fprintf(stderr, "%s: %s\n", lint_path.c_str(), p.c_str());
      if (!problems.empty()) return 1;
      if (rehash) write_json(lint_path, doc);
      std::printf("%s: ok, %zu entries, version %s, %s\n", lint_path.c_str(), doc["entries"].size(),
                  doc["version"].get<std::string>().c_str(),
                  doc["checksum"].get<std::string>().c_str());
      return 0;
    }

    if (*calibrate_cmd) {
      const auto corpus = router::PromptCorpus::load(corpus_path);
      const auto labeled = router::load_labeled_set(labeled_path);
      const router::IntentMatcher matcher(corpus);
      const auto items = router::score_labeled_set(matcher, labeled);
      const auto best = router::calibrate_from_scores(items);
      std::size_t in_scope = 0;
      for (const auto& q : labeled) in_scope += q.in_scope ? 1 : 0;
      router::MatcherConfig cfg;
      cfg.threshold = best.threshold;
      cfg.calibration = {{"labeled_items", labeled.size()},
                         {"in_scope_items", in_scope},
                         {"accuracy", best.accuracy},
                         {"grid_step", 0.01},
                         {"corpus_entries", corpus.size()}};
      if (!router_out.empty()) write_json(router_out, cfg.to_json());
      if (verbose) {
        for (std::size_t i = 0; i < labeled.size(); ++i) {
          const auto m = matcher.match(labeled[i].text);
          std::printf("%.3f %-4s %-19s %s\n", items[i].similarity,
                      labeled[i].in_scope ? (items[i].intent_correct ? "in" : "in!") : "out",
                      std::string(router::to_string(m.intent)).c_str(), labeled[i].text.c_str());
        }
      }
      std::printf("threshold %.2f, routing accuracy %.4f on %zu items\n", best.threshold,
                  best.accuracy, labeled.size());
      return 0;
    }

    if (*serve_cmd) {
      const auto cfg = service::ServiceConfig::load(config_path);
      service::Engine engine(service::load_artifacts(cfg));
      service::SessionStore sessions;
      service::EventLog log(cfg.log_dir);
      auto client = router::HttpChatClient::from_environment();
      service::ApiServer server(engine, sessions, log, client.get());
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const int listen_port = port >= 0 ? port : cfg.port;
      std::printf("serving on %s:%d (fallback %s)\n", host.c_str(), listen_port,
                  client ? "configured" : "not configured");
      std::fflush(stdout);
      if (!server.listen(host, listen_port)) {
        std::fprintf(stderr, "cannot bind %s:%d\n", host.c_str(), listen_port);
        return 1;
      }
      return 0;
    }
  } catch (const service::ArtifactError& e) {
    std::fprintf(stderr, "startup refused: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
