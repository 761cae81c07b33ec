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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "httplib.h"
#include "riskscope/error.h"
#include "riskscope/evidence.h"
#include "riskscope/router/context.h"
#include "riskscope/router/corpus.h"
#include "riskscope/router/fallback.h"
#include "riskscope/router/grammar.h"
#include "riskscope/router/matcher.h"
#include "riskscope/router/router.h"
#include "riskscope/router/vectorizer.h"
#include "test_support.h"

namespace riskscope::router {
namespace {

PromptCorpus bundled_corpus() {
  return PromptCorpus::load(riskscope::testing::source_path("config/prompts.json"));
}

MatcherConfig bundled_config() {
  return MatcherConfig::load(riskscope::testing::source_path("config/router.json"));
}

Router bundled_router() { return Router(bundled_corpus(), bundled_config(), FeatureSchema::pima()); }

// ---- vectorizer and matcher -------------------------------------------

TEST(Vectorizer, CosineBasics) {
  const std::vector<std::string> docs{"show glucose range", "predict patient risk", "top features"};
  const auto v = CharNgramTfidf::fit(docs);
  const auto a = v.transform("show glucose range");
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-12);
  EXPECT_EQ(cosine(a, v.transform("zzzz qqqq")), 0.0);
  EXPECT_EQ(normalize_text("  Why IS   patient #39?"), normalize_text("why is patient #39"));
}

TEST(Matcher, CorpusEntriesMatchThemselves) {
  const IntentMatcher matcher(bundled_corpus());
  for (const auto& e : matcher.corpus().entries()) {
    const auto m = matcher.match(e.text);
    EXPECT_NEAR(m.similarity, 1.0, 1e-12) << e.text;
    EXPECT_EQ(m.intent, e.intent) << e.text;
  }
}

TEST(Matcher, ExamplesAgainstCalibratedThreshold) {
  const IntentMatcher matcher(bundled_corpus());
  const double t = bundled_config().threshold;
  const auto in = matcher.match("which factors matter most for this patient");
  EXPECT_EQ(in.intent, Intent::kExplainImportance);
  EXPECT_GE(in.similarity, t);
  EXPECT_LT(matcher.match("what is the weather in Leuven").similarity, t);
  EXPECT_THROW(matcher.match("   "), InvalidArgument);
}

TEST(Matcher, Deterministic) {
  const IntentMatcher a(bundled_corpus());
  const IntentMatcher b(bundled_corpus());
  for (const char* q : {"show me the glucose range", "hello there", "what should this patient change"}) {
    const auto x = a.match(q);
    const auto y = b.match(q);
    EXPECT_EQ(x.similarity, y.similarity);
    EXPECT_EQ(x.entry, y.entry);
  }
}

TEST(Matcher, ExternalEmbeddingPlugsIn) {
  // two-dimensional toy embedding: counts of 'a' and 'b'
  auto embed = [](std::string_view s) {
    return std::vector<double>{static_cast<double>(std::count(s.begin(), s.end(), 'a')),
                               static_cast<double>(std::count(s.begin(), s.end(), 'b'))};
  };
  auto vec = std::make_shared<DenseEmbeddingVectorizer>("toy", embed);
  std::vector<PromptEntry> entries;
  const Intent intents[] = {Intent::kPredict,         Intent::kExplainImportance, Intent::kExplainRange,
                            Intent::kCounterfactual,  Intent::kRecommendation,    Intent::kDataSummary,
                            Intent::kEvidenceRequest};
  int n = 0;
  for (auto intent : intents) {
    for (int k = 0; k < 3; ++k, ++n) {
      entries.push_back({std::string(static_cast<std::size_t>(n + 1), 'a') + std::string(static_cast<std::size_t>(k), 'b') + std::to_string(n), intent});
    }
  }
  const IntentMatcher matcher(PromptCorpus(entries), vec);
  EXPECT_EQ(matcher.vectorizer().name(), "toy");
  const auto m = matcher.match(entries[4].text);
  EXPECT_NEAR(m.similarity, 1.0, 1e-12);
  EXPECT_EQ(m.intent, entries[4].intent);
}

TEST(Corpus, Validation) {
  const auto corpus = bundled_corpus();
  EXPECT_GE(corpus.size(), 7u * 8u);
  std::vector<PromptEntry> too_few{{"a b c", Intent::kPredict}};
  EXPECT_THROW(PromptCorpus{too_few}, ConfigError);
  auto dup = std::vector<PromptEntry>(corpus.entries().begin(), corpus.entries().end());
  dup.push_back(dup.front());
  EXPECT_THROW(PromptCorpus{dup}, ConfigError);
}

// ---- calibration -------------------------------------------------------

TEST(Calibration, SeparableScoresPickLargestGapPoint) {
  const std::vector<CalibrationItem> items{
      {0.72, true, true}, {0.80, true, true}, {0.30, false, false}, {0.50, false, false}};
  const auto r = calibrate_from_scores(items);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_NEAR(r.threshold, 0.72, 1e-12);
}

TEST(Calibration, SingleClassIsAnError) {
  const std::vector<CalibrationItem> items{{0.3, false, false}, {0.5, false, false}};
  EXPECT_THROW(calibrate_from_scores(items), InvalidArgument);
}

TEST(Calibration, WrongIntentCountsAsMiss) {
  const std::vector<CalibrationItem> items{{0.9, true, false}, {0.2, false, false}};
  EXPECT_EQ(routing_accuracy(items, 0.5), 0.5);
}

TEST(Calibration, BundledSetReproducesStoredThreshold) {
  const auto labeled = load_labeled_set(riskscope::testing::source_path("config/calibration.json"));
  ASSERT_GE(labeled.size(), 40u);
  std::size_t out = 0;
  for (const auto& q : labeled) out += q.in_scope ? 0 : 1;
  EXPECT_EQ(2 * out, labeled.size());
  const IntentMatcher matcher(bundled_corpus());
  const auto r = calibrate_threshold(matcher, labeled);
  const auto cfg = bundled_config();
  EXPECT_NEAR(r.threshold, cfg.threshold, 1e-12);
  EXPECT_GE(r.accuracy, 0.90);
}

TEST(MatcherConfigFile, Validation) {
  EXPECT_THROW(MatcherConfig::from_json({{"threshold", 1.0}}), ConfigError);
  EXPECT_THROW(MatcherConfig::from_json({{"threshold", 0.5}, {"vectorizer", "bag"}}), ConfigError);
  const auto cfg = bundled_config();
  EXPECT_EQ(MatcherConfig::from_json(cfg.to_json()).threshold, cfg.threshold);
}

// ---- grammar -----------------------------------------------------------

TEST(Grammar, PatientIdCapture) {
  const GrammarParser p(FeatureSchema::pima());
  const auto r = p.parse("why is patient 39 high risk", Intent::kExplainImportance, std::nullopt);
  ASSERT_TRUE(r.command.has_value()) << r.failure;
  EXPECT_EQ(r.command->action, Intent::kExplainImportance);
  EXPECT_EQ(r.command->patient_id, 39);
  const auto hash = p.parse("predict #12", Intent::kPredict, std::nullopt);
  EXPECT_EQ(hash.command->patient_id, 12);
}

TEST(Grammar, FeatureSynonyms) {
  const GrammarParser p(FeatureSchema::pima());
  const auto r = p.parse("compare glucose range", Intent::kExplainRange, 5);
  ASSERT_TRUE(r.command.has_value());
  EXPECT_EQ(r.command->feature, "Glucose");
  EXPECT_EQ(r.command->patient_id, 5);
  EXPECT_EQ(p.resolve_feature(normalize_text("what about her blood pressure")), "BloodPressure");
  EXPECT_EQ(p.resolve_feature(normalize_text("body mass index")), "BMI");
  EXPECT_EQ(p.resolve_feature(normalize_text("family history of diabetes")), "DiabetesPedigreeFunction");
  EXPECT_FALSE(p.resolve_feature(normalize_text("cholesterol")).has_value());
}

TEST(Grammar, CountsAndClasses) {
  const GrammarParser p(FeatureSchema::pima());
  const auto top = p.parse("show the top 3 factors for patient 7", Intent::kExplainImportance, std::nullopt);
  EXPECT_EQ(top.command->count, 3);
  EXPECT_EQ(top.command->patient_id, 7);
  const auto cls = p.parse("what is the bmi range for healthy patients", Intent::kExplainRange, 1);
  EXPECT_EQ(cls.command->target_class, 0);
}

TEST(Grammar, MissingRequiredArgumentIsSoftFailure) {
  const GrammarParser p(FeatureSchema::pima());
  const auto r = p.parse("explain", Intent::kExplainImportance, std::nullopt);
  EXPECT_FALSE(r.command.has_value());
  EXPECT_FALSE(r.failure.empty());
  const auto ev = p.parse("show the evidence", Intent::kEvidenceRequest, 3);
  EXPECT_FALSE(ev.command.has_value());
}

// ---- routing -----------------------------------------------------------

TEST(Routing, GrammarAndFallbackAreExclusive) {
  const auto router = bundled_router();
  const auto g = router.route("why is patient 39 high risk", std::nullopt);
  EXPECT_EQ(g.route, Route::kGrammar);
  ASSERT_TRUE(g.command.has_value());
  EXPECT_TRUE(g.intent.has_value());
  EXPECT_GE(g.similarity, router.config().threshold);

  const auto f = router.route("how does insulin resistance develop?", 39);
  EXPECT_EQ(f.route, Route::kFallback);
  EXPECT_FALSE(f.command.has_value());
  EXPECT_LT(f.similarity, router.config().threshold);
}

TEST(Routing, ParseFailureDemotesWithSimilarityRecorded) {
  const auto router = bundled_router();
  const auto d = router.route("why is this patient high risk", std::nullopt);
  EXPECT_EQ(d.route, Route::kFallback);
  EXPECT_TRUE(d.demoted);
  EXPECT_FALSE(d.command.has_value());
  EXPECT_GE(d.similarity, router.config().threshold);
  // same query with a session patient parses
  EXPECT_EQ(router.route("why is this patient high risk", 39).route, Route::kGrammar);
}

TEST(Routing, DeterministicDecisions) {
  const auto a = bundled_router();
  const auto b = bundled_router();
  for (const char* q : {"give me recommendations", "what is the weather in Leuven", "explain",
                        "show the glucose range for patient 4"}) {
    EXPECT_EQ(a.route(q, 2).to_json().dump(), b.route(q, 2).to_json().dump()) << q;
  }
}

TEST(Routing, LabeledSetRoutes) {
  const auto router = bundled_router();
  const auto labeled = load_labeled_set(riskscope::testing::source_path("config/calibration.json"));
  for (const auto& q : labeled) {
    const auto d = router.route(q.text, 39);
    if (!q.in_scope) {
      EXPECT_EQ(d.route, Route::kFallback) << q.text;
    } else {
      EXPECT_EQ(d.intent, q.intent) << q.text;
    }
  }
}

// ---- context pack --------------------------------------------------------

class ContextFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    kb = KnowledgeBase::load(riskscope::testing::source_path("config/kb.json"));
    patient.id = 39;
    patient.values = {4, 111, 72, 47, 207, 37.1, 1.39, 56};
    patient.label = 1;
  }
  FeatureSchema schema = FeatureSchema::pima();
  KnowledgeBase kb;
  PatientRecord patient;
};

TEST_F(ContextFixture, FreshSessionHasNoTurns) {
  const auto pack = build_context({}, schema, &patient, ActiveView{}, kb);
  EXPECT_TRUE(pack.recent_turns.empty());
  EXPECT_EQ(pack.patient_values.size(), 8u);
  EXPECT_EQ(pack.patient_values[1].name, "Glucose");
  EXPECT_EQ(pack.patient_values[1].unit, "mg/dL");
  EXPECT_TRUE(pack.evidence_excerpts.empty());
}

TEST_F(ContextFixture, KeepsLastThreeTurnsInOrder) {
  std::vector<Turn> history;
  for (int i = 0; i < 5; ++i) history.push_back({"q" + std::to_string(i), "a" + std::to_string(i)});
  const auto pack = build_context(history, schema, &patient, ActiveView{}, kb);
  ASSERT_EQ(pack.recent_turns.size(), 3u);
  EXPECT_EQ(pack.recent_turns[0].user, "q2");
  EXPECT_EQ(pack.recent_turns[2].system, "a4");
}

TEST_F(ContextFixture, RangesViewCarriesRangeEvidence) {
  ActiveView view{ViewTag::kRanges, {{"report", "x"}}, {"Glucose", "BMI", "Age"}};
  const auto pack = build_context({}, schema, &patient, view, kb);
  ASSERT_EQ(pack.evidence_excerpts.size(), 2u);
  for (const auto& e : pack.evidence_excerpts) EXPECT_EQ(e["kind"], "range");
  const auto j = pack.to_json();
  EXPECT_EQ(j["active_view"]["tag"], "ranges");
  EXPECT_EQ(j["active_view"]["data"]["report"], "x");
}

TEST_F(ContextFixture, SizeBoundDropsTurnsThenHistogramsNeverValues) {
  std::vector<Turn> history;
  for (int i = 0; i < 3; ++i) history.push_back({std::string(9000, 'u'), std::string(3000, 's')});
  nlohmann::json data = nlohmann::json::object();
  nlohmann::json panel;
  panel["histogram"] = {{"edges", std::vector<double>(600, 1.5)}, {"counts", std::vector<int>(600, 3)}};
  panel["value"] = 111;
  data["Glucose"] = panel;
  ActiveView view{ViewTag::kRecord, data, {}};
  const auto pack = build_context(history, schema, &patient, view, kb);
  EXPECT_LE(pack.serialize().size(), kMaxContextBytes);
  EXPECT_TRUE(pack.truncated);
  EXPECT_EQ(pack.patient_values.size(), 8u);
  EXPECT_LT(pack.recent_turns.size(), 3u);
  if (!pack.recent_turns.empty()) {
    EXPECT_EQ(pack.recent_turns.back().user, history.back().user);
  }

  // a pack already inside the bound is left alone
  auto small = build_context({}, schema, &patient, ActiveView{}, kb);
  const auto before = small.serialize();
  enforce_size_bound(small);
  EXPECT_EQ(small.serialize(), before);
  EXPECT_FALSE(small.truncated);
}

TEST_F(ContextFixture, HistogramDetailGoesBeforeViewData) {
  nlohmann::json data;
  data["Glucose"]["histogram"] = {{"counts", std::vector<int>(20000, 7)}};
  data["Glucose"]["value"] = 111;
  ActiveView view{ViewTag::kRecord, data, {}};
  const auto pack = build_context({}, schema, &patient, view, kb);
  EXPECT_LE(pack.serialize().size(), kMaxContextBytes);
  const auto j = pack.to_json();
  EXPECT_FALSE(j["active_view"]["data"]["Glucose"].contains("histogram"));
  EXPECT_EQ(j["active_view"]["data"]["Glucose"]["value"], 111);
}

// ---- fallback ------------------------------------------------------------

class EchoClient final : public ChatClient {
 public:
  ChatReply complete(const ChatRequest& request) override {
    ++calls;
    last_body = request.to_json().dump();
    return {true, last_body, "", ""};
  }
  int calls = 0;
  std::string last_body;
};

class ScriptedClient final : public ChatClient {
 public:
  explicit ScriptedClient(ChatReply r) : reply(std::move(r)) {}
  ChatReply complete(const ChatRequest&) override { return reply; }
  ChatReply reply;
};

class ThrowingClient final : public ChatClient {
 public:
  ChatReply complete(const ChatRequest&) override { throw std::runtime_error("socket closed"); }
};

TEST_F(ContextFixture, EchoedRequestCarriesGroundingPayload) {
  ActiveView view{ViewTag::kRanges, {{"glucose_ai_low", 125.0}}, {"Glucose"}};
  const std::vector<Turn> history{{"hi", "hello"}};
  const auto pack = build_context(history, schema, &patient, view, kb);
  EchoClient echo;
  const auto ans = fallback_answer("is this normal?", pack, &echo);
  EXPECT_EQ(echo.calls, 1);
  EXPECT_EQ(ans.provenance, "external");
  EXPECT_NE(ans.text.find(kFallbackSystemPreamble), std::string::npos);
  EXPECT_NE(ans.text.find("Glucose"), std::string::npos);
  EXPECT_NE(ans.text.find("111"), std::string::npos);
  EXPECT_NE(ans.text.find("glucose_ai_low"), std::string::npos);
  EXPECT_NE(ans.text.find("is this normal?"), std::string::npos);
}

TEST_F(ContextFixture, FailuresBecomeUnavailableWithCause) {
  const auto pack = build_context({}, schema, &patient, ActiveView{}, kb);
  for (const char* cause : {"timeout", "http_error", "malformed_reply"}) {
    ScriptedClient c({false, "", cause, ""});
    const auto ans = fallback_answer("q", pack, &c);
    EXPECT_EQ(ans.provenance, "unavailable");
    EXPECT_EQ(ans.cause, cause);
  }
  ThrowingClient t;
  EXPECT_EQ(fallback_answer("q", pack, &t).cause, "transport");
  EXPECT_EQ(fallback_answer("q", pack, nullptr).cause, "not_configured");
}

TEST(ReplyShapes, AllSupportedShapes) {
  EXPECT_EQ(extract_reply_text({{"reply", "a"}}), "a");
  EXPECT_EQ(extract_reply_text({{"content", {{{"type", "text"}, {"text", "b"}}, {{"text", "c"}}}}}), "bc");
  EXPECT_EQ(extract_reply_text({{"choices", {{{"message", {{"content", "d"}}}}}}}), "d");
  EXPECT_FALSE(extract_reply_text({{"answer", "x"}}).has_value());
  EXPECT_FALSE(extract_reply_text(nlohmann::json::array()).has_value());
}

// Loopback server standing in for a chat endpoint.
class LoopbackEndpoint {
 public:
  explicit LoopbackEndpoint(httplib::Server::Handler handler) {
    server_.Post("/v1/chat", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LoopbackEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpClient, SuccessAndAuthHeader) {
  std::string auth;
  std::string body;
  LoopbackEndpoint ep([&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    body = req.body;
    res.set_content(R"({"choices":[{"message":{"content":"ok"}}]})", "application/json");
  });
  HttpChatClient client(ep.url(), "k123", std::chrono::milliseconds(2000));
  const auto r = client.complete({"sys", "{\"ctx\":1}", "why?"});
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(auth, "Bearer k123");
  EXPECT_EQ(nlohmann::json::parse(body)["system"], "sys");
}

TEST(HttpClient, HttpErrorAndMalformedReply) {
  LoopbackEndpoint err([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  EXPECT_EQ(HttpChatClient(err.url(), "").complete({"s", "c", "q"}).cause, "http_error");
  LoopbackEndpoint junk([](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  EXPECT_EQ(HttpChatClient(junk.url(), "").complete({"s", "c", "q"}).cause, "malformed_reply");
}

TEST(HttpClient, SlowEndpointTimesOut) {
  std::atomic<bool> release{false};
  LoopbackEndpoint slow([&](const httplib::Request&, httplib::Response& res) {
    for (int i = 0; i < 100 && !release; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    res.set_content(R"({"reply":"late"})", "application/json");
  });
  HttpChatClient client(slow.url(), "", std::chrono::milliseconds(300));
  const auto r = client.complete({"s", "c", "q"});
  release = true;
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.cause, "timeout");
}

TEST(HttpClient, UnreachableIsTransport) {
  HttpChatClient client("http://127.0.0.1:1/v1/chat", "", std::chrono::milliseconds(500));
  const auto r = client.complete({"s", "c", "q"});
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.cause, "transport");
  EXPECT_THROW(HttpChatClient("no-scheme", ""), ConfigError);
}

}  // namespace
}  // namespace riskscope::router
