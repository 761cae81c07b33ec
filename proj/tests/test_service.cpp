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

#include <fstream>
#include <thread>

#include "httplib.h"
#include "riskscope/error.h"
#include "riskscope/service/engine.h"
#include "riskscope/service/event_log.h"
#include "riskscope/service/server.h"
#include "riskscope/service/sessions.h"
#include "test_support.h"

namespace riskscope::service {
namespace {

namespace fs = std::filesystem;

constexpr std::int64_t kDay = 24LL * 3600 * 1000;
constexpr std::int64_t kT0 = 1791504000000;  // 2026-10-09T00:00:00Z

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = fs::temp_directory_path() / "riskscope-tests" /
             (std::string(info->test_suite_name()) + "." + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---- event log -----------------------------------------------------------

TEST(EventLog, DayFileNames) {
  EXPECT_EQ(day_file_name(kT0), "events-2026-10-09.jsonl");
  EXPECT_EQ(day_file_name(kT0 + kDay - 1), "events-2026-10-09.jsonl");
  EXPECT_EQ(day_file_name(kT0 + kDay), "events-2026-10-10.jsonl");
}

TEST(EventLog, ExportReturnsSessionEventsInOrder) {
  const auto dir = scratch_dir();
  std::int64_t now = kT0;
  EventLog log(dir, [&] { return now += 1000; });
  for (int i = 0; i < 17; ++i) {
    ASSERT_TRUE(log.append({"s1", 0, EventKind::kChatQuery, {{"text", "q" + std::to_string(i)}}, 0}));
    if (i % 4 == 0) {
      ASSERT_TRUE(log.append({"s1", 0, EventKind::kViewOpened, {}, 0}));
    }
    ASSERT_TRUE(log.append({"other", 0, EventKind::kChatQuery, {}, 0}));
  }
  const auto events = log.export_session("s1");
  ASSERT_EQ(events.size(), 22u);
  for (std::size_t i = 1; i < events.size(); ++i) {
    EXPECT_LE(events[i - 1].timestamp_ms, events[i].timestamp_ms);
    EXPECT_LT(events[i - 1].seq, events[i].seq);
  }
  EXPECT_EQ(events[0].payload["text"], "q0");
  EXPECT_TRUE(log.export_session("nobody").empty());
}

TEST(EventLog, TimestampsNeverDecreasePerSession) {
  const auto dir = scratch_dir();
  std::vector<std::int64_t> clock{kT0 + 5000, kT0 + 1000, kT0 + 7000, kT0 + 2000};
  std::size_t tick = 0;
  EventLog log(dir, [&] { return clock[tick++]; });
  for (int i = 0; i < 4; ++i) log.append({"s", 0, EventKind::kHelpClicked, {}, 0});
  const auto events = log.export_session("s");
  ASSERT_EQ(events.size(), 4u);
  EXPECT_EQ(events[1].timestamp_ms, kT0 + 5000);
  EXPECT_EQ(events[3].timestamp_ms, kT0 + 7000);
}

TEST(EventLog, RestartConcatenatesFiles) {
  const auto dir = scratch_dir();
  {
    std::int64_t now = kT0;
    EventLog first(dir, [&] { return now += 10; });
    for (int i = 0; i < 3; ++i) first.append({"s", 0, EventKind::kChatQuery, {{"i", i}}, 0});
  }
  {
    std::int64_t now = kT0 + kDay;
    EventLog second(dir, [&] { return now += 10; });
    for (int i = 3; i < 5; ++i) second.append({"s", 0, EventKind::kChatQuery, {{"i", i}}, 0});
  }
  EXPECT_TRUE(fs::exists(dir / "events-2026-10-09.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "events-2026-10-10.jsonl"));
  const EventLog reader(dir);
  const auto events = reader.export_session("s");
  ASSERT_EQ(events.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(events[static_cast<std::size_t>(i)].payload["i"], i);
}

TEST(EventLog, MalformedLinesAreSkipped) {
  const auto dir = scratch_dir();
  {
    EventLog log(dir, [] { return kT0; });
    log.append({"s", 0, EventKind::kChatQuery, {}, 0});
  }
  std::ofstream(dir / "events-2026-10-09.jsonl", std::ios::app) << "{not json\n";
  EXPECT_EQ(EventLog(dir).export_session("s").size(), 1u);
}

TEST(EventLog, WriteFailureIsReportedNotThrown) {
  const auto dir = scratch_dir();
  std::ofstream(dir / "blocker") << "file, not a directory";
  EventLog log(dir / "blocker" / "logs", [] { return kT0; });
  EXPECT_FALSE(log.append({"s", 0, EventKind::kChatQuery, {}, 0}));
  EXPECT_EQ(log.write_failures(), 1u);
}

TEST(EventLog, EventJsonRoundTrip) {
  const InteractionEvent e{"abc", kT0, EventKind::kRecommendationRequested, {{"patient_id", 39}}, 7};
  const auto back = InteractionEvent::from_json(e.to_json());
  EXPECT_EQ(back.session, "abc");
  EXPECT_EQ(back.kind, EventKind::kRecommendationRequested);
  EXPECT_EQ(back.payload, e.payload);
  EXPECT_EQ(back.seq, 7u);
  EXPECT_FALSE(parse_event_kind("clicked").has_value());
}

TEST(EventLog, ReplayReproducesPerSessionAverages) {
  // 25 synthetic sessions: 433 chat queries and 133 view events in total
  const auto dir = scratch_dir();
  std::int64_t now = kT0;
  EventLog log(dir, [&] { return now += 250; });
  for (int s = 0; s < 25; ++s) {
    const std::string id = "user" + std::to_string(s);
    const int chats = s < 8 ? 18 : 17;
    const int views = s < 8 ? 6 : 5;
    for (int i = 0; i < chats; ++i) {
      log.append({id, 0, EventKind::kChatQuery, {}, 0});
      log.append({id, 0, EventKind::kChatAnswer, {}, 0});
    }
    for (int i = 0; i < views; ++i) log.append({id, 0, EventKind::kViewOpened, {}, 0});
    log.append({id, 0, EventKind::kHelpClicked, {}, 0});
  }
  const auto events = EventLog(dir).read_all();
  const auto summary = summarize_engagement(events);
  EXPECT_EQ(summary.sessions, 25u);
  EXPECT_NEAR(summary.mean_chat_queries, 17.32, 1e-12);
  EXPECT_NEAR(summary.mean_view_events, 5.32, 1e-12);
}

// ---- sessions ------------------------------------------------------------

TEST(Sessions, TokensAndLookup) {
  SessionStore store;
  const auto a = store.create(kT0);
  const auto b = store.create(kT0);
  EXPECT_EQ(a.size(), 32u);
  EXPECT_NE(a, b);
  EXPECT_TRUE(store.exists(a));
  EXPECT_FALSE(store.exists("nope"));
  EXPECT_THROW(store.with_session("nope", [](Session&) {}), NotFound);
  EXPECT_EQ(store.snapshot(a).active_view, router::ViewTag::kRecord);
}

TEST(Sessions, ConcurrentAppendsKeepPerSessionOrder) {
  SessionStore store;
  const auto a = store.create(kT0);
  const auto b = store.create(kT0);
  auto writer = [&](const std::string& id) {
    for (int i = 0; i < 200; ++i) {
      store.with_session(id, [&](Session& s) { s.turns.push_back({std::to_string(i), ""}); });
    }
  };
  std::thread ta(writer, a);
  std::thread tb(writer, b);
  ta.join();
  tb.join();
  for (const auto& id : {a, b}) {
    const auto s = store.snapshot(id);
    ASSERT_EQ(s.turns.size(), 200u);
    for (int i = 0; i < 200; ++i) EXPECT_EQ(s.turns[static_cast<std::size_t>(i)].user, std::to_string(i));
  }
}

// ---- engine --------------------------------------------------------------

class EngineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    engine = new Engine(load_artifacts(ServiceConfig::load(testing::source_path("config/service.json"))));
  }
  static void TearDownTestSuite() {
    delete engine;
    engine = nullptr;
  }
  static Engine* engine;
};
Engine* EngineTest::engine = nullptr;

TEST_F(EngineTest, PatientViewPanels) {
  const auto view = engine->patient_view(39);
  ASSERT_EQ(view["features"].size(), 8u);
  EXPECT_GE(view["risk_percent"].get<double>(), 0.0);
  EXPECT_LE(view["risk_percent"].get<double>(), 100.0);
  for (const auto& panel : view["features"]) {
    long total = 0;
    for (const auto& c : panel["histogram"]["counts"]) total += c.get<long>();
    EXPECT_EQ(total, 768) << panel["name"];
    EXPECT_LE(panel["min"].get<double>(), panel["value"].get<double>());
    EXPECT_GE(panel["max"].get<double>(), panel["value"].get<double>());
    const auto name = panel["name"].get<std::string>();
    if (name == "BMI") {
      ASSERT_EQ(panel["bands"].size(), 2u);
      EXPECT_EQ(panel["bands"][0]["from"], 25.0);
      EXPECT_EQ(panel["bands"][1]["from"], 30.0);
    }
    if (name == "Pregnancies") {
      EXPECT_TRUE(panel["bands"].empty());
    }
  }
  EXPECT_THROW(engine->patient_view(768), NotFound);
  EXPECT_THROW(engine->patient_view(-1), NotFound);
}

TEST_F(EngineTest, ViewsAreDeterministic) {
  EXPECT_EQ(engine->importance_view(39, 42).dump(), engine->importance_view(39, 42).dump());
  EXPECT_EQ(engine->ranges_view(39, 42).dump(), engine->ranges_view(39, 42).dump());
  EXPECT_EQ(engine->recommendation_view(0).dump(), engine->recommendation_view(0).dump());
}

TEST_F(EngineTest, BackgroundComesFromTrainingRows) {
  const auto bg = explainer_background(engine->dataset(), engine->model());
  EXPECT_EQ(bg.size(), kDefaultBackgroundSize);
}

TEST_F(EngineTest, GrammarAnswersUseTemplates) {
  router::ParsedCommand cmd;
  cmd.action = router::Intent::kPredict;
  cmd.patient_id = 39;
  const auto a = engine->answer(cmd, 42);
  EXPECT_NE(a.find("39"), std::string::npos);
  EXPECT_EQ(a, engine->answer(cmd, 42));
  cmd.patient_id = 5000;
  EXPECT_NE(engine->answer(cmd, 42).find("not found"), std::string::npos);
}

TEST(Artifacts, CorruptKbIsRefusedByName) {
  const auto dir = scratch_dir();
  for (const auto& entry : fs::directory_iterator(testing::source_path("config"))) {
    fs::copy_file(entry.path(), dir / entry.path().filename());
  }
  auto svc = nlohmann::json::parse(std::ifstream(dir / "service.json"));
  svc["model"] = testing::source_path("models/pima_gbdt.json").string();
  svc["data"] = testing::source_path("data/diabetes.csv").string();
  svc["log_dir"] = (dir / "logs").string();
  std::ofstream(dir / "service.json") << svc.dump();
  EXPECT_NO_THROW(load_artifacts(ServiceConfig::load(dir / "service.json")));

  auto kb = nlohmann::json::parse(std::ifstream(dir / "kb.json"));
  kb["entries"][0]["summary"] = "Edited by hand [1].";
  std::ofstream(dir / "kb.json") << kb.dump();
  try {
    load_artifacts(ServiceConfig::load(dir / "service.json"));
    FAIL() << "corrupt KB was accepted";
  } catch (const ArtifactError& e) {
    EXPECT_EQ(e.artifact(), "kb");
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
}

// ---- chat service and HTTP API ----------------------------------------------

class EchoClient final : public router::ChatClient {
 public:
  router::ChatReply complete(const router::ChatRequest& request) override {
    return {true, "echo: " + request.query, "", ""};
  }
};

class ApiTest : public EngineTest {
 protected:
  void SetUp() override {
    log_dir = scratch_dir();
    log = std::make_unique<EventLog>(log_dir);
    server = std::make_unique<ApiServer>(*engine, sessions, *log, &echo);
    port = server->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    thread = std::thread([this] { server->listen_after_bind(); });
    server->wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  void TearDown() override {
    server->stop();
    thread.join();
  }
  nlohmann::json get(const std::string& path, int expect = 200) {
    auto res = client->Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return nlohmann::json::parse(res->body);
  }
  nlohmann::json post(const std::string& path, const nlohmann::json& body, int expect = 200) {
    auto res = client->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return nlohmann::json::parse(res->body);
  }
  std::string new_session(std::optional<int> patient = std::nullopt) {
    nlohmann::json body = nlohmann::json::object();
    if (patient) body["patient_id"] = *patient;
    return post("/sessions", body, 201)["session_id"];
  }

  EchoClient echo;
  SessionStore sessions;
  fs::path log_dir;
  std::unique_ptr<EventLog> log;
  std::unique_ptr<ApiServer> server;
  std::unique_ptr<httplib::Client> client;
  std::thread thread;
  int port = 0;
};

TEST_F(ApiTest, HealthCarriesVersionAndChecksums) {
  const auto h = get("/health");
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["version"], kServiceVersion);
  for (const char* k : {"model", "data", "kb", "corpus", "router"}) {
    ASSERT_TRUE(h["checksums"].contains(k)) << k;
    EXPECT_EQ(h["checksums"][k].get<std::string>().rfind("sha256:", 0), 0u);
  }
}

TEST_F(ApiTest, ErrorsUseTheEnvelope) {
  auto e = get("/patients/9999", 404);
  EXPECT_EQ(e["code"], "not_found");
  EXPECT_TRUE(e.contains("message"));
  EXPECT_TRUE(e.contains("detail"));
  EXPECT_EQ(get("/patients/abc", 400)["code"], "invalid_argument");
  EXPECT_EQ(get("/no/such/route", 404)["code"], "not_found");
  EXPECT_EQ(get("/evidence/Cholesterol", 404)["code"], "not_found");
  EXPECT_EQ(get("/evidence/Glucose?kind=other", 400)["code"], "invalid_argument");
  EXPECT_EQ(post("/sessions/missing/chat", {{"text", "hi"}}, 404)["code"], "not_found");
  const auto sid = new_session();
  EXPECT_EQ(post("/sessions/" + sid + "/chat", nlohmann::json::object(), 400)["code"], "invalid_argument");
}

TEST_F(ApiTest, PatientEndpoints) {
  EXPECT_EQ(get("/patients/39")["features"].size(), 8u);
  const auto p = get("/patients/39/prediction");
  EXPECT_EQ(p["patient_id"], 39);
  const auto imp = get("/patients/39/importance?seed=7");
  EXPECT_TRUE(imp.contains("report"));
  EXPECT_TRUE(get("/patients/39/ranges")["report"].contains("features"));
  const auto rec = post("/patients/0/recommendation", nlohmann::json::object());
  EXPECT_TRUE(rec.contains("plan"));
}

TEST_F(ApiTest, EvidenceBytesMatchStore) {
  auto res = client->Get("/evidence/Glucose?kind=range");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, engine->kb().serialized("Glucose", EvidenceKind::kRange));
}

TEST_F(ApiTest, IdenticalGetsAreByteIdentical) {
  for (const char* path : {"/patients/39", "/patients/39/importance?seed=3", "/patients/39/ranges",
                           "/evidence/BMI", "/health"}) {
    auto a = client->Get(path);
    auto b = client->Get(path);
    ASSERT_TRUE(a && b);
    EXPECT_EQ(a->body, b->body) << path;
  }
}

TEST_F(ApiTest, ChatRoutesAndLogsOnePairPerTurn) {
  const auto sid = new_session(39);
  const auto g = post("/sessions/" + sid + "/chat", {{"text", "give me recommendations"}});
  EXPECT_EQ(g["provenance"], "engine");
  EXPECT_EQ(g["route"]["route"], "grammar");
  const auto f = post("/sessions/" + sid + "/chat", {{"text", "how does insulin resistance develop?"}});
  EXPECT_EQ(f["provenance"], "external");
  EXPECT_EQ(f["answer"], "echo: how does insulin resistance develop?");
  EXPECT_EQ(server->chat().fallback_calls(), 1u);
  post("/sessions/" + sid + "/events", {{"kind", "view_opened"}, {"payload", {{"view", "ranges"}}}}, 202);

  const auto logged = get("/sessions/" + sid + "/log")["events"];
  ASSERT_EQ(logged.size(), 5u);
  EXPECT_EQ(logged[0]["kind"], "chat_query");
  EXPECT_EQ(logged[1]["kind"], "chat_answer");
  EXPECT_EQ(logged[2]["kind"], "chat_query");
  EXPECT_EQ(logged[3]["kind"], "chat_answer");
  EXPECT_EQ(logged[4]["kind"], "view_opened");
  EXPECT_EQ(sessions.snapshot(sid).active_view, router::ViewTag::kRanges);
  EXPECT_EQ(sessions.snapshot(sid).turns.size(), 2u);
}

TEST_F(ApiTest, InterleavedSessionsKeepTheirOwnOrder) {
  const auto a = new_session(1);
  const auto b = new_session(2);
  auto talk = [&](const std::string& sid) {
    httplib::Client c("127.0.0.1", port);
    for (int i = 0; i < 6; ++i) {
      c.Post("/sessions/" + sid + "/chat", nlohmann::json{{"text", "tell me about the moon " + std::to_string(i)}}.dump(),
             "application/json");
    }
  };
  std::thread ta(talk, a);
  std::thread tb(talk, b);
  ta.join();
  tb.join();
  for (const auto& sid : {a, b}) {
    const auto turns = sessions.snapshot(sid).turns;
    ASSERT_EQ(turns.size(), 6u);
    for (int i = 0; i < 6; ++i) {
      EXPECT_EQ(turns[static_cast<std::size_t>(i)].user, "tell me about the moon " + std::to_string(i));
    }
  }
}

TEST_F(ApiTest, ServingNeverMutatesArtifacts) {
  const auto before = get("/health")["checksums"];
  const auto kb_before = engine->kb().current_checksum();
  const auto sid = new_session(39);
  for (int i = 0; i < 20; ++i) {
    get("/patients/" + std::to_string(i));
    get("/evidence/Glucose?kind=range");
    post("/sessions/" + sid + "/chat", {{"text", "why is patient 39 high risk"}});
  }
  EXPECT_EQ(get("/health")["checksums"], before);
  EXPECT_EQ(engine->kb().current_checksum(), kb_before);
}

}  // namespace
}  // namespace riskscope::service
