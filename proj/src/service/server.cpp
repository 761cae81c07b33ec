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

#include "riskscope/service/server.h"

#include <charconv>
#include <chrono>

#include "httplib.h"
#include "riskscope/error.h"

namespace riskscope::service {
namespace {

using nlohmann::json;

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message,
                const json& detail = json::object()) {
  send_json(res, status, error_envelope(code, message, detail));
}

std::int64_t parse_id(const std::string& s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("not an integer id: " + s);
  }
  return v;
}

std::uint64_t seed_param(const httplib::Request& req) {
  if (!req.has_param("seed")) return kDefaultRequestSeed;
  const auto s = req.get_param_value("seed");
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("seed must be a non-negative integer");
  }
  return v;
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw InvalidArgument("request body must be a JSON object");
  return doc;
}

// Runs a handler and maps library errors onto the envelope.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFound& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const InvalidArgument& e) {
    send_error(res, 400, "invalid_argument", e.what());
  } catch (const DegenerateInput& e) {
    send_error(res, 422, "degenerate_input", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

json error_envelope(std::string_view code, std::string_view message, const json& detail) {
  return {{"code", code}, {"message", message}, {"detail", detail}};
}

json ChatResult::to_json() const {
  json j = {{"answer", answer},
            {"provenance", provenance},
            {"route", decision.to_json()},
            {"log_warning", log_warning}};
  if (cause) j["cause"] = *cause;
  return j;
}

ChatService::ChatService(const Engine& engine, SessionStore& sessions, EventLog& log,
                         router::ChatClient* client)
    : engine_(engine), sessions_(sessions), log_(log), client_(client) {}

std::uint64_t ChatService::fallback_calls() const { return fallback_calls_.load(); }

ChatResult ChatService::post_chat(std::string_view session_id, const ChatInput& input) {
  ChatResult result;
  sessions_.with_session(session_id, [&](Session& s) {
    if (input.patient_id) s.current_patient = *input.patient_id;
    if (input.active_view) s.active_view = *input.active_view;
    const auto seed = input.seed.value_or(kDefaultRequestSeed);

    json query_payload = {{"text", input.text}, {"view", std::string(router::to_string(s.active_view))}};
    if (s.current_patient) query_payload["patient_id"] = *s.current_patient;
    bool logged = log_.append({s.id, 0, EventKind::kChatQuery, std::move(query_payload), 0});

    result.decision = engine_.router().route(input.text, s.current_patient);
    if (result.decision.route == router::Route::kGrammar) {
      const auto& cmd = *result.decision.command;
      try {
        result.answer = engine_.answer(cmd, seed);
      } catch (const Error& e) {
        result.answer = std::string("That request could not be completed: ") + e.what();
      }
      result.provenance = "engine";
      if (cmd.patient_id && engine_.dataset().find(*cmd.patient_id) != nullptr) {
        s.current_patient = cmd.patient_id;
      }
    } else {
      const PatientRecord* patient =
          s.current_patient ? engine_.dataset().find(*s.current_patient) : nullptr;
      router::ActiveView view;
      try {
        view = engine_.active_view(s.active_view, s.current_patient, seed);
      } catch (const Error&) {
        view.tag = s.active_view;
      }
      const auto pack =
          router::build_context(s.turns, engine_.schema(), patient, view, engine_.kb());
      if (client_ != nullptr) fallback_calls_.fetch_add(1);
      auto fb = router::fallback_answer(input.text, pack, client_);
      result.answer = std::move(fb.text);
      result.provenance = std::move(fb.provenance);
      result.cause = std::move(fb.cause);
    }

    s.turns.push_back({input.text, result.answer});
    json answer_payload = {{"route", std::string(router::to_string(result.decision.route))},
                           {"provenance", result.provenance},
                           {"similarity", result.decision.similarity},
                           {"answer", result.answer}};
    if (result.decision.intent) {
      answer_payload["intent"] = std::string(router::to_string(*result.decision.intent));
    }
    if (result.cause) answer_payload["cause"] = *result.cause;
    logged = log_.append({s.id, 0, EventKind::kChatAnswer, std::move(answer_payload), 0}) && logged;
    result.log_warning = !logged;
  });
  return result;
}

ApiServer::ApiServer(const Engine& engine, SessionStore& sessions, EventLog& log,
                     router::ChatClient* client)
    : engine_(engine),
      sessions_(sessions),
      log_(log),
      chat_(engine, sessions, log, client),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

bool ApiServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int ApiServer::bind_to_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool ApiServer::listen_after_bind() { return server_->listen_after_bind(); }

void ApiServer::stop() {
  if (server_) server_->stop();
}

void ApiServer::wait_until_ready() const { server_->wait_until_ready(); }

void ApiServer::install_routes() {
  auto& srv = *server_;

  srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, engine_.health()); });
  });

  srv.Get(R"(/patients/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, engine_.patient_view(parse_id(req.matches[1]))); });
  });

  srv.Get(R"(/patients/([^/]+)/prediction)",
          [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              send_json(res, 200, engine_.prediction_view(parse_id(req.matches[1])));
            });
          });

  srv.Get(R"(/patients/([^/]+)/importance)",
          [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              const auto id = parse_id(req.matches[1]);
              send_json(res, 200, engine_.importance_view(id, seed_param(req)));
            });
          });

  srv.Get(R"(/patients/([^/]+)/ranges)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto id = parse_id(req.matches[1]);
      send_json(res, 200, engine_.ranges_view(id, seed_param(req)));
    });
  });

  srv.Post(R"(/patients/([^/]+)/recommendation)",
           [this](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] {
               const auto id = parse_id(req.matches[1]);
               const auto body = body_json(req);
               auto view = engine_.recommendation_view(id);
               if (body.contains("session_id") && body["session_id"].is_string()) {
                 const auto sid = body["session_id"].get<std::string>();
                 if (!sessions_.exists(sid)) throw NotFound("unknown session: " + sid);
                 const bool ok = log_.append(
                     {sid, 0, EventKind::kRecommendationRequested, {{"patient_id", id}}, 0});
                 if (!ok) view["log_warning"] = true;
               }
               send_json(res, 200, view);
             });
           });

  srv.Get(R"(/evidence/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto kind = EvidenceKind::kImportance;
      if (req.has_param("kind")) {
        const auto parsed = parse_evidence_kind(req.get_param_value("kind"));
        if (!parsed) throw InvalidArgument("kind must be importance or range");
        kind = *parsed;
      }
      res.status = 200;
      res.set_content(engine_.kb().serialized(std::string(req.matches[1]), kind), "application/json");
    });
  });

  srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = body_json(req);
      const auto created = now_ms();
      const auto id = sessions_.create(created);
      if (body.contains("patient_id")) {
        if (!body["patient_id"].is_number_integer()) throw InvalidArgument("patient_id must be an integer");
        const auto pid = body["patient_id"].get<std::int64_t>();
        engine_.patient(pid);
        sessions_.with_session(id, [&](Session& s) { s.current_patient = pid; });
      }
      send_json(res, 201, {{"session_id", id}, {"created_at_ms", created}});
    });
  });

  srv.Post(R"(/sessions/([^/]+)/chat)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = body_json(req);
      if (!body.contains("text") || !body["text"].is_string()) {
        throw InvalidArgument("body needs a 'text' string");
      }
      ChatInput input;
      input.text = body["text"].get<std::string>();
      if (body.contains("active_view")) {
        const auto tag = body["active_view"].is_string()
                             ? router::parse_view_tag(body["active_view"].get<std::string>())
                             : std::nullopt;
        if (!tag) throw InvalidArgument("active_view must be record, importance, ranges or recommendation");
        input.active_view = tag;
      }
      if (body.contains("patient_id")) {
        if (!body["patient_id"].is_number_integer()) throw InvalidArgument("patient_id must be an integer");
        input.patient_id = body["patient_id"].get<std::int64_t>();
      }
      if (body.contains("seed")) {
        if (!body["seed"].is_number_unsigned()) throw InvalidArgument("seed must be a non-negative integer");
        input.seed = body["seed"].get<std::uint64_t>();
      }
      send_json(res, 200, chat_.post_chat(std::string(req.matches[1]), input).to_json());
    });
  });

  srv.Post(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string sid = req.matches[1];
      const auto body = body_json(req);
      const auto kind = body.contains("kind") && body["kind"].is_string()
                            ? parse_event_kind(body["kind"].get<std::string>())
                            : std::nullopt;
      if (!kind || *kind == EventKind::kChatQuery || *kind == EventKind::kChatAnswer) {
        throw InvalidArgument("kind must be view_opened, help_clicked or recommendation_requested");
      }
      auto payload = body.value("payload", json::object());
      bool ok = true;
      sessions_.with_session(sid, [&](Session& s) {
        if (*kind == EventKind::kViewOpened && payload.contains("view") && payload["view"].is_string()) {
          const auto tag = router::parse_view_tag(payload["view"].get<std::string>());
          if (!tag) throw InvalidArgument("unknown view tag");
          s.active_view = *tag;
        }
        ok = log_.append({s.id, 0, *kind, payload, 0});
      });
      send_json(res, 202, {{"accepted", true}, {"log_warning", !ok}});
    });
  });

  srv.Get(R"(/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string sid = req.matches[1];
      json events = json::array();
      for (const auto& e : log_.export_session(sid)) events.push_back(e.to_json());
      send_json(res, 200, {{"session", sid}, {"events", std::move(events)}});
    });
  });

  srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) {
      send_error(res, 404, "not_found", "no such endpoint", {{"path", req.path}});
    } else {
      send_error(res, res.status, "http_error", "request failed");
    }
  });
}

}  // namespace riskscope::service
