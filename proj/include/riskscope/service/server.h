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

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "riskscope/router/fallback.h"
#include "riskscope/router/router.h"
#include "riskscope/service/engine.h"
#include "riskscope/service/event_log.h"
#include "riskscope/service/sessions.h"

namespace httplib {
class Server;
}

namespace riskscope::service {

struct ChatResult {
  std::string answer;
  std::string provenance;  // "engine" | "external" | "unavailable"
  router::RouteDecision decision;
  std::optional<std::string> cause;
  bool log_warning = false;

  nlohmann::json to_json() const;
};

struct ChatInput {
  std::string text;
  std::optional<router::ViewTag> active_view;
  std::optional<std::int64_t> patient_id;
  std::optional<std::uint64_t> seed;
};

// Chat handling around the router: one query event and one answer event per
// call, grammar commands answered by the engine, everything else by the
// fallback client with a context pack. Calls on one session are serialized.
class ChatService {
 public:
  ChatService(const Engine& engine, SessionStore& sessions, EventLog& log,
              router::ChatClient* client);

  // Throws NotFound for an unknown session.
  ChatResult post_chat(std::string_view session_id, const ChatInput& input);

  // Number of requests sent to the fallback client so far.
  std::uint64_t fallback_calls() const;

 private:
  const Engine& engine_;
  SessionStore& sessions_;
  EventLog& log_;
  router::ChatClient* client_;
  std::atomic<std::uint64_t> fallback_calls_{0};
};

// HTTP JSON API. Errors use the envelope {code, message, detail}.
class ApiServer {
 public:
  ApiServer(const Engine& engine, SessionStore& sessions, EventLog& log,
            router::ChatClient* client);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds and serves until stop(). Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  ChatService& chat() { return chat_; }

 private:
  void install_routes();

  const Engine& engine_;
  SessionStore& sessions_;
  EventLog& log_;
  ChatService chat_;
  std::unique_ptr<httplib::Server> server_;
};

nlohmann::json error_envelope(std::string_view code, std::string_view message,
                              const nlohmann::json& detail = nlohmann::json::object());

}  // namespace riskscope::service
