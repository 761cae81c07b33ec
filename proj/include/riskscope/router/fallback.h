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

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "riskscope/router/context.h"

namespace riskscope::router {

struct ChatRequest {
  std::string system;
  std::string context;  // serialized ContextPack
  std::string query;

  // {"system": ..., "messages": [{"role": "user", "content": ...}]}
  nlohmann::json to_json() const;
};

struct ChatReply {
  bool ok = false;
  std::string text;
  std::string cause;  // timeout | http_error | malformed_reply | transport | not_configured
  std::string detail;
};

// Chat-completion transport. Implementations must tolerate concurrent calls.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatReply complete(const ChatRequest& request) = 0;
};

inline constexpr std::chrono::milliseconds kDefaultChatTimeout{30000};

// POSTs ChatRequest::to_json() to the configured URL with a bearer key.
// Accepts replies shaped {"reply": s}, {"content": [{"text": s}, ...]} or
// {"choices": [{"message": {"content": s}}]}.
class HttpChatClient final : public ChatClient {
 public:
  HttpChatClient(std::string url, std::string api_key,
                 std::chrono::milliseconds timeout = kDefaultChatTimeout);

  // RISKSCOPE_LLM_URL / RISKSCOPE_LLM_KEY; nullptr when the URL is unset.
  static std::unique_ptr<HttpChatClient> from_environment();

  ChatReply complete(const ChatRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

// Extracts reply text from the accepted response shapes.
std::optional<std::string> extract_reply_text(const nlohmann::json& body);

extern const char* const kFallbackSystemPreamble;

struct FallbackAnswer {
  std::string text;
  std::string provenance;  // "external" | "unavailable"
  std::optional<std::string> cause;

  nlohmann::json to_json() const;
};

// One request: preamble, serialized pack, query. Never fabricates content:
// any failure yields the structured unavailable answer.
FallbackAnswer fallback_answer(std::string_view query, const ContextPack& pack,
                               ChatClient* client);

}  // namespace riskscope::router
