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

#include "riskscope/router/fallback.h"

#include <cstdlib>

#include "httplib.h"
#include "riskscope/error.h"

namespace riskscope::router {

const char* const kFallbackSystemPreamble =
    "You are the assistant of a diabetes risk dashboard used by clinical staff. "
    "Answer using only the context provided: the recent conversation, the current "
    "patient's values, the analysis view on screen and the attached evidence. "
    "Cite evidence markers exactly as given. If the context does not contain the "
    "answer, say so. Do not give a diagnosis.";

nlohmann::json ChatRequest::to_json() const {
  std::string content = "Context:\n";
  content += context;
  content += "\n\nQuestion:\n";
  content += query;
  return {{"system", system},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::move(content)}}})}};
}

HttpChatClient::HttpChatClient(std::string url, std::string api_key,
                               std::chrono::milliseconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("chat URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = url;
    path_ = "/";
  } else {
    scheme_host_port_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
  if (timeout_.count() <= 0) throw ConfigError("chat timeout must be positive");
}

std::unique_ptr<HttpChatClient> HttpChatClient::from_environment() {
  const char* url = std::getenv("RISKSCOPE_LLM_URL");
  if (url == nullptr || *url == '\0') return nullptr;
  const char* key = std::getenv("RISKSCOPE_LLM_KEY");
  return std::make_unique<HttpChatClient>(url, key != nullptr ? key : "");
}

ChatReply HttpChatClient::complete(const ChatRequest& request) {
  ChatReply reply;
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path_, headers, request.to_json().dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - started;

  if (!res) {
    const auto err = res.error();
    // httplib reports an expired read as a plain read error
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && elapsed >= timeout_);
    reply.cause = timed_out ? "timeout" : "transport";
    reply.detail = httplib::to_string(err);
    return reply;
  }
  if (res->status < 200 || res->status >= 300) {
    reply.cause = "http_error";
    reply.detail = "status " + std::to_string(res->status);
    return reply;
  }
  const auto body = nlohmann::json::parse(res->body, nullptr, false);
  auto text = body.is_discarded() ? std::nullopt : extract_reply_text(body);
  if (!text) {
    reply.cause = "malformed_reply";
    reply.detail = "reply body has no text field";
    return reply;
  }
  reply.ok = true;
  reply.text = std::move(*text);
  return reply;
}

std::optional<std::string> extract_reply_text(const nlohmann::json& body) {
  if (!body.is_object()) return std::nullopt;
  if (auto it = body.find("reply"); it != body.end() && it->is_string()) {
    return it->get<std::string>();
  }
  if (auto it = body.find("content"); it != body.end() && it->is_array()) {
    std::string text;
    bool any = false;
    for (const auto& block : *it) {
      if (block.is_object() && block.contains("text") && block["text"].is_string()) {
        text += block["text"].get<std::string>();
        any = true;
      }
    }
    if (any) return text;
  }
  if (auto it = body.find("choices"); it != body.end() && it->is_array() && !it->empty()) {
    const auto& first = (*it)[0];
    if (first.is_object() && first.contains("message") && first["message"].is_object()) {
      const auto& msg = first["message"];
      if (msg.contains("content") && msg["content"].is_string()) {
        return msg["content"].get<std::string>();
      }
    }
  }
  return std::nullopt;
}

nlohmann::json FallbackAnswer::to_json() const {
  nlohmann::json j = {{"text", text}, {"provenance", provenance}};
  if (cause) j["cause"] = *cause;
  return j;
}

FallbackAnswer fallback_answer(std::string_view query, const ContextPack& pack,
                               ChatClient* client) {
  auto unavailable = [](std::string cause) {
    return FallbackAnswer{
        "The assistant is unavailable right now, so this question could not be answered. "
        "Supported questions about the patient, its risk factors, ranges and recommendations "
        "still work.",
        "unavailable", std::move(cause)};
  };
  if (client == nullptr) return unavailable("not_configured");
  ChatRequest request{kFallbackSystemPreamble, pack.serialize(), std::string(query)};
  ChatReply reply;
  try {
    reply = client->complete(request);
  } catch (const std::exception&) {
    return unavailable("transport");
  }
  if (!reply.ok) return unavailable(reply.cause.empty() ? "transport" : reply.cause);
  return FallbackAnswer{std::move(reply.text), "external", std::nullopt};
}

}  // namespace riskscope::router
