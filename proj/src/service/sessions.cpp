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

#include "riskscope/service/sessions.h"

#include <random>

#include "riskscope/error.h"

namespace riskscope::service {

std::string new_session_token() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device rd;
  std::string token;
  token.reserve(32);
  for (int i = 0; i < 4; ++i) {
    std::uint32_t word = rd();
    for (int k = 0; k < 8; ++k) {
      token += kHex[word & 0xF];
      word >>= 4;
    }
  }
  return token;
}

std::string SessionStore::create(std::int64_t now_ms) {
  auto s = std::make_shared<Slot>();
  s->session.created_at_ms = now_ms;
  std::unique_lock lock(mu_);
  std::string id;
  do {
    id = new_session_token();
  } while (sessions_.count(id) != 0);
  s->session.id = id;
  sessions_.emplace(id, std::move(s));
  return id;
}

bool SessionStore::exists(std::string_view id) const { return slot(id) != nullptr; }

std::shared_ptr<SessionStore::Slot> SessionStore::slot(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionStore::with_session(std::string_view id, const std::function<void(Session&)>& fn) {
  auto s = slot(id);
  if (!s) throw NotFound("unknown session: " + std::string(id));
  std::lock_guard lock(s->mu);
  fn(s->session);
}

Session SessionStore::snapshot(std::string_view id) const {
  auto s = slot(id);
  if (!s) throw NotFound("unknown session: " + std::string(id));
  std::lock_guard lock(s->mu);
  return s->session;
}

}  // namespace riskscope::service
