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

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "riskscope/router/context.h"

namespace riskscope::service {

struct Session {
  std::string id;
  std::optional<std::int64_t> current_patient;
  std::vector<router::Turn> turns;  // append-only
  router::ViewTag active_view = router::ViewTag::kRecord;
  std::int64_t created_at_ms = 0;
};

// In-memory sessions. Work on one session is serialized by its own lock;
// distinct sessions proceed concurrently.
class SessionStore {
 public:
  std::string create(std::int64_t now_ms);
  bool exists(std::string_view id) const;

  // Runs fn under the session's lock. Throws NotFound for an unknown id.
  void with_session(std::string_view id, const std::function<void(Session&)>& fn);
  Session snapshot(std::string_view id) const;

 private:
  struct Slot {
    std::mutex mu;
    Session session;
  };
  std::shared_ptr<Slot> slot(std::string_view id) const;

  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>, std::less<>> sessions_;
};

// 32 hex characters from std::random_device.
std::string new_session_token();

}  // namespace riskscope::service
