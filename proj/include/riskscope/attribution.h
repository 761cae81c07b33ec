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
#include <optional>
#include <string>
#include <vector>

namespace riskscope {

// Signed per-feature importance for one prediction.
struct Attribution {
  std::vector<double> phi;
  std::string method_id;
  std::int64_t target = -1;
  // Expected model output over the background (KernelSHAP only).
  std::optional<double> base_value;
};

}  // namespace riskscope
