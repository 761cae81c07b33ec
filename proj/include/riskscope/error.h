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

#include <stdexcept>
#include <string>

namespace riskscope {

// Base of every error the engine raises. Subclasses let callers (the HTTP
// layer in particular) map failures to status codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file; row/column are 1-based, 0 when not applicable.
class DataError : public Error {
 public:
  DataError(const std::string& message, std::size_t row = 0, std::size_t column = 0)
      : Error(message), row_(row), column_(column) {}
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// A computation whose inputs admit no meaningful answer (single-class
// training data, rank-deficient surrogate design, empty prediction class).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace riskscope
