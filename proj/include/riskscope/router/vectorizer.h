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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace riskscope::router {

// (index, weight) pairs sorted by index, L2-normalized (or empty).
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// Dot product of two normalized vectors, clamped to [0, 1].
double cosine(const SparseVector& a, const SparseVector& b);

// Lowercases, maps non-alphanumerics to spaces, collapses runs of spaces.
std::string normalize_text(std::string_view text);

class Vectorizer {
 public:
  virtual ~Vectorizer() = default;
  virtual SparseVector transform(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// Character n-gram TF-IDF (word-boundary padded, n in [min_n, max_n]) with
// smoothed idf = ln((1 + n_docs) / (1 + df)) + 1. n-grams absent from the
// fitted vocabulary are ignored at transform time.
class CharNgramTfidf final : public Vectorizer {
 public:
  static CharNgramTfidf fit(std::span<const std::string> documents, std::size_t min_n = 3,
                            std::size_t max_n = 5);

  SparseVector transform(std::string_view text) const override;
  std::string name() const override { return "char_ngram_tfidf"; }
  std::size_t vocabulary_size() const { return vocabulary_.size(); }

 private:
  std::size_t min_n_ = 3;
  std::size_t max_n_ = 5;
  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::vector<double> idf_;
};

// Adapter for an external sentence-embedding provider.
class DenseEmbeddingVectorizer final : public Vectorizer {
 public:
  using Embed = std::function<std::vector<double>(std::string_view)>;

  DenseEmbeddingVectorizer(std::string name, Embed embed)
      : name_(std::move(name)), embed_(std::move(embed)) {}

  SparseVector transform(std::string_view text) const override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Embed embed_;
};

}  // namespace riskscope::router
