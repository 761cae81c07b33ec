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

#include "riskscope/router/vectorizer.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace riskscope::router {
namespace {

// Word-boundary padded character n-grams: each word w contributes the
// n-grams of " w ", as in scikit-learn's char_wb analyzer.
std::map<std::string, std::size_t> ngram_counts(std::string_view text, std::size_t min_n,
                                                std::size_t max_n) {
  std::map<std::string, std::size_t> counts;
  const std::string norm = normalize_text(text);
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    const std::string word = " " + norm.substr(start, end - start) + " ";
    for (std::size_t n = min_n; n <= max_n; ++n) {
      if (word.size() < n) {
        if (n == min_n) ++counts[word];
        break;
      }
      for (std::size_t i = 0; i + n <= word.size(); ++i) ++counts[word.substr(i, n)];
    }
    start = end + 1;
  }
  return counts;
}

void l2_normalize(SparseVector& v) {
  double norm = 0.0;
  for (const auto& [i, w] : v) norm += w * w;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v.clear();
    return;
  }
  for (auto& [i, w] : v) w /= norm;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool space = true;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
      space = false;
    } else if (!space) {
      out.push_back(' ');
      space = true;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  double dot = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return std::clamp(dot, 0.0, 1.0);
}

CharNgramTfidf CharNgramTfidf::fit(std::span<const std::string> documents, std::size_t min_n,
                                   std::size_t max_n) {
  CharNgramTfidf v;
  v.min_n_ = std::max<std::size_t>(1, min_n);
  v.max_n_ = std::max(v.min_n_, max_n);
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    for (const auto& [gram, count] : ngram_counts(doc, v.min_n_, v.max_n_)) ++df[gram];
  }
  const auto n_docs = static_cast<double>(documents.size());
  // std::map iteration makes vocabulary indices independent of hash order.
  for (const auto& [gram, count] : df) {
    v.vocabulary_.emplace(gram, static_cast<std::uint32_t>(v.idf_.size()));
    v.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return v;
}

SparseVector CharNgramTfidf::transform(std::string_view text) const {
  SparseVector out;
  for (const auto& [gram, count] : ngram_counts(text, min_n_, max_n_)) {
    auto it = vocabulary_.find(gram);
    if (it == vocabulary_.end()) continue;
    out.emplace_back(it->second, static_cast<double>(count) * idf_[it->second]);
  }
  std::sort(out.begin(), out.end());
  l2_normalize(out);
  return out;
}

SparseVector DenseEmbeddingVectorizer::transform(std::string_view text) const {
  const auto dense = embed_(text);
  SparseVector out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) out.emplace_back(static_cast<std::uint32_t>(i), dense[i]);
  }
  l2_normalize(out);
  return out;
}

}  // namespace riskscope::router
