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

#include <gtest/gtest.h>

#include <fstream>

#include "riskscope/error.h"
#include "riskscope/evidence.h"
#include "test_support.h"

namespace riskscope {
namespace {

nlohmann::json bundled_doc() {
  std::ifstream in(testing::source_path("config/kb.json"));
  return nlohmann::json::parse(in);
}

nlohmann::json with_fresh_checksum(nlohmann::json doc) {
  doc["checksum"] = compute_kb_checksum(doc);
  return doc;
}

TEST(Evidence, BundledKbCoversEveryFeature) {
  const auto kb = KnowledgeBase::load(testing::source_path("config/kb.json"));
  EXPECT_TRUE(lint_kb(bundled_doc()).empty());
  for (const auto& f : FeatureSchema::pima().names()) {
    const auto& e = kb.get(f, EvidenceKind::kImportance);
    EXPECT_FALSE(e.citations.empty()) << f;
    for (const auto& m : citation_markers(e.summary)) {
      const bool defined = std::any_of(e.citations.begin(), e.citations.end(),
                                       [&](const Citation& c) { return c.marker == m; });
      EXPECT_TRUE(defined) << f << " " << m;
    }
  }
  EXPECT_EQ(kb.checksum(), kb.current_checksum());
}

TEST(Evidence, GlucoseRangeEntry) {
  const auto kb = KnowledgeBase::load(testing::source_path("config/kb.json"));
  const auto& g = kb.get("Glucose", EvidenceKind::kRange);
  ASSERT_TRUE(g.range.has_value());
  EXPECT_EQ(g.range->diagnostic, (Interval{140, 199}));
  EXPECT_EQ(g.range->units, "mg/dL");
  EXPECT_EQ(kb.find("Pregnancies", EvidenceKind::kRange), nullptr);
  EXPECT_THROW(kb.get("Pregnancies", EvidenceKind::kRange), NotFound);
  EXPECT_THROW(kb.get("Cholesterol", EvidenceKind::kImportance), NotFound);
}

TEST(Evidence, ServedBytesAreIdentical) {
  const auto kb = KnowledgeBase::load(testing::source_path("config/kb.json"));
  const std::string first = kb.serialized("BMI", EvidenceKind::kImportance);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(kb.serialized("BMI", EvidenceKind::kImportance), first);
  }
  EXPECT_EQ(nlohmann::json::parse(first), kb.get("BMI", EvidenceKind::kImportance).to_json());
}

TEST(Evidence, CitationMarkers) {
  EXPECT_EQ(citation_markers("a [1] b [12][3]"), (std::vector<std::string>{"[1]", "[12]", "[3]"}));
  EXPECT_TRUE(citation_markers("no markers, [x] [ ]").empty());
}

TEST(Evidence, DanglingMarkerIsRejected) {
  auto doc = bundled_doc();
  doc["entries"][0]["summary"] = doc["entries"][0]["summary"].get<std::string>() + " See [3].";
  doc = with_fresh_checksum(doc);
  const auto problems = lint_kb(doc);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("[3]"), std::string::npos);
  EXPECT_THROW(KnowledgeBase::from_json(doc), ConfigError);
}

TEST(Evidence, ChecksumMismatchIsRejected) {
  auto doc = bundled_doc();
  doc["entries"][1]["summary"] = "Altered text [1].";
  EXPECT_THROW(KnowledgeBase::from_json(doc), ConfigError);
  EXPECT_NO_THROW(KnowledgeBase::from_json(with_fresh_checksum(doc)));
}

TEST(Evidence, StructuralProblems) {
  auto doc = bundled_doc();
  doc["entries"].push_back(doc["entries"][0]);
  EXPECT_FALSE(lint_kb(with_fresh_checksum(doc)).empty());

  auto bad_range = bundled_doc();
  for (auto& e : bad_range["entries"]) {
    if (e["kind"] == "range") {
      e["range"]["normal"] = {10, 5};
      break;
    }
  }
  EXPECT_FALSE(lint_kb(with_fresh_checksum(bad_range)).empty());

  auto bad_source = bundled_doc();
  bad_source["entries"][0]["citations"][0]["source_type"] = "blog";
  EXPECT_FALSE(lint_kb(with_fresh_checksum(bad_source)).empty());

  auto wrong_format = bundled_doc();
  wrong_format["format"] = "other";
  EXPECT_FALSE(lint_kb(wrong_format).empty());
}

TEST(Evidence, EmptyKbLoadsAndFindsNothing) {
  nlohmann::json doc = {{"format", "riskscope-kb"}, {"version", "0"}, {"entries", nlohmann::json::array()}};
  doc = with_fresh_checksum(doc);
  const auto kb = KnowledgeBase::from_json(doc);
  EXPECT_EQ(kb.size(), 0u);
  EXPECT_THROW(kb.get("Glucose", EvidenceKind::kImportance), NotFound);
}

TEST(Evidence, MissingFileIsConfigError) {
  EXPECT_THROW(KnowledgeBase::load("/nonexistent/kb.json"), ConfigError);
}

}  // namespace
}  // namespace riskscope
