// Copyright 2026 The DocRefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "docrefine/error.hpp"
#include "docrefine/mcu.hpp"
#include "gtest/gtest.h"
#include "support/fixtures.hpp"

namespace docrefine::mcu {
namespace {

const Json kResults = {
    {"facts",
     {{{"subject", "editor"}, {"predicate", "reaches"}, {"object", "84.5 percent"},
       {"source", "r1"}},
      {{"subject", "page"}, {"predicate", "takes"}, {"object", "12 ms"}, {"source", "zz"}}}},
    {"entities", {{{"surface", "GPU"}, {"category", "hardware"}, {"source", "a1"}}}},
    {"digest", "Accuracy and speed."}};

Json mock_script() {
  return {{"MCU",
           {{"default", {{"facts", Json::array()}, {"entities", Json::array()}, {"digest", ""}}},
            {"contains:\"section\": \"h3\"", kResults},
            {"contains:Describe the figure.",
             {{"description", "A bar chart."}, {"axis_labels", {"model", "accuracy"}}}}}}};
}

TEST(TableText, ParsesRowsAndPads) {
  const auto g = parse_table_text("a\tb\tc\nd\te\n");
  EXPECT_EQ(g.n_rows, 2);
  EXPECT_EQ(g.n_cols, 3);
  EXPECT_EQ(g.cell(1, 2), "");
  EXPECT_EQ(g.cell(1, 1), "e");
  EXPECT_EQ(g.to_text(), "a\tb\tc\nd\te\t");
}

TEST(TableText, EmptyTextIsOneEmptyCell) {
  const auto g = parse_table_text("");
  EXPECT_EQ(g.n_rows, 1);
  EXPECT_EQ(g.n_cols, 1);
  EXPECT_TRUE(g.contains(0, 0));
  EXPECT_FALSE(g.contains(1, 0));
  EXPECT_FALSE(g.contains(0, -1));
}

TEST(Sections, GroupByNearestHeading) {
  const auto doc = testing::sample_paper();
  const auto secs = sections(doc);
  ASSERT_EQ(secs.size(), 2u);
  EXPECT_EQ(secs[0].heading_id, "h0");
  EXPECT_EQ(secs[0].element_ids, (std::vector<std::string>{"h0", "a1", "a2"}));
  EXPECT_EQ(secs[1].heading_id, "h3");
  EXPECT_EQ(secs[1].element_ids.front(), "h3");
  EXPECT_EQ(secs[1].element_ids.size(), 7u);
}

TEST(Sections, ScopeMembers) {
  const auto doc = testing::sample_paper();
  EXPECT_EQ(scope_members(doc, "h0"), (std::vector<std::string>{"h0", "a1", "a2"}));
  EXPECT_EQ(scope_members(doc, ""), doc.reading_order);
}

TEST(Understand, CollectsFactsDigestsGridsAndFigures) {
  const auto doc = testing::sample_paper();
  auto mock = testing::make_mock(mock_script());
  const auto sem = understand(doc, *mock);
  ASSERT_EQ(sem.facts.size(), 2u);
  EXPECT_EQ(sem.facts[0].source_id, "r1");
  EXPECT_EQ(sem.facts[1].source_id, "h3");  // Unknown source falls back to the heading.
  ASSERT_EQ(sem.entities.size(), 1u);
  EXPECT_EQ(sem.entities[0].element_id, "h3");  // a1 lies outside the section.
  EXPECT_EQ(sem.section_digests.at("h3"), "Accuracy and speed.");
  EXPECT_FALSE(sem.section_digests.count("h0"));
  EXPECT_EQ(sem.table_grids.at("t1").cell(2, 1), "84.5");
  EXPECT_EQ(sem.figure_descs.at("f1").description, "A bar chart.");
  EXPECT_EQ(sem.figure_descs.at("f1").axis_labels,
            (std::vector<std::string>{"model", "accuracy"}));
  EXPECT_TRUE(validate_sem(sem, doc).empty());
}

TEST(Understand, IsDeterministic) {
  const auto doc = testing::sample_paper();
  auto mock = testing::make_mock(mock_script());
  EXPECT_EQ(serialize_sem(understand(doc, *mock)), serialize_sem(understand(doc, *mock)));
}

TEST(Understand, MockMissPropagates) {
  auto mock = testing::make_mock({{"MCU", {{"contains:nothing", "x"}}}});
  EXPECT_THROW(understand(testing::sample_paper(), *mock), MockMiss);
}

TEST(Understand, EmptyFigureDescriptionIsSchemaError) {
  Json script = mock_script();
  script["MCU"]["contains:Describe the figure."] = {{"description", ""}};
  auto mock = testing::make_mock(script);
  EXPECT_THROW(understand(testing::sample_paper(), *mock), SchemaError);
}

TEST(Structural, UsesCaptionsAndTableText) {
  const auto sem = structural_understanding(testing::sample_paper());
  EXPECT_TRUE(sem.facts.empty());
  EXPECT_EQ(sem.figure_descs.at("f1").description, "Figure 1: Results.");
  EXPECT_EQ(sem.table_grids.at("t1").n_rows, 3);
}

TEST(Validate, FlagsBadReferences) {
  const auto doc = testing::sample_paper();
  SemanticRep sem;
  sem.facts.push_back({"a", "b", "c", "ghost"});
  sem.table_grids["a1"] = parse_table_text("x");
  sem.figure_descs["t1"] = {"d", {}, {}};
  TableGrid ragged;
  ragged.n_rows = 2;
  ragged.n_cols = 2;
  ragged.cells = {"a"};
  sem.table_grids["t1"] = ragged;
  EXPECT_EQ(validate_sem(sem, doc).size(), 4u);
}

TEST(Serialize, RoundTrip) {
  const auto doc = testing::sample_paper();
  auto mock = testing::make_mock(mock_script());
  const auto sem = understand(doc, *mock);
  EXPECT_EQ(sem_from_json(to_json(sem)), sem);
}

}  // namespace
}  // namespace docrefine::mcu
