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

#include <algorithm>

#include "docrefine/error.hpp"
#include "docrefine/ida.hpp"
#include "gtest/gtest.h"
#include "support/fixtures.hpp"

namespace docrefine::ida {
namespace {

AtomicOp op(int id, OpKind kind, OpTarget target, Json payload = Json::object()) {
  AtomicOp o;
  o.op_id = id;
  o.kind = kind;
  o.target = std::move(target);
  o.payload = std::move(payload);
  return o;
}

class IdaTest : public ::testing::Test {
 protected:
  ir::DocumentIR doc_ = testing::sample_paper();
  mcu::SemanticRep sem_ = mcu::structural_understanding(doc_);

  bool valid(const std::vector<AtomicOp>& ops) { return validate_ops(ops, doc_, sem_).empty(); }
  bool valid(const AtomicOp& o) { return valid(std::vector<AtomicOp>{o}); }

  Decomposition run(const Json& ops_reply, Instruction ins = {"edit"}) {
    auto mock = testing::make_mock({{"IDA", {{"default", ops_reply}}}});
    return decompose(ins, sem_, doc_, *mock);
  }
};

TEST_F(IdaTest, KindTargetCompatibility) {
  EXPECT_TRUE(valid(op(1, OpKind::kRewriteText, ElementTarget{"a1"})));
  EXPECT_FALSE(valid(op(1, OpKind::kRewriteText, ElementTarget{"t1"})));
  EXPECT_FALSE(valid(op(1, OpKind::kRewriteText, SectionTarget{"h3"})));
  EXPECT_TRUE(valid(op(1, OpKind::kDeleteText, ElementTarget{"a2"})));
  EXPECT_FALSE(valid(op(1, OpKind::kDeleteText, ElementTarget{"f1"})));
  EXPECT_TRUE(valid(op(1, OpKind::kUpdateCaption, ElementTarget{"c1"})));
  EXPECT_FALSE(valid(op(1, OpKind::kUpdateCaption, ElementTarget{"a1"})));
  EXPECT_TRUE(valid(op(1, OpKind::kFormatUnify, SectionTarget{""})));
  EXPECT_FALSE(valid(op(1, OpKind::kFormatUnify, CellTarget{"t1", 0, 0})));
  EXPECT_TRUE(valid(op(1, OpKind::kCrossModalFix, ElementTarget{"c2"})));
  EXPECT_TRUE(valid(op(1, OpKind::kCrossModalFix, ElementTarget{"r1"}, {{"figure", "f1"}})));
  EXPECT_FALSE(valid(op(1, OpKind::kCrossModalFix, ElementTarget{"r1"})));
}

TEST_F(IdaTest, SectionTargetMustBeHeading) {
  EXPECT_FALSE(valid(op(1, OpKind::kGenerateSummary, SectionTarget{"a1"})));
  EXPECT_TRUE(valid(op(1, OpKind::kGenerateSummary, SectionTarget{"h3"})));
}

TEST_F(IdaTest, TableCellBounds) {
  EXPECT_TRUE(valid(op(1, OpKind::kCorrectTableCell, CellTarget{"t1", 2, 1}, {{"value", "9"}})));
  EXPECT_FALSE(valid(op(1, OpKind::kCorrectTableCell, CellTarget{"t1", 3, 0}, {{"value", "9"}})));
  EXPECT_FALSE(valid(op(1, OpKind::kCorrectTableCell, CellTarget{"t1", 0, 0}, {{"value", 9}})));
  EXPECT_FALSE(valid(op(1, OpKind::kCorrectTableCell, CellTarget{"c1", 0, 0})));
}

TEST_F(IdaTest, SummaryPayloadChecks) {
  EXPECT_FALSE(valid(op(1, OpKind::kGenerateSummary, SectionTarget{"h3"}, {{"max_length", 0}})));
  EXPECT_FALSE(valid(op(1, OpKind::kGenerateSummary, SectionTarget{"h3"},
                        {{"insert", {{"id", "s1"}, {"after", "ghost"}}}})));
  EXPECT_TRUE(valid(op(1, OpKind::kGenerateSummary, SectionTarget{"h3"},
                       {{"insert", {{"id", "s1"}, {"after", "r2"}}}})));
  EXPECT_FALSE(
      valid(op(1, OpKind::kGenerateSummary, SectionTarget{"h3"}, {{"replace", {{"id", "t1"}}}})));
}

TEST_F(IdaTest, ReorderMustStayInScope) {
  EXPECT_TRUE(valid(op(1, OpKind::kReorderElements, SectionTarget{"h0"}, {{"order", {"a2", "a1"}}})));
  EXPECT_FALSE(
      valid(op(1, OpKind::kReorderElements, SectionTarget{"h0"}, {{"order", {"a2", "r1"}}})));
  EXPECT_FALSE(
      valid(op(1, OpKind::kReorderElements, SectionTarget{"h0"}, {{"order", {"a2", "a2"}}})));
  EXPECT_FALSE(valid(op(1, OpKind::kReorderElements, SectionTarget{"h0"})));
}

TEST_F(IdaTest, NumberingAndResolution) {
  EXPECT_FALSE(valid(op(2, OpKind::kRewriteText, ElementTarget{"a1"})));
  const auto v = validate_ops({op(1, OpKind::kRewriteText, ElementTarget{"nope"})}, doc_, sem_);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "unresolvable target");
}

TEST_F(IdaTest, DeleteConflictsWithOtherEdits) {
  const auto v = validate_ops({op(1, OpKind::kRewriteText, ElementTarget{"a1"}),
                               op(2, OpKind::kDeleteText, ElementTarget{"a1"})},
                              doc_, sem_);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "conflicting operations");
  EXPECT_EQ(v[0].op_ids, (std::vector<int>{1, 2}));
}

TEST_F(IdaTest, TouchedIdsCoverScope) {
  EXPECT_EQ(touched_ids(op(1, OpKind::kRewriteText, ElementTarget{"a1"}), doc_),
            std::set<std::string>{"a1"});
  const auto s = touched_ids(op(1, OpKind::kFormatUnify, SectionTarget{"h0"}), doc_);
  EXPECT_EQ(s, (std::set<std::string>{"h0", "a1", "a2"}));
  const auto g = touched_ids(op(1, OpKind::kGenerateSummary, SectionTarget{"h3"},
                                {{"insert", {{"id", "s1"}, {"after", "r2"}}}}),
                             doc_);
  EXPECT_TRUE(g.count("s1"));
}

TEST_F(IdaTest, OpJsonRoundTrip) {
  const std::vector<AtomicOp> ops = {
      op(1, OpKind::kCorrectTableCell, CellTarget{"t1", 2, 1}, {{"value", "85.4"}}),
      op(2, OpKind::kGenerateSummary, SectionTarget{""}, {{"max_length", 30}}),
      op(3, OpKind::kUpdateCaption, ElementTarget{"c1"})};
  for (const auto& o : ops) EXPECT_EQ(op_from_json(to_json(o), ""), o);
}

TEST_F(IdaTest, OpJsonErrorsCarryPaths) {
  try {
    op_from_json({{"kind", "Teleport"}, {"target", {{"element", "a1"}}}}, "/ops/3");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.path(), "/ops/3/kind");
  }
  EXPECT_THROW(op_from_json({{"kind", "RewriteText"}}, ""), ParseError);
  EXPECT_THROW(target_from_json({{"table", "t1"}, {"row", 1}}, ""), ParseError);
}

TEST_F(IdaTest, DecomposeNumbersOpsAndAppliesConstraints) {
  const Json reply = {
      {"ops",
       {{{"kind", "RewriteText"}, {"target", {{"element", "a1"}}}, {"payload", {{"goal", "fix"}}}},
        {{"kind", "GenerateSummary"}, {"target", {{"section", "h3"}}}}}}};
  Instruction ins{"Fix the abstract and summarize the results.", 25, "formal"};
  const auto d = run(reply, ins);
  ASSERT_EQ(d.ops.size(), 2u);
  EXPECT_EQ(d.ops[0].op_id, 1);
  EXPECT_EQ(d.ops[1].op_id, 2);
  EXPECT_EQ(d.ops[0].goal(), "fix");
  EXPECT_EQ(d.ops[1].payload["max_length"], 25);
  EXPECT_EQ(d.ops[1].payload["style"], "formal");
}

TEST_F(IdaTest, AmbiguityTakesFirstAlternative) {
  const Json reply = {
      {"ops",
       {{{"alternatives",
          {{{"kind", "UpdateCaption"}, {"target", {{"element", "c1"}}}},
           {{"kind", "UpdateCaption"}, {"target", {{"element", "c2"}}}}}},
         {"span", "the caption"},
         {"reason", "two captions"}}}}};
  const auto d = run(reply);
  ASSERT_EQ(d.ops.size(), 1u);
  EXPECT_EQ(target_id(d.ops[0].target), "c1");
  ASSERT_EQ(d.notes.size(), 1u);
  EXPECT_EQ(d.notes[0].span, "the caption");
  EXPECT_EQ(d.notes[0].candidates.size(), 2u);
  EXPECT_EQ(d.notes[0].chosen, 0);
}

TEST_F(IdaTest, ZeroOpsIsAllowed) {
  EXPECT_TRUE(run({{"ops", Json::array()}}).ops.empty());
}

TEST_F(IdaTest, UnknownTargetIsUnresolvable) {
  const Json reply = {{"ops", {{{"kind", "RewriteText"}, {"target", {{"element", "p99"}}}}}}};
  try {
    run(reply);
    FAIL();
  } catch (const UnresolvableTarget& e) {
    EXPECT_EQ(e.target(), "p99");
  }
}

TEST_F(IdaTest, MalformedOpIsSchemaError) {
  EXPECT_THROW(run({{"ops", {{{"kind", "Teleport"}, {"target", {{"element", "a1"}}}}}}}),
               SchemaError);
  EXPECT_THROW(run({{"nothing", 1}}), SchemaError);
}

TEST_F(IdaTest, InvalidCombinationIsValidationError) {
  const Json reply = {{"ops",
                       {{{"kind", "DeleteText"}, {"target", {{"element", "a1"}}}},
                        {{"kind", "RewriteText"}, {"target", {{"element", "a1"}}}}}}};
  EXPECT_THROW(run(reply), ValidationError);
}

TEST_F(IdaTest, DecompositionJsonRoundTrip) {
  const Json reply = {{"ops", {{{"kind", "DeleteText"}, {"target", {{"element", "a2"}}}}}}};
  const auto d = run(reply);
  const auto back = decomposition_from_json(to_json(d));
  EXPECT_EQ(back.ops, d.ops);
}

}  // namespace
}  // namespace docrefine::ida
