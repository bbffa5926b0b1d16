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
#include <cmath>

#include "docrefine/error.hpp"
#include "docrefine/fcv.hpp"
#include "gtest/gtest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace docrefine::fcv {
namespace {

using ida::AtomicOp;
using ida::OpKind;

AtomicOp op(int id, OpKind kind, ida::OpTarget target, Json payload = Json::object()) {
  AtomicOp o;
  o.op_id = id;
  o.kind = kind;
  o.target = std::move(target);
  o.payload = std::move(payload);
  return o;
}

Json judge_script(const std::string& verdict, const std::string& category = "") {
  return {{"FCV", {{"default", {{"verdict", verdict}, {"reason", "r"}, {"category", category}}}}}};
}

TEST(Cosine, MatchesDirectFormula) {
  testing::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto u = testing::random_vector(rng, 17);
    const auto v = testing::random_vector(rng, 17);
    EXPECT_NEAR(cosine(u, v), testing::direct_cosine(u, v), 1e-12);
  }
}

TEST(Cosine, Errors) {
  const std::vector<double> a = {1, 2}, b = {1, 2, 3}, z = {0, 0};
  EXPECT_THROW(cosine(a, b), DimensionMismatch);
  EXPECT_THROW(cosine(a, z), ZeroVector);
  EXPECT_DOUBLE_EQ(cosine(a, a), 1.0);
  const std::vector<double> neg = {-1, -2};
  EXPECT_DOUBLE_EQ(cosine(a, neg), -1.0);
}

TEST(Ssim, MatchesNaiveOracle) {
  testing::Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto a = testing::random_image(rng, 20, 13);
    const auto b = testing::random_image(rng, 20, 13);
    EXPECT_NEAR(ssim(a, b), testing::naive_ssim(a, b), 1e-9);
    EXPECT_NEAR(ssim(a, b, 3), testing::naive_ssim(a, b, 3), 1e-9);
  }
}

TEST(Ssim, IdentityAndConstantImages) {
  testing::Rng rng(5);
  const auto a = testing::random_image(rng, 16, 16);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  const GrayImage white(16, 16, 255);
  EXPECT_NEAR(ssim(white, white), 1.0, 1e-12);
}

TEST(Ssim, Errors) {
  EXPECT_THROW(ssim(GrayImage(8, 8), GrayImage(9, 8)), DimensionMismatch);
  EXPECT_THROW(ssim(GrayImage(4, 4), GrayImage(4, 4)), DimensionMismatch);
  EXPECT_THROW(ssim(GrayImage(8, 8), GrayImage(8, 8), 0), Error);
}

TEST(Iar, CountsSatisfied) {
  EXPECT_DOUBLE_EQ(iar_from_verdicts({}), 1.0);
  EXPECT_DOUBLE_EQ(iar_from_verdicts({{1, Verdict::satisfied()},
                                      {2, Verdict::violated("x")},
                                      {3, Verdict::unverifiable("y")},
                                      {4, Verdict::satisfied()}}),
                   0.5);
}

TEST(Feedback, RoutesAreChecked) {
  EXPECT_TRUE(route_allowed(Category::kLayoutDistortion, Agent::kLSA));
  EXPECT_FALSE(route_allowed(Category::kHallucination, Agent::kLSA));
  EXPECT_THROW(make_feedback(Category::kHallucination, Agent::kLSA, "", std::nullopt, "m",
                             Severity::kHigh),
               Error);
  const auto item = make_feedback(Category::kSemanticInaccuracy, Agent::kCRA, "a1", 2, "msg",
                                  Severity::kMedium);
  const auto back = feedback_from_json(to_json(item));
  EXPECT_EQ(back.category, item.category);
  EXPECT_EQ(back.route_to, item.route_to);
  EXPECT_EQ(back.target_element, "a1");
  EXPECT_EQ(back.target_op, 2);
  EXPECT_EQ(back.message, "msg");
  EXPECT_EQ(back.severity, Severity::kMedium);
}

TEST(Names, RoundTrip) {
  for (auto c : {Category::kSemanticInaccuracy, Category::kLayoutDistortion,
                 Category::kPartialAdherence, Category::kNuanceMisread, Category::kHallucination}) {
    EXPECT_EQ(category_from_string(to_string(c)), c);
  }
  for (auto a : {Agent::kCRA, Agent::kSGA, Agent::kIDA, Agent::kMCU, Agent::kLSA}) {
    EXPECT_EQ(agent_from_string(to_string(a)), a);
  }
  EXPECT_EQ(severity_from_string("bogus"), std::nullopt);
}

class FcvTest : public ::testing::Test {
 protected:
  ir::DocumentIR doc_ = testing::sample_paper();
  mcu::SemanticRep sem_ = mcu::structural_understanding(doc_);
  std::unique_ptr<backend::MockBackend> yes_ = testing::make_mock(judge_script("yes"));
  std::unique_ptr<backend::MockBackend> no_ =
      testing::make_mock(judge_script("no", "NuanceMisread"));

  ir::DocumentIR with_text(const std::string& id, const std::string& text) {
    auto d = doc_;
    d.find(id)->text = text;
    return d;
  }
  Verdict check(const AtomicOp& o, const ir::DocumentIR& mod, backend::Backend* judge,
                const std::map<int, std::string>& summaries = {}) {
    return check_op(o, doc_, mod, mcu::structural_understanding(mod), summaries, judge);
  }
};

TEST_F(FcvTest, RewriteUsesJudge) {
  const auto o = op(1, OpKind::kRewriteText, ida::ElementTarget{"a1"}, {{"goal", "shorten"}});
  const auto mod = with_text("a1", "Shorter.");
  EXPECT_EQ(check(o, mod, yes_.get()).kind, VerdictKind::kSatisfied);
  const auto v = check(o, mod, no_.get());
  EXPECT_EQ(v.kind, VerdictKind::kViolated);
  EXPECT_EQ(v.category, Category::kNuanceMisread);
  EXPECT_EQ(check(o, mod, nullptr).kind, VerdictKind::kUnverifiable);
  EXPECT_EQ(check(o, doc_, yes_.get()).kind, VerdictKind::kViolated);  // Unchanged.
}

TEST_F(FcvTest, JudgeFailureIsUnverifiable) {
  auto broken = testing::make_mock({{"FCV", {{"default", "not json at all"}}}});
  const auto o = op(1, OpKind::kRewriteText, ida::ElementTarget{"a1"});
  EXPECT_EQ(check(o, with_text("a1", "x"), broken.get()).kind, VerdictKind::kUnverifiable);
}

TEST_F(FcvTest, RuleBasedKinds) {
  auto deleted = doc_;
  std::erase_if(deleted.elements, [](const auto& e) { return e.id == "a2"; });
  std::erase(deleted.reading_order, "a2");
  EXPECT_EQ(check(op(1, OpKind::kDeleteText, ida::ElementTarget{"a2"}), deleted, nullptr).kind,
            VerdictKind::kSatisfied);
  EXPECT_EQ(check(op(1, OpKind::kDeleteText, ida::ElementTarget{"a2"}), doc_, nullptr).kind,
            VerdictKind::kViolated);

  const auto cell = op(1, OpKind::kCorrectTableCell, ida::CellTarget{"t1", 2, 1},
                       {{"value", "85.4"}});
  EXPECT_EQ(check(cell, with_text("t1", "Model\tAccuracy\nBaseline\t71.2\nOurs\t85.4"), nullptr)
                .kind,
            VerdictKind::kSatisfied);
  EXPECT_EQ(check(cell, doc_, nullptr).kind, VerdictKind::kViolated);

  const auto cap = op(1, OpKind::kUpdateCaption, ida::ElementTarget{"c2"},
                      {{"key_terms", {"accuracy", "Latency"}}});
  EXPECT_EQ(check(cap, with_text("c2", "Figure 1: Accuracy vs latency."), nullptr).kind,
            VerdictKind::kSatisfied);
  EXPECT_EQ(check(cap, with_text("c2", "Figure 1: Accuracy."), nullptr).kind,
            VerdictKind::kViolated);

  const auto ins = op(1, OpKind::kInsertText, ida::ElementTarget{"a1"}, {{"text", "More."}});
  EXPECT_EQ(check(ins, with_text("a1", doc_.find("a1")->text + " More."), nullptr).kind,
            VerdictKind::kSatisfied);
}

TEST_F(FcvTest, SummaryChecks) {
  const auto o = op(1, OpKind::kGenerateSummary, ida::SectionTarget{"h3"}, {{"max_length", 3}});
  EXPECT_EQ(check(o, doc_, nullptr, {{1, "Short summary."}}).kind, VerdictKind::kSatisfied);
  EXPECT_EQ(check(o, doc_, nullptr, {{1, "A summary that is too long."}}).kind,
            VerdictKind::kViolated);
  EXPECT_EQ(check(o, doc_, nullptr, {}).kind, VerdictKind::kViolated);
}

TEST_F(FcvTest, ReorderCheck) {
  const auto o = op(1, OpKind::kReorderElements, ida::SectionTarget{"h0"}, {{"order", {"a2", "a1"}}});
  auto mod = doc_;
  std::swap(mod.reading_order[1], mod.reading_order[2]);
  EXPECT_EQ(check(o, mod, nullptr).kind, VerdictKind::kSatisfied);
  EXPECT_EQ(check(o, doc_, nullptr).kind, VerdictKind::kViolated);
}

TEST_F(FcvTest, LfiIgnoresTargetsAndPenalizesMoves) {
  auto mod = doc_;
  mod.find("a1")->bbox.y1 += 30;
  EXPECT_DOUBLE_EQ(compute_lfi(doc_, mod, {"a1"}).score, 1.0);
  const auto r = compute_lfi(doc_, mod, {});
  EXPECT_LT(r.per_element.at("a1"), 1.0);
  EXPECT_NEAR(r.geometric, (9.0 + r.per_element.at("a1")) / 10.0, 1e-12);
  std::erase_if(mod.elements, [](const auto& e) { return e.id == "a2"; });
  EXPECT_DOUBLE_EQ(compute_lfi(doc_, mod, {"a1"}).per_element.at("a2"), 0.0);
}

TEST_F(FcvTest, LfiBlendsRasters) {
  testing::Rng rng(9);
  std::vector<RasterPair> pairs = {{testing::random_image(rng, 16, 16), {}}};
  pairs[0].modified = pairs[0].original;
  const auto r = compute_lfi(doc_, doc_, {}, &pairs, {0.6, 0.4});
  ASSERT_TRUE(r.raster.has_value());
  EXPECT_NEAR(r.score, 1.0, 1e-12);
  pairs[0].modified = testing::random_image(rng, 16, 16);
  const auto r2 = compute_lfi(doc_, doc_, {}, &pairs, {0.6, 0.4});
  EXPECT_NEAR(r2.score, 0.6 + 0.4 * std::clamp(*r2.raster, 0.0, 1.0), 1e-12);
}

TEST_F(FcvTest, ScsScoresUntargetedChangesZero) {
  auto mock = testing::make_mock(Json::object());
  const auto mod = with_text("a2", "Something else entirely.");
  const auto r = compute_scs(doc_, mod, {}, {"a2"}, *mock);
  EXPECT_DOUBLE_EQ(r.score, 0.0);
  EXPECT_DOUBLE_EQ(compute_scs(doc_, doc_, {}, {}, *mock).score, 1.0);
}

TEST_F(FcvTest, ScsOfTargetedChangeIsCosineToIntent) {
  auto mock = testing::make_mock(Json::object());
  const auto o = op(1, OpKind::kRewriteText, ida::ElementTarget{"a1"}, {{"goal", "g"}});
  const auto mod = with_text("a1", "We present a layout aware editor.");
  const auto r = compute_scs(doc_, mod, {o}, {"a1"}, *mock);
  ASSERT_EQ(r.per_element.size(), 1u);
  EXPECT_GT(r.score, 0.0);
  EXPECT_LT(r.score, 1.0);
}

TEST_F(FcvTest, IdentityEditScoresOnes) {
  auto mock = testing::make_mock(Json::object());
  const auto rep = verify(doc_, doc_, sem_, sem_, {"no change"}, {}, *mock, mock.get());
  EXPECT_EQ(rep.scs, 1.0);
  EXPECT_EQ(rep.lfi, 1.0);
  EXPECT_EQ(rep.iar, 1.0);
  EXPECT_TRUE(rep.feedback.empty());
}

TEST_F(FcvTest, VerifyRoutesFeedback) {
  const auto o = op(1, OpKind::kRewriteText, ida::ElementTarget{"a1"}, {{"goal", "shorten"}});
  auto mod = with_text("a1", "Shorter.");
  mod.find("r2")->bbox.x1 -= 200;
  const auto rep = verify(doc_, mod, sem_, sem_, {"Shorten a1."}, {o}, *no_, no_.get());
  EXPECT_DOUBLE_EQ(rep.iar, 0.0);
  EXPECT_FALSE(rep.passes({}));
  bool violated = false, layout = false;
  for (const auto& f : rep.feedback) {
    if (f.target_op == 1 && f.category == Category::kNuanceMisread) violated = true;
    if (f.category == Category::kLayoutDistortion && f.target_element == "r2") {
      layout = true;
      EXPECT_EQ(f.route_to, Agent::kLSA);
      EXPECT_EQ(f.severity, Severity::kHigh);
    }
    EXPECT_TRUE(route_allowed(f.category, f.route_to));
  }
  EXPECT_TRUE(violated);
  EXPECT_TRUE(layout);
}

TEST_F(FcvTest, VerifyFlagsInventedNumbersInSummary) {
  auto mock = testing::make_mock(judge_script("yes"));
  const auto o = op(1, OpKind::kGenerateSummary, ida::SectionTarget{"h3"});
  VerifyExtras extras;
  extras.summaries = {{1, "Accuracy is 99.9 percent."}};
  const auto rep = verify(doc_, doc_, sem_, sem_, {"Summarize."}, {o}, *mock, mock.get(), extras);
  const bool hallucination =
      std::any_of(rep.feedback.begin(), rep.feedback.end(), [](const FeedbackItem& f) {
        return f.category == Category::kHallucination && f.route_to == Agent::kSGA;
      });
  EXPECT_TRUE(hallucination);
  extras.summaries = {{1, "Accuracy is 84.5 percent."}};
  const auto ok = verify(doc_, doc_, sem_, sem_, {"Summarize."}, {o}, *mock, mock.get(), extras);
  EXPECT_TRUE(ok.feedback.empty());
}

TEST_F(FcvTest, ReportJson) {
  auto mock = testing::make_mock(Json::object());
  const auto rep = verify(doc_, doc_, sem_, sem_, {"x"}, {}, *mock, nullptr);
  const Json j = to_json(rep);
  for (const char* k : {"scs", "lfi", "iar", "per_op", "feedback", "details"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
}

TEST_F(FcvTest, GoldScoring) {
  auto mock = testing::make_mock(Json::object());
  const auto gold = with_text("a1", "Gold text.");
  auto s = score_against_gold(doc_, gold, gold, *mock);
  EXPECT_EQ(s.scs, 1.0);
  EXPECT_EQ(s.lfi, 1.0);
  EXPECT_EQ(s.iar, 1.0);
  s = score_against_gold(doc_, doc_, gold, *mock);
  EXPECT_LT(s.scs, 1.0);
  EXPECT_EQ(s.iar, 0.0);
}

}  // namespace
}  // namespace docrefine::fcv
