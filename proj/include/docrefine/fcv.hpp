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

// Fidelity and consistency verification: semantic consistency (SCS), layout
// fidelity (LFI) and instruction adherence (IAR) scores, per-operation
// verdicts, and routed corrective feedback.
//
// Score definitions:
//   SCS  mean over changed text elements of max(0, cos(embed(new), embed(intent)))
//        where intent is the goals of the ops on the element followed by its
//        original text; changes to untargeted elements score 0; no changes
//        score 1.
//   LFI  w_geo * G + w_raster * S. G is the mean bbox IoU of untargeted
//        elements (a missing element scores 0), S the mean SSIM of supplied
//        page rasters. Without rasters LFI = G.
//   IAR  Satisfied ops / all ops; 1 for an empty op list.

#ifndef DOCREFINE_FCV_HPP_
#define DOCREFINE_FCV_HPP_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docrefine/backend.hpp"
#include "docrefine/ida.hpp"
#include "docrefine/image.hpp"
#include "docrefine/ir.hpp"
#include "docrefine/mcu.hpp"
#include "docrefine/refine.hpp"

namespace docrefine::fcv {

// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws DimensionMismatch and
// ZeroVector.
double cosine(std::span<const double> u, std::span<const double> v);

// Mean SSIM over every `window` x `window` position (uniform weights,
// population variances, C1 = (0.01 L)^2, C2 = (0.03 L)^2). Throws
// DimensionMismatch when the sizes differ or are smaller than the window.
double ssim(const GrayImage& a, const GrayImage& b, int window = 8, double dynamic_range = 255.0);

enum class Category {
  kSemanticInaccuracy,
  kLayoutDistortion,
  kPartialAdherence,
  kNuanceMisread,
  kHallucination,
};
enum class Agent { kCRA, kSGA, kIDA, kMCU, kLSA };
enum class Severity { kLow, kMedium, kHigh };

std::string_view to_string(Category c);
std::string_view to_string(Agent a);
std::string_view to_string(Severity s);
std::optional<Category> category_from_string(std::string_view name);
std::optional<Agent> agent_from_string(std::string_view name);
std::optional<Severity> severity_from_string(std::string_view name);

// Agents that may receive feedback of a category.
const std::vector<Agent>& allowed_routes(Category c);
bool route_allowed(Category c, Agent a);

struct FeedbackItem {
  Category category = Category::kSemanticInaccuracy;
  Agent route_to = Agent::kCRA;
  std::string target_element;
  std::optional<int> target_op;
  std::string message;
  Severity severity = Severity::kMedium;
};

// Builds an item, rejecting routes the category does not allow.
FeedbackItem make_feedback(Category category, Agent route_to, std::string target_element,
                           std::optional<int> target_op, std::string message, Severity severity);

enum class VerdictKind { kSatisfied, kViolated, kUnverifiable };
std::string_view to_string(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::kSatisfied;
  std::string reason;
  std::optional<Category> category;  // Judge-supplied failure category.

  static Verdict satisfied() { return {VerdictKind::kSatisfied, "", std::nullopt}; }
  static Verdict violated(std::string reason, std::optional<Category> c = std::nullopt) {
    return {VerdictKind::kViolated, std::move(reason), c};
  }
  static Verdict unverifiable(std::string reason) {
    return {VerdictKind::kUnverifiable, std::move(reason), std::nullopt};
  }
};

double iar_from_verdicts(const std::map<int, Verdict>& verdicts);

struct Thresholds {
  double scs = 0.85;
  double lfi = 0.90;
  double iar = 0.85;
};

struct LfiWeights {
  double geometric = 0.6;
  double raster = 0.4;
};

struct RasterPair {
  GrayImage original;
  GrayImage modified;
};

struct ScsResult {
  double score = 1.0;
  std::map<std::string, double> per_element;
};

// `changed_ids` are the ids whose content differs between the IRs; only
// textual ones count. Targets of `ops` define which changes were requested.
ScsResult compute_scs(const ir::DocumentIR& orig, const ir::DocumentIR& mod,
                      const std::vector<ida::AtomicOp>& ops,
                      const std::set<std::string>& changed_ids, backend::Backend& embedder);

struct LfiResult {
  double score = 1.0;
  double geometric = 1.0;
  std::optional<double> raster;
  std::map<std::string, double> per_element;  // IoU of each untargeted element.
};

LfiResult compute_lfi(const ir::DocumentIR& orig, const ir::DocumentIR& mod,
                      const std::set<std::string>& targeted,
                      const std::vector<RasterPair>* rasters = nullptr,
                      const LfiWeights& weights = {});

// Per-kind rule check, followed for free-text kinds by a yes/no judgment from
// `judge`. A null judge makes those kinds Unverifiable.
Verdict check_op(const ida::AtomicOp& op, const ir::DocumentIR& orig, const ir::DocumentIR& mod,
                 const mcu::SemanticRep& mod_sem, const std::map<int, std::string>& summaries,
                 backend::Backend* judge, const std::string& instruction = "");

struct VerificationReport {
  double scs = 1.0;
  double lfi = 1.0;
  double iar = 1.0;
  std::map<int, Verdict> per_op;
  std::vector<FeedbackItem> feedback;
  ScsResult scs_detail;
  LfiResult lfi_detail;

  bool passes(const Thresholds& t) const {
    return scs >= t.scs && lfi >= t.lfi && iar >= t.iar;
  }
};

struct VerifyExtras {
  std::map<int, std::string> summaries;
  std::vector<refine::OverflowWarning> overflow;
  std::vector<RasterPair> rasters;
  Thresholds thresholds;
  LfiWeights weights;
};

VerificationReport verify(const ir::DocumentIR& orig_ir, const ir::DocumentIR& mod_ir,
                          const mcu::SemanticRep& orig_sem, const mcu::SemanticRep& mod_sem,
                          const ida::Instruction& instruction,
                          const std::vector<ida::AtomicOp>& ops, backend::Backend& embedder,
                          backend::Backend* judge, const VerifyExtras& extras = {});

Json to_json(const FeedbackItem& item);
FeedbackItem feedback_from_json(const Json& j);
Json to_json(const VerificationReport& report);

// Scores for a benchmark case, measured against the gold document instead of
// the input: SCS compares every textual gold element with its output
// counterpart, LFI is the mean IoU over all gold elements, and IAR is the
// share of gold edits (elements that differ between input and gold) the
// output reproduces exactly.
struct GoldScores {
  double scs = 1.0;
  double lfi = 1.0;
  double iar = 1.0;
};

GoldScores score_against_gold(const ir::DocumentIR& input, const ir::DocumentIR& output,
                              const ir::DocumentIR& gold, backend::Backend& embedder);

}  // namespace docrefine::fcv

#endif  // DOCREFINE_FCV_HPP_
