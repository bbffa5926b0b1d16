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

#include "docrefine/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "docrefine/canonical_json.hpp"
#include "docrefine/image.hpp"

namespace docrefine::orchestrator {
namespace {

using fcv::Agent;
using fcv::FeedbackItem;
using ida::AtomicOp;
using ida::OpKind;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

bool in_range(double v) { return v >= 0.0 && v <= 1.0; }

double score_sum(const fcv::VerificationReport& r) { return r.scs + r.lfi + r.iar; }

struct Snapshot {
  ir::DocumentIR original_ir;
  mcu::SemanticRep original_sem;
  ida::Decomposition decomposition;
  refine::RefinementResult result;
  fcv::VerificationReport report;
};

class Loop {
 public:
  Loop(const lsa::IngestSource& source, const ida::Instruction& instruction,
       const LoopConfig& cfg, backend::Backend& backend)
      : source_(source), instruction_(instruction), cfg_(cfg), backend_(backend) {}

  RunResult run() {
    try {
      const auto problems = validate_config(cfg_);
      if (!problems.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "invalid loop config: " + join(problems, "; "));
      }
      analyze();
      sem_ = mcu::understand(ir_, backend_);
      decomposition_ = ida::decompose(instruction_, sem_, ir_, backend_);
      iterate(decomposition_.ops, false, {}, [&] {
        return refine::apply_ops(ir_, sem_, decomposition_.ops, backend_, cfg_.metrics);
      });

      while (static_cast<int>(trace_.iterations.size()) < cfg_.max_iterations) {
        const Snapshot& last = snapshots_.back();
        if (last.report.passes(cfg_.thresholds) || last.report.feedback.empty()) break;
        RoutedFeedback routed = route_feedback(last.report.feedback, decomposition_.ops);
        if (!routed.redecompose && routed.ops.empty()) break;
        if (!routed.redecompose &&
            !ida::validate_ops(routed.ops, last.result.new_ir, last.result.new_sem).empty()) {
          routed.redecompose = true;
        }
        if (routed.redecompose) {
          redecompose(routed);
        } else {
          follow_up(routed);
        }
      }
    } catch (const Error& e) {
      throw RunAborted(e, trace_);
    }
    return finish();
  }

 private:
  void analyze() {
    lsa::Analysis a = lsa::analyze(source_, &backend_, cfg_.analyze);
    ir_ = std::move(a.ir);
    warnings_ = std::move(a.warnings);
  }

  template <typename Apply>
  void iterate(const std::vector<AtomicOp>& executed, bool redecomposed,
               std::vector<FeedbackItem> consumed, Apply apply) {
    const auto start = std::chrono::steady_clock::now();
    Snapshot snap{ir_, sem_, decomposition_, apply(), {}};
    snap.report = verify(snap);
    IterationRecord rec;
    rec.index = static_cast<int>(trace_.iterations.size()) + 1;
    rec.ops = executed;
    rec.redecomposed = redecomposed;
    rec.feedback_consumed = std::move(consumed);
    rec.report = snap.report;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace_.iterations.push_back(std::move(rec));
    snapshots_.push_back(std::move(snap));
  }

  fcv::VerificationReport verify(const Snapshot& s) {
    fcv::VerifyExtras extras;
    extras.summaries = s.result.summaries;
    extras.overflow = s.result.warnings;
    extras.thresholds = cfg_.thresholds;
    if (cfg_.proxy_rasters) {
      for (size_t p = 0; p < s.original_ir.pages.size(); ++p) {
        extras.rasters.push_back({render_layout_raster(s.original_ir, static_cast<int>(p)),
                                  render_layout_raster(s.result.new_ir, static_cast<int>(p))});
      }
    }
    return fcv::verify(s.original_ir, s.result.new_ir, s.original_sem, s.result.new_sem,
                       instruction_, s.decomposition.ops, backend_,
                       cfg_.judge ? &backend_ : nullptr, extras);
  }

  void follow_up(const RoutedFeedback& routed) {
    const refine::RefinementResult prev = snapshots_.back().result;
    iterate(routed.ops, false, routed.ordered, [&] {
      refine::RefinementResult next =
          refine::apply_ops(prev.new_ir, prev.new_sem, routed.ops, backend_, cfg_.metrics);
      refine::RefinementResult merged;
      merged.new_ir = std::move(next.new_ir);
      merged.new_sem = std::move(next.new_sem);
      merged.summaries = prev.summaries;
      for (size_t i = 0; i < routed.ops.size(); ++i) {
        auto it = next.summaries.find(routed.ops[i].op_id);
        if (it != next.summaries.end() && routed.origin_op[i] > 0) {
          merged.summaries[routed.origin_op[i]] = it->second;
        }
      }
      std::set<std::string> touched;
      for (const auto& op : routed.ops) {
        const auto ids = ida::touched_ids(op, prev.new_ir);
        touched.insert(ids.begin(), ids.end());
      }
      for (const auto& w : prev.warnings) {
        if (!touched.count(w.element_id)) merged.warnings.push_back(w);
      }
      merged.warnings.insert(merged.warnings.end(), next.warnings.begin(), next.warnings.end());
      std::sort(merged.warnings.begin(), merged.warnings.end(),
                [](const auto& a, const auto& b) { return a.element_id < b.element_id; });
      merged.changed_ids = ir::diff_ir(ir_, merged.new_ir).all();
      return merged;
    });
  }

  void redecompose(const RoutedFeedback& routed) {
    if (routed.rerun_lsa) {
      analyze();
      sem_ = mcu::understand(ir_, backend_);
    }
    if (routed.rerun_mcu) {
      std::vector<std::string> guidance;
      for (const auto& item : routed.ordered) {
        if (item.route_to == Agent::kMCU) guidance.push_back(item.message);
      }
      sem_ = mcu::understand(ir_, backend_, join(guidance, "\n"));
    }
    decomposition_ =
        ida::decompose(augment_instruction(instruction_, routed.ordered), sem_, ir_, backend_);
    iterate(decomposition_.ops, true, routed.ordered, [&] {
      return refine::apply_ops(ir_, sem_, decomposition_.ops, backend_, cfg_.metrics);
    });
  }

  RunResult finish() {
    size_t chosen = snapshots_.size() - 1;
    if (cfg_.keep_best) {
      for (size_t i = 0; i < snapshots_.size(); ++i) {
        const auto& a = snapshots_[i].report;
        const auto& b = snapshots_[chosen].report;
        const bool pa = a.passes(cfg_.thresholds), pb = b.passes(cfg_.thresholds);
        if (score_sum(a) > score_sum(b) || (score_sum(a) == score_sum(b) && pa >= pb)) chosen = i;
      }
    }
    Snapshot& s = snapshots_[chosen];
    RunResult out;
    out.original_ir = std::move(s.original_ir);
    out.original_sem = std::move(s.original_sem);
    out.analysis_warnings = warnings_;
    out.decomposition = std::move(s.decomposition);
    out.result = std::move(s.result);
    out.report = std::move(s.report);
    out.trace = std::move(trace_);
    out.chosen_iteration = static_cast<int>(chosen) + 1;
    return out;
  }

  const lsa::IngestSource& source_;
  const ida::Instruction& instruction_;
  const LoopConfig& cfg_;
  backend::Backend& backend_;

  ir::DocumentIR ir_;
  mcu::SemanticRep sem_;
  std::vector<std::string> warnings_;
  ida::Decomposition decomposition_;
  std::vector<Snapshot> snapshots_;
  IterationTrace trace_;
};

}  // namespace

std::vector<std::string> validate_config(const LoopConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.max_iterations < 1) out.push_back("max_iterations must be positive");
  if (!in_range(cfg.thresholds.scs)) out.push_back("tau_scs must be in [0, 1]");
  if (!in_range(cfg.thresholds.lfi)) out.push_back("tau_lfi must be in [0, 1]");
  if (!in_range(cfg.thresholds.iar)) out.push_back("tau_iar must be in [0, 1]");
  if (cfg.analyze.gap_threshold < 0) out.push_back("gap_threshold must be non-negative");
  if (cfg.analyze.caption_max_gap < 0) out.push_back("caption_max_gap must be non-negative");
  return out;
}

Json to_json(const IterationTrace& trace, bool with_timing) {
  Json iterations = Json::array();
  for (const auto& rec : trace.iterations) {
    Json ops = Json::array();
    for (const auto& op : rec.ops) ops.push_back(ida::to_json(op));
    Json consumed = Json::array();
    for (const auto& f : rec.feedback_consumed) consumed.push_back(fcv::to_json(f));
    Json j = {{"index", rec.index},
              {"ops", ops},
              {"redecomposed", rec.redecomposed},
              {"feedback_consumed", consumed},
              {"report", fcv::to_json(rec.report)}};
    if (with_timing) j["wall_seconds"] = rec.wall_seconds;
    iterations.push_back(std::move(j));
  }
  return {{"iterations", iterations}};
}

RoutedFeedback route_feedback(const std::vector<FeedbackItem>& items,
                              const std::vector<AtomicOp>& active_ops) {
  RoutedFeedback out;
  out.ordered = items;
  std::stable_sort(out.ordered.begin(), out.ordered.end(),
                   [](const FeedbackItem& a, const FeedbackItem& b) {
                     return static_cast<int>(a.severity) > static_cast<int>(b.severity);
                   });

  std::map<int, const AtomicOp*> summaries;
  for (const auto& op : active_ops) {
    if (op.kind == OpKind::kGenerateSummary) summaries[op.op_id] = &op;
  }

  // Keys in first-appearance order: element rewrites and summary revisions.
  struct Pending {
    std::string element;
    int summary_op = 0;
    std::vector<std::string> messages;
  };
  std::vector<Pending> pending;
  auto add = [&](const std::string& element, int summary_op, const std::string& message) {
    for (auto& p : pending) {
      if (p.element == element && p.summary_op == summary_op) {
        p.messages.push_back(message);
        return;
      }
    }
    pending.push_back({element, summary_op, {message}});
  };

  for (const auto& item : out.ordered) {
    switch (item.route_to) {
      case Agent::kCRA:
        if (item.target_element.empty()) {
          out.redecompose = true;
        } else {
          add(item.target_element, 0, item.message);
        }
        break;
      case Agent::kSGA:
        if (item.target_op && summaries.count(*item.target_op)) {
          add("", *item.target_op, item.message);
        } else if (!item.target_element.empty()) {
          add(item.target_element, 0, item.message);
        } else {
          out.redecompose = true;
        }
        break;
      case Agent::kIDA:
        out.redecompose = true;
        break;
      case Agent::kMCU:
        out.redecompose = true;
        out.rerun_mcu = true;
        break;
      case Agent::kLSA:
        out.redecompose = true;
        out.rerun_lsa = true;
        break;
    }
  }

  for (const auto& p : pending) {
    AtomicOp op;
    op.op_id = static_cast<int>(out.ops.size()) + 1;
    const std::string feedback = join(p.messages, "; ");
    if (p.summary_op > 0) {
      const AtomicOp& origin = *summaries.at(p.summary_op);
      op.kind = OpKind::kGenerateSummary;
      op.target = origin.target;
      op.payload = origin.payload;
      const std::string goal = origin.goal();
      op.payload["goal"] = goal.empty() ? "Revise: " + feedback : goal + " Revise: " + feedback;
      op.rationale = "verification feedback";
      out.origin_op.push_back(p.summary_op);
    } else {
      op.kind = OpKind::kRewriteText;
      op.target = ida::ElementTarget{p.element};
      op.payload = {{"goal", feedback}};
      op.rationale = "verification feedback";
      out.origin_op.push_back(0);
    }
    out.ops.push_back(std::move(op));
  }
  return out;
}

ida::Instruction augment_instruction(const ida::Instruction& instruction,
                                     const std::vector<FeedbackItem>& items) {
  ida::Instruction out = instruction;
  if (items.empty()) return out;
  out.text += "\n\nCorrective feedback from verification:";
  for (const auto& item : items) out.text += "\n- " + item.message;
  return out;
}

RunResult run(const lsa::IngestSource& source, const ida::Instruction& instruction,
              const LoopConfig& cfg, backend::Backend& backend) {
  return Loop(source, instruction, cfg, backend).run();
}

void write_run(const std::filesystem::path& dir, const RunResult& run) {
  std::filesystem::create_directories(dir);
  refine::write_result(dir, run.result);
  write_file(dir / "out.ops.json", to_canonical_json(ida::to_json(run.decomposition)));
  write_file(dir / "trace.json", to_canonical_json(to_json(run.trace)));
  Json report = fcv::to_json(run.report);
  report["iteration"] = run.chosen_iteration;
  write_file(dir / "report.json", to_canonical_json(report));
}

}  // namespace docrefine::orchestrator
