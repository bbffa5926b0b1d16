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

// Closed-loop controller: analysis, understanding, decomposition, refinement
// and verification, repeated with routed feedback until the scores meet their
// thresholds or the iteration budget runs out.

#ifndef DOCREFINE_ORCHESTRATOR_HPP_
#define DOCREFINE_ORCHESTRATOR_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "docrefine/backend.hpp"
#include "docrefine/error.hpp"
#include "docrefine/fcv.hpp"
#include "docrefine/ida.hpp"
#include "docrefine/layout.hpp"
#include "docrefine/lsa.hpp"
#include "docrefine/mcu.hpp"
#include "docrefine/refine.hpp"

namespace docrefine::orchestrator {

struct LoopConfig {
  int max_iterations = 3;
  fcv::Thresholds thresholds;
  bool keep_best = true;
  bool judge = true;  // Ask the backend to judge free-text edits.
  bool proxy_rasters = false;  // Add SSIM of proxy page renderings to LFI.
  lsa::AnalyzeOptions analyze;
  TextMetrics metrics;
};

std::vector<std::string> validate_config(const LoopConfig& cfg);

struct IterationRecord {
  int index = 0;  // 1-based.
  std::vector<ida::AtomicOp> ops;  // Ops executed in this iteration.
  bool redecomposed = false;
  std::vector<fcv::FeedbackItem> feedback_consumed;
  fcv::VerificationReport report;
  double wall_seconds = 0;
};

struct IterationTrace {
  std::vector<IterationRecord> iterations;
};

// Wall times are left out unless `with_timing`, so traces of identical runs
// are byte-identical.
Json to_json(const IterationTrace& trace, bool with_timing = false);

struct RoutedFeedback {
  std::vector<ida::AtomicOp> ops;  // Numbered 1..k.
  std::vector<int> origin_op;      // Per op: the active op it revises, or 0.
  bool redecompose = false;
  bool rerun_lsa = false;
  bool rerun_mcu = false;
  std::vector<fcv::FeedbackItem> ordered;  // High severity first, stable.
};

// CRA items become one RewriteText per element whose goal is the joined
// messages. SGA items revise the GenerateSummary they name (goal extended by
// the messages) or else rewrite their element. IDA, MCU and LSA items set
// the re-decompose flag.
RoutedFeedback route_feedback(const std::vector<fcv::FeedbackItem>& items,
                              const std::vector<ida::AtomicOp>& active_ops);

// The original instruction followed by the feedback messages.
ida::Instruction augment_instruction(const ida::Instruction& instruction,
                                     const std::vector<fcv::FeedbackItem>& items);

struct RunResult {
  ir::DocumentIR original_ir;
  mcu::SemanticRep original_sem;
  std::vector<std::string> analysis_warnings;
  ida::Decomposition decomposition;
  refine::RefinementResult result;
  fcv::VerificationReport report;
  IterationTrace trace;
  int chosen_iteration = 1;
};

// Thrown when a stage fails; carries the same code as the cause and the
// iterations completed before it.
class RunAborted : public Error {
 public:
  RunAborted(const Error& cause, IterationTrace trace)
      : Error(cause.code(), cause.message()), trace_(std::move(trace)) {}
  const IterationTrace& trace() const { return trace_; }

 private:
  IterationTrace trace_;
};

RunResult run(const lsa::IngestSource& source, const ida::Instruction& instruction,
              const LoopConfig& cfg, backend::Backend& backend);

// Refinement outputs plus out.ops.json, trace.json and report.json.
void write_run(const std::filesystem::path& dir, const RunResult& run);

}  // namespace docrefine::orchestrator

#endif  // DOCREFINE_ORCHESTRATOR_HPP_
