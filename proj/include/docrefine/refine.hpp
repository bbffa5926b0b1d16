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

// Content refinement and summary generation: executes atomic operations
// against an IR and its semantic representation.

#ifndef DOCREFINE_REFINE_HPP_
#define DOCREFINE_REFINE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "docrefine/backend.hpp"
#include "docrefine/ida.hpp"
#include "docrefine/ir.hpp"
#include "docrefine/layout.hpp"
#include "docrefine/mcu.hpp"

namespace docrefine::refine {

struct OverflowWarning {
  std::string element_id;
  size_t estimated_lines = 0;
  size_t capacity_lines = 0;
  friend bool operator==(const OverflowWarning&, const OverflowWarning&) = default;
};

struct ReflowResult {
  ir::DocumentIR ir;
  std::optional<OverflowWarning> warning;
};

// Replaces the element's text, keeping its box. Warns when the estimated
// line count exceeds what the box holds.
ReflowResult reflow(const ir::DocumentIR& ir, const std::string& element_id,
                    std::string new_text, const TextMetrics& metrics = {});

// Whitespace-separated words.
size_t word_count(std::string_view text);

// At most `max_words` words, cut after the last complete sentence inside
// the limit, or at the word limit when the first sentence is already longer.
std::string truncate_words(std::string_view text, size_t max_words);

struct SummarySpec {
  std::string scope_heading_id;  // "" summarizes the whole document.
  std::optional<int> max_length;
  std::optional<std::string> style;
  std::string goal;
};

// One SGA call over the facts, digests and text in scope. A blank answer is
// retried once; a second blank answer raises EmptyGeneration.
std::string generate_summary(const ir::DocumentIR& ir, const mcu::SemanticRep& sem,
                             const SummarySpec& spec, backend::Backend& backend);

struct RefinementResult {
  ir::DocumentIR new_ir;
  mcu::SemanticRep new_sem;
  std::set<std::string> changed_ids;
  std::map<int, std::string> summaries;  // By op id.
  std::vector<OverflowWarning> warnings;
};

Json summaries_to_json(const std::map<int, std::string>& summaries);
std::map<int, std::string> summaries_from_json(const Json& j);
Json warnings_to_json(const std::vector<OverflowWarning>& warnings);

// Writes out.ir.json, out.sem.json, summaries.json and warnings.json.
void write_result(const std::filesystem::path& dir, const RefinementResult& result);

// Applies `ops` in op-id order. Model calls for operations that do not
// depend on an earlier operation's output are issued concurrently up front.
// Throws ValidationError when the ops fail validate_ops or the result breaks
// an IR invariant, and InternalError if an element outside the ops' targets
// changed.
RefinementResult apply_ops(const ir::DocumentIR& ir, const mcu::SemanticRep& sem,
                           const std::vector<ida::AtomicOp>& ops, backend::Backend& backend,
                           const TextMetrics& metrics = {});

}  // namespace docrefine::refine

#endif  // DOCREFINE_REFINE_HPP_
