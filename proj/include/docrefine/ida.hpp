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

// Instruction decomposition: a free-text editing request becomes an ordered
// list of atomic operations with resolved targets.

#ifndef DOCREFINE_IDA_HPP_
#define DOCREFINE_IDA_HPP_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "docrefine/backend.hpp"
#include "docrefine/ir.hpp"
#include "docrefine/mcu.hpp"

namespace docrefine::ida {

struct Instruction {
  std::string text;
  std::optional<int> max_length;  // Words, for generated summaries.
  std::optional<std::string> style;
};

enum class OpKind {
  kRewriteText,
  kInsertText,
  kDeleteText,
  kCorrectTableCell,
  kUpdateCaption,
  kGenerateSummary,
  kReorderElements,
  kFormatUnify,
  kCrossModalFix,
};

std::string_view to_string(OpKind kind);
std::optional<OpKind> op_kind_from_string(std::string_view name);

// True for kinds whose effect is a text edit judged for meaning.
bool is_text_op(OpKind kind);

struct ElementTarget {
  std::string id;
  friend bool operator==(const ElementTarget&, const ElementTarget&) = default;
};
struct CellTarget {
  std::string table_id;
  int row = 0;
  int col = 0;
  friend bool operator==(const CellTarget&, const CellTarget&) = default;
};
// A heading and everything under it; an empty id means the whole document.
struct SectionTarget {
  std::string heading_id;
  friend bool operator==(const SectionTarget&, const SectionTarget&) = default;
};
using OpTarget = std::variant<ElementTarget, CellTarget, SectionTarget>;

// The element, table or heading id named by the target ("" for document).
std::string target_id(const OpTarget& target);
std::string describe(const OpTarget& target);

struct AtomicOp {
  int op_id = 0;
  OpKind kind = OpKind::kRewriteText;
  OpTarget target;
  Json payload = Json::object();
  std::string rationale;

  std::string goal() const;
  friend bool operator==(const AtomicOp&, const AtomicOp&) = default;
};

struct AmbiguityNote {
  std::string span;
  std::vector<std::string> candidates;
  int chosen = 0;
  std::string reason;
};

struct OpViolation {
  std::vector<int> op_ids;
  std::string rule;
  std::string detail;
};

std::string to_string(const OpViolation& v);

// Checks op numbering (1..k in order), target resolution, kind/target
// compatibility and pairwise conflicts.
std::vector<OpViolation> validate_ops(const std::vector<AtomicOp>& ops, const ir::DocumentIR& ir,
                                      const mcu::SemanticRep& sem);

// Element ids an op may modify; section-scoped ops cover their scope.
std::set<std::string> touched_ids(const AtomicOp& op, const ir::DocumentIR& ir);

Json to_json(const OpTarget& target);
OpTarget target_from_json(const Json& j, const std::string& where);
Json to_json(const AtomicOp& op);
AtomicOp op_from_json(const Json& j, const std::string& where);

struct Decomposition {
  std::vector<AtomicOp> ops;
  std::vector<AmbiguityNote> notes;
};

Json to_json(const Decomposition& d);
Decomposition decomposition_from_json(const Json& j);

// One IDA call. Ambiguous spans resolve to their first alternative and are
// recorded as notes. Throws UnresolvableTarget when an op names an id the IR
// lacks, SchemaError for malformed ops and ValidationError when the
// resulting list fails validate_ops.
Decomposition decompose(const Instruction& instruction, const mcu::SemanticRep& sem,
                        const ir::DocumentIR& ir, backend::Backend& backend);

}  // namespace docrefine::ida

#endif  // DOCREFINE_IDA_HPP_
