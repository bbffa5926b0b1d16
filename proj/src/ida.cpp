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

#include "docrefine/ida.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "docrefine/error.hpp"
#include "docrefine/layout.hpp"
#include "prompts.hpp"

namespace docrefine::ida {
namespace {

using ir::ElementKind;

constexpr std::array<std::pair<OpKind, std::string_view>, 9> kOpNames = {{
    {OpKind::kRewriteText, "RewriteText"},
    {OpKind::kInsertText, "InsertText"},
    {OpKind::kDeleteText, "DeleteText"},
    {OpKind::kCorrectTableCell, "CorrectTableCell"},
    {OpKind::kUpdateCaption, "UpdateCaption"},
    {OpKind::kGenerateSummary, "GenerateSummary"},
    {OpKind::kReorderElements, "ReorderElements"},
    {OpKind::kFormatUnify, "FormatUnify"},
    {OpKind::kCrossModalFix, "CrossModalFix"},
}};

bool editable_text(const ir::Element& e) {
  return ir::is_textual(e.kind) && e.kind != ElementKind::kTable;
}

std::optional<mcu::TableGrid> grid_for(const ir::Element& table, const mcu::SemanticRep& sem) {
  auto it = sem.table_grids.find(table.id);
  if (it != sem.table_grids.end()) return it->second;
  return mcu::parse_table_text(table.text);
}

// Figure or table an op reconciles with: payload "figure", else the target
// caption's association.
std::string cross_modal_partner(const AtomicOp& op, const ir::DocumentIR& ir) {
  if (op.payload.contains("figure") && op.payload["figure"].is_string()) {
    return op.payload["figure"].get<std::string>();
  }
  const std::string id = target_id(op.target);
  for (const auto& a : ir.associations) {
    if (a.caption_id == id) return a.target_id;
  }
  return {};
}

std::string clip(const std::string& text, size_t max_chars) {
  if (utf8_length(text) <= max_chars) return text;
  size_t seen = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80 && seen++ == max_chars) {
      return text.substr(0, i) + "...";
    }
  }
  return text;
}

Json decomposition_input(const Instruction& instruction, const mcu::SemanticRep& sem,
                         const ir::DocumentIR& ir) {
  std::map<std::string, std::string> parent;
  for (const auto& edge : ir.hierarchy) parent[edge.child_id] = edge.parent_id;
  Json outline = Json::array();
  for (const auto& id : ir.reading_order) {
    const ir::Element* e = ir.find(id);
    if (e == nullptr) continue;
    Json row = {{"id", id}, {"kind", std::string(ir::to_string(e->kind))}};
    if (e->heading_level) row["level"] = *e->heading_level;
    if (auto it = parent.find(id); it != parent.end()) row["parent"] = it->second;
    if (!e->text.empty()) row["text"] = clip(e->text, 300);
    outline.push_back(std::move(row));
  }
  Json tables = Json::object();
  for (const auto& [id, g] : sem.table_grids) {
    std::vector<std::string> header;
    for (int c = 0; c < g.n_cols; ++c) header.push_back(g.cell(0, c));
    tables[id] = {{"n_rows", g.n_rows}, {"n_cols", g.n_cols}, {"first_row", header}};
  }
  Json figures = Json::object();
  for (const auto& [id, f] : sem.figure_descs) figures[id] = f.description;
  Json input = {{"instruction", instruction.text},
                {"outline", outline},
                {"tables", tables},
                {"figures", figures}};
  Json constraints = Json::object();
  if (instruction.max_length) constraints["max_length"] = *instruction.max_length;
  if (instruction.style) constraints["style"] = *instruction.style;
  if (!constraints.empty()) input["constraints"] = constraints;
  return input;
}

std::string describe_candidate(const AtomicOp& op) {
  std::string out = std::string(to_string(op.kind)) + " " + describe(op.target);
  const std::string g = op.goal();
  if (!g.empty()) out += ": " + g;
  return out;
}

void check_resolvable(const AtomicOp& op, const ir::DocumentIR& ir) {
  const std::string id = target_id(op.target);
  if (id.empty()) return;
  if (ir.find(id) == nullptr) throw UnresolvableTarget(id);
}

}  // namespace

std::string_view to_string(OpKind kind) {
  for (const auto& [k, name] : kOpNames) {
    if (k == kind) return name;
  }
  return "RewriteText";
}

std::optional<OpKind> op_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kOpNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool is_text_op(OpKind kind) {
  switch (kind) {
    case OpKind::kRewriteText:
    case OpKind::kInsertText:
    case OpKind::kUpdateCaption:
    case OpKind::kGenerateSummary:
    case OpKind::kFormatUnify:
    case OpKind::kCrossModalFix:
      return true;
    default:
      return false;
  }
}

std::string target_id(const OpTarget& target) {
  if (const auto* e = std::get_if<ElementTarget>(&target)) return e->id;
  if (const auto* c = std::get_if<CellTarget>(&target)) return c->table_id;
  return std::get<SectionTarget>(target).heading_id;
}

std::string describe(const OpTarget& target) {
  if (const auto* e = std::get_if<ElementTarget>(&target)) return "element " + e->id;
  if (const auto* c = std::get_if<CellTarget>(&target)) {
    return "cell (" + std::to_string(c->row) + ", " + std::to_string(c->col) + ") of " + c->table_id;
  }
  const auto& s = std::get<SectionTarget>(target);
  return s.heading_id.empty() ? "document" : "section " + s.heading_id;
}

std::string AtomicOp::goal() const {
  auto it = payload.find("goal");
  if (it != payload.end() && it->is_string()) return it->get<std::string>();
  return {};
}

std::string to_string(const OpViolation& v) {
  std::string ids;
  for (int id : v.op_ids) {
    if (!ids.empty()) ids += ",";
    ids += std::to_string(id);
  }
  return "op " + ids + ": " + v.rule + (v.detail.empty() ? "" : " (" + v.detail + ")");
}

std::set<std::string> touched_ids(const AtomicOp& op, const ir::DocumentIR& ir) {
  std::set<std::string> out;
  switch (op.kind) {
    case OpKind::kGenerateSummary:
      for (const char* key : {"insert", "replace"}) {
        if (op.payload.contains(key) && op.payload[key].is_object() &&
            op.payload[key].contains("id") && op.payload[key]["id"].is_string()) {
          out.insert(op.payload[key]["id"].get<std::string>());
        }
      }
      return out;
    case OpKind::kReorderElements:
      return out;
    case OpKind::kFormatUnify:
      if (const auto* s = std::get_if<SectionTarget>(&op.target)) {
        for (const auto& id : mcu::scope_members(ir, s->heading_id)) {
          const ir::Element* e = ir.find(id);
          if (e != nullptr && editable_text(*e)) out.insert(id);
        }
        return out;
      }
      break;
    default:
      break;
  }
  const std::string id = target_id(op.target);
  if (!id.empty()) out.insert(id);
  return out;
}

std::vector<OpViolation> validate_ops(const std::vector<AtomicOp>& ops, const ir::DocumentIR& ir,
                                      const mcu::SemanticRep& sem) {
  std::vector<OpViolation> out;
  auto flag = [&out](int op_id, std::string rule, std::string detail = "") {
    out.push_back({{op_id}, std::move(rule), std::move(detail)});
  };

  for (size_t i = 0; i < ops.size(); ++i) {
    const AtomicOp& op = ops[i];
    if (op.op_id != static_cast<int>(i) + 1) {
      flag(op.op_id, "op ids must be 1..k in order",
           "expected " + std::to_string(i + 1) + ", found " + std::to_string(op.op_id));
    }
    const std::string id = target_id(op.target);
    const ir::Element* e = id.empty() ? nullptr : ir.find(id);
    if (!id.empty() && e == nullptr) {
      flag(op.op_id, "unresolvable target", describe(op.target));
      continue;
    }
    const bool element = std::holds_alternative<ElementTarget>(op.target);
    const bool cell = std::holds_alternative<CellTarget>(op.target);
    const bool section = std::holds_alternative<SectionTarget>(op.target);
    if (section && e != nullptr && e->kind != ElementKind::kHeading) {
      flag(op.op_id, "section target is not a Heading", id);
      continue;
    }
    const std::string kind(to_string(op.kind));
    auto incompatible = [&](const std::string& why) {
      flag(op.op_id, kind + " cannot apply to " + describe(op.target), why);
    };
    switch (op.kind) {
      case OpKind::kRewriteText:
      case OpKind::kInsertText:
        if (!element || !editable_text(*e)) incompatible("needs a non-table text element");
        break;
      case OpKind::kDeleteText:
        if (!element || !ir::is_textual(e->kind)) incompatible("needs a text element");
        break;
      case OpKind::kFormatUnify:
        if (cell || (element && !editable_text(*e))) {
          incompatible("needs a non-table text element or a section");
        }
        break;
      case OpKind::kCorrectTableCell: {
        if (!cell || e->kind != ElementKind::kTable) {
          incompatible("needs a cell of a Table");
          break;
        }
        const auto& c = std::get<CellTarget>(op.target);
        const auto grid = grid_for(*e, sem);
        if (!grid || !grid->contains(c.row, c.col)) {
          incompatible("cell outside the table grid");
        }
        if (op.payload.contains("value") && !op.payload["value"].is_string()) {
          incompatible("payload value must be a string");
        }
        break;
      }
      case OpKind::kUpdateCaption:
        if (!element || e->kind != ElementKind::kCaption) incompatible("needs a Caption");
        break;
      case OpKind::kGenerateSummary: {
        if (!section) {
          incompatible("needs a section or the document");
          break;
        }
        if (op.payload.contains("max_length") &&
            (!op.payload["max_length"].is_number_integer() ||
             op.payload["max_length"].get<long long>() < 1)) {
          incompatible("max_length must be a positive integer");
        }
        if (op.payload.contains("insert")) {
          const Json& ins = op.payload["insert"];
          if (!ins.is_object() || !ins.contains("id") || !ins["id"].is_string() ||
              ins["id"].get<std::string>().empty() || !ins.contains("after") ||
              !ins["after"].is_string() || ir.find(ins["after"].get<std::string>()) == nullptr) {
            incompatible("insert needs a new id and an existing 'after' element");
          }
        }
        if (op.payload.contains("replace")) {
          const Json& rep = op.payload["replace"];
          const ir::Element* r = rep.is_object() && rep.contains("id") && rep["id"].is_string()
                                     ? ir.find(rep["id"].get<std::string>())
                                     : nullptr;
          if (r == nullptr || !editable_text(*r)) {
            incompatible("replace needs an existing non-table text element");
          }
        }
        break;
      }
      case OpKind::kReorderElements: {
        if (!section) {
          incompatible("needs a section or the document");
          break;
        }
        const auto members = mcu::scope_members(ir, id);
        const std::set<std::string> scope(members.begin(), members.end());
        const Json order = op.payload.value("order", Json());
        std::set<std::string> seen;
        bool ok = order.is_array() && !order.empty();
        if (ok) {
          for (const auto& v : order) {
            if (!v.is_string() || !scope.count(v.get<std::string>()) ||
                !seen.insert(v.get<std::string>()).second) {
              ok = false;
              break;
            }
          }
        }
        if (!ok) incompatible("order must list distinct ids inside the scope");
        break;
      }
      case OpKind::kCrossModalFix: {
        if (!element || !editable_text(*e)) {
          incompatible("needs a non-table text element");
          break;
        }
        const std::string partner = cross_modal_partner(op, ir);
        const ir::Element* p = partner.empty() ? nullptr : ir.find(partner);
        if (p == nullptr ||
            (p->kind != ElementKind::kFigure && p->kind != ElementKind::kTable)) {
          incompatible("no figure or table to reconcile with");
        }
        break;
      }
    }
  }

  for (const auto& d : ops) {
    if (d.kind != OpKind::kDeleteText) continue;
    const std::string victim = target_id(d.target);
    for (const auto& o : ops) {
      if (o.op_id == d.op_id) continue;
      const auto touched = touched_ids(o, ir);
      if (target_id(o.target) != victim && !touched.count(victim)) continue;
      if (o.kind == OpKind::kDeleteText && o.op_id < d.op_id) continue;  // reported once
      out.push_back({{std::min(d.op_id, o.op_id), std::max(d.op_id, o.op_id)},
                     "conflicting operations",
                     "op " + std::to_string(d.op_id) + " deletes " + victim + " which op " +
                         std::to_string(o.op_id) + " also targets"});
    }
  }
  return out;
}

Json to_json(const OpTarget& target) {
  if (const auto* e = std::get_if<ElementTarget>(&target)) return {{"element", e->id}};
  if (const auto* c = std::get_if<CellTarget>(&target)) {
    return {{"table", c->table_id}, {"row", c->row}, {"col", c->col}};
  }
  const auto& s = std::get<SectionTarget>(target);
  if (s.heading_id.empty()) return {{"document", true}};
  return {{"section", s.heading_id}};
}

OpTarget target_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "target must be an object");
  auto str = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_string()) throw ParseError(where + "/" + key, "must be a string");
    return it->get<std::string>();
  };
  if (auto id = str("element")) return ElementTarget{*id};
  if (auto id = str("table")) {
    for (const char* k : {"row", "col"}) {
      if (!j.contains(k) || !j[k].is_number_integer()) {
        throw ParseError(where + "/" + k, "must be an integer");
      }
    }
    return CellTarget{*id, j["row"].get<int>(), j["col"].get<int>()};
  }
  if (auto id = str("section")) return SectionTarget{*id};
  if (j.contains("document")) return SectionTarget{""};
  throw ParseError(where, "target needs one of element, table, section or document");
}

Json to_json(const AtomicOp& op) {
  Json j = {{"op_id", op.op_id},
            {"kind", std::string(to_string(op.kind))},
            {"target", to_json(op.target)},
            {"payload", op.payload}};
  if (!op.rationale.empty()) j["rationale"] = op.rationale;
  return j;
}

AtomicOp op_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "operation must be an object");
  AtomicOp op;
  if (j.contains("op_id")) {
    if (!j["op_id"].is_number_integer()) throw ParseError(where + "/op_id", "must be an integer");
    op.op_id = j["op_id"].get<int>();
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ParseError(where + "/kind", "must be a string");
  }
  const auto kind = op_kind_from_string(j["kind"].get<std::string>());
  if (!kind) {
    throw ParseError(where + "/kind", "unknown operation kind '" + j["kind"].get<std::string>() + "'");
  }
  op.kind = *kind;
  if (!j.contains("target")) throw ParseError(where + "/target", "is required");
  op.target = target_from_json(j["target"], where + "/target");
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) throw ParseError(where + "/payload", "must be an object");
    op.payload = j["payload"];
  }
  if (j.contains("rationale") && j["rationale"].is_string()) {
    op.rationale = j["rationale"].get<std::string>();
  }
  return op;
}

Json to_json(const Decomposition& d) {
  Json ops = Json::array();
  for (const auto& op : d.ops) ops.push_back(to_json(op));
  Json notes = Json::array();
  for (const auto& n : d.notes) {
    notes.push_back({{"span", n.span},
                     {"candidates", n.candidates},
                     {"chosen", n.chosen},
                     {"reason", n.reason}});
  }
  return {{"ops", ops}, {"ambiguities", notes}};
}

Decomposition decomposition_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("ops") || !j["ops"].is_array()) {
    throw ParseError("/ops", "must be an array");
  }
  Decomposition d;
  for (size_t i = 0; i < j["ops"].size(); ++i) {
    d.ops.push_back(op_from_json(j["ops"][i], "/ops/" + std::to_string(i)));
  }
  if (j.contains("ambiguities") && j["ambiguities"].is_array()) {
    for (const auto& n : j["ambiguities"]) {
      AmbiguityNote note;
      note.span = n.value("span", "");
      note.candidates = n.value("candidates", std::vector<std::string>{});
      note.chosen = n.value("chosen", 0);
      note.reason = n.value("reason", "");
      d.notes.push_back(std::move(note));
    }
  }
  return d;
}

Decomposition decompose(const Instruction& instruction, const mcu::SemanticRep& sem,
                        const ir::DocumentIR& ir, backend::Backend& backend) {
  const auto resp = backend.complete(prompts::make_request(
      prompts::Task::kDecompose, decomposition_input(instruction, sem, ir)));
  const Json& parsed = resp.parsed;

  Decomposition d;
  try {
    for (size_t i = 0; i < parsed["ops"].size(); ++i) {
      const Json& entry = parsed["ops"][i];
      const std::string where = "/ops/" + std::to_string(i);
      if (entry.contains("alternatives")) {
        AmbiguityNote note;
        note.span = entry.value("span", "");
        note.reason = entry.value("reason", "");
        std::vector<AtomicOp> alts;
        for (size_t k = 0; k < entry["alternatives"].size(); ++k) {
          alts.push_back(
              op_from_json(entry["alternatives"][k], where + "/alternatives/" + std::to_string(k)));
          note.candidates.push_back(describe_candidate(alts.back()));
        }
        d.ops.push_back(alts.front());
        d.notes.push_back(std::move(note));
      } else {
        d.ops.push_back(op_from_json(entry, where));
      }
    }
  } catch (const ParseError& e) {
    throw SchemaError(std::string("malformed operation: ") + e.what(), resp.raw_text);
  }
  if (parsed.contains("ambiguities")) {
    for (const auto& a : parsed["ambiguities"]) {
      AmbiguityNote note;
      note.span = a.value("span", "");
      note.candidates = a.value("candidates", std::vector<std::string>{});
      note.reason = a.value("reason", "");
      d.notes.push_back(std::move(note));
    }
  }

  for (size_t i = 0; i < d.ops.size(); ++i) {
    AtomicOp& op = d.ops[i];
    op.op_id = static_cast<int>(i) + 1;
    check_resolvable(op, ir);
    if (op.kind == OpKind::kGenerateSummary) {
      if (instruction.max_length && !op.payload.contains("max_length")) {
        op.payload["max_length"] = *instruction.max_length;
      }
      if (instruction.style && !op.payload.contains("style")) op.payload["style"] = *instruction.style;
    }
  }
  const auto violations = validate_ops(d.ops, ir, sem);
  if (!violations.empty()) {
    std::string msg = "decomposition failed validation:";
    for (const auto& v : violations) msg += "\n  " + to_string(v);
    throw ValidationError(msg);
  }
  return d;
}

}  // namespace docrefine::ida
