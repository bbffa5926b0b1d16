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

#include "docrefine/refine.hpp"

#include <algorithm>
#include <cctype>
#include <future>

#include "docrefine/error.hpp"
#include "prompts.hpp"

namespace docrefine::refine {
namespace {

using ida::AtomicOp;
using ida::OpKind;
using ir::ElementKind;

std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Text answer of a CRA/SGA request, retried once when blank.
std::string ask_text(backend::Backend& backend, const backend::BackendRequest& req,
                     const std::string& what) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto resp = backend.complete(req);
    std::string text = trim(resp.parsed.value("text", ""));
    if (!text.empty()) return text;
  }
  throw EmptyGeneration("model returned blank text twice for " + what);
}

std::string op_label(const AtomicOp& op) {
  return "op " + std::to_string(op.op_id) + " (" + std::string(ida::to_string(op.kind)) + ")";
}

std::string payload_string(const AtomicOp& op, const char* key) {
  auto it = op.payload.find(key);
  if (it != op.payload.end() && it->is_string()) return it->get<std::string>();
  return {};
}

std::string heading_text(const ir::DocumentIR& ir, const std::string& element_id) {
  for (const auto& edge : ir.hierarchy) {
    if (edge.child_id != element_id) continue;
    if (const ir::Element* h = ir.find(edge.parent_id)) return h->text;
  }
  return {};
}

std::string partner_of(const AtomicOp& op, const ir::DocumentIR& ir) {
  const std::string fig = payload_string(op, "figure");
  if (!fig.empty()) return fig;
  const std::string id = ida::target_id(op.target);
  for (const auto& a : ir.associations) {
    if (a.caption_id == id) return a.target_id;
  }
  return {};
}

Json partner_view(const std::string& id, const ir::DocumentIR& ir, const mcu::SemanticRep& sem) {
  Json view = {{"id", id}};
  if (auto it = sem.figure_descs.find(id); it != sem.figure_descs.end()) {
    view["description"] = it->second.description;
    view["axis_labels"] = it->second.axis_labels;
    view["legend_entries"] = it->second.legend_entries;
  }
  if (auto it = sem.table_grids.find(id); it != sem.table_grids.end()) {
    view["table"] = it->second.to_text();
  }
  std::vector<std::string> captions;
  for (const auto& a : ir.associations) {
    if (a.target_id != id) continue;
    if (const ir::Element* c = ir.find(a.caption_id)) captions.push_back(c->text);
  }
  view["captions"] = captions;
  return view;
}

Json element_input(const ir::Element& e, const AtomicOp& op, const ir::DocumentIR& ir) {
  Json input = {{"id", e.id},
                {"kind", std::string(ir::to_string(e.kind))},
                {"text", e.text},
                {"goal", op.goal()}};
  const std::string section = heading_text(ir, e.id);
  if (!section.empty()) input["section"] = section;
  const std::string style = payload_string(op, "style");
  if (!style.empty()) input["style"] = style;
  return input;
}

// Text produced for one op, computed against a particular IR/sem snapshot.
struct Generated {
  std::map<std::string, std::string> texts;  // New element text by id.
  std::optional<std::string> summary;
  std::optional<std::string> cell_value;
};

Generated generate(const AtomicOp& op, const ir::DocumentIR& ir, const mcu::SemanticRep& sem,
                   backend::Backend& backend) {
  using prompts::Task;
  Generated g;
  const std::string id = ida::target_id(op.target);
  const ir::Element* e = id.empty() ? nullptr : ir.find(id);
  const std::string what = op_label(op);
  try {
    switch (op.kind) {
      case OpKind::kRewriteText:
        g.texts[id] = ask_text(backend, prompts::make_request(Task::kRewrite, element_input(*e, op, ir)), what);
        break;
      case OpKind::kInsertText: {
        std::string fragment = payload_string(op, "text");
        if (fragment.empty()) {
          Json input = element_input(*e, op, ir);
          input["position"] = payload_string(op, "position").empty() ? "end" : payload_string(op, "position");
          fragment = ask_text(backend, prompts::make_request(Task::kInsert, input), what);
        }
        fragment = trim(fragment);
        if (payload_string(op, "position") == "start") {
          g.texts[id] = e->text.empty() ? fragment : fragment + " " + e->text;
        } else {
          g.texts[id] = e->text.empty() ? fragment : e->text + " " + fragment;
        }
        break;
      }
      case OpKind::kUpdateCaption: {
        std::string text = payload_string(op, "text");
        if (text.empty()) {
          Json input = element_input(*e, op, ir);
          const std::string partner = partner_of(op, ir);
          if (!partner.empty()) input["describes"] = partner_view(partner, ir, sem);
          if (op.payload.contains("key_terms")) input["key_terms"] = op.payload["key_terms"];
          text = ask_text(backend, prompts::make_request(Task::kCaption, input), what);
        }
        g.texts[id] = trim(text);
        break;
      }
      case OpKind::kCrossModalFix: {
        Json input = element_input(*e, op, ir);
        input["figure"] = partner_view(partner_of(op, ir), ir, sem);
        g.texts[id] = ask_text(backend, prompts::make_request(Task::kCrossModalFix, input), what);
        break;
      }
      case OpKind::kFormatUnify: {
        std::vector<std::string> ids;
        if (std::holds_alternative<ida::ElementTarget>(op.target)) {
          ids.push_back(id);
        } else {
          const auto touched = ida::touched_ids(op, ir);
          for (const auto& m : mcu::scope_members(ir, id)) {
            if (touched.count(m)) ids.push_back(m);
          }
        }
        std::vector<std::future<std::string>> jobs;
        for (const auto& m : ids) {
          const ir::Element* el = ir.find(m);
          jobs.push_back(std::async(std::launch::async, [&, el] {
            return ask_text(backend,
                            prompts::make_request(Task::kFormatUnify, element_input(*el, op, ir)),
                            what + " on " + el->id);
          }));
        }
        std::exception_ptr failure;
        for (size_t i = 0; i < jobs.size(); ++i) {
          try {
            g.texts[ids[i]] = jobs[i].get();
          } catch (...) {
            if (!failure) failure = std::current_exception();
          }
        }
        if (failure) std::rethrow_exception(failure);
        break;
      }
      case OpKind::kCorrectTableCell: {
        const auto& c = std::get<ida::CellTarget>(op.target);
        if (op.payload.contains("value")) {
          g.cell_value = op.payload["value"].get<std::string>();
          break;
        }
        auto it = sem.table_grids.find(id);
        const mcu::TableGrid grid =
            it != sem.table_grids.end() ? it->second : mcu::parse_table_text(e->text);
        Json input = {{"id", id},
                      {"kind", "TableCell"},
                      {"row", c.row},
                      {"col", c.col},
                      {"text", grid.cell(c.row, c.col)},
                      {"table", grid.to_text()},
                      {"goal", op.goal()}};
        g.cell_value = ask_text(backend, prompts::make_request(Task::kRewrite, input), what);
        break;
      }
      case OpKind::kGenerateSummary: {
        SummarySpec spec;
        spec.scope_heading_id = id;
        spec.goal = op.goal();
        if (op.payload.contains("max_length")) spec.max_length = op.payload["max_length"].get<int>();
        const std::string style = payload_string(op, "style");
        if (!style.empty()) spec.style = style;
        g.summary = generate_summary(ir, sem, spec, backend);
        break;
      }
      case OpKind::kDeleteText:
      case OpKind::kReorderElements:
        break;
    }
  } catch (Error& err) {
    err.add_context(op_label(op));
    throw;
  }
  return g;
}

// Ids an op reads when generating; used to decide whether its model call can
// run before earlier ops commit.
std::set<std::string> read_ids(const AtomicOp& op, const ir::DocumentIR& ir) {
  std::set<std::string> out = ida::touched_ids(op, ir);
  const std::string id = ida::target_id(op.target);
  if (std::holds_alternative<ida::SectionTarget>(op.target)) {
    for (const auto& m : mcu::scope_members(ir, id)) out.insert(m);
  } else if (!id.empty()) {
    out.insert(id);
  }
  if (op.kind == OpKind::kCrossModalFix || op.kind == OpKind::kUpdateCaption) {
    const std::string p = partner_of(op, ir);
    if (!p.empty()) out.insert(p);
  }
  return out;
}

std::set<std::string> write_ids(const AtomicOp& op, const ir::DocumentIR& ir) {
  std::set<std::string> out = ida::touched_ids(op, ir);
  if (op.kind == OpKind::kReorderElements) {
    for (const auto& m : mcu::scope_members(ir, ida::target_id(op.target))) out.insert(m);
  }
  return out;
}

void delete_element(ir::DocumentIR& ir, const std::string& id) {
  std::string parent;
  for (const auto& edge : ir.hierarchy) {
    if (edge.child_id == id) parent = edge.parent_id;
  }
  std::vector<ir::HierarchyEdge> edges;
  for (const auto& edge : ir.hierarchy) {
    if (edge.child_id == id) continue;
    if (edge.parent_id == id) {
      if (!parent.empty()) edges.push_back({parent, edge.child_id});
      continue;
    }
    edges.push_back(edge);
  }
  ir.hierarchy = std::move(edges);
  std::erase_if(ir.associations, [&](const ir::Association& a) {
    return a.caption_id == id || a.target_id == id;
  });
  std::erase(ir.reading_order, id);
  std::erase_if(ir.elements, [&](const ir::Element& e) { return e.id == id; });
}

void reorder(ir::DocumentIR& ir, const std::vector<std::string>& order) {
  const std::set<std::string> moved(order.begin(), order.end());
  size_t next = 0;
  for (auto& id : ir.reading_order) {
    if (moved.count(id)) id = order[next++];
  }
}

ir::BBox bbox_from(const Json& j, const ir::BBox& fallback) {
  if (!j.is_object()) return fallback;
  ir::BBox b = fallback;
  b.x0 = j.value("x0", b.x0);
  b.y0 = j.value("y0", b.y0);
  b.x1 = j.value("x1", b.x1);
  b.y1 = j.value("y1", b.y1);
  return b.quantized();
}

class Applier {
 public:
  Applier(const ir::DocumentIR& ir, const mcu::SemanticRep& sem, const TextMetrics& metrics)
      : metrics_(metrics) {
    result_.new_ir = ir;
    result_.new_sem = sem;
  }

  void commit(const AtomicOp& op, const Generated& g) {
    ir::DocumentIR& doc = result_.new_ir;
    const std::string id = ida::target_id(op.target);
    for (const auto& [eid, text] : g.texts) set_text(eid, text);
    switch (op.kind) {
      case OpKind::kDeleteText:
        delete_element(doc, id);
        std::erase_if(result_.warnings, [&](const auto& w) { return w.element_id == id; });
        break;
      case OpKind::kReorderElements:
        reorder(doc, op.payload["order"].get<std::vector<std::string>>());
        break;
      case OpKind::kCorrectTableCell: {
        const auto& c = std::get<ida::CellTarget>(op.target);
        ir::Element* table = doc.find(id);
        auto it = result_.new_sem.table_grids.find(id);
        if (it == result_.new_sem.table_grids.end()) {
          it = result_.new_sem.table_grids.emplace(id, mcu::parse_table_text(table->text)).first;
        }
        it->second.cell(c.row, c.col) = *g.cell_value;
        if (!table->text.empty()) table->text = it->second.to_text();
        break;
      }
      case OpKind::kGenerateSummary:
        result_.summaries[op.op_id] = *g.summary;
        if (op.payload.contains("replace")) {
          set_text(op.payload["replace"]["id"].get<std::string>(), *g.summary);
        }
        if (op.payload.contains("insert")) place_summary(op.payload["insert"], *g.summary);
        break;
      default:
        break;
    }
  }

  const RefinementResult& state() const { return result_; }

  RefinementResult finish(const ir::DocumentIR& original) {
    result_.new_ir = ir::canonicalize(std::move(result_.new_ir));
    const auto diff = ir::diff_ir(original, result_.new_ir);
    result_.changed_ids = diff.all();
    return std::move(result_);
  }

 private:
  void set_text(const std::string& id, const std::string& text) {
    ReflowResult r = reflow(result_.new_ir, id, text, metrics_);
    result_.new_ir = std::move(r.ir);
    std::erase_if(result_.warnings, [&](const auto& w) { return w.element_id == id; });
    if (r.warning) result_.warnings.push_back(*r.warning);
  }

  void place_summary(const Json& spec, const std::string& text) {
    ir::DocumentIR& doc = result_.new_ir;
    const std::string id = spec["id"].get<std::string>();
    if (doc.find(id) != nullptr) {
      set_text(id, text);
      return;
    }
    const std::string after = spec["after"].get<std::string>();
    const ir::Element* anchor = doc.find(after);
    ir::Element e;
    e.id = id;
    e.kind = ElementKind::kParagraph;
    e.bbox = bbox_from(spec.value("bbox", Json()), anchor->bbox);
    std::string parent;
    if (anchor->kind == ElementKind::kHeading) {
      parent = after;
    } else {
      for (const auto& edge : doc.hierarchy) {
        if (edge.child_id == after) parent = edge.parent_id;
      }
    }
    doc.elements.push_back(e);
    auto pos = std::find(doc.reading_order.begin(), doc.reading_order.end(), after);
    doc.reading_order.insert(pos == doc.reading_order.end() ? pos : pos + 1, id);
    if (!parent.empty()) doc.hierarchy.push_back({parent, id});
    set_text(id, text);
  }

  TextMetrics metrics_;
  RefinementResult result_;
};

}  // namespace

ReflowResult reflow(const ir::DocumentIR& ir, const std::string& element_id, std::string new_text,
                    const TextMetrics& metrics) {
  ReflowResult out{ir, std::nullopt};
  ir::Element* e = out.ir.find(element_id);
  if (e == nullptr) throw UnresolvableTarget(element_id);
  e->text = std::move(new_text);
  const size_t lines = estimated_lines(e->text, e->bbox, metrics);
  const size_t capacity = line_capacity(e->bbox, metrics);
  if (lines > capacity) out.warning = OverflowWarning{element_id, lines, capacity};
  return out;
}

size_t word_count(std::string_view text) {
  size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string truncate_words(std::string_view text, size_t max_words) {
  if (word_count(text) <= max_words) return trim(text);
  std::vector<std::string_view> words;
  size_t i = 0;
  while (i < text.size() && words.size() < max_words) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  size_t keep = words.size();
  for (size_t k = words.size(); k > 0; --k) {
    std::string_view w = words[k - 1];
    while (!w.empty() && (w.back() == '"' || w.back() == '\'' || w.back() == ')')) w.remove_suffix(1);
    if (!w.empty() && (w.back() == '.' || w.back() == '!' || w.back() == '?')) {
      keep = k;
      break;
    }
  }
  std::string out;
  for (size_t k = 0; k < keep; ++k) {
    if (k > 0) out += ' ';
    out += words[k];
  }
  return out;
}

std::string generate_summary(const ir::DocumentIR& ir, const mcu::SemanticRep& sem,
                             const SummarySpec& spec, backend::Backend& backend) {
  const auto members = mcu::scope_members(ir, spec.scope_heading_id);
  const std::set<std::string> scope(members.begin(), members.end());
  Json facts = Json::array();
  for (const auto& f : sem.facts) {
    if (!scope.count(f.source_id)) continue;
    facts.push_back({{"subject", f.subject}, {"predicate", f.predicate}, {"object", f.object}});
  }
  Json digests = Json::array();
  Json text = Json::array();
  for (const auto& id : members) {
    if (auto it = sem.section_digests.find(id); it != sem.section_digests.end()) {
      digests.push_back(it->second);
    }
    const ir::Element* e = ir.find(id);
    if (e != nullptr && ir::is_textual(e->kind) && !e->text.empty()) text.push_back(e->text);
  }
  if (spec.scope_heading_id.empty()) {
    if (auto it = sem.section_digests.find(""); it != sem.section_digests.end()) {
      digests.insert(digests.begin(), it->second);
    }
  }
  const ir::Element* heading = ir.find(spec.scope_heading_id);
  Json input = {{"scope", heading ? heading->text : std::string("document")},
                {"facts", facts},
                {"digests", digests},
                {"text", text},
                {"goal", spec.goal}};
  if (spec.max_length) input["max_length"] = *spec.max_length;
  if (spec.style) input["style"] = *spec.style;
  std::string summary = ask_text(backend, prompts::make_request(prompts::Task::kSummary, input),
                                 "summary of " + (heading ? heading->id : std::string("document")));
  if (spec.max_length) summary = truncate_words(summary, static_cast<size_t>(*spec.max_length));
  return summary;
}

Json summaries_to_json(const std::map<int, std::string>& summaries) {
  Json j = Json::object();
  for (const auto& [id, text] : summaries) j[std::to_string(id)] = text;
  return j;
}

std::map<int, std::string> summaries_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("/", "summaries must be an object");
  std::map<int, std::string> out;
  for (const auto& [key, value] : j.items()) {
    try {
      out[std::stoi(key)] = value.get<std::string>();
    } catch (const std::exception&) {
      throw ParseError("/" + key, "expected an op id mapped to a string");
    }
  }
  return out;
}

Json warnings_to_json(const std::vector<OverflowWarning>& warnings) {
  Json j = Json::array();
  for (const auto& w : warnings) {
    j.push_back({{"element", w.element_id},
                 {"kind", "overflow"},
                 {"estimated_lines", w.estimated_lines},
                 {"capacity_lines", w.capacity_lines}});
  }
  return j;
}

void write_result(const std::filesystem::path& dir, const RefinementResult& result) {
  save_ir(dir / "out.ir.json", result.new_ir);
  write_file(dir / "out.sem.json", mcu::serialize_sem(result.new_sem));
  write_file(dir / "summaries.json", to_canonical_json(summaries_to_json(result.summaries)));
  write_file(dir / "warnings.json", to_canonical_json(warnings_to_json(result.warnings)));
}

RefinementResult apply_ops(const ir::DocumentIR& ir, const mcu::SemanticRep& sem,
                           const std::vector<ida::AtomicOp>& ops, backend::Backend& backend,
                           const TextMetrics& metrics) {
  const auto violations = ida::validate_ops(ops, ir, sem);
  if (!violations.empty()) {
    std::string msg = "operations failed validation:";
    for (const auto& v : violations) msg += "\n  " + ida::to_string(v);
    throw ValidationError(msg);
  }

  std::set<std::string> written;
  std::vector<std::optional<std::future<Generated>>> early(ops.size());
  for (size_t i = 0; i < ops.size(); ++i) {
    const auto reads = read_ids(ops[i], ir);
    const bool independent = std::none_of(reads.begin(), reads.end(),
                                          [&](const auto& id) { return written.count(id) > 0; });
    if (independent) {
      early[i] = std::async(std::launch::async, [&ir, &sem, &backend, &op = ops[i]] {
        return generate(op, ir, sem, backend);
      });
    }
    const auto writes = write_ids(ops[i], ir);
    written.insert(writes.begin(), writes.end());
  }

  Applier applier(ir, sem, metrics);
  std::exception_ptr failure;
  for (size_t i = 0; i < ops.size(); ++i) {
    try {
      Generated g;
      if (early[i]) {
        g = early[i]->get();
      } else if (!failure) {
        const RefinementResult& cur = applier.state();
        g = generate(ops[i], cur.new_ir, cur.new_sem, backend);
      }
      if (!failure) applier.commit(ops[i], g);
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  RefinementResult result = applier.finish(ir);
  std::set<std::string> allowed;
  for (const auto& op : ops) {
    const auto t = ida::touched_ids(op, ir);
    allowed.insert(t.begin(), t.end());
  }
  std::string stray;
  for (const auto& id : result.changed_ids) {
    if (!allowed.count(id)) stray += (stray.empty() ? "" : ", ") + id;
  }
  if (!stray.empty()) throw InternalError("refinement modified untargeted element(s): " + stray);
  const auto problems = ir::validate_ir(result.new_ir);
  if (!problems.empty()) {
    std::string msg = "refined document violates IR invariants:";
    for (const auto& v : problems) msg += "\n  " + ir::to_string(v);
    throw ValidationError(msg);
  }
  return result;
}

}  // namespace docrefine::refine
