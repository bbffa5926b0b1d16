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

#include "docrefine/mcu.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "docrefine/error.hpp"
#include "prompts.hpp"

namespace docrefine::mcu {
namespace {

using ir::ElementKind;

std::string str_or(const Json& j, const char* key, std::string fallback = "") {
  auto it = j.find(key);
  if (it != j.end() && it->is_string()) return it->get<std::string>();
  return fallback;
}

std::vector<std::string> str_list(const Json& j, const char* key) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) return out;
  for (const auto& v : *it) {
    if (v.is_string()) out.push_back(v.get<std::string>());
  }
  return out;
}

Json grid_to_json(const TableGrid& g) {
  return {{"n_rows", g.n_rows},
          {"n_cols", g.n_cols},
          {"cells", g.cells},
          {"header_rows", g.header_rows}};
}

TableGrid grid_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "table grid must be an object");
  TableGrid g;
  try {
    g.n_rows = j.at("n_rows").get<int>();
    g.n_cols = j.at("n_cols").get<int>();
    g.cells = j.at("cells").get<std::vector<std::string>>();
    g.header_rows = j.value("header_rows", 0);
  } catch (const Json::exception& e) {
    throw ParseError(where, e.what());
  }
  return g;
}

std::map<std::string, std::vector<std::string>> parents_to_children(const ir::DocumentIR& ir) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& edge : ir.hierarchy) out[edge.parent_id].push_back(edge.child_id);
  return out;
}

std::vector<std::string> linked_caption_texts(const ir::DocumentIR& ir, const std::string& id) {
  std::vector<std::string> out;
  for (const auto& a : ir.associations) {
    if (a.target_id != id) continue;
    if (const ir::Element* c = ir.find(a.caption_id)) out.push_back(c->text);
  }
  return out;
}

struct SectionResult {
  std::vector<Fact> facts;
  std::vector<Entity> entities;
  std::string digest;
};

SectionResult understand_section(const ir::DocumentIR& ir, const Section& section,
                                 backend::Backend& backend, const std::string& guidance) {
  Json elements = Json::array();
  std::set<std::string> members;
  for (const auto& id : section.element_ids) {
    const ir::Element* e = ir.find(id);
    if (e == nullptr || !ir::is_textual(e->kind)) continue;
    members.insert(id);
    elements.push_back({{"id", id}, {"kind", std::string(ir::to_string(e->kind))}, {"text", e->text}});
  }
  Json input = {{"section", section.heading_id}, {"elements", elements}};
  if (!guidance.empty()) input["guidance"] = guidance;
  const auto resp = backend.complete(prompts::make_request(prompts::Task::kSectionFacts, input));
  const std::string anchor =
      section.heading_id.empty() ? section.element_ids.front() : section.heading_id;
  auto attribute = [&](const std::string& src) { return members.count(src) ? src : anchor; };

  SectionResult out;
  if (resp.parsed.contains("facts")) {
    for (const auto& f : resp.parsed["facts"]) {
      out.facts.push_back({str_or(f, "subject"), str_or(f, "predicate"), str_or(f, "object"),
                           attribute(str_or(f, "source"))});
    }
  }
  if (resp.parsed.contains("entities")) {
    for (const auto& en : resp.parsed["entities"]) {
      out.entities.push_back(
          {str_or(en, "surface"), str_or(en, "category"), attribute(str_or(en, "source"))});
    }
  }
  out.digest = str_or(resp.parsed, "digest");
  return out;
}

FigureDesc describe_figure(const ir::DocumentIR& ir, const ir::Element& fig,
                           backend::Backend& backend) {
  Json input = {{"id", fig.id}, {"captions", linked_caption_texts(ir, fig.id)}};
  std::vector<std::string> images;
  if (fig.raster_ref) images.push_back(*fig.raster_ref);
  const auto resp =
      backend.complete(prompts::make_request(prompts::Task::kFigureDescription, input, images));
  return {str_or(resp.parsed, "description"), str_list(resp.parsed, "axis_labels"),
          str_list(resp.parsed, "legend_entries")};
}

TableGrid transcribe_table(const ir::Element& table, backend::Backend& backend) {
  Json input = {{"id", table.id}};
  const auto resp = backend.complete(
      prompts::make_request(prompts::Task::kTableGrid, input, {*table.raster_ref}));
  return grid_from_json(resp.parsed, "/" + table.id);
}

}  // namespace

std::string TableGrid::to_text() const {
  std::string out;
  for (int r = 0; r < n_rows; ++r) {
    if (r > 0) out += '\n';
    for (int c = 0; c < n_cols; ++c) {
      if (c > 0) out += '\t';
      out += cell(r, c);
    }
  }
  return out;
}

TableGrid parse_table_text(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> cells;
    size_t cs = 0;
    while (true) {
      const size_t tab = line.find('\t', cs);
      cells.emplace_back(line.substr(cs, tab == std::string_view::npos ? line.size() - cs : tab - cs));
      if (tab == std::string_view::npos) break;
      cs = tab + 1;
    }
    rows.push_back(std::move(cells));
    start = nl + 1;
  }
  if (rows.size() > 1 && rows.back().size() == 1 && rows.back()[0].empty()) rows.pop_back();
  TableGrid g;
  g.n_rows = static_cast<int>(rows.size());
  g.n_cols = 1;
  for (const auto& r : rows) g.n_cols = std::max(g.n_cols, static_cast<int>(r.size()));
  g.cells.assign(static_cast<size_t>(g.n_rows) * g.n_cols, "");
  for (int r = 0; r < g.n_rows; ++r) {
    for (size_t c = 0; c < rows[static_cast<size_t>(r)].size(); ++c) {
      g.cell(r, static_cast<int>(c)) = rows[static_cast<size_t>(r)][c];
    }
  }
  return g;
}

std::vector<std::string> validate_sem(const SemanticRep& sem, const ir::DocumentIR& ir) {
  std::vector<std::string> out;
  for (size_t i = 0; i < sem.facts.size(); ++i) {
    if (ir.find(sem.facts[i].source_id) == nullptr) {
      out.push_back("fact " + std::to_string(i) + " cites unknown element '" +
                    sem.facts[i].source_id + "'");
    }
  }
  for (size_t i = 0; i < sem.entities.size(); ++i) {
    if (ir.find(sem.entities[i].element_id) == nullptr) {
      out.push_back("entity " + std::to_string(i) + " cites unknown element '" +
                    sem.entities[i].element_id + "'");
    }
  }
  for (const auto& [id, g] : sem.table_grids) {
    const ir::Element* e = ir.find(id);
    if (e == nullptr || e->kind != ElementKind::kTable) {
      out.push_back("table grid '" + id + "' does not name a Table");
    }
    if (g.n_rows < 1 || g.n_cols < 1 ||
        g.cells.size() != static_cast<size_t>(g.n_rows) * g.n_cols) {
      out.push_back("table grid '" + id + "' is not rectangular");
    }
    if (g.header_rows < 0 || g.header_rows > g.n_rows) {
      out.push_back("table grid '" + id + "' has header_rows out of range");
    }
  }
  for (const auto& [id, f] : sem.figure_descs) {
    const ir::Element* e = ir.find(id);
    if (e == nullptr || e->kind != ElementKind::kFigure) {
      out.push_back("figure description '" + id + "' does not name a Figure");
    }
  }
  for (const auto& [id, d] : sem.section_digests) {
    if (id.empty()) continue;
    const ir::Element* e = ir.find(id);
    if (e == nullptr || e->kind != ElementKind::kHeading) {
      out.push_back("section digest '" + id + "' does not name a Heading");
    }
  }
  return out;
}

Json to_json(const SemanticRep& sem) {
  Json facts = Json::array();
  for (const auto& f : sem.facts) {
    facts.push_back({{"subject", f.subject},
                     {"predicate", f.predicate},
                     {"object", f.object},
                     {"source", f.source_id}});
  }
  Json entities = Json::array();
  for (const auto& e : sem.entities) {
    entities.push_back({{"surface", e.surface}, {"category", e.category}, {"element", e.element_id}});
  }
  Json tables = Json::object();
  for (const auto& [id, g] : sem.table_grids) tables[id] = grid_to_json(g);
  Json figures = Json::object();
  for (const auto& [id, f] : sem.figure_descs) {
    figures[id] = {{"description", f.description},
                   {"axis_labels", f.axis_labels},
                   {"legend_entries", f.legend_entries}};
  }
  Json digests = Json::object();
  for (const auto& [id, d] : sem.section_digests) digests[id] = d;
  return {{"facts", facts},
          {"entities", entities},
          {"tables", tables},
          {"figures", figures},
          {"digests", digests}};
}

SemanticRep sem_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("/", "semantic representation must be an object");
  SemanticRep sem;
  try {
    for (const auto& f : j.value("facts", Json::array())) {
      sem.facts.push_back({f.at("subject").get<std::string>(), f.at("predicate").get<std::string>(),
                           f.at("object").get<std::string>(), f.at("source").get<std::string>()});
    }
    for (const auto& e : j.value("entities", Json::array())) {
      sem.entities.push_back({e.at("surface").get<std::string>(), e.at("category").get<std::string>(),
                              e.at("element").get<std::string>()});
    }
    const Json tables = j.value("tables", Json::object());
    const Json figures = j.value("figures", Json::object());
    const Json digests = j.value("digests", Json::object());
    for (const auto& [id, g] : tables.items()) {
      sem.table_grids[id] = grid_from_json(g, "/tables/" + id);
    }
    for (const auto& [id, f] : figures.items()) {
      sem.figure_descs[id] = {f.at("description").get<std::string>(),
                              f.value("axis_labels", std::vector<std::string>{}),
                              f.value("legend_entries", std::vector<std::string>{})};
    }
    for (const auto& [id, d] : digests.items()) {
      sem.section_digests[id] = d.get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw ParseError("/", e.what());
  }
  return sem;
}

std::string serialize_sem(const SemanticRep& sem) { return to_canonical_json(to_json(sem)); }

SemanticRep load_sem(const std::filesystem::path& path) {
  return sem_from_json(parse_json(read_file(path), path.string()));
}

std::vector<Section> sections(const ir::DocumentIR& ir) {
  std::map<std::string, std::string> parent;
  for (const auto& edge : ir.hierarchy) parent[edge.child_id] = edge.parent_id;
  std::vector<Section> out;
  std::map<std::string, size_t> index;
  for (const auto& id : ir.reading_order) {
    const ir::Element* e = ir.find(id);
    if (e == nullptr) continue;
    std::string key;
    if (e->kind == ElementKind::kHeading) {
      key = id;
    } else if (auto it = parent.find(id); it != parent.end()) {
      key = it->second;
    }
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) out.push_back({key, {}});
    out[it->second].element_ids.push_back(id);
  }
  return out;
}

std::vector<std::string> scope_members(const ir::DocumentIR& ir, const std::string& heading_id) {
  if (heading_id.empty()) return ir.reading_order;
  const auto children = parents_to_children(ir);
  std::set<std::string> in_scope = {heading_id};
  std::vector<std::string> stack = {heading_id};
  while (!stack.empty()) {
    const std::string cur = stack.back();
    stack.pop_back();
    auto it = children.find(cur);
    if (it == children.end()) continue;
    for (const auto& c : it->second) {
      if (in_scope.insert(c).second) stack.push_back(c);
    }
  }
  std::vector<std::string> out;
  for (const auto& id : ir.reading_order) {
    if (in_scope.count(id)) out.push_back(id);
  }
  return out;
}

SemanticRep understand(const ir::DocumentIR& ir, backend::Backend& backend,
                       const std::string& guidance) {
  std::vector<Section> secs;
  for (auto& s : sections(ir)) {
    const bool has_text = std::any_of(s.element_ids.begin(), s.element_ids.end(), [&](const auto& id) {
      const ir::Element* e = ir.find(id);
      return e != nullptr && ir::is_textual(e->kind) && !e->text.empty();
    });
    if (has_text) secs.push_back(std::move(s));
  }

  std::vector<std::future<SectionResult>> section_jobs;
  for (const auto& s : secs) {
    section_jobs.push_back(std::async(std::launch::async, [&ir, &s, &backend, &guidance] {
      return understand_section(ir, s, backend, guidance);
    }));
  }
  std::vector<std::pair<std::string, std::future<FigureDesc>>> figure_jobs;
  std::vector<std::pair<std::string, std::future<TableGrid>>> table_jobs;
  SemanticRep sem;
  for (const auto& id : ir.reading_order) {
    const ir::Element* e = ir.find(id);
    if (e == nullptr) continue;
    if (e->kind == ElementKind::kFigure) {
      figure_jobs.emplace_back(id, std::async(std::launch::async, [&ir, e, &backend] {
                                 return describe_figure(ir, *e, backend);
                               }));
    } else if (e->kind == ElementKind::kTable) {
      if (!e->text.empty() || !e->raster_ref) {
        sem.table_grids[id] = parse_table_text(e->text);
      } else {
        table_jobs.emplace_back(id, std::async(std::launch::async, [e, &backend] {
                                  return transcribe_table(*e, backend);
                                }));
      }
    }
  }

  // Collect every job before rethrowing so no task outlives its captures.
  std::exception_ptr failure;
  auto collect = [&failure](auto& fut) -> std::optional<std::decay_t<decltype(fut.get())>> {
    try {
      return fut.get();
    } catch (...) {
      if (!failure) failure = std::current_exception();
      return std::nullopt;
    }
  };
  for (size_t i = 0; i < section_jobs.size(); ++i) {
    auto r = collect(section_jobs[i]);
    if (!r) continue;
    sem.facts.insert(sem.facts.end(), r->facts.begin(), r->facts.end());
    sem.entities.insert(sem.entities.end(), r->entities.begin(), r->entities.end());
    if (!r->digest.empty()) sem.section_digests[secs[i].heading_id] = r->digest;
  }
  for (auto& [id, fut] : figure_jobs) {
    if (auto r = collect(fut)) sem.figure_descs[id] = std::move(*r);
  }
  for (auto& [id, fut] : table_jobs) {
    if (auto r = collect(fut)) sem.table_grids[id] = std::move(*r);
  }
  if (failure) std::rethrow_exception(failure);
  return sem;
}

SemanticRep structural_understanding(const ir::DocumentIR& ir) {
  SemanticRep sem;
  for (const auto& e : ir.elements) {
    if (e.kind == ElementKind::kTable) {
      sem.table_grids[e.id] = parse_table_text(e.text);
    } else if (e.kind == ElementKind::kFigure) {
      std::string desc;
      for (const auto& t : linked_caption_texts(ir, e.id)) {
        if (!desc.empty()) desc += ' ';
        desc += t;
      }
      sem.figure_descs[e.id] = {desc, {}, {}};
    }
  }
  return sem;
}

}  // namespace docrefine::mcu
