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

#include "docrefine/ir.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <utility>

#include "docrefine/error.hpp"

namespace docrefine::ir {
namespace {

constexpr std::array<std::pair<ElementKind, std::string_view>, 8> kKindNames{{
    {ElementKind::kHeading, "Heading"},
    {ElementKind::kParagraph, "Paragraph"},
    {ElementKind::kListItem, "ListItem"},
    {ElementKind::kTable, "Table"},
    {ElementKind::kFigure, "Figure"},
    {ElementKind::kFormula, "Formula"},
    {ElementKind::kFootnote, "Footnote"},
    {ElementKind::kCaption, "Caption"},
}};

constexpr double kPageTolerance = 1e-9;

std::string join(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ",";
    out += id;
  }
  return out;
}

// Nodes lying on a cycle, grouped into weakly connected components. Sources
// and sinks are peeled repeatedly until only cyclic structure remains.
std::vector<std::vector<std::string>> find_cycles(
    const std::set<std::string>& nodes,
    const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, std::set<std::string>> out, in;
  for (const auto& n : nodes) {
    out[n];
    in[n];
  }
  for (const auto& [p, c] : edges) {
    out[p].insert(c);
    in[c].insert(p);
  }
  std::set<std::string> alive = nodes;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = alive.begin(); it != alive.end();) {
      const auto& n = *it;
      auto live_degree = [&](const std::set<std::string>& adj) {
        return std::count_if(adj.begin(), adj.end(),
                             [&](const std::string& m) { return alive.count(m) > 0; });
      };
      if (live_degree(in[n]) == 0 || live_degree(out[n]) == 0) {
        it = alive.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  std::vector<std::vector<std::string>> groups;
  std::set<std::string> seen;
  for (const auto& start : alive) {
    if (seen.count(start)) continue;
    std::vector<std::string> group;
    std::deque<std::string> queue{start};
    seen.insert(start);
    while (!queue.empty()) {
      std::string n = queue.front();
      queue.pop_front();
      group.push_back(n);
      for (const auto* adj : {&out[n], &in[n]}) {
        for (const auto& m : *adj) {
          if (alive.count(m) && !seen.count(m)) {
            seen.insert(m);
            queue.push_back(m);
          }
        }
      }
    }
    std::sort(group.begin(), group.end());
    groups.push_back(std::move(group));
  }
  return groups;
}

const Json& require(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "/" + key, "missing field");
  return *it;
}

std::string require_string(const Json& obj, const char* key,
                           const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_string()) throw ParseError(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

double require_number(const Json& obj, const char* key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_number()) throw ParseError(path + "/" + key, "expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path + "/" + key, "non-finite number");
  return d;
}

int require_int(const Json& obj, const char* key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_number_integer()) {
    throw ParseError(path + "/" + key, "expected an integer");
  }
  return v.get<int>();
}

const Json& require_array(const Json& obj, const char* key,
                          const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_array()) throw ParseError(path + "/" + key, "expected an array");
  return v;
}

}  // namespace

std::string_view to_string(ElementKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

std::optional<ElementKind> element_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool is_textual(ElementKind kind) { return kind != ElementKind::kFigure; }

std::string_view to_string(AssociationRole role) {
  return role == AssociationRole::kFigureCaption ? "figure-caption"
                                                 : "table-caption";
}

BBox BBox::quantized() const {
  return BBox{page_index, quantize(x0), quantize(y0), quantize(x1),
              quantize(y1)};
}

double iou(const BBox& a, const BBox& b) {
  if (a.page_index != b.page_index) return 0.0;
  const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

const Element* DocumentIR::find(std::string_view id) const {
  for (const auto& e : elements) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Element* DocumentIR::find(std::string_view id) {
  for (auto& e : elements) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

DocumentIR canonicalize(DocumentIR ir) {
  std::stable_sort(ir.elements.begin(), ir.elements.end(),
                   [](const Element& a, const Element& b) { return a.id < b.id; });
  std::sort(ir.hierarchy.begin(), ir.hierarchy.end());
  ir.hierarchy.erase(std::unique(ir.hierarchy.begin(), ir.hierarchy.end()),
                     ir.hierarchy.end());
  std::sort(ir.associations.begin(), ir.associations.end());
  ir.associations.erase(
      std::unique(ir.associations.begin(), ir.associations.end()),
      ir.associations.end());
  return ir;
}

bool structurally_equal(const DocumentIR& a, const DocumentIR& b) {
  DocumentIR ca = canonicalize(a);
  DocumentIR cb = canonicalize(b);
  return ca.pages == cb.pages && ca.elements == cb.elements &&
         ca.reading_order == cb.reading_order && ca.hierarchy == cb.hierarchy &&
         ca.associations == cb.associations;
}

std::string to_string(const Violation& v) {
  std::string s = std::string(v.rule);
  if (!v.element_id.empty()) s += " [" + v.element_id + "]";
  if (!v.detail.empty()) s += ": " + v.detail;
  return s;
}

std::vector<Violation> validate_ir(const DocumentIR& ir) {
  std::vector<Violation> out;
  auto report = [&](std::string id, std::string_view rule, std::string detail) {
    out.push_back(Violation{std::move(id), std::string(rule), std::move(detail)});
  };

  std::map<std::string, const Element*> by_id;
  for (const auto& e : ir.elements) {
    if (e.id.empty()) report("", rules::kEmptyId, "element has an empty id");
    if (!by_id.emplace(e.id, &e).second) {
      report(e.id, rules::kDuplicateId, "id appears more than once");
    }
    const BBox& b = e.bbox;
    if (!(b.x0 < b.x1) || !(b.y0 < b.y1)) {
      report(e.id, rules::kDegenerateBBox, "requires x0 < x1 and y0 < y1");
    }
    if (b.page_index < 0 || b.page_index >= static_cast<int>(ir.pages.size())) {
      report(e.id, rules::kPageOutOfRange,
             "page " + std::to_string(b.page_index) + " of " +
                 std::to_string(ir.pages.size()));
    } else {
      const PageSize& p = ir.pages[static_cast<size_t>(b.page_index)];
      if (b.x0 < -kPageTolerance || b.y0 < -kPageTolerance ||
          b.x1 > p.width + kPageTolerance || b.y1 > p.height + kPageTolerance) {
        report(e.id, rules::kBBoxOutsidePage, "bbox exceeds page bounds");
      }
    }
    const bool is_heading = e.kind == ElementKind::kHeading;
    if (is_heading != e.heading_level.has_value() ||
        (e.heading_level && *e.heading_level <= 0)) {
      report(e.id, rules::kHeadingLevel,
             is_heading ? "Heading needs a positive heading_level"
                        : "heading_level on a non-Heading element");
    }
    if (e.raster_ref && e.kind != ElementKind::kFigure &&
        e.kind != ElementKind::kTable) {
      report(e.id, rules::kRasterRef, std::string(to_string(e.kind)));
    }
  }

  {
    std::map<std::string, int> counts;
    for (const auto& id : ir.reading_order) ++counts[id];
    std::vector<std::string> missing, extra, repeated;
    for (const auto& [id, _] : by_id) {
      if (!counts.count(id)) missing.push_back(id);
    }
    for (const auto& [id, n] : counts) {
      if (!by_id.count(id)) extra.push_back(id);
      if (n > 1) repeated.push_back(id);
    }
    if (!missing.empty() || !extra.empty() || !repeated.empty()) {
      std::vector<std::string> ids = missing;
      ids.insert(ids.end(), extra.begin(), extra.end());
      ids.insert(ids.end(), repeated.begin(), repeated.end());
      std::string detail;
      if (!missing.empty()) detail += "missing {" + join(missing) + "}";
      if (!extra.empty()) {
        detail += (detail.empty() ? "" : "; ") + std::string("unknown {") +
                  join(extra) + "}";
      }
      if (!repeated.empty()) {
        detail += (detail.empty() ? "" : "; ") + std::string("repeated {") +
                  join(repeated) + "}";
      }
      report(join(ids), rules::kReadingOrder, detail);
    }
  }

  {
    std::map<std::string, std::vector<std::string>> parents;
    std::vector<std::pair<std::string, std::string>> edges;
    std::set<std::string> nodes;
    for (const auto& edge : ir.hierarchy) {
      bool ok = true;
      for (const auto* id : {&edge.parent_id, &edge.child_id}) {
        if (!by_id.count(*id)) {
          report(*id, rules::kUnknownHierarchyId,
                 "edge " + edge.parent_id + " -> " + edge.child_id);
          ok = false;
        }
      }
      if (!ok) continue;
      parents[edge.child_id].push_back(edge.parent_id);
      edges.emplace_back(edge.parent_id, edge.child_id);
      nodes.insert(edge.parent_id);
      nodes.insert(edge.child_id);
    }
    for (const auto& [child, ps] : parents) {
      if (ps.size() > 1) {
        report(child, rules::kMultipleParents, "parents {" + join(ps) + "}");
      }
    }
    for (const auto& group : find_cycles(nodes, edges)) {
      report(join(group), rules::kHierarchyCycle, "cycle through {" + join(group) + "}");
    }
  }

  for (const auto& a : ir.associations) {
    auto cap = by_id.find(a.caption_id);
    auto tgt = by_id.find(a.target_id);
    if (cap == by_id.end() || cap->second->kind != ElementKind::kCaption) {
      report(a.caption_id, rules::kAssociationCaption, "target " + a.target_id);
    }
    if (tgt == by_id.end() || (tgt->second->kind != ElementKind::kFigure &&
                               tgt->second->kind != ElementKind::kTable)) {
      report(a.target_id, rules::kAssociationTarget, "caption " + a.caption_id);
    } else {
      const bool fig = tgt->second->kind == ElementKind::kFigure;
      if (fig != (a.role == AssociationRole::kFigureCaption)) {
        report(a.caption_id, rules::kAssociationRole,
               std::string(to_string(a.role)) + " on " +
                   std::string(to_string(tgt->second->kind)));
      }
    }
  }
  return out;
}

Json to_json(const Element& e) {
  Json j;
  j["id"] = e.id;
  j["kind"] = std::string(to_string(e.kind));
  j["bbox"] = Json{{"page_index", e.bbox.page_index},
                   {"x0", static_cast<double>(e.bbox.x0)},
                   {"y0", static_cast<double>(e.bbox.y0)},
                   {"x1", static_cast<double>(e.bbox.x1)},
                   {"y1", static_cast<double>(e.bbox.y1)}};
  j["text"] = e.text;
  if (e.heading_level) j["heading_level"] = *e.heading_level;
  if (e.raster_ref) j["raster_ref"] = *e.raster_ref;
  return j;
}

Json to_json(const DocumentIR& ir_in) {
  const DocumentIR ir = canonicalize(ir_in);
  Json j = Json::object();
  j["pages"] = Json::array();
  for (const auto& p : ir.pages) {
    j["pages"].push_back(Json{{"width", static_cast<double>(p.width)},
                              {"height", static_cast<double>(p.height)}});
  }
  j["elements"] = Json::array();
  for (const auto& e : ir.elements) j["elements"].push_back(to_json(e));
  j["reading_order"] = ir.reading_order;
  j["hierarchy"] = Json::array();
  for (const auto& h : ir.hierarchy) {
    j["hierarchy"].push_back(Json{{"parent", h.parent_id}, {"child", h.child_id}});
  }
  j["associations"] = Json::array();
  for (const auto& a : ir.associations) {
    j["associations"].push_back(Json{{"caption", a.caption_id},
                                     {"target", a.target_id},
                                     {"role", std::string(to_string(a.role))}});
  }
  return j;
}

Element element_from_json(const Json& j, const std::string& path) {
  Element e;
  e.id = require_string(j, "id", path);
  if (e.id.empty()) throw ParseError(path + "/id", "empty id");
  const std::string kind = require_string(j, "kind", path);
  auto k = element_kind_from_string(kind);
  if (!k) throw ParseError(path + "/kind", "unknown element kind '" + kind + "'");
  e.kind = *k;
  const Json& b = require(j, "bbox", path);
  const std::string bpath = path + "/bbox";
  e.bbox.page_index = require_int(b, "page_index", bpath);
  e.bbox.x0 = require_number(b, "x0", bpath);
  e.bbox.y0 = require_number(b, "y0", bpath);
  e.bbox.x1 = require_number(b, "x1", bpath);
  e.bbox.y1 = require_number(b, "y1", bpath);
  e.bbox = e.bbox.quantized();
  if (e.bbox.page_index < 0) {
    throw ParseError(bpath + "/page_index", "negative page index");
  }
  if (!(e.bbox.x0 < e.bbox.x1)) throw ParseError(bpath, "requires x0 < x1");
  if (!(e.bbox.y0 < e.bbox.y1)) throw ParseError(bpath, "requires y0 < y1");
  if (j.contains("text")) e.text = require_string(j, "text", path);
  if (j.contains("heading_level") && !j["heading_level"].is_null()) {
    int level = require_int(j, "heading_level", path);
    if (level <= 0) throw ParseError(path + "/heading_level", "must be positive");
    e.heading_level = level;
  }
  if (j.contains("raster_ref") && !j["raster_ref"].is_null()) {
    e.raster_ref = require_string(j, "raster_ref", path);
  }
  return e;
}

ParsedIr from_json(const Json& j, bool require_structure) {
  if (!j.is_object()) throw ParseError("", "IR must be a JSON object");
  ParsedIr out;
  DocumentIR& ir = out.ir;

  const Json& pages = require_array(j, "pages", "");
  for (size_t i = 0; i < pages.size(); ++i) {
    const std::string path = "/pages/" + std::to_string(i);
    PageSize p{quantize(require_number(pages[i], "width", path)),
               quantize(require_number(pages[i], "height", path))};
    if (p.width <= 0 || p.height <= 0) {
      throw ParseError(path, "page dimensions must be positive");
    }
    ir.pages.push_back(p);
  }

  const Json& elements = require_array(j, "elements", "");
  std::set<std::string> ids;
  for (size_t i = 0; i < elements.size(); ++i) {
    const std::string path = "/elements/" + std::to_string(i);
    Element e = element_from_json(elements[i], path);
    if (e.bbox.page_index >= static_cast<int>(ir.pages.size())) {
      throw ParseError(path + "/bbox/page_index",
                       "page " + std::to_string(e.bbox.page_index) +
                           " does not exist");
    }
    if (!ids.insert(e.id).second) {
      throw ParseError(path + "/id", "duplicate id '" + e.id + "'");
    }
    ir.elements.push_back(std::move(e));
  }

  auto present = [&](const char* key) {
    if (j.contains(key)) return true;
    if (require_structure) throw ParseError(std::string("/") + key, "missing field");
    return false;
  };

  if ((out.has_reading_order = present("reading_order"))) {
    const Json& ro = require_array(j, "reading_order", "");
    for (size_t i = 0; i < ro.size(); ++i) {
      if (!ro[i].is_string()) {
        throw ParseError("/reading_order/" + std::to_string(i), "expected a string");
      }
      ir.reading_order.push_back(ro[i].get<std::string>());
    }
  }
  if ((out.has_hierarchy = present("hierarchy"))) {
    const Json& h = require_array(j, "hierarchy", "");
    for (size_t i = 0; i < h.size(); ++i) {
      const std::string path = "/hierarchy/" + std::to_string(i);
      ir.hierarchy.push_back(HierarchyEdge{require_string(h[i], "parent", path),
                                           require_string(h[i], "child", path)});
    }
  }
  if ((out.has_associations = present("associations"))) {
    const Json& a = require_array(j, "associations", "");
    for (size_t i = 0; i < a.size(); ++i) {
      const std::string path = "/associations/" + std::to_string(i);
      Association as;
      as.caption_id = require_string(a[i], "caption", path);
      as.target_id = require_string(a[i], "target", path);
      const std::string role = require_string(a[i], "role", path);
      if (role == "figure-caption") {
        as.role = AssociationRole::kFigureCaption;
      } else if (role == "table-caption") {
        as.role = AssociationRole::kTableCaption;
      } else {
        throw ParseError(path + "/role", "unknown role '" + role + "'");
      }
      ir.associations.push_back(std::move(as));
    }
  }
  return out;
}

std::string serialize_ir(const DocumentIR& ir) {
  return to_canonical_json(to_json(ir), 3);
}

DocumentIR deserialize_ir(const std::string& bytes) {
  return from_json(parse_json(bytes, "IR"), /*require_structure=*/true).ir;
}

DocumentIR load_ir(const std::filesystem::path& path) {
  try {
    return deserialize_ir(read_file(path));
  } catch (Error& e) {
    e.add_context(path.string());
    throw;
  }
}

void save_ir(const std::filesystem::path& path, const DocumentIR& ir) {
  write_file(path, serialize_ir(ir));
}

std::set<std::string> ElementDiff::all() const {
  std::set<std::string> out = changed_text;
  out.insert(changed_bbox.begin(), changed_bbox.end());
  out.insert(added.begin(), added.end());
  out.insert(removed.begin(), removed.end());
  return out;
}

ElementDiff diff_ir(const DocumentIR& before, const DocumentIR& after) {
  std::map<std::string_view, const Element*> a, b;
  for (const auto& e : before.elements) a.emplace(e.id, &e);
  for (const auto& e : after.elements) b.emplace(e.id, &e);
  ElementDiff d;
  for (const auto& [id, ea] : a) {
    auto it = b.find(id);
    if (it == b.end()) {
      d.removed.emplace(id);
      continue;
    }
    const Element* eb = it->second;
    if (ea->text != eb->text || ea->kind != eb->kind ||
        ea->heading_level != eb->heading_level ||
        ea->raster_ref != eb->raster_ref) {
      d.changed_text.emplace(id);
    }
    if (!(ea->bbox == eb->bbox)) d.changed_bbox.emplace(id);
  }
  for (const auto& [id, _] : b) {
    if (!a.count(id)) d.added.emplace(id);
  }
  return d;
}

}  // namespace docrefine::ir
