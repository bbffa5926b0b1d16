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

#include "docrefine/lsa.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "docrefine/error.hpp"
#include "docrefine/pdf.hpp"
#include "prompts.hpp"

namespace docrefine::lsa {
namespace {

using ir::Element;
using ir::ElementKind;

// Widest gap between the merged projections [lo, hi] of `elems`. Returns the
// cut coordinate, or nothing when no gap reaches `threshold`.
template <typename Lo, typename Hi>
std::optional<double> widest_gap(const std::vector<const Element*>& elems, Lo lo, Hi hi,
                                 double threshold) {
  std::vector<std::pair<double, double>> spans;
  spans.reserve(elems.size());
  for (const Element* e : elems) spans.emplace_back(lo(*e), hi(*e));
  std::sort(spans.begin(), spans.end());
  double reach = spans.front().second;
  double best_gap = -1;
  double cut = 0;
  for (size_t i = 1; i < spans.size(); ++i) {
    const double gap = spans[i].first - reach;
    if (gap > best_gap) {
      best_gap = gap;
      cut = reach + gap / 2;
    }
    reach = std::max(reach, spans[i].second);
  }
  if (best_gap >= threshold && best_gap > 0) return cut;
  return std::nullopt;
}

void cut(std::vector<const Element*> elems, double threshold, std::vector<std::string>& out) {
  if (elems.size() <= 1) {
    for (const Element* e : elems) out.push_back(e->id);
    return;
  }
  auto x0 = [](const Element& e) { return e.bbox.x0; };
  auto x1 = [](const Element& e) { return e.bbox.x1; };
  auto y0 = [](const Element& e) { return e.bbox.y0; };
  auto y1 = [](const Element& e) { return e.bbox.y1; };
  if (auto c = widest_gap(elems, x0, x1, threshold)) {
    std::vector<const Element*> left, right;
    for (const Element* e : elems) (e->bbox.x1 <= *c ? left : right).push_back(e);
    cut(std::move(left), threshold, out);
    cut(std::move(right), threshold, out);
    return;
  }
  if (auto c = widest_gap(elems, y0, y1, threshold)) {
    std::vector<const Element*> top, bottom;
    for (const Element* e : elems) (e->bbox.y1 <= *c ? top : bottom).push_back(e);
    cut(std::move(top), threshold, out);
    cut(std::move(bottom), threshold, out);
    return;
  }
  std::sort(elems.begin(), elems.end(), [](const Element* a, const Element* b) {
    if (a->bbox.y0 != b->bbox.y0) return a->bbox.y0 < b->bbox.y0;
    if (a->bbox.x0 != b->bbox.x0) return a->bbox.x0 < b->bbox.x0;
    return a->id < b->id;
  });
  for (const Element* e : elems) out.push_back(e->id);
}

void throw_if_invalid(const ir::DocumentIR& doc) {
  const auto violations = ir::validate_ir(doc);
  if (violations.empty()) return;
  std::string msg = "analyzed document violates IR invariants:";
  for (const auto& v : violations) msg += "\n  " + ir::to_string(v);
  throw ValidationError(msg);
}

void check_duplicate_ids(const Json& j) {
  if (!j.is_object() || !j.contains("elements") || !j["elements"].is_array()) return;
  std::set<std::string> seen;
  for (const auto& e : j["elements"]) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string()) continue;
    const std::string id = e["id"].get<std::string>();
    if (!seen.insert(id).second) throw IngestError("duplicate element id '" + id + "'");
  }
}

void run_vision_pass(ir::DocumentIR& doc, const std::filesystem::path& base_dir,
                     backend::Backend& backend, std::vector<std::string>& warnings) {
  for (auto& e : doc.elements) {
    if (e.kind != ElementKind::kFigure && e.kind != ElementKind::kTable) continue;
    if (!e.raster_ref) {
      warnings.push_back("vision pass skipped " + e.id + ": no raster");
      continue;
    }
    std::filesystem::path raster(*e.raster_ref);
    if (raster.is_relative()) raster = base_dir / raster;
    Json input = {{"id", e.id},
                  {"kind", std::string(ir::to_string(e.kind))},
                  {"text", e.text}};
    const auto resp =
        backend.complete(prompts::make_request(prompts::Task::kRegionLabel, input, {raster.string()}));
    const std::string kind = resp.parsed.value("kind", "");
    if (kind == "Table") {
      e.kind = ElementKind::kTable;
      if (resp.parsed.contains("text") && resp.parsed["text"].is_string()) {
        e.text = resp.parsed["text"].get<std::string>();
      }
    } else if (kind == "Figure") {
      e.kind = ElementKind::kFigure;
      e.text.clear();
    }
  }
  for (auto& a : doc.associations) {
    if (const Element* t = doc.find(a.target_id)) {
      a.role = t->kind == ElementKind::kTable ? ir::AssociationRole::kTableCaption
                                              : ir::AssociationRole::kFigureCaption;
    }
  }
}

Analysis finish(ir::ParsedIr parsed, std::vector<std::string> warnings,
                const std::filesystem::path& base_dir, backend::Backend* backend,
                const AnalyzeOptions& options) {
  ir::DocumentIR& doc = parsed.ir;
  for (auto& e : doc.elements) e.bbox = e.bbox.quantized();
  if (options.vision_pass) {
    if (backend == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "vision pass requires a backend");
    }
    run_vision_pass(doc, base_dir, *backend, warnings);
  }
  if (!parsed.has_reading_order) {
    doc.reading_order = xy_cut_order(doc.elements, options.gap_threshold);
  }
  if (!parsed.has_hierarchy) {
    doc.hierarchy = build_hierarchy(doc.elements, doc.reading_order);
  }
  if (!parsed.has_associations) {
    auto links = link_captions(doc.elements, options.caption_max_gap);
    doc.associations = std::move(links.associations);
    warnings.insert(warnings.end(), links.warnings.begin(), links.warnings.end());
  }
  doc = ir::canonicalize(std::move(doc));
  throw_if_invalid(doc);
  return {std::move(doc), std::move(warnings)};
}

}  // namespace

IngestSource source_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pdf") return PdfFile{path};
  return LayoutJson{path};
}

std::filesystem::path source_path(const IngestSource& source) {
  return std::visit([](const auto& s) { return s.path; }, source);
}

Analysis analyze(const IngestSource& source, backend::Backend* backend,
                 const AnalyzeOptions& options) {
  const std::filesystem::path path = source_path(source);
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    throw IngestError(e.what());
  }
  const std::filesystem::path base_dir = path.parent_path();

  if (std::holds_alternative<PdfFile>(source)) {
    pdf::Extraction ex = pdf::extract_elements(pdf::parse(bytes));
    if (ex.elements.empty()) ex.warnings.push_back("no text or images found in " + path.string());
    ir::ParsedIr parsed;
    parsed.ir.pages = std::move(ex.pages);
    parsed.ir.elements = std::move(ex.elements);
    return finish(std::move(parsed), std::move(ex.warnings), base_dir, backend, options);
  }

  Json j;
  try {
    j = parse_json(bytes, path.string());
  } catch (const Error& e) {
    throw IngestError(e.what());
  }
  check_duplicate_ids(j);
  ir::ParsedIr parsed;
  try {
    parsed = ir::from_json(j, false);
  } catch (const ParseError& e) {
    throw IngestError(path.string() + ": " + e.what());
  }
  return finish(std::move(parsed), {}, base_dir, backend, options);
}

std::vector<std::string> xy_cut_order(const std::vector<ir::Element>& elements,
                                      double gap_threshold) {
  std::map<int, std::vector<const Element*>> by_page;
  for (const auto& e : elements) by_page[e.bbox.page_index].push_back(&e);
  std::vector<std::string> out;
  out.reserve(elements.size());
  for (auto& [page, elems] : by_page) cut(std::move(elems), gap_threshold, out);
  return out;
}

std::vector<ir::HierarchyEdge> build_hierarchy(const std::vector<ir::Element>& elements,
                                               const std::vector<std::string>& reading_order) {
  std::map<std::string, const Element*> by_id;
  for (const auto& e : elements) by_id.emplace(e.id, &e);
  std::vector<const Element*> open;  // Heading stack, strictly increasing level.
  std::vector<ir::HierarchyEdge> edges;
  std::set<std::string> placed;
  for (const auto& id : reading_order) {
    auto it = by_id.find(id);
    if (it == by_id.end() || !placed.insert(id).second) continue;
    const Element& e = *it->second;
    if (e.kind == ElementKind::kHeading) {
      const int level = e.heading_level.value_or(1);
      while (!open.empty() && open.back()->heading_level.value_or(1) >= level) open.pop_back();
      if (!open.empty()) edges.push_back({open.back()->id, e.id});
      open.push_back(&e);
    } else if (!open.empty()) {
      edges.push_back({open.back()->id, e.id});
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

CaptionLinks link_captions(const std::vector<ir::Element>& elements, double max_gap) {
  CaptionLinks out;
  for (const auto& c : elements) {
    if (c.kind != ElementKind::kCaption) continue;
    const Element* best = nullptr;
    double best_gap = 0;
    bool best_above = false;
    for (const auto& t : elements) {
      if (t.kind != ElementKind::kFigure && t.kind != ElementKind::kTable) continue;
      if (t.bbox.page_index != c.bbox.page_index) continue;
      if (std::min(t.bbox.x1, c.bbox.x1) <= std::max(t.bbox.x0, c.bbox.x0)) continue;
      const double gap =
          std::max(0.0, std::max(c.bbox.y0 - t.bbox.y1, t.bbox.y0 - c.bbox.y1));
      if (gap > max_gap) continue;
      const bool above = t.bbox.y0 + t.bbox.y1 <= c.bbox.y0 + c.bbox.y1;
      const bool better = best == nullptr || gap < best_gap ||
                          (gap == best_gap && above && !best_above) ||
                          (gap == best_gap && above == best_above && t.id < best->id);
      if (better) {
        best = &t;
        best_gap = gap;
        best_above = above;
      }
    }
    if (best == nullptr) {
      out.warnings.push_back("caption " + c.id + " has no figure or table within " +
                             std::to_string(static_cast<int>(max_gap)) + "pt");
      continue;
    }
    out.associations.push_back({c.id, best->id,
                                best->kind == ElementKind::kTable
                                    ? ir::AssociationRole::kTableCaption
                                    : ir::AssociationRole::kFigureCaption});
  }
  std::sort(out.associations.begin(), out.associations.end());
  return out;
}

}  // namespace docrefine::lsa
