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

// Document intermediate representation: layout-annotated elements, reading
// order, section hierarchy and caption associations for one document.
//
// Coordinates are PDF points with a top-left origin. The canonical JSON form
// stores them on a 0.001pt grid, so producers quantize boxes (BBox::quantized)
// before handing an IR to the rest of the pipeline.

#ifndef DOCREFINE_IR_HPP_
#define DOCREFINE_IR_HPP_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "docrefine/canonical_json.hpp"

namespace docrefine::ir {

enum class ElementKind {
  kHeading,
  kParagraph,
  kListItem,
  kTable,
  kFigure,
  kFormula,
  kFootnote,
  kCaption,
};

std::string_view to_string(ElementKind kind);
std::optional<ElementKind> element_kind_from_string(std::string_view name);

// Every kind except Figure carries text that the pipeline may edit.
bool is_textual(ElementKind kind);

struct BBox {
  int page_index = 0;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  BBox quantized() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Intersection over union; boxes on different pages score 0.
double iou(const BBox& a, const BBox& b);

struct Element {
  std::string id;
  ElementKind kind = ElementKind::kParagraph;
  BBox bbox;
  std::string text;
  std::optional<int> heading_level;
  std::optional<std::string> raster_ref;

  friend bool operator==(const Element&, const Element&) = default;
};

struct PageSize {
  double width = 612;
  double height = 792;
  friend bool operator==(const PageSize&, const PageSize&) = default;
};

struct HierarchyEdge {
  std::string parent_id;
  std::string child_id;
  friend auto operator<=>(const HierarchyEdge&, const HierarchyEdge&) = default;
};

enum class AssociationRole { kFigureCaption, kTableCaption };

std::string_view to_string(AssociationRole role);

struct Association {
  std::string caption_id;
  std::string target_id;
  AssociationRole role = AssociationRole::kFigureCaption;
  friend auto operator<=>(const Association&, const Association&) = default;
};

struct DocumentIR {
  std::vector<PageSize> pages;
  std::vector<Element> elements;
  std::vector<std::string> reading_order;
  std::vector<HierarchyEdge> hierarchy;
  std::vector<Association> associations;

  const Element* find(std::string_view id) const;
  Element* find(std::string_view id);
};

// Element, edge and association order are construction artefacts; reading
// order and page order are content. Canonical form sorts the former.
DocumentIR canonicalize(DocumentIR ir);
bool structurally_equal(const DocumentIR& a, const DocumentIR& b);

struct Violation {
  std::string element_id;  // Offending id(s), comma separated; may be empty.
  std::string rule;
  std::string detail;
};

std::string to_string(const Violation& v);

std::vector<Violation> validate_ir(const DocumentIR& ir);

// Rule names reported by validate_ir.
namespace rules {
inline constexpr std::string_view kDuplicateId = "duplicate id";
inline constexpr std::string_view kEmptyId = "empty id";
inline constexpr std::string_view kDegenerateBBox = "degenerate bbox";
inline constexpr std::string_view kPageOutOfRange = "page_index out of range";
inline constexpr std::string_view kBBoxOutsidePage = "bbox outside page";
inline constexpr std::string_view kHeadingLevel = "heading_level present iff Heading";
inline constexpr std::string_view kRasterRef = "raster_ref only on Figure or Table";
inline constexpr std::string_view kReadingOrder = "reading_order not a permutation";
inline constexpr std::string_view kUnknownHierarchyId = "hierarchy names unknown id";
inline constexpr std::string_view kMultipleParents = "hierarchy node has multiple parents";
inline constexpr std::string_view kHierarchyCycle = "hierarchy contains cycle";
inline constexpr std::string_view kAssociationCaption = "association caption is not a Caption";
inline constexpr std::string_view kAssociationTarget = "association target is not a Figure/Table";
inline constexpr std::string_view kAssociationRole = "association role does not match target kind";
}  // namespace rules

// JSON encoding of the IR. The schema is the `*.ir.json` interchange format.
Json to_json(const Element& e);
Json to_json(const DocumentIR& ir);
Element element_from_json(const Json& j, const std::string& path);

// Structure fields that may be absent in LayoutJson input.
struct ParsedIr {
  DocumentIR ir;
  bool has_reading_order = false;
  bool has_hierarchy = false;
  bool has_associations = false;
};

// Decodes an IR object. With `require_structure` the reading_order,
// hierarchy and associations keys are mandatory. Rejects unknown kinds,
// malformed geometry and duplicate ids with a ParseError naming the path.
ParsedIr from_json(const Json& j, bool require_structure);

std::string serialize_ir(const DocumentIR& ir);
DocumentIR deserialize_ir(const std::string& bytes);

DocumentIR load_ir(const std::filesystem::path& path);
void save_ir(const std::filesystem::path& path, const DocumentIR& ir);

struct ElementDiff {
  std::set<std::string> changed_text;
  std::set<std::string> changed_bbox;
  std::set<std::string> added;
  std::set<std::string> removed;

  bool empty() const {
    return changed_text.empty() && changed_bbox.empty() && added.empty() &&
           removed.empty();
  }
  // Union of all four sets.
  std::set<std::string> all() const;
  friend bool operator==(const ElementDiff&, const ElementDiff&) = default;
};

// Elements matched by id. Text compares byte-wise and bbox exactly. Changes to
// kind, heading_level or raster_ref are reported under changed_text, since they
// alter the element's content rather than its placement.
ElementDiff diff_ir(const DocumentIR& before, const DocumentIR& after);

}  // namespace docrefine::ir

#endif  // DOCREFINE_IR_HPP_
