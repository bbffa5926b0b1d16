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

// Layout and structure analysis: turns a PDF or a layout JSON file into a
// validated DocumentIR with reading order, section hierarchy and caption
// links.

#ifndef DOCREFINE_LSA_HPP_
#define DOCREFINE_LSA_HPP_

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "docrefine/backend.hpp"
#include "docrefine/ir.hpp"

namespace docrefine::lsa {

struct PdfFile {
  std::filesystem::path path;
};
// An IR-shaped JSON file whose reading_order, hierarchy and associations
// keys are optional; missing ones are computed.
struct LayoutJson {
  std::filesystem::path path;
};
using IngestSource = std::variant<PdfFile, LayoutJson>;

// ".pdf" (any case) selects PdfFile, everything else LayoutJson.
IngestSource source_from_path(const std::filesystem::path& path);
std::filesystem::path source_path(const IngestSource& source);

struct AnalyzeOptions {
  double gap_threshold = 8.0;     // Minimum whitespace gap for an XY cut, pt.
  double caption_max_gap = 20.0;  // Maximum caption-to-target distance, pt.
  // Ask the LSA model to relabel Figure/Table regions that carry a raster.
  bool vision_pass = false;
};

struct Analysis {
  ir::DocumentIR ir;
  std::vector<std::string> warnings;
};

// Throws IngestError for unreadable input (including duplicate element ids)
// and ValidationError when the assembled IR breaks an invariant. `backend`
// is only used by the vision pass and may be null otherwise.
Analysis analyze(const IngestSource& source, backend::Backend* backend,
                 const AnalyzeOptions& options = {});

// Recursive XY-cut. At each level the widest whitespace gap of at least
// `gap_threshold` along x splits the set into left and right; failing that
// the widest gap along y splits top and bottom; otherwise the leaf is read
// top-to-bottom, left-to-right. Pages are concatenated in index order.
std::vector<std::string> xy_cut_order(const std::vector<ir::Element>& elements,
                                      double gap_threshold = 8.0);

// Each Heading's parent is the nearest preceding Heading of smaller level;
// every other element's parent is the nearest preceding Heading.
std::vector<ir::HierarchyEdge> build_hierarchy(const std::vector<ir::Element>& elements,
                                               const std::vector<std::string>& reading_order);

struct CaptionLinks {
  std::vector<ir::Association> associations;
  std::vector<std::string> warnings;  // One per caption left unlinked.
};

// Links each Caption to the nearest horizontally overlapping Figure or Table
// on its page whose vertical gap is at most `max_gap`. Ties prefer the
// target above the caption, then the smaller id.
CaptionLinks link_captions(const std::vector<ir::Element>& elements, double max_gap = 20.0);

}  // namespace docrefine::lsa

#endif  // DOCREFINE_LSA_HPP_
