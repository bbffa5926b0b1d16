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

// Multimodal content understanding: facts, entities, table grids, figure
// descriptions and per-section digests extracted from a DocumentIR.

#ifndef DOCREFINE_MCU_HPP_
#define DOCREFINE_MCU_HPP_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "docrefine/backend.hpp"
#include "docrefine/ir.hpp"

namespace docrefine::mcu {

struct Fact {
  std::string subject;
  std::string predicate;
  std::string object;
  std::string source_id;
  friend bool operator==(const Fact&, const Fact&) = default;
};

struct Entity {
  std::string surface;
  std::string category;
  std::string element_id;
  friend bool operator==(const Entity&, const Entity&) = default;
};

// Row-major cell grid. Coordinates are 0-based.
struct TableGrid {
  int n_rows = 1;
  int n_cols = 1;
  std::vector<std::string> cells = {""};
  int header_rows = 0;

  const std::string& cell(int row, int col) const {
    return cells[static_cast<size_t>(row) * n_cols + col];
  }
  std::string& cell(int row, int col) { return cells[static_cast<size_t>(row) * n_cols + col]; }
  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < n_rows && col < n_cols;
  }
  // Rows joined by newlines, cells by tabs.
  std::string to_text() const;
  friend bool operator==(const TableGrid&, const TableGrid&) = default;
};

struct FigureDesc {
  std::string description;
  std::vector<std::string> axis_labels;
  std::vector<std::string> legend_entries;
  friend bool operator==(const FigureDesc&, const FigureDesc&) = default;
};

struct SemanticRep {
  std::vector<Fact> facts;
  std::vector<Entity> entities;
  std::map<std::string, TableGrid> table_grids;
  std::map<std::string, FigureDesc> figure_descs;
  // Keyed by heading id; "" holds the content before the first heading.
  std::map<std::string, std::string> section_digests;
  friend bool operator==(const SemanticRep&, const SemanticRep&) = default;
};

// Every reference must name an element of `ir` of the right kind and every
// grid must be rectangular. Returns one message per problem.
std::vector<std::string> validate_sem(const SemanticRep& sem, const ir::DocumentIR& ir);

Json to_json(const SemanticRep& sem);
SemanticRep sem_from_json(const Json& j);
std::string serialize_sem(const SemanticRep& sem);
SemanticRep load_sem(const std::filesystem::path& path);

// Splits table text on newlines (rows) and tabs (cells). A trailing empty
// line is dropped and short rows are padded with empty cells.
TableGrid parse_table_text(std::string_view text);

struct Section {
  std::string heading_id;  // "" for content before the first heading.
  std::vector<std::string> element_ids;  // Reading order; heading first.
};

// Elements grouped by their nearest heading (hierarchy parent), in reading
// order.
std::vector<Section> sections(const ir::DocumentIR& ir);

// `heading_id` and all of its hierarchy descendants in reading order; the
// whole reading order when `heading_id` is empty.
std::vector<std::string> scope_members(const ir::DocumentIR& ir, const std::string& heading_id);

// Full understanding pass. One MCU call per non-empty section and per figure,
// plus one per table that has no text but carries a raster. Calls run
// concurrently (bounded by the backend) and are assembled in reading order.
// Fact and entity sources the model gets wrong are reattributed to the
// section's heading (or first element). `guidance` is appended to every
// section prompt when non-empty.
SemanticRep understand(const ir::DocumentIR& ir, backend::Backend& backend,
                       const std::string& guidance = "");

// Backend-free subset: table grids parsed from text and figure descriptions
// taken from linked captions. No facts, entities or digests.
SemanticRep structural_understanding(const ir::DocumentIR& ir);

}  // namespace docrefine::mcu

#endif  // DOCREFINE_MCU_HPP_
