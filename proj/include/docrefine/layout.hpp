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

#ifndef DOCREFINE_LAYOUT_HPP_
#define DOCREFINE_LAYOUT_HPP_

#include <cstddef>
#include <string_view>

#include "docrefine/ir.hpp"

namespace docrefine {

// Nominal text metrics used to estimate whether text fits a box. Every glyph
// is glyph_width_factor * font_size wide; lines are
// line_height_factor * font_size tall.
struct TextMetrics {
  double font_size = 10.0;
  double glyph_width_factor = 0.5;
  double line_height_factor = 1.2;

  double glyph_width() const { return font_size * glyph_width_factor; }
  double line_height() const { return font_size * line_height_factor; }
};

// Number of UTF-8 code points in `text`.
size_t utf8_length(std::string_view text);

// floor(width / glyph width), at least 1.
size_t chars_per_line(const ir::BBox& box, const TextMetrics& m = {});
// floor(height / line height), at least 1.
size_t line_capacity(const ir::BBox& box, const TextMetrics& m = {});
// ceil(code points / chars_per_line); 0 for empty text.
size_t estimated_lines(std::string_view text, const ir::BBox& box,
                       const TextMetrics& m = {});

}  // namespace docrefine

#endif  // DOCREFINE_LAYOUT_HPP_
