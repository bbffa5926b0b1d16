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

#include "docrefine/layout.hpp"

#include <algorithm>
#include <cmath>

namespace docrefine {

size_t utf8_length(std::string_view text) {
  size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

size_t chars_per_line(const ir::BBox& box, const TextMetrics& m) {
  const double n = std::floor(box.width() / m.glyph_width());
  return n < 1.0 ? 1 : static_cast<size_t>(n);
}

size_t line_capacity(const ir::BBox& box, const TextMetrics& m) {
  const double n = std::floor(box.height() / m.line_height());
  return n < 1.0 ? 1 : static_cast<size_t>(n);
}

size_t estimated_lines(std::string_view text, const ir::BBox& box,
                       const TextMetrics& m) {
  const size_t chars = utf8_length(text);
  const size_t cpl = chars_per_line(box, m);
  return (chars + cpl - 1) / cpl;
}

}  // namespace docrefine
