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

#ifndef DOCREFINE_IMAGE_HPP_
#define DOCREFINE_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "docrefine/ir.hpp"

namespace docrefine {

// 8-bit grayscale raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
};

// Loads a raster. Accepted forms:
//   page.png          8-bit PNG (color is converted to gray)
//   page.pgm          binary PGM (P5, maxval 255)
//   page.raw:WxH      headerless row-major bytes with declared dimensions
GrayImage load_gray_image(const std::string& spec);

void save_png(const std::filesystem::path& path, const GrayImage& img);

// Deterministic stand-in for a page rendering: white page, each element's box
// filled with a kind-specific gray and hatched with one dark rule per
// estimated text line. `scale` is pixels per point.
GrayImage render_layout_raster(const ir::DocumentIR& ir, int page_index,
                               double scale = 0.5);

}  // namespace docrefine

#endif  // DOCREFINE_IMAGE_HPP_
