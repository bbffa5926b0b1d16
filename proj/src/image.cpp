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

#include "docrefine/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>

#include "docrefine/error.hpp"
#include "docrefine/layout.hpp"

namespace docrefine {
namespace {

bool has_suffix(const std::string& s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return tail == suffix;
}

GrayImage load_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG " + path + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  GrayImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path + ": " + msg);
  }
  return out;
}

GrayImage load_pgm(const std::string& path) {
  const std::string bytes = read_file(path);
  size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "P5") throw IoError(path + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw IoError(path + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw IoError(path + ": PGM must be 8-bit with positive dimensions");
  }
  ++pos;  // single whitespace after maxval
  const size_t n = static_cast<size_t>(w) * h;
  if (bytes.size() < pos + n) throw IoError(path + ": truncated PGM data");
  GrayImage out(w, h);
  std::memcpy(out.pixels.data(), bytes.data() + pos, n);
  return out;
}

GrayImage load_raw(const std::string& spec) {
  const auto colon = spec.rfind(':');
  const std::string path = spec.substr(0, colon);
  const std::string dims = spec.substr(colon + 1);
  const auto x = dims.find('x');
  int w = 0, h = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument("dims");
    w = std::stoi(dims.substr(0, x));
    h = std::stoi(dims.substr(x + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument,
                "raw raster needs a ':WxH' suffix, got '" + spec + "'");
  }
  if (w <= 0 || h <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "raw raster dimensions must be positive");
  }
  const std::string bytes = read_file(path);
  const size_t n = static_cast<size_t>(w) * h;
  if (bytes.size() != n) {
    throw DimensionMismatch(path + ": expected " + std::to_string(n) + " bytes, found " +
                            std::to_string(bytes.size()));
  }
  GrayImage out(w, h);
  std::memcpy(out.pixels.data(), bytes.data(), n);
  return out;
}

uint8_t fill_for(ir::ElementKind kind) {
  switch (kind) {
    case ir::ElementKind::kHeading: return 150;
    case ir::ElementKind::kTable: return 190;
    case ir::ElementKind::kFigure: return 120;
    case ir::ElementKind::kFormula: return 200;
    case ir::ElementKind::kCaption: return 210;
    case ir::ElementKind::kFootnote: return 225;
    default: return 220;
  }
}

}  // namespace

GrayImage load_gray_image(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon != std::string::npos && colon > 1 &&
      spec.find('x', colon) != std::string::npos) {
    return load_raw(spec);
  }
  if (has_suffix(spec, ".pgm")) return load_pgm(spec);
  return load_png(spec);
}

void save_png(const std::filesystem::path& path, const GrayImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0,
                               nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

GrayImage render_layout_raster(const ir::DocumentIR& ir, int page_index, double scale) {
  if (page_index < 0 || page_index >= static_cast<int>(ir.pages.size())) {
    throw Error(ErrorCode::kInvalidArgument, "page index out of range");
  }
  const ir::PageSize& page = ir.pages[static_cast<size_t>(page_index)];
  const int w = std::max(1, static_cast<int>(std::lround(page.width * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(page.height * scale)));
  GrayImage img(w, h, 255);
  const TextMetrics metrics;
  for (const auto& id : ir.reading_order) {
    const ir::Element* e = ir.find(id);
    if (e == nullptr || e->bbox.page_index != page_index) continue;
    const int x0 = std::clamp(static_cast<int>(std::floor(e->bbox.x0 * scale)), 0, w);
    const int x1 = std::clamp(static_cast<int>(std::ceil(e->bbox.x1 * scale)), 0, w);
    const int y0 = std::clamp(static_cast<int>(std::floor(e->bbox.y0 * scale)), 0, h);
    const int y1 = std::clamp(static_cast<int>(std::ceil(e->bbox.y1 * scale)), 0, h);
    const uint8_t fill = fill_for(e->kind);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) img.at(x, y) = fill;
    }
    const size_t lines = std::min(estimated_lines(e->text, e->bbox, metrics),
                                  line_capacity(e->bbox, metrics));
    const size_t cpl = chars_per_line(e->bbox, metrics);
    const size_t chars = utf8_length(e->text);
    for (size_t line = 0; line < lines; ++line) {
      const double baseline = e->bbox.y0 + (line + 0.8) * metrics.line_height();
      const int y = static_cast<int>(std::floor(baseline * scale));
      if (y < y0 || y >= y1) continue;
      const size_t on_line = std::min(cpl, chars - line * cpl);
      const double len = static_cast<double>(on_line) * metrics.glyph_width();
      const int xe = std::clamp(static_cast<int>(std::ceil((e->bbox.x0 + len) * scale)), x0, x1);
      for (int x = x0; x < xe; ++x) img.at(x, y) = 40;
    }
  }
  return img;
}

}  // namespace docrefine
