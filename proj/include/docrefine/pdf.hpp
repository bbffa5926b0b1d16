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

// Text and image placement extraction from PDF files.
//
// This is a small reader, not a renderer: it walks the page tree, decodes
// content streams (Flate, ASCII85, ASCIIHex) and interprets the text and
// XObject operators. Encrypted files are rejected.

#ifndef DOCREFINE_PDF_HPP_
#define DOCREFINE_PDF_HPP_

#include <string>
#include <vector>

#include "docrefine/ir.hpp"

namespace docrefine::pdf {

// One shown string, in page coordinates with a top-left origin.
struct TextRun {
  double x = 0;
  double baseline = 0;
  double width = 0;
  double font_size = 0;
  std::string text;  // UTF-8
};

struct PageContent {
  ir::PageSize size;
  std::vector<TextRun> runs;
  std::vector<ir::BBox> images;
};

struct Document {
  std::vector<PageContent> pages;
  std::vector<std::string> warnings;
};

// Throws IngestError when the bytes are not a readable PDF.
Document parse(const std::string& bytes);

struct Extraction {
  std::vector<ir::PageSize> pages;
  std::vector<ir::Element> elements;
  std::vector<std::string> warnings;
};

// Groups runs into lines and blocks and labels each block as Heading,
// Paragraph, ListItem, Caption or Footnote; placed images become Figures.
// Ids are "p<page>e<n>" with 1-based page and per-page counters in
// top-to-bottom order.
Extraction extract_elements(const Document& doc);

}  // namespace docrefine::pdf

#endif  // DOCREFINE_PDF_HPP_
