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

// Small builders shared by the unit tests.

#ifndef DOCREFINE_TESTS_SUPPORT_FIXTURES_HPP_
#define DOCREFINE_TESTS_SUPPORT_FIXTURES_HPP_

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "docrefine/backend.hpp"
#include "docrefine/ir.hpp"
#include "docrefine/lsa.hpp"

namespace docrefine::testing {

inline ir::Element make_el(std::string id, ir::ElementKind kind, double x0, double y0, double x1,
                           double y1, std::string text = "",
                           std::optional<int> level = std::nullopt, int page = 0) {
  ir::Element e;
  e.id = std::move(id);
  e.kind = kind;
  e.bbox = {page, x0, y0, x1, y1};
  e.text = std::move(text);
  e.heading_level = level;
  return e;
}

// Reading order as given, hierarchy and caption links computed.
inline ir::DocumentIR make_doc(std::vector<ir::Element> elements, int pages = 1) {
  ir::DocumentIR doc;
  doc.pages.assign(static_cast<size_t>(pages), ir::PageSize{});
  doc.elements = std::move(elements);
  for (const auto& e : doc.elements) doc.reading_order.push_back(e.id);
  doc.hierarchy = lsa::build_hierarchy(doc.elements, doc.reading_order);
  doc.associations = lsa::link_captions(doc.elements).associations;
  return ir::canonicalize(std::move(doc));
}

// A short paper: abstract, a results section with two paragraphs, a table
// with its caption and a figure with its caption.
inline ir::DocumentIR sample_paper() {
  using K = ir::ElementKind;
  return make_doc({
      make_el("h0", K::kHeading, 72, 60, 540, 80, "Abstract", 1),
      make_el("a1", K::kParagraph, 72, 86, 540, 146,
              "We present a layout aware editor for scientific documents."),
      make_el("a2", K::kParagraph, 72, 152, 540, 212,
              "It keeps untouched content identical and verifies every edit."),
      make_el("h3", K::kHeading, 72, 230, 540, 250, "3 Results", 1),
      make_el("r1", K::kParagraph, 72, 256, 540, 316,
              "The editor reaches 84.5 percent accuracy on the test set."),
      make_el("r2", K::kParagraph, 72, 322, 540, 382,
              "Each page takes 12 milliseconds to process."),
      make_el("t1", K::kTable, 72, 400, 540, 470, "Model\tAccuracy\nBaseline\t71.2\nOurs\t84.5"),
      make_el("c1", K::kCaption, 72, 476, 540, 492, "Table 1: Accuracy on the test set."),
      make_el("f1", K::kFigure, 72, 510, 540, 690),
      make_el("c2", K::kCaption, 72, 696, 540, 712, "Figure 1: Results."),
  });
}

inline std::unique_ptr<backend::MockBackend> make_mock(const Json& script) {
  return std::make_unique<backend::MockBackend>(backend::MockScript::from_json(script));
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("docrefine_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace docrefine::testing

#endif  // DOCREFINE_TESTS_SUPPORT_FIXTURES_HPP_
