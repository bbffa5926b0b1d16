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

// Independent reference implementations and generators used by the tests.
// None of these call into the library code they check.

#ifndef DOCREFINE_TESTS_SUPPORT_ORACLES_HPP_
#define DOCREFINE_TESTS_SUPPORT_ORACLES_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "docrefine/ida.hpp"
#include "docrefine/image.hpp"
#include "docrefine/ir.hpp"

namespace docrefine::testing {

using Rng = std::mt19937_64;

// Brute force: every window's statistics recomputed from its pixels with
// two-pass population moments.
double naive_ssim(const GrayImage& a, const GrayImage& b, int window = 8, double range = 255.0);

// sum(u*v) / sqrt(sum(u*u) * sum(v*v)), accumulated in long double.
double direct_cosine(const std::vector<double>& u, const std::vector<double>& v);

// Satisfied share of a verdict vector (0 Satisfied, 1 Violated, 2 Unverifiable).
double naive_iar(const std::vector<int>& verdicts);

GrayImage random_image(Rng& rng, int w, int h);
std::vector<double> random_vector(Rng& rng, size_t n);

// Two text columns, optionally under a full-width title, with the reading
// order a person would give: title, left column top to bottom, right column
// top to bottom.
struct ColumnLayout {
  std::vector<ir::Element> elements;  // Shuffled.
  std::vector<std::string> expected_order;
};
ColumnLayout two_column_layout(Rng& rng);

// Arbitrary boxes on 1-3 pages, overlaps allowed.
std::vector<ir::Element> fuzz_layout(Rng& rng);

// A valid IR with random kinds, Unicode and control characters in text, a
// heading tree, caption links and a shuffled reading order. Boxes sit on the
// 0.001pt grid.
ir::DocumentIR random_ir(Rng& rng);

// Random text including multi-byte code points, quotes and escapes.
std::string random_text(Rng& rng, size_t max_words);

// Edits on a random subset of `doc`'s elements, at most one per element:
// RewriteText, InsertText or DeleteText on text, UpdateCaption on captions
// and CorrectTableCell (0, 0) on tables. Figures are never targeted.
std::vector<ida::AtomicOp> random_ops(Rng& rng, const ir::DocumentIR& doc);

}  // namespace docrefine::testing

#endif  // DOCREFINE_TESTS_SUPPORT_ORACLES_HPP_
