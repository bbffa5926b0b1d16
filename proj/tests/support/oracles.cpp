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

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace docrefine::testing {
namespace {

using ir::ElementKind;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Coordinate on the 0.001 grid.
double milli(int v) { return v / 1000.0; }

}  // namespace

double naive_ssim(const GrayImage& a, const GrayImage& b, int window, double range) {
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  const double n = static_cast<double>(window) * window;
  double total = 0;
  int count = 0;
  for (int y = 0; y + window <= a.height; ++y) {
    for (int x = 0; x + window <= a.width; ++x) {
      double ma = 0, mb = 0;
      for (int j = 0; j < window; ++j) {
        for (int i = 0; i < window; ++i) {
          ma += a.at(x + i, y + j);
          mb += b.at(x + i, y + j);
        }
      }
      ma /= n;
      mb /= n;
      double va = 0, vb = 0, cov = 0;
      for (int j = 0; j < window; ++j) {
        for (int i = 0; i < window; ++i) {
          const double da = a.at(x + i, y + j) - ma;
          const double db = b.at(x + i, y + j) - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      }
      va /= n;
      vb /= n;
      cov /= n;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / count;
}

double direct_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  long double dot = 0, uu = 0, vv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u[i]) * v[i];
    uu += static_cast<long double>(u[i]) * u[i];
    vv += static_cast<long double>(v[i]) * v[i];
  }
  return static_cast<double>(dot / std::sqrt(uu * vv));
}

double naive_iar(const std::vector<int>& verdicts) {
  if (verdicts.empty()) return 1.0;
  int ok = 0;
  for (int v : verdicts) ok += v == 0 ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(verdicts.size());
}

GrayImage random_image(Rng& rng, int w, int h) {
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(uniform(rng, 0, 255));
  return img;
}

std::vector<double> random_vector(Rng& rng, size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

ColumnLayout two_column_layout(Rng& rng) {
  ColumnLayout out;
  const bool title = uniform(rng, 0, 1) == 1;
  const int left_x0 = uniform(rng, 40, 70), left_x1 = uniform(rng, 260, 290);
  const int right_x0 = uniform(rng, 320, 340), right_x1 = uniform(rng, 540, 570);
  int top = 60;
  auto add = [&](const std::string& id, int x0, int y0, int x1, int y1) {
    ir::Element e;
    e.id = id;
    e.kind = ElementKind::kParagraph;
    e.bbox = {0, static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1),
              static_cast<double>(y1)};
    e.text = id;
    out.elements.push_back(e);
    out.expected_order.push_back(id);
  };
  if (title) {
    add("title", left_x0, 40, right_x1, 60);
    top = 80;
  }
  for (int column = 0; column < 2; ++column) {
    const int blocks = uniform(rng, 1, 6);
    int y = top + uniform(rng, 0, 20);
    for (int k = 0; k < blocks; ++k) {
      const int h = uniform(rng, 20, 90);
      const std::string id = std::string(column == 0 ? "L" : "R") + std::to_string(k);
      if (column == 0) {
        add(id, left_x0, y, left_x1 - uniform(rng, 0, 30), y + h);
      } else {
        add(id, right_x0, y, right_x1 - uniform(rng, 0, 30), y + h);
      }
      y += h + uniform(rng, 2, 6);
    }
  }
  std::shuffle(out.elements.begin(), out.elements.end(), rng);
  return out;
}

std::vector<ir::Element> fuzz_layout(Rng& rng) {
  std::vector<ir::Element> out;
  const int n = uniform(rng, 0, 40);
  const int pages = uniform(rng, 1, 3);
  for (int i = 0; i < n; ++i) {
    ir::Element e;
    e.id = "e" + std::to_string(i);
    e.kind = ElementKind::kParagraph;
    const int x0 = uniform(rng, 0, 500), y0 = uniform(rng, 0, 700);
    e.bbox = {uniform(rng, 0, pages - 1), static_cast<double>(x0), static_cast<double>(y0),
              static_cast<double>(x0 + uniform(rng, 1, 300)),
              static_cast<double>(y0 + uniform(rng, 1, 200))};
    out.push_back(e);
  }
  return out;
}

std::string random_text(Rng& rng, size_t max_words) {
  static const std::vector<std::string> kWords = {
      "layout", "model",  "naïve", "Straße", "日本語", "😀",   "\"quoted\"", "back\\slash",
      "tab\tin", "new\nline", "α=0.5", "x<y&z", "/path/", "84.5%", "\x01", "ok"};
  const size_t n = static_cast<size_t>(uniform(rng, 0, static_cast<int>(max_words)));
  std::string out;
  for (size_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += kWords[static_cast<size_t>(uniform(rng, 0, static_cast<int>(kWords.size()) - 1))];
  }
  return out;
}

ir::DocumentIR random_ir(Rng& rng) {
  static const std::vector<ElementKind> kKinds = {
      ElementKind::kHeading,  ElementKind::kParagraph, ElementKind::kListItem,
      ElementKind::kTable,    ElementKind::kFigure,    ElementKind::kFormula,
      ElementKind::kFootnote, ElementKind::kCaption};
  ir::DocumentIR doc;
  const int pages = uniform(rng, 1, 3);
  for (int p = 0; p < pages; ++p) {
    doc.pages.push_back({static_cast<double>(uniform(rng, 300, 900)),
                         static_cast<double>(uniform(rng, 400, 1200))});
  }
  const int n = uniform(rng, 0, 25);
  for (int i = 0; i < n; ++i) {
    ir::Element e;
    e.id = "el" + std::to_string(i) + "_" + std::to_string(uniform(rng, 0, 999));
    e.kind = kKinds[static_cast<size_t>(uniform(rng, 0, static_cast<int>(kKinds.size()) - 1))];
    const int page = uniform(rng, 0, pages - 1);
    const int w = static_cast<int>(doc.pages[page].width * 1000);
    const int h = static_cast<int>(doc.pages[page].height * 1000);
    const int x0 = uniform(rng, 0, w - 2000), y0 = uniform(rng, 0, h - 2000);
    e.bbox = {page, milli(x0), milli(y0), milli(uniform(rng, x0 + 1000, w)),
              milli(uniform(rng, y0 + 1000, h))};
    if (e.kind == ElementKind::kHeading) e.heading_level = uniform(rng, 1, 6);
    if (e.kind != ElementKind::kFigure) e.text = random_text(rng, 12);
    if ((e.kind == ElementKind::kFigure || e.kind == ElementKind::kTable) && uniform(rng, 0, 1)) {
      e.raster_ref = "img/" + e.id + ".png";
    }
    doc.elements.push_back(e);
  }

  std::vector<std::string> headings;
  for (const auto& e : doc.elements) {
    if (!headings.empty() && uniform(rng, 0, 3) > 0) {
      doc.hierarchy.push_back(
          {headings[static_cast<size_t>(uniform(rng, 0, static_cast<int>(headings.size()) - 1))],
           e.id});
    }
    if (e.kind == ElementKind::kHeading) headings.push_back(e.id);
  }

  std::vector<std::string> targets;
  for (const auto& e : doc.elements) {
    if (e.kind == ElementKind::kFigure || e.kind == ElementKind::kTable) targets.push_back(e.id);
  }
  std::shuffle(targets.begin(), targets.end(), rng);
  for (const auto& e : doc.elements) {
    if (e.kind != ElementKind::kCaption || targets.empty() || uniform(rng, 0, 2) == 0) continue;
    const std::string t = targets.back();
    targets.pop_back();
    const auto* target = doc.find(t);
    doc.associations.push_back({e.id, t,
                                target->kind == ElementKind::kFigure
                                    ? ir::AssociationRole::kFigureCaption
                                    : ir::AssociationRole::kTableCaption});
  }

  for (const auto& e : doc.elements) doc.reading_order.push_back(e.id);
  std::shuffle(doc.reading_order.begin(), doc.reading_order.end(), rng);
  std::shuffle(doc.elements.begin(), doc.elements.end(), rng);
  return doc;
}

std::vector<ida::AtomicOp> random_ops(Rng& rng, const ir::DocumentIR& doc) {
  std::vector<ida::AtomicOp> ops;
  for (const auto& e : doc.elements) {
    if (e.kind == ElementKind::kFigure || uniform(rng, 0, 2) != 0) continue;
    ida::AtomicOp op;
    op.op_id = static_cast<int>(ops.size()) + 1;
    op.target = ida::ElementTarget{e.id};
    if (e.kind == ElementKind::kTable) {
      op.kind = ida::OpKind::kCorrectTableCell;
      op.target = ida::CellTarget{e.id, 0, 0};
      op.payload = {{"value", random_text(rng, 2)}};
    } else if (e.kind == ElementKind::kCaption && uniform(rng, 0, 1)) {
      op.kind = ida::OpKind::kUpdateCaption;
      op.payload = {{"goal", "clarify"}};
    } else {
      switch (uniform(rng, 0, 2)) {
        case 0:
          op.kind = ida::OpKind::kRewriteText;
          op.payload = {{"goal", "improve"}};
          break;
        case 1:
          op.kind = ida::OpKind::kInsertText;
          op.payload = {{"text", random_text(rng, 4) + "."}};
          break;
        default:
          op.kind = ida::OpKind::kDeleteText;
          break;
      }
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

}  // namespace docrefine::testing
