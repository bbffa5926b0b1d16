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

#include "docrefine/fcv.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>

#include "docrefine/error.hpp"
#include "prompts.hpp"

namespace docrefine::fcv {
namespace {

using ida::AtomicOp;
using ida::OpKind;

constexpr std::array<std::pair<Category, std::string_view>, 5> kCategoryNames = {{
    {Category::kSemanticInaccuracy, "SemanticInaccuracy"},
    {Category::kLayoutDistortion, "LayoutDistortion"},
    {Category::kPartialAdherence, "PartialAdherence"},
    {Category::kNuanceMisread, "NuanceMisread"},
    {Category::kHallucination, "Hallucination"},
}};
constexpr std::array<std::pair<Agent, std::string_view>, 5> kAgentNames = {{
    {Agent::kCRA, "CRA"},
    {Agent::kSGA, "SGA"},
    {Agent::kIDA, "IDA"},
    {Agent::kMCU, "MCU"},
    {Agent::kLSA, "LSA"},
}};
constexpr std::array<std::pair<Severity, std::string_view>, 3> kSeverityNames = {{
    {Severity::kLow, "low"},
    {Severity::kMedium, "medium"},
    {Severity::kHigh, "high"},
}};

template <typename E, size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return table[0].second;
}

template <typename E, size_t N>
std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N>& table,
                          std::string_view name) {
  for (const auto& [v, n] : table) {
    if (n == name) return v;
  }
  return std::nullopt;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

std::string payload_string(const AtomicOp& op, const char* key) {
  auto it = op.payload.find(key);
  if (it != op.payload.end() && it->is_string()) return it->get<std::string>();
  return {};
}

// Text of the elements a summary op covers, in reading order.
std::string scope_text(const ir::DocumentIR& ir, const std::string& heading_id) {
  std::vector<std::string> parts;
  for (const auto& id : mcu::scope_members(ir, heading_id)) {
    const ir::Element* e = ir.find(id);
    if (e != nullptr && ir::is_textual(e->kind)) parts.push_back(e->text);
  }
  return join(parts, " ");
}

// Ids a summary op writes into (placement targets).
std::vector<std::string> summary_outputs(const AtomicOp& op) {
  std::vector<std::string> out;
  for (const char* key : {"insert", "replace"}) {
    if (op.payload.contains(key) && op.payload[key].is_object() &&
        op.payload[key].contains("id") && op.payload[key]["id"].is_string()) {
      out.push_back(op.payload[key]["id"].get<std::string>());
    }
  }
  return out;
}

Verdict judge_edit(const AtomicOp& op, const std::string& original, const std::string& edited,
                   backend::Backend* judge, const std::string& instruction) {
  if (judge == nullptr) return Verdict::unverifiable("no judge configured");
  Json input = {{"op", std::string(ida::to_string(op.kind))},
                {"target", ida::target_id(op.target)},
                {"goal", op.goal()},
                {"original", original},
                {"edited", edited}};
  if (!instruction.empty()) input["instruction"] = instruction;
  try {
    const auto resp = judge->complete(prompts::make_request(prompts::Task::kJudge, input));
    if (resp.parsed.value("verdict", "") == "yes") return Verdict::satisfied();
    std::string reason = resp.parsed.value("reason", "");
    if (reason.empty()) reason = "judge rejected the edit";
    return Verdict::violated(reason, category_from_string(resp.parsed.value("category", "")));
  } catch (const Error& e) {
    return Verdict::unverifiable(std::string("judge failed: ") + e.what());
  }
}

std::vector<std::string> numbers_in(const std::string& text) {
  static const std::regex re(R"(\d+(?:[.,]\d+)*)");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
       ++it) {
    out.push_back(it->str());
  }
  return out;
}

// Last op (by id) whose edits cover `id`.
std::optional<int> op_for(const std::string& id, const std::vector<AtomicOp>& ops,
                          const ir::DocumentIR& orig) {
  std::optional<int> out;
  for (const auto& op : ops) {
    if (ida::touched_ids(op, orig).count(id)) out = op.op_id;
  }
  return out;
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine of vectors with dimensions " + std::to_string(u.size()) +
                            " and " + std::to_string(v.size()));
  }
  double dot = 0, nu = 0, nv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) throw ZeroVector();
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double ssim(const GrayImage& a, const GrayImage& b, int window, double dynamic_range) {
  if (window < 1) throw Error(ErrorCode::kInvalidArgument, "SSIM window must be positive");
  if (a.width != b.width || a.height != b.height) {
    throw DimensionMismatch("SSIM of " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                            " and " + std::to_string(b.width) + "x" + std::to_string(b.height) +
                            " images");
  }
  if (a.width < window || a.height < window) {
    throw DimensionMismatch("image smaller than the SSIM window");
  }
  const int w = a.width, h = a.height;
  const size_t stride = static_cast<size_t>(w) + 1;
  const size_t cells = stride * (static_cast<size_t>(h) + 1);
  std::vector<int64_t> sa(cells, 0), sb(cells, 0), saa(cells, 0), sbb(cells, 0), sab(cells, 0);
  for (int y = 0; y < h; ++y) {
    int64_t ra = 0, rb = 0, raa = 0, rbb = 0, rab = 0;
    for (int x = 0; x < w; ++x) {
      const int64_t pa = a.at(x, y), pb = b.at(x, y);
      ra += pa;
      rb += pb;
      raa += pa * pa;
      rbb += pb * pb;
      rab += pa * pb;
      const size_t i = (static_cast<size_t>(y) + 1) * stride + x + 1;
      const size_t up = i - stride;
      sa[i] = sa[up] + ra;
      sb[i] = sb[up] + rb;
      saa[i] = saa[up] + raa;
      sbb[i] = sbb[up] + rbb;
      sab[i] = sab[up] + rab;
    }
  }
  auto rect = [&](const std::vector<int64_t>& s, int x, int y) -> __int128 {
    const size_t x0 = static_cast<size_t>(x), y0 = static_cast<size_t>(y);
    const size_t x1 = x0 + window, y1 = y0 + window;
    return static_cast<__int128>(s[y1 * stride + x1]) - s[y0 * stride + x1] -
           s[y1 * stride + x0] + s[y0 * stride + x0];
  };
  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  const __int128 n = static_cast<__int128>(window) * window;
  const double nd = static_cast<double>(n);
  const double n2 = nd * nd;
  long double total = 0;
  for (int y = 0; y + window <= h; ++y) {
    for (int x = 0; x + window <= w; ++x) {
      const __int128 s_a = rect(sa, x, y), s_b = rect(sb, x, y);
      const double mu_a = static_cast<double>(s_a) / nd;
      const double mu_b = static_cast<double>(s_b) / nd;
      const double var_a = static_cast<double>(n * rect(saa, x, y) - s_a * s_a) / n2;
      const double var_b = static_cast<double>(n * rect(sbb, x, y) - s_b * s_b) / n2;
      const double cov = static_cast<double>(n * rect(sab, x, y) - s_a * s_b) / n2;
      total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  }
  const double count = static_cast<double>(w - window + 1) * (h - window + 1);
  return static_cast<double>(total / count);
}

std::string_view to_string(Category c) { return name_of(kCategoryNames, c); }
std::string_view to_string(Agent a) { return name_of(kAgentNames, a); }
std::string_view to_string(Severity s) { return name_of(kSeverityNames, s); }
std::optional<Category> category_from_string(std::string_view n) { return value_of(kCategoryNames, n); }
std::optional<Agent> agent_from_string(std::string_view n) { return value_of(kAgentNames, n); }
std::optional<Severity> severity_from_string(std::string_view n) { return value_of(kSeverityNames, n); }

std::string_view to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::kSatisfied: return "Satisfied";
    case VerdictKind::kViolated: return "Violated";
    case VerdictKind::kUnverifiable: return "Unverifiable";
  }
  return "Unverifiable";
}

const std::vector<Agent>& allowed_routes(Category c) {
  static const std::map<Category, std::vector<Agent>> kRoutes = {
      {Category::kSemanticInaccuracy, {Agent::kCRA, Agent::kSGA, Agent::kMCU}},
      {Category::kLayoutDistortion, {Agent::kLSA, Agent::kCRA}},
      {Category::kPartialAdherence, {Agent::kIDA}},
      {Category::kNuanceMisread, {Agent::kMCU, Agent::kIDA}},
      {Category::kHallucination, {Agent::kCRA, Agent::kSGA}},
  };
  return kRoutes.at(c);
}

bool route_allowed(Category c, Agent a) {
  const auto& routes = allowed_routes(c);
  return std::find(routes.begin(), routes.end(), a) != routes.end();
}

FeedbackItem make_feedback(Category category, Agent route_to, std::string target_element,
                           std::optional<int> target_op, std::string message, Severity severity) {
  if (!route_allowed(category, route_to)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(to_string(category)) +
                                                 " feedback cannot be routed to " +
                                                 std::string(to_string(route_to)));
  }
  return {category, route_to, std::move(target_element), target_op, std::move(message), severity};
}

double iar_from_verdicts(const std::map<int, Verdict>& verdicts) {
  if (verdicts.empty()) return 1.0;
  size_t satisfied = 0;
  for (const auto& [id, v] : verdicts) {
    if (v.kind == VerdictKind::kSatisfied) ++satisfied;
  }
  return static_cast<double>(satisfied) / static_cast<double>(verdicts.size());
}

ScsResult compute_scs(const ir::DocumentIR& orig, const ir::DocumentIR& mod,
                      const std::vector<AtomicOp>& ops, const std::set<std::string>& changed_ids,
                      backend::Backend& embedder) {
  std::map<std::string, std::vector<std::string>> goals;
  std::map<std::string, std::string> summary_sources;
  for (const auto& op : ops) {
    for (const auto& id : ida::touched_ids(op, orig)) goals[id].push_back(op.goal());
    if (op.kind == OpKind::kGenerateSummary) {
      for (const auto& id : summary_outputs(op)) {
        summary_sources[id] = scope_text(orig, ida::target_id(op.target));
      }
    }
  }

  ScsResult out;
  std::vector<std::string> ids;
  std::vector<std::string> texts;  // intent, new, intent, new, ...
  for (const auto& id : changed_ids) {
    const ir::Element* o = orig.find(id);
    const ir::Element* m = mod.find(id);
    const bool textual = (o != nullptr && ir::is_textual(o->kind)) ||
                         (m != nullptr && ir::is_textual(m->kind));
    if (!textual) continue;
    auto g = goals.find(id);
    if (g == goals.end()) {
      out.per_element[id] = 0.0;
      continue;
    }
    if (m == nullptr) continue;
    std::string original = o != nullptr ? o->text : std::string();
    if (o == nullptr || summary_sources.count(id)) {
      auto s = summary_sources.find(id);
      if (s != summary_sources.end()) original = s->second;
    }
    std::vector<std::string> parts = g->second;
    parts.push_back(original);
    ids.push_back(id);
    texts.push_back(join(parts, " "));
    texts.push_back(m->text);
  }
  if (!texts.empty()) {
    const auto vecs = embedder.embed(texts);
    for (size_t i = 0; i < ids.size(); ++i) {
      const double c = texts[2 * i] == texts[2 * i + 1]
                           ? 1.0
                           : cosine(vecs[2 * i].values(), vecs[2 * i + 1].values());
      out.per_element[ids[i]] = std::max(0.0, c);
    }
  }
  if (out.per_element.empty()) {
    out.score = 1.0;
  } else {
    double sum = 0;
    for (const auto& [id, v] : out.per_element) sum += v;
    out.score = std::clamp(sum / static_cast<double>(out.per_element.size()), 0.0, 1.0);
  }
  return out;
}

LfiResult compute_lfi(const ir::DocumentIR& orig, const ir::DocumentIR& mod,
                      const std::set<std::string>& targeted, const std::vector<RasterPair>* rasters,
                      const LfiWeights& weights) {
  LfiResult out;
  double sum = 0;
  for (const auto& e : orig.elements) {
    if (targeted.count(e.id)) continue;
    const ir::Element* m = mod.find(e.id);
    const double v = m == nullptr ? 0.0 : ir::iou(e.bbox, m->bbox);
    out.per_element[e.id] = v;
    sum += v;
  }
  out.geometric = out.per_element.empty() ? 1.0 : sum / static_cast<double>(out.per_element.size());
  if (rasters != nullptr && !rasters->empty()) {
    double s = 0;
    for (const auto& pair : *rasters) s += ssim(pair.original, pair.modified);
    out.raster = s / static_cast<double>(rasters->size());
    const double raster = std::clamp(*out.raster, 0.0, 1.0);
    out.score = (weights.geometric * out.geometric + weights.raster * raster) /
                (weights.geometric + weights.raster);
  } else {
    out.score = out.geometric;
  }
  out.score = std::clamp(out.score, 0.0, 1.0);
  return out;
}

Verdict check_op(const AtomicOp& op, const ir::DocumentIR& orig, const ir::DocumentIR& mod,
                 const mcu::SemanticRep& mod_sem, const std::map<int, std::string>& summaries,
                 backend::Backend* judge, const std::string& instruction) {
  const std::string id = ida::target_id(op.target);
  const ir::Element* o = id.empty() ? nullptr : orig.find(id);
  const ir::Element* m = id.empty() ? nullptr : mod.find(id);

  switch (op.kind) {
    case OpKind::kDeleteText:
      return m == nullptr ? Verdict::satisfied() : Verdict::violated("target not deleted");

    case OpKind::kCorrectTableCell: {
      if (m == nullptr) return Verdict::violated("table " + id + " is missing");
      const auto& c = std::get<ida::CellTarget>(op.target);
      auto it = mod_sem.table_grids.find(id);
      const mcu::TableGrid grid =
          it != mod_sem.table_grids.end() ? it->second : mcu::parse_table_text(m->text);
      if (!grid.contains(c.row, c.col)) return Verdict::violated("cell outside the table grid");
      const std::string& now = grid.cell(c.row, c.col);
      if (op.payload.contains("value") && op.payload["value"].is_string()) {
        const std::string want = op.payload["value"].get<std::string>();
        if (now == want) return Verdict::satisfied();
        return Verdict::violated("cell holds '" + now + "', expected '" + want + "'");
      }
      const mcu::TableGrid before = mcu::parse_table_text(o != nullptr ? o->text : "");
      if (before.contains(c.row, c.col) && before.cell(c.row, c.col) == now) {
        return Verdict::violated("cell unchanged");
      }
      return Verdict::satisfied();
    }

    case OpKind::kReorderElements: {
      const auto order = op.payload.value("order", std::vector<std::string>{});
      const std::set<std::string> moved(order.begin(), order.end());
      std::vector<std::string> seen;
      for (const auto& rid : mod.reading_order) {
        if (moved.count(rid)) seen.push_back(rid);
      }
      return seen == order ? Verdict::satisfied()
                           : Verdict::violated("reading order does not follow the requested order");
    }

    case OpKind::kGenerateSummary: {
      auto it = summaries.find(op.op_id);
      if (it == summaries.end() || it->second.empty()) return Verdict::violated("no summary produced");
      if (op.payload.contains("max_length") && op.payload["max_length"].is_number_integer()) {
        const auto limit = op.payload["max_length"].get<long long>();
        const size_t words = refine::word_count(it->second);
        if (static_cast<long long>(words) > limit) {
          return Verdict::violated("summary has " + std::to_string(words) + " words, limit is " +
                                   std::to_string(limit));
        }
      }
      for (const auto& out_id : summary_outputs(op)) {
        const ir::Element* placed = mod.find(out_id);
        if (placed == nullptr || placed->text != it->second) {
          return Verdict::violated("summary not placed in " + out_id);
        }
      }
      return Verdict::satisfied();
    }

    case OpKind::kUpdateCaption: {
      if (m == nullptr) return Verdict::violated("caption " + id + " is missing");
      const std::string literal = payload_string(op, "text");
      if (!literal.empty()) {
        return m->text == literal ? Verdict::satisfied()
                                  : Verdict::violated("caption differs from the requested text");
      }
      if (o != nullptr && m->text == o->text) return Verdict::violated("caption unchanged");
      std::vector<std::string> missing;
      if (op.payload.contains("key_terms") && op.payload["key_terms"].is_array()) {
        const std::string hay = lower(m->text);
        for (const auto& t : op.payload["key_terms"]) {
          if (t.is_string() && hay.find(lower(t.get<std::string>())) == std::string::npos) {
            missing.push_back(t.get<std::string>());
          }
        }
      }
      if (!missing.empty()) return Verdict::violated("caption must mention: " + join(missing, ", "));
      return Verdict::satisfied();
    }

    case OpKind::kInsertText: {
      if (m == nullptr) return Verdict::violated("target " + id + " is missing");
      if (o != nullptr && m->text == o->text) return Verdict::violated("text unchanged");
      const std::string literal = payload_string(op, "text");
      if (!literal.empty()) {
        return m->text.find(literal) != std::string::npos
                   ? Verdict::satisfied()
                   : Verdict::violated("inserted text not found");
      }
      return judge_edit(op, o != nullptr ? o->text : "", m->text, judge, instruction);
    }

    case OpKind::kRewriteText:
    case OpKind::kCrossModalFix:
      if (m == nullptr) return Verdict::violated("target " + id + " is missing");
      if (o != nullptr && m->text == o->text) return Verdict::violated("text unchanged");
      return judge_edit(op, o != nullptr ? o->text : "", m->text, judge, instruction);

    case OpKind::kFormatUnify: {
      const auto touched = ida::touched_ids(op, orig);
      std::vector<std::string> before, after;
      bool changed = false;
      for (const auto& tid : touched) {
        const ir::Element* te = orig.find(tid);
        const ir::Element* tm = mod.find(tid);
        if (te == nullptr || tm == nullptr) return Verdict::violated("element " + tid + " is missing");
        changed = changed || te->text != tm->text;
        before.push_back(te->text);
        after.push_back(tm->text);
      }
      if (!changed) return Verdict::violated("text unchanged");
      return judge_edit(op, join(before, "\n"), join(after, "\n"), judge, instruction);
    }
  }
  return Verdict::unverifiable("unknown operation kind");
}

VerificationReport verify(const ir::DocumentIR& orig_ir, const ir::DocumentIR& mod_ir,
                          const mcu::SemanticRep& orig_sem, const mcu::SemanticRep& mod_sem,
                          const ida::Instruction& instruction, const std::vector<AtomicOp>& ops,
                          backend::Backend& embedder, backend::Backend* judge,
                          const VerifyExtras& extras) {
  (void)orig_sem;
  VerificationReport r;
  const Thresholds& t = extras.thresholds;

  std::set<std::string> targeted;
  for (const auto& op : ops) {
    const auto ids = ida::touched_ids(op, orig_ir);
    targeted.insert(ids.begin(), ids.end());
  }
  const auto changed = ir::diff_ir(orig_ir, mod_ir).all();
  r.scs_detail = compute_scs(orig_ir, mod_ir, ops, changed, embedder);
  r.lfi_detail = compute_lfi(orig_ir, mod_ir, targeted,
                             extras.rasters.empty() ? nullptr : &extras.rasters, extras.weights);
  for (const auto& op : ops) {
    r.per_op[op.op_id] =
        check_op(op, orig_ir, mod_ir, mod_sem, extras.summaries, judge, instruction.text);
  }
  r.scs = r.scs_detail.score;
  r.lfi = r.lfi_detail.score;
  r.iar = iar_from_verdicts(r.per_op);

  // Violated verdicts.
  size_t violated = 0;
  for (const auto& op : ops) {
    const Verdict& v = r.per_op[op.op_id];
    if (v.kind != VerdictKind::kViolated) continue;
    ++violated;
    const std::string target = ida::target_id(op.target);
    const std::string where = target.empty() ? "document" : target;
    Category cat = v.category.value_or(Category::kSemanticInaccuracy);
    Agent route = Agent::kCRA;
    Severity sev = Severity::kMedium;
    switch (op.kind) {
      case OpKind::kDeleteText:
      case OpKind::kCorrectTableCell:
      case OpKind::kReorderElements:
        cat = Category::kPartialAdherence;
        sev = Severity::kHigh;
        break;
      case OpKind::kGenerateSummary:
        if (cat == Category::kLayoutDistortion) cat = Category::kSemanticInaccuracy;
        route = Agent::kSGA;
        break;
      default:
        if (cat == Category::kLayoutDistortion) cat = Category::kSemanticInaccuracy;
        break;
    }
    if (!route_allowed(cat, route)) route = Agent::kIDA;
    r.feedback.push_back(make_feedback(cat, route, target, op.op_id, where + ": " + v.reason, sev));
  }

  // Semantic consistency per element.
  std::map<std::string, int> summary_owner;
  for (const auto& op : ops) {
    if (op.kind != OpKind::kGenerateSummary) continue;
    for (const auto& id : summary_outputs(op)) summary_owner[id] = op.op_id;
  }
  for (const auto& [id, score] : r.scs_detail.per_element) {
    if (score >= t.scs) continue;
    if (!targeted.count(id)) {
      r.feedback.push_back(make_feedback(Category::kSemanticInaccuracy, Agent::kCRA, id, std::nullopt,
                                         id + ": element was not targeted but its content changed",
                                         Severity::kHigh));
    } else if (auto s = summary_owner.find(id); s != summary_owner.end()) {
      r.feedback.push_back(make_feedback(Category::kSemanticInaccuracy, Agent::kSGA, id, s->second,
                                         id + ": summary strays from its source (consistency " +
                                             fmt(score) + ")",
                                         Severity::kMedium));
    } else {
      r.feedback.push_back(make_feedback(
          Category::kSemanticInaccuracy, Agent::kCRA, id, op_for(id, ops, orig_ir),
          id + ": edit drifts from the intended meaning (consistency " + fmt(score) + ")",
          Severity::kMedium));
    }
  }

  // Layout fidelity.
  bool layout_items = false;
  for (const auto& [id, v] : r.lfi_detail.per_element) {
    if (v >= 1.0) continue;
    layout_items = true;
    r.feedback.push_back(make_feedback(Category::kLayoutDistortion, Agent::kLSA, id, std::nullopt,
                                       mod_ir.find(id) == nullptr
                                           ? id + ": untargeted element disappeared"
                                           : id + ": untargeted element moved or resized (IoU " +
                                                 fmt(v) + ")",
                                       Severity::kHigh));
  }
  if (r.lfi < t.lfi && !layout_items) {
    r.feedback.push_back(make_feedback(Category::kLayoutDistortion, Agent::kLSA, "", std::nullopt,
                                       "page rendering differs from the original (LFI " +
                                           fmt(r.lfi) + ")",
                                       Severity::kMedium));
  }
  for (const auto& w : extras.overflow) {
    r.feedback.push_back(make_feedback(
        Category::kLayoutDistortion, Agent::kCRA, w.element_id, op_for(w.element_id, ops, orig_ir),
        w.element_id + " is too long for its box (about " + std::to_string(w.estimated_lines) +
            " lines, room for " + std::to_string(w.capacity_lines) + "); shorten it",
        Severity::kLow));
  }

  // Numbers in summaries that the source never mentions.
  for (const auto& op : ops) {
    if (op.kind != OpKind::kGenerateSummary) continue;
    auto it = extras.summaries.find(op.op_id);
    if (it == extras.summaries.end()) continue;
    const std::string source = scope_text(orig_ir, ida::target_id(op.target));
    std::vector<std::string> invented;
    for (const auto& n : numbers_in(it->second)) {
      if (source.find(n) == std::string::npos &&
          std::find(invented.begin(), invented.end(), n) == invented.end()) {
        invented.push_back(n);
      }
    }
    if (!invented.empty()) {
      r.feedback.push_back(make_feedback(Category::kHallucination, Agent::kSGA,
                                         ida::target_id(op.target), op.op_id,
                                         "summary states figures absent from the source: " +
                                             join(invented, ", "),
                                         Severity::kHigh));
    }
  }

  if (r.iar < t.iar && violated == 0) {
    size_t ok = 0;
    for (const auto& [id, v] : r.per_op) ok += v.kind == VerdictKind::kSatisfied ? 1 : 0;
    r.feedback.push_back(make_feedback(Category::kPartialAdherence, Agent::kIDA, "", std::nullopt,
                                       "only " + std::to_string(ok) + " of " +
                                           std::to_string(r.per_op.size()) +
                                           " operations could be confirmed",
                                       Severity::kMedium));
  }
  return r;
}

Json to_json(const FeedbackItem& item) {
  Json j = {{"category", std::string(to_string(item.category))},
            {"route_to", std::string(to_string(item.route_to))},
            {"message", item.message},
            {"severity", std::string(to_string(item.severity))}};
  if (!item.target_element.empty()) j["target_element"] = item.target_element;
  if (item.target_op) j["target_op"] = *item.target_op;
  return j;
}

FeedbackItem feedback_from_json(const Json& j) {
  try {
    const auto cat = category_from_string(j.at("category").get<std::string>());
    const auto agent = agent_from_string(j.at("route_to").get<std::string>());
    const auto sev = severity_from_string(j.value("severity", "medium"));
    if (!cat || !agent || !sev) throw ParseError("/", "unknown feedback category, route or severity");
    std::optional<int> op;
    if (j.contains("target_op")) op = j["target_op"].get<int>();
    return make_feedback(*cat, *agent, j.value("target_element", ""), op,
                         j.value("message", ""), *sev);
  } catch (const Json::exception& e) {
    throw ParseError("/", e.what());
  }
}

Json to_json(const VerificationReport& report) {
  Json per_op = Json::object();
  for (const auto& [id, v] : report.per_op) {
    Json entry = {{"verdict", std::string(to_string(v.kind))}};
    if (!v.reason.empty()) entry["reason"] = v.reason;
    if (v.category) entry["category"] = std::string(to_string(*v.category));
    per_op[std::to_string(id)] = entry;
  }
  Json feedback = Json::array();
  for (const auto& f : report.feedback) feedback.push_back(to_json(f));
  Json scs_elements = Json::object();
  for (const auto& [id, v] : report.scs_detail.per_element) scs_elements[id] = v;
  Json details = {{"scs_per_element", scs_elements}, {"lfi_geometric", report.lfi_detail.geometric}};
  if (report.lfi_detail.raster) details["lfi_raster"] = *report.lfi_detail.raster;
  return {{"scs", report.scs},
          {"lfi", report.lfi},
          {"iar", report.iar},
          {"per_op", per_op},
          {"feedback", feedback},
          {"details", details}};
}

GoldScores score_against_gold(const ir::DocumentIR& input, const ir::DocumentIR& output,
                              const ir::DocumentIR& gold, backend::Backend& embedder) {
  GoldScores s;

  std::vector<double> scs;
  std::vector<std::string> texts;
  for (const auto& g : gold.elements) {
    if (!ir::is_textual(g.kind) || g.text.empty()) continue;
    const ir::Element* o = output.find(g.id);
    if (o == nullptr) {
      scs.push_back(0.0);
    } else if (o->text == g.text) {
      scs.push_back(1.0);
    } else {
      scs.push_back(-1.0);  // Filled from embeddings below.
      texts.push_back(g.text);
      texts.push_back(o->text.empty() ? std::string(" ") : o->text);
    }
  }
  if (!texts.empty()) {
    const auto vecs = embedder.embed(texts);
    size_t k = 0;
    for (auto& v : scs) {
      if (v >= 0) continue;
      v = std::max(0.0, cosine(vecs[2 * k].values(), vecs[2 * k + 1].values()));
      ++k;
    }
  }
  if (!scs.empty()) {
    double sum = 0;
    for (double v : scs) sum += v;
    s.scs = sum / static_cast<double>(scs.size());
  }

  if (!gold.elements.empty()) {
    double sum = 0;
    for (const auto& g : gold.elements) {
      const ir::Element* o = output.find(g.id);
      sum += o == nullptr ? 0.0 : ir::iou(g.bbox, o->bbox);
    }
    s.lfi = sum / static_cast<double>(gold.elements.size());
  }

  const auto expected = ir::diff_ir(input, gold).all();
  if (!expected.empty()) {
    size_t met = 0;
    for (const auto& id : expected) {
      const ir::Element* g = gold.find(id);
      const ir::Element* o = output.find(id);
      if (g == nullptr ? o == nullptr : (o != nullptr && *o == *g)) ++met;
    }
    s.iar = static_cast<double>(met) / static_cast<double>(expected.size());
  }
  return s;
}

}  // namespace docrefine::fcv
