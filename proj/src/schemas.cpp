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

// Built-in structured-output schemas, one per stage prompt.

#include <map>
#include <mutex>

#include "docrefine/backend.hpp"

namespace docrefine::backend {
namespace {

using Check = std::optional<std::string>;

Check need_object(const Json& j, const std::string& where) {
  if (!j.is_object()) return where + " must be an object";
  return std::nullopt;
}

Check need_string(const Json& j, const char* key, const std::string& where,
                  bool optional = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (optional) return std::nullopt;
    return where + "." + key + " is required";
  }
  if (!it->is_string()) return where + "." + key + " must be a string";
  return std::nullopt;
}

Check need_string_array(const Json& j, const char* key, const std::string& where,
                        bool optional) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (optional) return std::nullopt;
    return where + "." + key + " is required";
  }
  if (!it->is_array()) return where + "." + key + " must be an array";
  for (const auto& v : *it) {
    if (!v.is_string()) return where + "." + key + " must contain strings";
  }
  return std::nullopt;
}

Check validate_region(const Json& j) {
  if (auto e = need_object(j, "region")) return e;
  if (auto e = need_string(j, "kind", "region")) return e;
  return need_string(j, "text", "region", /*optional=*/true);
}

Check validate_section(const Json& j) {
  if (auto e = need_object(j, "section")) return e;
  for (const char* key : {"facts", "entities"}) {
    auto it = j.find(key);
    if (it == j.end()) continue;
    if (!it->is_array()) return std::string("section.") + key + " must be an array";
  }
  if (j.contains("facts")) {
    for (const auto& f : j["facts"]) {
      if (auto e = need_object(f, "fact")) return e;
      for (const char* k : {"subject", "predicate", "object"}) {
        if (auto e = need_string(f, k, "fact")) return e;
      }
      if (auto e = need_string(f, "source", "fact", true)) return e;
    }
  }
  if (j.contains("entities")) {
    for (const auto& en : j["entities"]) {
      if (auto e = need_object(en, "entity")) return e;
      if (auto e = need_string(en, "surface", "entity")) return e;
      if (auto e = need_string(en, "category", "entity")) return e;
      if (auto e = need_string(en, "source", "entity", true)) return e;
    }
  }
  return need_string(j, "digest", "section", /*optional=*/true);
}

Check validate_figure(const Json& j) {
  if (auto e = need_object(j, "figure")) return e;
  if (auto e = need_string(j, "description", "figure")) return e;
  if (j["description"].get<std::string>().empty()) {
    return "figure.description must be non-empty";
  }
  if (auto e = need_string_array(j, "axis_labels", "figure", true)) return e;
  return need_string_array(j, "legend_entries", "figure", true);
}

Check validate_grid(const Json& j) {
  if (auto e = need_object(j, "grid")) return e;
  for (const char* k : {"n_rows", "n_cols"}) {
    if (!j.contains(k) || !j[k].is_number_integer() || j[k].get<long long>() < 1) {
      return std::string("grid.") + k + " must be a positive integer";
    }
  }
  if (auto e = need_string_array(j, "cells", "grid", false)) return e;
  const long long expected = j["n_rows"].get<long long>() * j["n_cols"].get<long long>();
  if (static_cast<long long>(j["cells"].size()) != expected) {
    return "grid.cells length does not equal n_rows*n_cols";
  }
  if (j.contains("header_rows")) {
    const Json& h = j["header_rows"];
    if (!h.is_number_integer() || h.get<long long>() < 0 ||
        h.get<long long>() > j["n_rows"].get<long long>()) {
      return "grid.header_rows must be in [0, n_rows]";
    }
  }
  return std::nullopt;
}

Check validate_op_entry(const Json& op, const std::string& where) {
  if (auto e = need_object(op, where)) return e;
  if (op.contains("alternatives")) {
    const Json& alts = op["alternatives"];
    if (!alts.is_array() || alts.empty()) {
      return where + ".alternatives must be a non-empty array";
    }
    for (size_t i = 0; i < alts.size(); ++i) {
      const std::string w = where + ".alternatives[" + std::to_string(i) + "]";
      if (alts[i].contains("alternatives")) return w + " cannot nest alternatives";
      if (auto e = validate_op_entry(alts[i], w)) return e;
    }
    return std::nullopt;
  }
  if (auto e = need_string(op, "kind", where)) return e;
  if (!op.contains("target") || !op["target"].is_object()) {
    return where + ".target must be an object";
  }
  if (op.contains("payload") && !op["payload"].is_object()) {
    return where + ".payload must be an object";
  }
  return need_string(op, "rationale", where, /*optional=*/true);
}

Check validate_ops(const Json& j) {
  if (auto e = need_object(j, "ops document")) return e;
  if (!j.contains("ops") || !j["ops"].is_array()) return "ops must be an array";
  for (size_t i = 0; i < j["ops"].size(); ++i) {
    if (auto e = validate_op_entry(j["ops"][i], "ops[" + std::to_string(i) + "]")) {
      return e;
    }
  }
  if (j.contains("ambiguities")) {
    if (!j["ambiguities"].is_array()) return "ambiguities must be an array";
    for (const auto& a : j["ambiguities"]) {
      if (auto e = need_object(a, "ambiguity")) return e;
      if (auto e = need_string_array(a, "candidates", "ambiguity", false)) return e;
    }
  }
  return std::nullopt;
}

Check validate_text(const Json& j) {
  if (auto e = need_object(j, "text output")) return e;
  return need_string(j, "text", "output");
}

Check validate_judge(const Json& j) {
  if (auto e = need_object(j, "judgment")) return e;
  if (auto e = need_string(j, "verdict", "judgment")) return e;
  const std::string v = j["verdict"].get<std::string>();
  if (v != "yes" && v != "no") return "judgment.verdict must be \"yes\" or \"no\"";
  if (auto e = need_string(j, "reason", "judgment", true)) return e;
  return need_string(j, "category", "judgment", true);
}

struct Registry {
  std::mutex mu;
  std::map<std::string, Schema, std::less<>> schemas;

  Registry() {
    add({std::string(schemas::kRegion), validate_region, false});
    add({std::string(schemas::kSection), validate_section, false});
    add({std::string(schemas::kFigure), validate_figure, false});
    add({std::string(schemas::kGrid), validate_grid, false});
    add({std::string(schemas::kOps), validate_ops, false});
    add({std::string(schemas::kText), validate_text, true});
    add({std::string(schemas::kJudge), validate_judge, false});
  }
  void add(Schema s) { schemas[s.id] = std::move(s); }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

const Schema* find_schema(std::string_view id) {
  Registry& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.schemas.find(id);
  return it == r.schemas.end() ? nullptr : &it->second;
}

void register_schema(Schema schema) {
  Registry& r = registry();
  std::lock_guard lock(r.mu);
  r.add(std::move(schema));
}

}  // namespace docrefine::backend
