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

#include "docrefine/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include "docrefine/canonical_json.hpp"
#include "docrefine/error.hpp"

namespace docrefine::config {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument(v);
  return d;
}

int to_int(const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument(v);
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw std::invalid_argument(v);
}

using Setter = std::function<void(Config&, const std::string&, const std::filesystem::path&)>;

const std::map<std::string, Setter>& setters() {
  using backend::Mode;
  static const std::map<std::string, Setter> kSetters = {
      {"mode",
       [](Config& c, const std::string& v, const auto&) {
         if (v == "live") {
           c.backend.mode = Mode::kLive;
         } else if (v == "mock") {
           c.backend.mode = Mode::kMock;
         } else {
           throw std::invalid_argument(v);
         }
       }},
      {"endpoint", [](Config& c, const std::string& v, const auto&) { c.backend.endpoint = v; }},
      {"embedding_endpoint",
       [](Config& c, const std::string& v, const auto&) { c.backend.embedding_endpoint = v; }},
      {"model", [](Config& c, const std::string& v, const auto&) { c.backend.model = v; }},
      {"embedding_model",
       [](Config& c, const std::string& v, const auto&) { c.backend.embedding_model = v; }},
      {"api_key_env", [](Config& c, const std::string& v, const auto&) { c.backend.api_key_env = v; }},
      {"timeout_seconds",
       [](Config& c, const std::string& v, const auto&) { c.backend.timeout_seconds = to_double(v); }},
      {"max_retries",
       [](Config& c, const std::string& v, const auto&) { c.backend.max_retries = to_int(v); }},
      {"retry_base_ms",
       [](Config& c, const std::string& v, const auto&) { c.backend.retry_base_ms = to_int(v); }},
      {"concurrency_limit",
       [](Config& c, const std::string& v, const auto&) { c.backend.concurrency_limit = to_int(v); }},
      {"mock_script",
       [](Config& c, const std::string& v, const std::filesystem::path& base) {
         const std::filesystem::path p(v);
         c.backend.mock_script = (p.is_relative() && !base.empty() ? base / p : p).string();
       }},
      {"max_iterations",
       [](Config& c, const std::string& v, const auto&) { c.loop.max_iterations = to_int(v); }},
      {"tau_scs",
       [](Config& c, const std::string& v, const auto&) { c.loop.thresholds.scs = to_double(v); }},
      {"tau_lfi",
       [](Config& c, const std::string& v, const auto&) { c.loop.thresholds.lfi = to_double(v); }},
      {"tau_iar",
       [](Config& c, const std::string& v, const auto&) { c.loop.thresholds.iar = to_double(v); }},
      {"keep_best", [](Config& c, const std::string& v, const auto&) { c.loop.keep_best = to_bool(v); }},
      {"judge", [](Config& c, const std::string& v, const auto&) { c.loop.judge = to_bool(v); }},
      {"proxy_rasters",
       [](Config& c, const std::string& v, const auto&) { c.loop.proxy_rasters = to_bool(v); }},
      {"vision_pass",
       [](Config& c, const std::string& v, const auto&) { c.loop.analyze.vision_pass = to_bool(v); }},
      {"gap_threshold",
       [](Config& c, const std::string& v, const auto&) {
         c.loop.analyze.gap_threshold = to_double(v);
       }},
      {"caption_max_gap",
       [](Config& c, const std::string& v, const auto&) {
         c.loop.analyze.caption_max_gap = to_double(v);
       }},
  };
  return kSetters;
}

}  // namespace

Config parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = "line " + std::to_string(number);
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(where, "expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(where, "unknown key '" + key + "'");
    try {
      it->second(cfg, value, base_dir);
    } catch (const std::exception&) {
      throw ParseError(where, "invalid value '" + value + "' for " + key);
    }
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

void apply_environment(Config& cfg) {
  if (cfg.backend.endpoint.empty()) {
    if (const char* url = std::getenv("DOCREFINE_API_URL"); url != nullptr && *url != '\0') {
      cfg.backend.endpoint = url;
    }
  }
}

}  // namespace docrefine::config
