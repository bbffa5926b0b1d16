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

#include "docrefine/canonical_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "docrefine/error.hpp"

namespace docrefine {
namespace {

void write_number(std::string& out, double v, int decimals) {
  if (!std::isfinite(v)) {
    throw InternalError("canonical JSON cannot encode a non-finite number");
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s = buf;
  // "-0.000" and "0.000" must not differ.
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  out += s;
}

void write_value(std::string& out, const Json& v, int decimals, int depth) {
  const std::string indent(static_cast<size_t>(depth + 1) * 2, ' ');
  const std::string closing(static_cast<size_t>(depth) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann's default object type is an ordered std::map.
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += indent;
        out += Json(it.key()).dump(-1, ' ', false,
                                   Json::error_handler_t::replace);
        out += ": ";
        write_value(out, it.value(), decimals, depth + 1);
      }
      out += "\n" + closing + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ",\n";
        first = false;
        out += indent;
        write_value(out, item, decimals, depth + 1);
      }
      out += "\n" + closing + "]";
      return;
    }
    case Json::value_t::number_float:
      write_number(out, v.get<double>(), decimals);
      return;
    case Json::value_t::string:
      out += v.dump(-1, ' ', false, Json::error_handler_t::replace);
      return;
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string to_canonical_json(const Json& value, int float_decimals) {
  std::string out;
  write_value(out, value, float_decimals, 0);
  out += "\n";
  return out;
}

double quantize(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  double q = std::round(value * scale) / scale;
  return q == 0.0 ? 0.0 : q;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << bytes;
  if (!out) throw IoError("short write to " + path.string());
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("/", what + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace docrefine
