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

#ifndef DOCREFINE_CANONICAL_JSON_HPP_
#define DOCREFINE_CANONICAL_JSON_HPP_

#include <filesystem>
#include <string>

#include "json.hpp"

namespace docrefine {

using Json = nlohmann::json;

// Writes `value` with sorted object keys, two-space indentation, a trailing
// newline and every floating-point number rendered with exactly
// `float_decimals` fractional digits. Integers are written as integers.
// Equal values always produce identical bytes.
std::string to_canonical_json(const Json& value, int float_decimals = 3);

// Rounds to the fixed decimal grid used by the canonical writer.
double quantize(double value, int decimals = 3);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

// Parses JSON text; failures become ParseError with path "/" and `what`
// naming the source.
Json parse_json(const std::string& text, const std::string& what);

}  // namespace docrefine

#endif  // DOCREFINE_CANONICAL_JSON_HPP_
