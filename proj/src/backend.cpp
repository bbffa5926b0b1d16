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

#include "docrefine/backend.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>

#include "docrefine/error.hpp"

namespace docrefine::backend {
namespace {

constexpr std::array<std::pair<Stage, std::string_view>, 6> kStageNames{{
    {Stage::kLSA, "LSA"},
    {Stage::kMCU, "MCU"},
    {Stage::kIDA, "IDA"},
    {Stage::kCRA, "CRA"},
    {Stage::kSGA, "SGA"},
    {Stage::kFCV, "FCV"},
}};

constexpr std::string_view kContainsPrefix = "contains:";

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// End offset (exclusive) of the balanced span opening at text[start], or 0.
size_t match_span(std::string_view text, size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '{':
        stack.push_back('}');
        break;
      case '[':
        stack.push_back(']');
        break;
      case '}':
      case ']':
        if (stack.empty() || stack.back() != c) return 0;
        stack.pop_back();
        if (stack.empty()) return i + 1;
        break;
      default:
        break;
    }
  }
  return 0;
}

std::string response_text(const Json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::string_view to_string(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "?";
}

std::optional<Stage> stage_from_string(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  return std::nullopt;
}

std::string BackendRequest::user_text() const {
  std::string out;
  for (const auto& part : user_parts) {
    if (const auto* t = std::get_if<TextPart>(&part)) {
      if (!out.empty()) out += "\n";
      out += t->text;
    }
  }
  return out;
}

Json to_json(const BackendRequest& req) {
  Json parts = Json::array();
  for (const auto& part : req.user_parts) {
    if (const auto* t = std::get_if<TextPart>(&part)) {
      parts.push_back(Json{{"type", "text"}, {"text", t->text}});
    } else {
      parts.push_back(
          Json{{"type", "image"}, {"path", std::get<ImagePart>(part).path}});
    }
  }
  return Json{{"stage", std::string(to_string(req.stage))},
              {"system", req.system_text},
              {"parts", parts},
              {"schema", req.schema_id},
              {"temperature", static_cast<double>(req.temperature)}};
}

std::string request_digest(const BackendRequest& req) {
  const std::string canon = to_canonical_json(to_json(req), 3);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(canon.data(), canon.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw InternalError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xF];
  }
  return hex;
}

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
  double norm2 = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("non-finite embedding component");
    norm2 += v * v;
  }
  if (values.empty() || norm2 <= 0.0) throw ZeroVector();
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : values) v *= inv;
  return EmbeddingVector(std::move(values));
}

std::optional<std::string> extract_largest_json_span(std::string_view text) {
  std::vector<std::pair<size_t, size_t>> spans;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    if (size_t end = match_span(text, i)) spans.emplace_back(i, end);
  }
  std::stable_sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
    return (a.second - a.first) > (b.second - b.first);
  });
  for (const auto& [begin, end] : spans) {
    std::string candidate(text.substr(begin, end - begin));
    if (Json::accept(candidate)) return candidate;
  }
  return std::nullopt;
}

BackendResponse parse_response(const std::string& raw, const Schema& schema) {
  BackendResponse resp;
  resp.raw_text = raw;
  std::string last_error = "no JSON value found";
  if (Json::accept(raw)) {
    Json parsed = Json::parse(raw);
    auto err = schema.validate(parsed);
    if (!err) {
      resp.parsed = std::move(parsed);
      return resp;
    }
    last_error = *err;
  }
  if (auto span = extract_largest_json_span(raw)) {
    Json parsed = Json::parse(*span);
    auto err = schema.validate(parsed);
    if (!err) {
      resp.parsed = std::move(parsed);
      resp.repair_applied = true;
      return resp;
    }
    last_error = *err;
  }
  // Prose such as "see [1]" contains JSON-looking spans; free-text stages
  // keep the whole output instead.
  if (schema.plain_text_fallback) {
    resp.parsed = Json{{"text", raw}};
    resp.repair_applied = true;
    return resp;
  }
  throw SchemaError("output does not match schema " + schema.id + ": " + last_error,
                    raw);
}

std::vector<std::string> validate_config(const BackendConfig& cfg) {
  std::vector<std::string> problems;
  if (!(cfg.timeout_seconds > 0)) problems.push_back("timeout must be > 0");
  if (cfg.max_retries < 0) problems.push_back("max_retries must be >= 0");
  if (cfg.concurrency_limit < 1) problems.push_back("concurrency_limit must be >= 1");
  if (cfg.retry_base_ms < 0) problems.push_back("retry_base_ms must be >= 0");
  if (cfg.mode == Mode::kLive && cfg.endpoint.empty()) {
    problems.push_back("live mode requires an endpoint URL");
  }
  if (cfg.mode == Mode::kMock && cfg.mock_script.empty()) {
    problems.push_back("mock mode requires a mock script path");
  }
  return problems;
}

void AdmissionGate::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return available_ > 0; });
  --available_;
}

void AdmissionGate::release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

std::chrono::milliseconds RetryPolicy::delay_for(int attempt) const {
  if (attempt < 1) return std::chrono::milliseconds(0);
  const int shift = std::min(attempt - 1, 30);
  const long long ms = base_delay.count() * (1LL << shift);
  return std::chrono::milliseconds(std::min<long long>(ms, max_delay.count()));
}

BackendResponse Backend::complete(const BackendRequest& req) {
  if (req.user_parts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "request has no user parts");
  }
  if (req.temperature < 0.0 || req.temperature > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "temperature outside [0,1]");
  }
  const Schema* schema = find_schema(req.schema_id);
  if (schema == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "schema '" + req.schema_id + "' is not registered");
  }
  std::string raw;
  {
    AdmissionGate::Ticket ticket(gate_);
    raw = complete_raw(req);
  }
  try {
    return parse_response(raw, *schema);
  } catch (Error& e) {
    e.add_context(std::string(to_string(req.stage)));
    throw;
  }
}

std::vector<EmbeddingVector> Backend::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "embed() needs at least one text");
  }
  std::vector<std::vector<double>> raw;
  {
    AdmissionGate::Ticket ticket(gate_);
    raw = embed_raw(texts);
  }
  if (raw.size() != texts.size()) {
    throw TransportError("embedding count mismatch: sent " +
                         std::to_string(texts.size()) + ", received " +
                         std::to_string(raw.size()));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (auto& v : raw) out.push_back(EmbeddingVector::normalized(std::move(v)));
  return out;
}

std::vector<double> hashed_ngram_embedding(std::string_view text, int dim) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be >= 1");
  std::vector<double> bag(static_cast<size_t>(dim), 0.0);
  std::string padded = " ";
  for (unsigned char c : text) padded += static_cast<char>(std::tolower(c));
  padded += " ";
  if (text.empty()) {
    bag[0] = 1.0;
    return bag;
  }
  for (size_t i = 0; i + 3 <= padded.size(); ++i) {
    bag[fnv1a(std::string_view(padded).substr(i, 3)) % static_cast<uint64_t>(dim)] += 1.0;
  }
  return bag;
}

MockScript MockScript::from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("", "mock script must be a JSON object");
  MockScript script;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "embedding_dim") {
      if (!it->is_number_integer() || it->get<int>() < 1) {
        throw ParseError("/embedding_dim", "expected a positive integer");
      }
      script.embedding_dim = it->get<int>();
      continue;
    }
    auto stage = stage_from_string(key);
    if (!stage) throw ParseError("/" + key, "unknown stage tag");
    if (!it->is_object()) throw ParseError("/" + key, "expected an object");
    StageScript& ss = script.stages[*stage];
    for (auto e = it->begin(); e != it->end(); ++e) {
      const std::string& k = e.key();
      std::string text = response_text(e.value());
      if (k == "default") {
        ss.fallback = std::move(text);
      } else if (k.rfind(kContainsPrefix, 0) == 0) {
        std::string needle = k.substr(kContainsPrefix.size());
        if (needle.empty()) throw ParseError("/" + key + "/" + k, "empty needle");
        ss.by_substring[needle] = std::move(text);
      } else {
        ss.by_digest[k] = std::move(text);
      }
    }
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  try {
    return from_json(parse_json(read_file(path), path.string()));
  } catch (Error& e) {
    e.add_context(path.string());
    throw;
  }
}

std::optional<std::string> MockScript::lookup(const BackendRequest& req) const {
  auto it = stages.find(req.stage);
  if (it == stages.end()) return std::nullopt;
  const StageScript& ss = it->second;
  if (!ss.by_digest.empty()) {
    auto d = ss.by_digest.find(request_digest(req));
    if (d != ss.by_digest.end()) return d->second;
  }
  if (!ss.by_substring.empty()) {
    const std::string haystack = req.user_text();
    const std::string* best = nullptr;
    size_t best_len = 0;
    for (const auto& [needle, text] : ss.by_substring) {
      if (needle.size() > best_len && haystack.find(needle) != std::string::npos) {
        best = &text;
        best_len = needle.size();
      }
    }
    if (best) return *best;
  }
  return ss.fallback;
}

std::string MockBackend::complete_raw(const BackendRequest& req) {
  auto hit = script_.lookup(req);
  if (!hit) throw MockMiss(std::string(to_string(req.stage)));
  return *hit;
}

std::vector<std::vector<double>> MockBackend::embed_raw(
    const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    out.push_back(hashed_ngram_embedding(t, script_.embedding_dim));
  }
  return out;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg) {
  auto problems = validate_config(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid backend config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw Error(ErrorCode::kInvalidArgument, msg);
  }
  if (cfg.mode == Mode::kMock) {
    return std::make_unique<MockBackend>(MockScript::load(cfg.mock_script),
                                         cfg.concurrency_limit);
  }
  return std::make_unique<HttpBackend>(cfg);
}

}  // namespace docrefine::backend
