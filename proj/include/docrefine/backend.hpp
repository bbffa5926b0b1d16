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

// Model access for every pipeline stage. Two implementations share one
// request/response contract: HttpBackend talks to a chat-completion style
// endpoint, MockBackend replays a script file. Nothing outside this module
// opens network connections.

#ifndef DOCREFINE_BACKEND_HPP_
#define DOCREFINE_BACKEND_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "docrefine/canonical_json.hpp"

namespace docrefine::backend {

enum class Stage { kLSA, kMCU, kIDA, kCRA, kSGA, kFCV };

std::string_view to_string(Stage stage);
std::optional<Stage> stage_from_string(std::string_view name);

struct TextPart {
  std::string text;
};
struct ImagePart {
  std::string path;
};
using UserPart = std::variant<TextPart, ImagePart>;

struct BackendRequest {
  Stage stage = Stage::kLSA;
  std::string system_text;
  std::vector<UserPart> user_parts;
  std::string schema_id;
  double temperature = 0.0;

  // Concatenated text parts, separated by newlines.
  std::string user_text() const;
};

Json to_json(const BackendRequest& req);

// SHA-256 (hex) of the canonical JSON encoding of the request.
std::string request_digest(const BackendRequest& req);

struct BackendResponse {
  std::string raw_text;
  Json parsed;
  bool repair_applied = false;
};

// Unit-L2-norm vector. Construction normalizes; a zero input is rejected.
class EmbeddingVector {
 public:
  static EmbeddingVector normalized(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  size_t dim() const { return values_.size(); }

 private:
  explicit EmbeddingVector(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Structured-output schemas.

// Returns an error description, or nullopt when the value conforms.
using SchemaValidator = std::function<std::optional<std::string>(const Json&)>;

struct Schema {
  std::string id;
  SchemaValidator validate;
  // Free-text stages: output with no JSON in it is wrapped as {"text": raw}.
  bool plain_text_fallback = false;
};

namespace schemas {
inline constexpr std::string_view kRegion = "lsa.region.v1";
inline constexpr std::string_view kSection = "mcu.section.v1";
inline constexpr std::string_view kFigure = "mcu.figure.v1";
inline constexpr std::string_view kGrid = "mcu.grid.v1";
inline constexpr std::string_view kOps = "ida.ops.v1";
inline constexpr std::string_view kText = "text.v1";
inline constexpr std::string_view kJudge = "fcv.judge.v1";
}  // namespace schemas

const Schema* find_schema(std::string_view id);
void register_schema(Schema schema);

// Largest balanced {...} or [...] span of `text` that parses as JSON.
std::optional<std::string> extract_largest_json_span(std::string_view text);

// Parses model output against `schema`: direct parse first, then one repair
// pass (largest balanced JSON span), then the plain-text fallback when the
// schema allows it. Throws SchemaError carrying `raw` on failure.
BackendResponse parse_response(const std::string& raw, const Schema& schema);

// ---------------------------------------------------------------------------
// Configuration.

enum class Mode { kLive, kMock };

struct BackendConfig {
  Mode mode = Mode::kMock;
  std::string endpoint;            // Chat-completion URL (live mode).
  std::string embedding_endpoint;  // Defaults to <endpoint base>/embeddings.
  std::string model = "gpt-4o";
  std::string embedding_model = "text-embedding-3-small";
  std::string api_key_env = "DOCREFINE_API_KEY";
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int retry_base_ms = 500;
  int concurrency_limit = 4;
  std::string mock_script;  // Path to mock.json (mock mode).
};

std::vector<std::string> validate_config(const BackendConfig& cfg);

// Counting admission gate bounding the number of in-flight model calls.
class AdmissionGate {
 public:
  explicit AdmissionGate(int limit) : available_(limit > 0 ? limit : 1) {}

  class Ticket {
   public:
    explicit Ticket(AdmissionGate& gate) : gate_(&gate) { gate_->acquire(); }
    ~Ticket() { gate_->release(); }
    Ticket(const Ticket&) = delete;
    Ticket& operator=(const Ticket&) = delete;

   private:
    AdmissionGate* gate_;
  };

 private:
  void acquire();
  void release();

  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};

  // Delay before retry number `attempt` (1-based): base * 2^(attempt-1),
  // capped at max_delay.
  std::chrono::milliseconds delay_for(int attempt) const;
};

// ---------------------------------------------------------------------------
// Backends.

class Backend {
 public:
  explicit Backend(int concurrency_limit) : gate_(concurrency_limit) {}
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  // Thread-safe. Validates the request, obtains raw text from the model and
  // coerces it into the declared schema.
  BackendResponse complete(const BackendRequest& req);

  // One unit-norm vector per input text, order preserving.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

  virtual std::string name() const = 0;

 protected:
  virtual std::string complete_raw(const BackendRequest& req) = 0;
  virtual std::vector<std::vector<double>> embed_raw(
      const std::vector<std::string>& texts) = 0;

 private:
  AdmissionGate gate_;
};

// Deterministic bag of hashed character trigrams over the ASCII-lowercased,
// space-padded text; not normalized. Empty text maps to the first basis
// vector.
std::vector<double> hashed_ngram_embedding(std::string_view text, int dim);

inline constexpr int kMockEmbeddingDim = 256;

// Script entries for one stage. Lookup order: exact digest, then the
// longest matching "contains:" needle (ties by needle order), then default.
struct StageScript {
  std::map<std::string, std::string> by_digest;
  std::map<std::string, std::string> by_substring;
  std::optional<std::string> fallback;
};

struct MockScript {
  std::map<Stage, StageScript> stages;
  int embedding_dim = kMockEmbeddingDim;

  // Format: {"<STAGE>": {"<digest>" | "default" | "contains:<needle>":
  //          <response>}, "embedding_dim": n}. A response is either the raw
  // text or any JSON value, which is replayed as its compact dump.
  static MockScript from_json(const Json& j);
  static MockScript load(const std::filesystem::path& path);

  std::optional<std::string> lookup(const BackendRequest& req) const;
};

class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockScript script, int concurrency_limit = 8)
      : Backend(concurrency_limit), script_(std::move(script)) {}

  std::string name() const override { return "mock"; }
  const MockScript& script() const { return script_; }

 protected:
  std::string complete_raw(const BackendRequest& req) override;
  std::vector<std::vector<double>> embed_raw(
      const std::vector<std::string>& texts) override;

 private:
  MockScript script_;
};

class HttpBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(BackendConfig cfg, Sleeper sleeper = {});

  std::string name() const override { return "http"; }
  // Number of HTTP attempts made so far (for diagnostics and tests).
  int attempts() const { return attempts_.load(); }

  // Request body sent to the chat-completion endpoint.
  Json chat_body(const BackendRequest& req) const;

 protected:
  std::string complete_raw(const BackendRequest& req) override;
  std::vector<std::vector<double>> embed_raw(
      const std::vector<std::string>& texts) override;

 private:
  std::string post_with_retries(const std::string& url, const Json& body);

  BackendConfig cfg_;
  RetryPolicy retry_;
  Sleeper sleeper_;
  std::atomic<int> attempts_{0};
};

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg);

}  // namespace docrefine::backend

#endif  // DOCREFINE_BACKEND_HPP_
