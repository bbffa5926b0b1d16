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

#include <atomic>
#include <cmath>
#include <thread>

#include "docrefine/backend.hpp"
#include "docrefine/error.hpp"
#include "gtest/gtest.h"
#include "httplib.h"
#include "support/fixtures.hpp"

namespace docrefine::backend {
namespace {

BackendRequest text_request(Stage stage, const std::string& text,
                            std::string_view schema = schemas::kText) {
  BackendRequest req;
  req.stage = stage;
  req.system_text = "system";
  req.user_parts.push_back(TextPart{text});
  req.schema_id = std::string(schema);
  return req;
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TEST(Digest, StableAndSensitive) {
  const auto a = text_request(Stage::kCRA, "hello");
  auto b = a;
  EXPECT_EQ(request_digest(a), request_digest(b));
  EXPECT_EQ(request_digest(a).size(), 64u);
  b.user_parts[0] = TextPart{"hello!"};
  EXPECT_NE(request_digest(a), request_digest(b));
  b = a;
  b.stage = Stage::kSGA;
  EXPECT_NE(request_digest(a), request_digest(b));
}

TEST(Mock, LookupPrefersDigestThenLongestNeedleThenDefault) {
  const auto req = text_request(Stage::kCRA, "rewrite the abstract please");
  Json script = {{"CRA",
                  {{"default", {{"text", "fallback"}}},
                   {"contains:abstract", {{"text", "short"}}},
                   {"contains:the abstract", {{"text", "long"}}}}}};
  auto mock = testing::make_mock(script);
  EXPECT_EQ(mock->complete(req).parsed["text"], "long");
  EXPECT_EQ(mock->complete(text_request(Stage::kCRA, "other")).parsed["text"], "fallback");

  script["CRA"][request_digest(req)] = {{"text", "exact"}};
  mock = testing::make_mock(script);
  EXPECT_EQ(mock->complete(req).parsed["text"], "exact");
}

TEST(Mock, MissRaisesMockMiss) {
  auto mock = testing::make_mock({{"CRA", {{"contains:zzz", "x"}}}});
  EXPECT_THROW(mock->complete(text_request(Stage::kCRA, "abc")), MockMiss);
  EXPECT_THROW(mock->complete(text_request(Stage::kSGA, "abc")), MockMiss);
}

TEST(Mock, RejectsMalformedScripts) {
  EXPECT_THROW(MockScript::from_json(Json::array()), ParseError);
  EXPECT_THROW(MockScript::from_json({{"XYZ", Json::object()}}), ParseError);
  EXPECT_THROW(MockScript::from_json({{"CRA", {{"contains:", "x"}}}}), ParseError);
  EXPECT_THROW(MockScript::from_json({{"embedding_dim", 0}}), ParseError);
}

TEST(Mock, EmbeddingsAreUnitNormAndDeterministic) {
  auto mock = testing::make_mock(Json::object());
  const auto a = mock->embed({"Layout fidelity", "", "日本語のテキスト"});
  ASSERT_EQ(a.size(), 3u);
  for (const auto& v : a) {
    EXPECT_EQ(v.dim(), static_cast<size_t>(kMockEmbeddingDim));
    EXPECT_NEAR(norm(v.values()), 1.0, 1e-12);
  }
  EXPECT_EQ(mock->embed({"Layout fidelity"})[0].values(), a[0].values());
}

TEST(Mock, EmbeddingIsCaseInsensitive) {
  auto mock = testing::make_mock(Json::object());
  const auto v = mock->embed({"ABC def", "abc DEF"});
  EXPECT_EQ(v[0].values(), v[1].values());
}

TEST(Embedding, ZeroVectorRejected) {
  EXPECT_THROW(EmbeddingVector::normalized({0.0, 0.0}), ZeroVector);
}

TEST(Complete, RejectsBadRequests) {
  auto mock = testing::make_mock({{"CRA", {{"default", "x"}}}});
  BackendRequest req = text_request(Stage::kCRA, "x");
  req.user_parts.clear();
  EXPECT_THROW(mock->complete(req), Error);
  req = text_request(Stage::kCRA, "x");
  req.temperature = 1.5;
  EXPECT_THROW(mock->complete(req), Error);
  req = text_request(Stage::kCRA, "x", "no.such.schema");
  EXPECT_THROW(mock->complete(req), Error);
}

TEST(ParseResponse, DirectRepairAndFallback) {
  const Schema* text = find_schema(schemas::kText);
  ASSERT_NE(text, nullptr);
  auto r = parse_response(R"({"text": "ok"})", *text);
  EXPECT_FALSE(r.repair_applied);
  EXPECT_EQ(r.parsed["text"], "ok");

  r = parse_response("Sure! Here it is: {\"text\": \"fixed\"} Hope this helps.", *text);
  EXPECT_TRUE(r.repair_applied);
  EXPECT_EQ(r.parsed["text"], "fixed");

  r = parse_response("just prose", *text);
  EXPECT_TRUE(r.repair_applied);
  EXPECT_EQ(r.parsed["text"], "just prose");
}

TEST(ParseResponse, SchemaErrorKeepsRawText) {
  const Schema* judge = find_schema(schemas::kJudge);
  ASSERT_NE(judge, nullptr);
  try {
    parse_response(R"({"verdict": "maybe"})", *judge);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.raw_text(), R"({"verdict": "maybe"})");
  }
}

TEST(ExtractJson, PicksLargestBalancedSpan) {
  EXPECT_EQ(extract_largest_json_span(R"(a {"x": 1} b {"y": [1, 2, {"z": 3}]} c)"),
            std::optional<std::string>(R"({"y": [1, 2, {"z": 3}]})"));
  EXPECT_EQ(extract_largest_json_span("no json"), std::nullopt);
}

TEST(Retry, DelaysDoubleAndCap) {
  RetryPolicy p;
  p.base_delay = std::chrono::milliseconds(100);
  p.max_delay = std::chrono::milliseconds(500);
  EXPECT_EQ(p.delay_for(1).count(), 100);
  EXPECT_EQ(p.delay_for(2).count(), 200);
  EXPECT_EQ(p.delay_for(3).count(), 400);
  EXPECT_EQ(p.delay_for(4).count(), 500);
  EXPECT_EQ(p.delay_for(60).count(), 500);
}

TEST(Config, Validation) {
  BackendConfig cfg;
  EXPECT_FALSE(validate_config(cfg).empty());  // Mock without a script.
  cfg.mock_script = "mock.json";
  EXPECT_TRUE(validate_config(cfg).empty());
  cfg.mode = Mode::kLive;
  EXPECT_FALSE(validate_config(cfg).empty());
  cfg.endpoint = "http://localhost/v1/chat/completions";
  cfg.concurrency_limit = 0;
  EXPECT_FALSE(validate_config(cfg).empty());
}

TEST(AdmissionGate, BoundsConcurrency) {
  AdmissionGate gate(2);
  std::atomic<int> inside{0}, peak{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      AdmissionGate::Ticket t(gate);
      const int now = ++inside;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --inside;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_GE(peak.load(), 1);
}

// Local chat-completion server that fails the first `failures` requests.
class FlakyServer {
 public:
  FlakyServer(int failures, int failure_status) : failures_(failures) {
    server_.Post("/v1/chat/completions", [this, failure_status](const httplib::Request& req,
                                                                 httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      if (calls_++ < failures_) {
        res.status = failure_status;
        return;
      }
      Json body = {{"choices", {{{"message", {{"content", R"({"text": "done"})"}}}}}}};
      res.set_content(body.dump(), "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      const Json in = Json::parse(req.body);
      Json data = Json::array();
      for (size_t i = in["input"].size(); i-- > 0;) {
        data.push_back({{"index", i}, {"embedding", {3.0, 4.0 * static_cast<double>(i)}}});
      }
      res.set_content(Json{{"data", data}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FlakyServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  int calls() const { return calls_; }
  const std::string& last_auth() const { return last_auth_; }
  const std::string& last_body() const { return last_body_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int failures_;
  std::atomic<int> calls_{0};
  std::string last_auth_;
  std::string last_body_;
};

BackendConfig live_config(const std::string& url) {
  BackendConfig cfg;
  cfg.mode = Mode::kLive;
  cfg.endpoint = url;
  cfg.max_retries = 3;
  cfg.retry_base_ms = 10;
  cfg.timeout_seconds = 5;
  cfg.api_key_env = "DOCREFINE_TEST_KEY";
  return cfg;
}

TEST(Http, RetriesTransientFailuresWithBackoff) {
  FlakyServer server(2, 503);
  std::vector<long long> delays;
  HttpBackend be(live_config(server.url()),
                 [&](std::chrono::milliseconds d) { delays.push_back(d.count()); });
  const auto resp = be.complete(text_request(Stage::kCRA, "x"));
  EXPECT_EQ(resp.parsed["text"], "done");
  EXPECT_EQ(server.calls(), 3);
  EXPECT_EQ(be.attempts(), 3);
  EXPECT_EQ(delays, (std::vector<long long>{10, 20}));
}

TEST(Http, RateLimitIsTransient) {
  FlakyServer server(1, 429);
  HttpBackend be(live_config(server.url()), [](auto) {});
  EXPECT_EQ(be.complete(text_request(Stage::kCRA, "x")).parsed["text"], "done");
  EXPECT_EQ(server.calls(), 2);
}

TEST(Http, GivesUpAfterMaxRetries) {
  FlakyServer server(100, 500);
  HttpBackend be(live_config(server.url()), [](auto) {});
  try {
    be.complete(text_request(Stage::kCRA, "x"));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("4 attempt(s)"), std::string::npos);
  }
  EXPECT_EQ(server.calls(), 4);
}

TEST(Http, ClientErrorsAreNotRetried) {
  FlakyServer server(100, 400);
  HttpBackend be(live_config(server.url()), [](auto) {});
  EXPECT_THROW(be.complete(text_request(Stage::kCRA, "x")), TransportError);
  EXPECT_EQ(server.calls(), 1);
}

TEST(Http, ConnectionFailureIsTransportError) {
  auto cfg = live_config("http://127.0.0.1:1/v1/chat/completions");
  cfg.max_retries = 1;
  HttpBackend be(cfg, [](auto) {});
  EXPECT_THROW(be.complete(text_request(Stage::kCRA, "x")), TransportError);
  EXPECT_EQ(be.attempts(), 2);
}

TEST(Http, SendsKeyModelAndMessages) {
  FlakyServer server(0, 500);
  ::setenv("DOCREFINE_TEST_KEY", "secret", 1);
  HttpBackend be(live_config(server.url()), [](auto) {});
  be.complete(text_request(Stage::kCRA, "payload text"));
  ::unsetenv("DOCREFINE_TEST_KEY");
  EXPECT_EQ(server.last_auth(), "Bearer secret");
  const Json body = Json::parse(server.last_body());
  EXPECT_EQ(body["model"], "gpt-4o");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"][0]["text"], "payload text");
}

TEST(Http, EmbeddingsFollowIndexAndAreNormalized) {
  FlakyServer server(0, 500);
  HttpBackend be(live_config(server.url()), [](auto) {});
  const auto v = be.embed({"a", "b"});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(v[0].values()[0], 1.0, 1e-12);  // (3, 0)
  EXPECT_NEAR(v[1].values()[0], 0.6, 1e-12);  // (3, 4)
  EXPECT_NEAR(v[1].values()[1], 0.8, 1e-12);
}

TEST(Http, ImagePartsBecomeDataUrls) {
  testing::TempDir dir;
  write_file(dir / "page.png", "PNGDATA");
  HttpBackend be(live_config("http://127.0.0.1:9/v1/chat/completions"), [](auto) {});
  BackendRequest req = text_request(Stage::kLSA, "x", schemas::kRegion);
  req.user_parts.push_back(ImagePart{(dir / "page.png").string()});
  const Json body = be.chat_body(req);
  EXPECT_EQ(body["messages"][1]["content"][1]["image_url"]["url"],
            "data:image/png;base64,UE5HREFUQQ==");
}

}  // namespace
}  // namespace docrefine::backend
