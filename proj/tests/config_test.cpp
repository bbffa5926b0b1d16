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

#include <cstdlib>

#include "docrefine/config.hpp"
#include "docrefine/error.hpp"
#include "gtest/gtest.h"
#include "support/fixtures.hpp"

namespace docrefine::config {
namespace {

TEST(Config, DefaultsFromEmptyText) {
  const Config c = parse_config("");
  EXPECT_EQ(c.backend.mode, backend::Mode::kMock);
  EXPECT_EQ(c.loop.max_iterations, 3);
  EXPECT_DOUBLE_EQ(c.loop.thresholds.scs, 0.85);
  EXPECT_DOUBLE_EQ(c.loop.thresholds.lfi, 0.90);
  EXPECT_DOUBLE_EQ(c.loop.thresholds.iar, 0.85);
  EXPECT_TRUE(c.loop.keep_best);
}

TEST(Config, ParsesEveryKey) {
  const Config c = parse_config(R"(# live run
mode = live
endpoint = https://api.example.com/v1/chat/completions
embedding_endpoint = https://api.example.com/v1/embeddings
model = gpt-4o
embedding_model = text-embedding-3-large
api_key_env = MY_KEY
timeout_seconds = 12.5
max_retries = 5
retry_base_ms = 250
concurrency_limit = 2

max_iterations = 4
tau_scs = 0.8
tau_lfi = 0.95
tau_iar = 1
keep_best = false
judge = false
proxy_rasters = true
vision_pass = true
gap_threshold = 6
caption_max_gap = 30
)");
  EXPECT_EQ(c.backend.mode, backend::Mode::kLive);
  EXPECT_EQ(c.backend.endpoint, "https://api.example.com/v1/chat/completions");
  EXPECT_EQ(c.backend.embedding_model, "text-embedding-3-large");
  EXPECT_EQ(c.backend.api_key_env, "MY_KEY");
  EXPECT_DOUBLE_EQ(c.backend.timeout_seconds, 12.5);
  EXPECT_EQ(c.backend.max_retries, 5);
  EXPECT_EQ(c.backend.retry_base_ms, 250);
  EXPECT_EQ(c.backend.concurrency_limit, 2);
  EXPECT_EQ(c.loop.max_iterations, 4);
  EXPECT_DOUBLE_EQ(c.loop.thresholds.scs, 0.8);
  EXPECT_DOUBLE_EQ(c.loop.thresholds.iar, 1.0);
  EXPECT_FALSE(c.loop.keep_best);
  EXPECT_FALSE(c.loop.judge);
  EXPECT_TRUE(c.loop.proxy_rasters);
  EXPECT_TRUE(c.loop.analyze.vision_pass);
  EXPECT_DOUBLE_EQ(c.loop.analyze.gap_threshold, 6.0);
  EXPECT_DOUBLE_EQ(c.loop.analyze.caption_max_gap, 30.0);
}

TEST(Config, MockScriptIsRelativeToConfig) {
  const Config c = parse_config("mock_script = mock.json\n", "/data/case");
  EXPECT_EQ(std::filesystem::path(c.backend.mock_script), std::filesystem::path("/data/case/mock.json"));
  const Config abs = parse_config("mock_script = /abs/mock.json\n", "/data/case");
  EXPECT_EQ(abs.backend.mock_script, "/abs/mock.json");
}

TEST(Config, ErrorsNameTheLine) {
  for (const char* bad : {"nonsense = 1\n", "max_iterations = many\n", "keep_best = maybe\n",
                          "mode = remote\n", "no equals sign\n", "tau_scs = 0.5x\n"}) {
    try {
      parse_config(std::string("# header\n") + bad);
      FAIL() << bad;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST(Config, LoadFromFile) {
  testing::TempDir dir;
  write_file(dir / "run.conf", "mock_script = m.json\nmax_iterations = 2\n");
  const Config c = load_config(dir / "run.conf");
  EXPECT_EQ(std::filesystem::path(c.backend.mock_script), dir / "m.json");
  EXPECT_EQ(c.loop.max_iterations, 2);
  EXPECT_THROW(load_config(dir / "missing.conf"), IoError);
}

TEST(Config, EnvironmentFillsMissingEndpointOnly) {
  ::setenv("DOCREFINE_API_URL", "http://env/v1/chat/completions", 1);
  Config c = parse_config("mode = live\n");
  apply_environment(c);
  EXPECT_EQ(c.backend.endpoint, "http://env/v1/chat/completions");
  Config d = parse_config("mode = live\nendpoint = http://file/x\n");
  apply_environment(d);
  EXPECT_EQ(d.backend.endpoint, "http://file/x");
  ::unsetenv("DOCREFINE_API_URL");
}

}  // namespace
}  // namespace docrefine::config
