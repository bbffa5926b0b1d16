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

// Run configuration file. One `key = value` pair per line; blank lines and
// lines starting with '#' are ignored. Keys:
//
//   mode                live | mock
//   endpoint            chat-completion URL
//   embedding_endpoint  embeddings URL
//   model, embedding_model
//   api_key_env         name of the variable holding the API key
//   timeout_seconds, max_retries, retry_base_ms, concurrency_limit
//   mock_script         path to mock.json, relative to the config file
//   max_iterations, tau_scs, tau_lfi, tau_iar
//   keep_best, judge, proxy_rasters, vision_pass   true | false
//   gap_threshold, caption_max_gap
//
// DOCREFINE_API_URL supplies the endpoint when the file leaves it unset.

#ifndef DOCREFINE_CONFIG_HPP_
#define DOCREFINE_CONFIG_HPP_

#include <filesystem>
#include <string_view>

#include "docrefine/backend.hpp"
#include "docrefine/orchestrator.hpp"

namespace docrefine::config {

struct Config {
  backend::BackendConfig backend;
  orchestrator::LoopConfig loop;
};

// Throws ParseError naming the line for unknown keys or malformed values.
Config parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

void apply_environment(Config& cfg);

}  // namespace docrefine::config

#endif  // DOCREFINE_CONFIG_HPP_
