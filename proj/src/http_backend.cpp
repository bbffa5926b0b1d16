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

#include <openssl/evp.h>

#include <cstdlib>
#include <thread>

#include "docrefine/backend.hpp"
#include "docrefine/error.hpp"
#include "httplib.h"

namespace docrefine::backend {
namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL lacks a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string base64(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

std::string mime_for(const std::string& path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".jpg") || ends_with(".jpeg")) return "image/jpeg";
  if (ends_with(".gif")) return "image/gif";
  if (ends_with(".webp")) return "image/webp";
  return "image/png";
}

std::string derive_embedding_url(const BackendConfig& cfg) {
  if (!cfg.embedding_endpoint.empty()) return cfg.embedding_endpoint;
  const std::string suffix = "/chat/completions";
  if (cfg.endpoint.size() > suffix.size() &&
      cfg.endpoint.compare(cfg.endpoint.size() - suffix.size(), suffix.size(),
                           suffix) == 0) {
    return cfg.endpoint.substr(0, cfg.endpoint.size() - suffix.size()) + "/embeddings";
  }
  throw TransportError("no embedding endpoint configured");
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig cfg, Sleeper sleeper)
    : Backend(cfg.concurrency_limit),
      cfg_(std::move(cfg)),
      sleeper_(std::move(sleeper)) {
  retry_.max_retries = cfg_.max_retries;
  retry_.base_delay = std::chrono::milliseconds(cfg_.retry_base_ms);
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

Json HttpBackend::chat_body(const BackendRequest& req) const {
  Json content = Json::array();
  for (const auto& part : req.user_parts) {
    if (const auto* t = std::get_if<TextPart>(&part)) {
      content.push_back(Json{{"type", "text"}, {"text", t->text}});
    } else {
      const std::string& path = std::get<ImagePart>(part).path;
      std::string bytes;
      try {
        bytes = read_file(path);
      } catch (const Error&) {
        throw IoError("cannot read image part " + path);
      }
      content.push_back(Json{
          {"type", "image_url"},
          {"image_url", {{"url", "data:" + mime_for(path) + ";base64," + base64(bytes)}}}});
    }
  }
  Json messages = Json::array();
  messages.push_back(Json{{"role", "system"}, {"content", req.system_text}});
  messages.push_back(Json{{"role", "user"}, {"content", content}});
  return Json{{"model", cfg_.model},
              {"temperature", req.temperature},
              {"messages", messages},
              {"response_format", {{"type", "json_object"}}}};
}

std::string HttpBackend::post_with_retries(const std::string& url, const Json& body) {
  const Url u = split_url(url);
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  std::string last_error;
  int made = 0;
  for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
    if (attempt > 0) sleeper_(retry_.delay_for(attempt));
    ++attempts_;
    ++made;
    httplib::Client client(u.origin);
    const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
    const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(u.path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = "HTTP " + std::to_string(res->status);
    const bool transient = res->status == 429 || res->status >= 500;
    if (!transient) break;
  }
  throw TransportError(url + ": " + last_error + " after " +
                       std::to_string(made) + " attempt(s)");
}

std::string HttpBackend::complete_raw(const BackendRequest& req) {
  const std::string body = post_with_retries(cfg_.endpoint, chat_body(req));
  Json j;
  try {
    j = Json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw TransportError(std::string("malformed chat-completion response: ") + e.what());
  }
}

std::vector<std::vector<double>> HttpBackend::embed_raw(
    const std::vector<std::string>& texts) {
  const std::string body = post_with_retries(
      derive_embedding_url(cfg_), Json{{"model", cfg_.embedding_model}, {"input", texts}});
  try {
    Json j = Json::parse(body);
    std::vector<std::vector<double>> out(texts.size());
    const Json& data = j.at("data");
    for (size_t i = 0; i < data.size(); ++i) {
      const size_t index = data[i].value("index", i);
      if (index >= out.size()) throw TransportError("embedding index out of range");
      out[index] = data[i].at("embedding").get<std::vector<double>>();
    }
    return out;
  } catch (const Json::exception& e) {
    throw TransportError(std::string("malformed embedding response: ") + e.what());
  }
}

}  // namespace docrefine::backend
