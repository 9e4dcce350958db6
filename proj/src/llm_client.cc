// Copyright 2026 The finprep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "finprep/llm_client.h"

#include <cstdlib>
#include <fstream>
#include <regex>

#include "finprep/hash.h"
#include "finprep/unicode.h"
#include "httplib.h"
#include "json.hpp"

namespace finprep {

ReplayClient ReplayClient::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> responses;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (unicode::trim(line).empty()) continue;
    try {
      auto obj = nlohmann::json::parse(line);
      auto key = obj.at("prompt_sha256").get<std::string>();
      auto response = obj.at("response").get<std::string>();
      auto [it, fresh] = responses.emplace(key, response);
      if (!fresh && it->second != response) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) +
                          ": conflicting responses for prompt " + key);
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ReplayClient(std::move(responses));
}

std::string ReplayClient::complete(const std::string& prompt) {
  const std::string key = sha256_hex(prompt);
  auto it = responses_.find(key);
  if (it == responses_.end()) throw TransportError("no replay entry for prompt " + key);
  return it->second;
}

std::string replay_entry_json(const std::string& prompt, const std::string& response) {
  nlohmann::ordered_json obj;
  obj["prompt_sha256"] = sha256_hex(prompt);
  obj["response"] = response;
  return obj.dump();
}

std::string http_post_json(const std::string& url, const std::string& body,
                           const std::string& bearer_token, int timeout_seconds) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw ValidationError("malformed endpoint URL: " + url);
  const std::string base = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";

  httplib::Client client(base);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw TransportError("request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("request to " + url + " returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

HttpChatClient::HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ValidationError("LLM endpoint is not configured");
  if (config_.model.empty()) throw ValidationError("LLM model is not configured");
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::string HttpChatClient::complete(const std::string& prompt) {
  nlohmann::json request;
  request["model"] = config_.model;
  request["temperature"] = config_.temperature;
  request["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
  const std::string body =
      http_post_json(config_.endpoint, request.dump(), api_key_, config_.timeout_seconds);
  try {
    auto reply = nlohmann::json::parse(body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected chat response: ") + e.what());
  }
}

}  // namespace finprep
