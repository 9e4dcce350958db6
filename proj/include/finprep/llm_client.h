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

// Chat-completion clients: an abstract interface, a replay binding for
// offline runs and an HTTP binding for OpenAI-compatible endpoints.

#ifndef FINPREP_LLM_CLIENT_H_
#define FINPREP_LLM_CLIENT_H_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "finprep/error.h"

namespace finprep {

// The request could not be completed; callers may retry.
class TransportError : public Error {
 public:
  using Error::Error;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Returns the model's reply to a single-turn prompt. Must be safe to call
  // from several threads at once.
  virtual std::string complete(const std::string& prompt) = 0;
};

// Answers from a fixture keyed by the SHA-256 of the prompt. An unknown
// prompt raises TransportError.
class ReplayClient : public LlmClient {
 public:
  explicit ReplayClient(std::map<std::string, std::string> responses)
      : responses_(std::move(responses)) {}

  // JSONL of {prompt_sha256, response}.
  static ReplayClient load(const std::filesystem::path& path);

  std::string complete(const std::string& prompt) override;
  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, std::string> responses_;
};

// One fixture line for `prompt`.
std::string replay_entry_json(const std::string& prompt, const std::string& response);

struct HttpChatConfig {
  std::string endpoint;  // e.g. https://host/v1/chat/completions
  std::string model;
  double temperature = 0.0;
  std::string api_key_env = "FINPREP_LLM_API_KEY";
  int timeout_seconds = 120;
};

class HttpChatClient : public LlmClient {
 public:
  explicit HttpChatClient(HttpChatConfig config);
  std::string complete(const std::string& prompt) override;

 private:
  HttpChatConfig config_;
  std::string api_key_;
};

// POSTs a JSON body and returns the response body. Connection failures and
// non-2xx statuses raise TransportError.
std::string http_post_json(const std::string& url, const std::string& body,
                           const std::string& bearer_token, int timeout_seconds);

}  // namespace finprep

#endif  // FINPREP_LLM_CLIENT_H_
