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

// Command-line front end: the pipeline configuration file and the
// subcommand dispatcher used by the finprep binary.

#ifndef FINPREP_CLI_H_
#define FINPREP_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "finprep/chunker.h"
#include "finprep/datasets.h"
#include "finprep/llm_client.h"
#include "finprep/mlm.h"
#include "finprep/qagen.h"

namespace finprep {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Everything a run may need. Loaded from a JSON file; command-line flags
// override individual fields. The thread count is deliberately excluded from
// the serialized form: it never influences outputs.
struct PipelineConfig {
  std::uint64_t seed = 0;
  unsigned threads = 0;

  std::string vocab;
  std::string abbreviations;  // extra list merged into the shipped one
  std::string blocklist;

  bool language_filter = true;
  std::string german_stopwords;   // empty: shipped list
  std::string english_stopwords;  // empty: shipped list
  double german_floor = 0.05;

  ChunkConfig chunker;
  std::uint64_t truncation_limit = 512;

  MaskingConfig masking;
  std::string recipe = "scratch";
  std::uint32_t seq_len = 512;

  SplitFractions split;
  std::uint32_t per_topic = 500;
  std::vector<std::string> topics;

  std::size_t k_max = 100;

  std::string llm_client = "replay";  // "replay" or "http"
  std::string replay;
  HttpChatConfig http;
  GenConfig qagen;
  std::size_t max_sentences = 15;

  // Copies the seed into the chunker and masking configs and validates.
  void finalize();
};

// Unknown keys are rejected so typos do not silently fall back to defaults.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);
// Canonical JSON; its SHA-256 is the config hash written to manifests.
std::string config_to_json(const PipelineConfig& config);

// Runs the CLI. argv[0] is the program name. Returns the exit code:
// 0 success, 1 usage or validation error, 2 runtime error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace finprep

#endif  // FINPREP_CLI_H_
