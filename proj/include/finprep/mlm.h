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

// Masked-language-model example construction and the pre-training recipe
// handed to an external trainer.

#ifndef FINPREP_MLM_H_
#define FINPREP_MLM_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "finprep/chunker.h"
#include "finprep/wordpiece.h"

namespace finprep {

inline constexpr std::int32_t kIgnoreLabel = -100;

struct MaskingConfig {
  double mask_prob = 0.15;
  // How a selected token is corrupted; the three shares sum to 1.
  double mask_share = 0.8;
  double random_share = 0.1;
  double keep_share = 0.1;
  bool whole_word = false;
  std::uint64_t seed = 0;
  std::uint32_t epoch = 0;

  void validate() const;
};

// Identifies the sequence being masked. Together with seed and epoch it
// fully determines every masking decision.
struct MaskingKey {
  std::string doc_id;
  std::uint32_t chunk_index = 0;
};

struct MlmExample {
  std::vector<TokenId> input_ids;
  std::vector<std::int32_t> labels;  // original id at selected positions, else kIgnoreLabel
  std::vector<std::uint8_t> attention;

  friend bool operator==(const MlmExample&, const MlmExample&) = default;
};

struct MaskingStats {
  std::uint64_t examples = 0;
  std::uint64_t maskable_tokens = 0;
  std::uint64_t selected = 0;
  std::uint64_t replaced_with_mask = 0;
  std::uint64_t replaced_with_random = 0;
  std::uint64_t kept = 0;
  std::uint64_t examples_without_maskable = 0;

  MaskingStats& combine(const MaskingStats& o);
};

// Selects each maskable position (or each whole word) independently with
// probability mask_prob and corrupts the selected pieces. [CLS], [SEP] and
// padding are never selected.
MlmExample mask_tokens(const TokenSequence& seq, const Vocab& vocab,
                       const MaskingConfig& config, const MaskingKey& key,
                       MaskingStats* stats = nullptr);

enum class RecipeVariant { kScratch, kFurther };

RecipeVariant parse_recipe_variant(std::string_view name);

// Architecture and optimizer settings of the reference pre-training runs.
struct TrainingRecipe {
  std::string variant;
  std::string initialization;
  std::string tokenizer = "bert-base-german-cased";
  std::string objective = "MLM";
  bool next_sentence_prediction = false;
  int hidden_size = 768;
  int intermediate_size = 3072;
  int attention_heads = 12;
  int hidden_layers = 12;
  std::string activation = "GeLU";
  std::string position_embeddings = "learned";
  double dropout = 0.10;
  std::string optimizer = "AdamW";
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_epsilon = 1e-6;
  double weight_decay = 1e-5;
  double peak_learning_rate = 0.0;
  std::string lr_schedule = "linear-warmup-linear-decay";
  double warmup_fraction = 0.06;
  int batch_size = 4096;
  int steps = 0;
  int sequence_length = 512;
};

TrainingRecipe training_recipe(RecipeVariant variant);
std::string recipe_to_json(const TrainingRecipe& recipe);

// Binary record file (all integers little-endian):
//
//   header:  "FPMLM\0\0\0" (8 bytes), u32 version = 1, u32 seq_len
//   record:  u32 length L, then L x u32 input_ids, L x i32 labels,
//            L x u32 attention (0 or 1)
//
// Labels use -100 for positions without a prediction target.
class MlmRecordWriter {
 public:
  MlmRecordWriter(const std::filesystem::path& path, std::uint32_t seq_len);
  void write(const MlmExample& example);
  void close();
  std::uint64_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint32_t seq_len_;
  std::uint64_t count_ = 0;
};

struct MlmRecordFile {
  std::uint32_t seq_len = 0;
  std::vector<MlmExample> records;
};

MlmRecordFile read_mlm_records(const std::filesystem::path& path);

// Encodes each chunk to seq_len with specials, then masks it keyed by
// (doc_id, chunk index). Runs on `threads` workers; output order follows
// input order.
std::vector<MlmExample> build_examples(const std::vector<Chunk>& chunks, const Vocab& vocab,
                                       const MaskingConfig& config, unsigned threads,
                                       MaskingStats* stats,
                                       std::size_t seq_len = kMaxSequenceLength);

std::string masking_config_to_json(const MaskingConfig& config);
std::string masking_stats_to_json(const MaskingStats& stats);

// Manifest accompanying a record file: format, sequence length, example
// count, masking config and stats, and the training recipe.
std::string dataset_manifest(const MaskingConfig& config, const MaskingStats& stats,
                             const TrainingRecipe& recipe, std::uint64_t examples,
                             std::uint32_t seq_len);

}  // namespace finprep

#endif  // FINPREP_MLM_H_
