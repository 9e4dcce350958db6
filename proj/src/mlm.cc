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

#include "finprep/mlm.h"

#include <array>
#include <cmath>
#include <cstring>

#include "finprep/error.h"
#include "finprep/parallel.h"
#include "finprep/rng.h"
#include "json.hpp"

namespace finprep {

using nlohmann::ordered_json;

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'P', 'M', 'L', 'M', '\0', '\0', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

bool is_maskable(const TokenSequence& seq, const Vocab& vocab, std::size_t i) {
  if (!seq.attention[i]) return false;
  const TokenId id = seq.ids[i];
  return id != vocab.cls_id() && id != vocab.sep_id() && id != vocab.pad_id();
}

}  // namespace

void MaskingConfig::validate() const {
  if (!(mask_prob > 0.0 && mask_prob < 1.0)) {
    throw ValidationError("masking: mask_prob must lie in (0, 1)");
  }
  if (mask_share < 0 || random_share < 0 || keep_share < 0) {
    throw ValidationError("masking: action shares must be non-negative");
  }
  if (std::abs(mask_share + random_share + keep_share - 1.0) > 1e-9) {
    throw ValidationError("masking: action shares must sum to 1");
  }
}

MaskingStats& MaskingStats::combine(const MaskingStats& o) {
  examples += o.examples;
  maskable_tokens += o.maskable_tokens;
  selected += o.selected;
  replaced_with_mask += o.replaced_with_mask;
  replaced_with_random += o.replaced_with_random;
  kept += o.kept;
  examples_without_maskable += o.examples_without_maskable;
  return *this;
}

MlmExample mask_tokens(const TokenSequence& seq, const Vocab& vocab,
                       const MaskingConfig& config, const MaskingKey& key,
                       MaskingStats* stats) {
  if (seq.ids.size() != seq.attention.size()) {
    throw ValidationError("mask_tokens: ids and attention differ in length");
  }
  const std::size_t n = seq.ids.size();
  MlmExample ex;
  ex.input_ids = seq.ids;
  ex.labels.assign(n, kIgnoreLabel);
  ex.attention = seq.attention;

  MaskingStats local;
  local.examples = 1;

  // Units are single positions, or whole words when requested; a unit is
  // the half-open position range [begin, end).
  std::vector<std::pair<std::size_t, std::size_t>> units;
  if (config.whole_word) {
    for (std::size_t w = 0; w < seq.word_starts.size(); ++w) {
      const std::size_t begin = seq.word_starts[w];
      if (begin >= n || !is_maskable(seq, vocab, begin)) continue;
      std::size_t end = begin + 1;
      const std::size_t limit = w + 1 < seq.word_starts.size() ? seq.word_starts[w + 1] : n;
      while (end < limit && is_maskable(seq, vocab, end)) ++end;
      units.emplace_back(begin, end);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (is_maskable(seq, vocab, i)) units.emplace_back(i, i + 1);
    }
  }
  for (const auto& [b, e] : units) local.maskable_tokens += e - b;
  if (local.maskable_tokens == 0) local.examples_without_maskable = 1;

  const StreamKey base =
      StreamKey(config.seed).add(config.epoch).add(key.doc_id).add(key.chunk_index);
  const auto& regular = vocab.regular_ids();
  for (const auto& [begin, end] : units) {
    Rng rng(StreamKey(base).add(begin));
    if (!(rng.next_double() < config.mask_prob)) continue;
    for (std::size_t i = begin; i < end; ++i) {
      ++local.selected;
      ex.labels[i] = ex.input_ids[i];
      const double u = rng.next_double();
      if (u < config.mask_share) {
        ex.input_ids[i] = vocab.mask_id();
        ++local.replaced_with_mask;
      } else if (u < config.mask_share + config.random_share && !regular.empty()) {
        ex.input_ids[i] = regular[rng.next_below(regular.size())];
        ++local.replaced_with_random;
      } else {
        ++local.kept;
      }
    }
  }
  if (stats) stats->combine(local);
  return ex;
}

RecipeVariant parse_recipe_variant(std::string_view name) {
  if (name == "scratch") return RecipeVariant::kScratch;
  if (name == "further") return RecipeVariant::kFurther;
  throw ValidationError("unknown recipe variant '" + std::string(name) +
                        "' (expected scratch or further)");
}

TrainingRecipe training_recipe(RecipeVariant variant) {
  TrainingRecipe r;
  switch (variant) {
    case RecipeVariant::kScratch:
      r.variant = "scratch";
      r.initialization = "random";
      r.peak_learning_rate = 5e-4;
      r.steps = 174000;
      break;
    case RecipeVariant::kFurther:
      r.variant = "further";
      r.initialization = "gbert-base";
      r.peak_learning_rate = 1e-4;
      r.steps = 10400;
      break;
  }
  return r;
}

namespace {

ordered_json recipe_json(const TrainingRecipe& r) {
  ordered_json obj;
  obj["variant"] = r.variant;
  obj["initialization"] = r.initialization;
  obj["tokenizer"] = r.tokenizer;
  obj["objective"] = r.objective;
  obj["next_sentence_prediction"] = r.next_sentence_prediction;
  obj["hidden_size"] = r.hidden_size;
  obj["intermediate_size"] = r.intermediate_size;
  obj["attention_heads"] = r.attention_heads;
  obj["hidden_layers"] = r.hidden_layers;
  obj["activation"] = r.activation;
  obj["position_embeddings"] = r.position_embeddings;
  obj["dropout"] = r.dropout;
  obj["optimizer"] = r.optimizer;
  obj["adam_beta1"] = r.adam_beta1;
  obj["adam_beta2"] = r.adam_beta2;
  obj["adam_epsilon"] = r.adam_epsilon;
  obj["weight_decay"] = r.weight_decay;
  obj["peak_lr"] = r.peak_learning_rate;
  obj["lr_schedule"] = r.lr_schedule;
  obj["warmup_fraction"] = r.warmup_fraction;
  obj["batch_size"] = r.batch_size;
  obj["steps"] = r.steps;
  obj["seq_len"] = r.sequence_length;
  return obj;
}

ordered_json config_json(const MaskingConfig& c) {
  ordered_json obj;
  obj["mask_prob"] = c.mask_prob;
  obj["mask_share"] = c.mask_share;
  obj["random_share"] = c.random_share;
  obj["keep_share"] = c.keep_share;
  obj["whole_word"] = c.whole_word;
  obj["seed"] = c.seed;
  obj["epoch"] = c.epoch;
  return obj;
}

ordered_json stats_json(const MaskingStats& s) {
  ordered_json obj;
  obj["examples"] = s.examples;
  obj["maskable_tokens"] = s.maskable_tokens;
  obj["selected"] = s.selected;
  obj["replaced_with_mask"] = s.replaced_with_mask;
  obj["replaced_with_random"] = s.replaced_with_random;
  obj["kept"] = s.kept;
  obj["examples_without_maskable"] = s.examples_without_maskable;
  return obj;
}

}  // namespace

std::string recipe_to_json(const TrainingRecipe& recipe) { return recipe_json(recipe).dump(2); }
std::string masking_config_to_json(const MaskingConfig& c) { return config_json(c).dump(2); }
std::string masking_stats_to_json(const MaskingStats& s) { return stats_json(s).dump(2); }

std::string dataset_manifest(const MaskingConfig& config, const MaskingStats& stats,
                             const TrainingRecipe& recipe, std::uint64_t examples,
                             std::uint32_t seq_len) {
  ordered_json obj;
  obj["format"] = "finprep-mlm";
  obj["format_version"] = kFormatVersion;
  obj["seq_len"] = seq_len;
  obj["examples"] = examples;
  obj["ignore_label"] = kIgnoreLabel;
  obj["masking"] = config_json(config);
  obj["masking_stats"] = stats_json(stats);
  obj["recipe"] = recipe_json(recipe);
  return obj.dump(2);
}

MlmRecordWriter::MlmRecordWriter(const std::filesystem::path& path, std::uint32_t seq_len)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), seq_len_(seq_len) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  std::string header(kMagic.begin(), kMagic.end());
  put_u32(header, kFormatVersion);
  put_u32(header, seq_len_);
  out_.write(header.data(), static_cast<std::streamsize>(header.size()));
}

void MlmRecordWriter::write(const MlmExample& ex) {
  const std::size_t len = ex.input_ids.size();
  if (ex.labels.size() != len || ex.attention.size() != len) {
    throw ValidationError("MlmRecordWriter: inconsistent example lengths");
  }
  std::string buf;
  buf.reserve(4 + len * 12);
  put_u32(buf, static_cast<std::uint32_t>(len));
  for (auto id : ex.input_ids) put_u32(buf, static_cast<std::uint32_t>(id));
  for (auto l : ex.labels) put_u32(buf, static_cast<std::uint32_t>(l));
  for (auto a : ex.attention) put_u32(buf, a);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw IoError("write failed on " + path_.string(), count_);
  ++count_;
}

void MlmRecordWriter::close() {
  out_.flush();
  if (!out_) throw IoError("flush failed on " + path_.string(), count_);
  out_.close();
}

MlmRecordFile read_mlm_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t size = data.size();
  if (size < 16 || std::memcmp(p, kMagic.data(), kMagic.size()) != 0) {
    throw FormatError(path.string() + ": not an MLM record file");
  }
  if (get_u32(p + 8) != kFormatVersion) {
    throw FormatError(path.string() + ": unsupported format version");
  }
  MlmRecordFile file;
  file.seq_len = get_u32(p + 12);
  std::size_t pos = 16;
  while (pos < size) {
    if (pos + 4 > size) throw FormatError(path.string() + ": truncated record header");
    const std::uint32_t len = get_u32(p + pos);
    pos += 4;
    if (pos + std::size_t{len} * 12 > size) {
      throw FormatError(path.string() + ": truncated record");
    }
    MlmExample ex;
    ex.input_ids.resize(len);
    ex.labels.resize(len);
    ex.attention.resize(len);
    for (std::uint32_t i = 0; i < len; ++i) {
      ex.input_ids[i] = static_cast<TokenId>(get_u32(p + pos + 4 * i));
      ex.labels[i] = static_cast<std::int32_t>(get_u32(p + pos + 4 * (len + i)));
      ex.attention[i] = static_cast<std::uint8_t>(get_u32(p + pos + 4 * (2 * len + i)));
    }
    pos += std::size_t{len} * 12;
    file.records.push_back(std::move(ex));
  }
  return file;
}

std::vector<MlmExample> build_examples(const std::vector<Chunk>& chunks, const Vocab& vocab,
                                       const MaskingConfig& config, unsigned threads,
                                       MaskingStats* stats, std::size_t seq_len) {
  config.validate();
  std::vector<MlmExample> out(chunks.size());
  std::vector<MaskingStats> per(chunks.size());
  parallel_for(chunks.size(), threads, [&](std::size_t i) {
    const auto seq = encode(chunks[i].text, vocab, seq_len, true);
    out[i] = mask_tokens(seq, vocab, config, {chunks[i].doc_id, chunks[i].index}, &per[i]);
  });
  if (stats) {
    for (const auto& s : per) stats->combine(s);
  }
  return out;
}

}  // namespace finprep
