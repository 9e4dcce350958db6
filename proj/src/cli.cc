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

#include "finprep/cli.h"

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "finprep/corpus.h"
#include "finprep/error.h"
#include "finprep/hash.h"
#include "finprep/metrics.h"
#include "finprep/parallel.h"
#include "finprep/retrieval.h"
#include "finprep/segmenter.h"
#include "finprep/stats.h"
#include "finprep/unicode.h"
#include "json.hpp"

namespace finprep {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kBatch = 4096;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ValidationError("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_key(const json& obj, const char* key, T& target) {
  if (auto it = obj.find(key); it != obj.end()) target = it->get<T>();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = unicode::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// Inputs and outputs of one run, recorded in its manifest.
class Manifest {
 public:
  Manifest(std::string subcommand, const PipelineConfig& config)
      : subcommand_(std::move(subcommand)), config_(config) {}

  void input(const std::filesystem::path& p) { inputs_.push_back(p); }
  void output(const std::filesystem::path& p) { outputs_.push_back(p); }
  ordered_json& summary() { return summary_; }

  void write(const std::filesystem::path& path) const {
    const std::string cfg = config_to_json(config_);
    ordered_json obj;
    obj["tool"] = "finprep";
    obj["version"] = FINPREP_VERSION;
    obj["subcommand"] = subcommand_;
    obj["seed"] = config_.seed;
    obj["config_sha256"] = sha256_hex(cfg);
    obj["config"] = ordered_json::parse(cfg);
    obj["inputs"] = digests(inputs_);
    obj["outputs"] = digests(outputs_);
    obj["summary"] = summary_.is_null() ? ordered_json::object() : summary_;
    write_text(path, obj.dump(2) + "\n");
  }

 private:
  static ordered_json digests(const std::vector<std::filesystem::path>& paths) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : paths) {
      arr.push_back({{"name", p.filename().string()}, {"sha256", sha256_file(p)}});
    }
    return arr;
  }

  std::string subcommand_;
  const PipelineConfig& config_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  ordered_json summary_;
};

std::filesystem::path sibling(const std::filesystem::path& output, const std::string& suffix) {
  return output.string() + suffix;
}

Vocab require_vocab(const PipelineConfig& config, Manifest& manifest) {
  if (config.vocab.empty()) throw ValidationError("a vocab file is required (--vocab)");
  manifest.input(config.vocab);
  return Vocab::load(config.vocab);
}

AbbreviationSet abbreviations_for(const PipelineConfig& config, Manifest& manifest) {
  auto set = AbbreviationSet::defaults();
  if (!config.abbreviations.empty()) {
    manifest.input(config.abbreviations);
    set.merge(AbbreviationSet::load(config.abbreviations));
  }
  return set;
}

ordered_json errors_json(const std::vector<RecordError>& errors) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : errors) arr.push_back({{"line", e.line}, {"reason", e.reason}});
  return arr;
}

// Reads documents in batches, so memory stays bounded by the batch.
void for_each_batch(DocumentReader& reader,
                    const std::function<void(std::vector<Document>&)>& fn) {
  std::vector<Document> batch;
  batch.reserve(kBatch);
  while (auto doc = reader.next()) {
    batch.push_back(std::move(*doc));
    if (batch.size() == kBatch) {
      fn(batch);
      batch.clear();
    }
  }
  if (!batch.empty()) fn(batch);
}

// ---------------------------------------------------------------------------
// Subcommands

struct Paths {
  std::string input;
  std::string output;
};

void cmd_ingest(const PipelineConfig& config, const Paths& p, std::string errors_path) {
  Manifest manifest("ingest", config);
  manifest.input(p.input);
  std::vector<DocumentFilter> filters;
  std::vector<std::uint64_t> dropped;
  std::vector<std::string> filter_names;
  if (config.language_filter) {
    LanguageConfig lang = LanguageConfig::defaults();
    if (!config.german_stopwords.empty()) {
      manifest.input(config.german_stopwords);
      lang.german = load_word_list(config.german_stopwords);
    }
    if (!config.english_stopwords.empty()) {
      manifest.input(config.english_stopwords);
      lang.english = load_word_list(config.english_stopwords);
    }
    lang.german_floor = config.german_floor;
    filters.push_back(language_filter(std::move(lang)));
    filter_names.push_back("language");
  }
  if (!config.blocklist.empty()) {
    manifest.input(config.blocklist);
    filters.push_back(blocklist_filter(load_id_list(config.blocklist)));
    filter_names.push_back("blocklist");
  }
  dropped.assign(filters.size(), 0);

  DocumentReader reader(p.input);
  DocumentWriter writer(p.output);
  std::uint64_t read = 0;
  for_each_batch(reader, [&](std::vector<Document>& batch) {
    read += batch.size();
    // Index of the first filter rejecting each document, or filters.size().
    std::vector<std::size_t> verdict(batch.size());
    parallel_for(batch.size(), config.threads, [&](std::size_t i) {
      std::size_t f = 0;
      while (f < filters.size() && filters[f](batch[i])) ++f;
      verdict[i] = f;
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (verdict[i] == filters.size()) {
        writer.write(batch[i]);
      } else {
        ++dropped[verdict[i]];
      }
    }
  });
  writer.close();
  if (errors_path.empty()) errors_path = sibling(p.output, ".errors.jsonl");
  write_error_report(reader.errors(), errors_path);

  auto& s = manifest.summary();
  s["documents_read"] = read;
  s["malformed_records"] = reader.errors().size();
  s["documents_written"] = writer.count();
  ordered_json d = ordered_json::object();
  for (std::size_t f = 0; f < filters.size(); ++f) d[filter_names[f]] = dropped[f];
  s["dropped_by_filter"] = d;
  manifest.output(p.output);
  manifest.output(errors_path);
  manifest.write(sibling(p.output, ".manifest.json"));
}

void cmd_stats(const PipelineConfig& config, const Paths& p, const std::string& table_path,
               std::ostream& out) {
  Manifest manifest("stats", config);
  manifest.input(p.input);
  const Vocab vocab = require_vocab(config, manifest);
  const AbbreviationSet abbreviations = abbreviations_for(config, manifest);

  DocumentReader reader(p.input);
  StatsAccumulator acc;
  for_each_batch(reader, [&](std::vector<Document>& batch) {
    std::vector<DocumentProfile> profiles(batch.size());
    parallel_for(batch.size(), config.threads, [&](std::size_t i) {
      profiles[i] = profile_document(batch[i], vocab, abbreviations);
    });
    for (std::size_t i = 0; i < batch.size(); ++i) acc.add(batch[i].source, profiles[i]);
  });
  const CorpusStats stats = acc.finish();
  const TruncationReport trunc = truncation_report(acc.token_counts(), config.truncation_limit);

  auto report = ordered_json::parse(stats_to_json(stats, trunc));
  report["malformed_records"] = errors_json(reader.errors());
  write_text(p.output, report.dump(2) + "\n");
  manifest.output(p.output);
  const std::string table = stats_to_table(stats, trunc);
  if (!table_path.empty()) {
    write_text(table_path, table);
    manifest.output(table_path);
  } else {
    out << table;
  }
  manifest.summary()["documents"] = stats.total.totals.documents;
  manifest.summary()["malformed_records"] = reader.errors().size();
  manifest.write(sibling(p.output, ".manifest.json"));
}

void cmd_chunk(const PipelineConfig& config, const Paths& p) {
  Manifest manifest("chunk", config);
  manifest.input(p.input);
  const Vocab vocab = require_vocab(config, manifest);
  const AbbreviationSet abbreviations = abbreviations_for(config, manifest);
  const ChunkerContext ctx{vocab, abbreviations, config.chunker};

  DocumentReader reader(p.input);
  std::ofstream out(p.output, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + p.output + " for writing");
  ChunkReport report;
  std::uint64_t written = 0;
  chunk_corpus(
      reader, ctx, config.threads,
      [&](const Chunk& c) {
        out << serialize_chunk(c) << '\n';
        if (!out) throw IoError("write failed on " + p.output, written);
        ++written;
      },
      &report);
  out.close();
  if (!out) throw IoError("write failed on " + p.output, written);

  auto report_json = ordered_json::parse(report_to_json(report));
  report_json["malformed_records"] = errors_json(reader.errors());
  const auto report_path = sibling(p.output, ".report.json");
  write_text(report_path, report_json.dump(2) + "\n");
  manifest.output(p.output);
  manifest.output(report_path);
  manifest.summary()["chunks"] = written;
  manifest.summary()["malformed_records"] = reader.errors().size();
  manifest.write(sibling(p.output, ".manifest.json"));
}

void cmd_mlm(const PipelineConfig& config, const Paths& p) {
  Manifest manifest("mlm", config);
  manifest.input(p.input);
  const Vocab vocab = require_vocab(config, manifest);
  const TrainingRecipe recipe = training_recipe(parse_recipe_variant(config.recipe));

  std::ifstream in(p.input, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.input);
  MlmRecordWriter writer(p.output, config.seq_len);
  MaskingStats stats;
  std::vector<Chunk> batch;
  auto flush = [&] {
    for (const auto& ex : build_examples(batch, vocab, config.masking, config.threads, &stats,
                                         config.seq_len)) {
      writer.write(ex);
    }
    batch.clear();
  };
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (unicode::trim(line).empty()) continue;
    try {
      batch.push_back(parse_chunk(line));
    } catch (const FormatError& e) {
      throw FormatError(p.input + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (batch.size() == kBatch) flush();
  }
  flush();
  writer.close();

  const auto dataset_path = sibling(p.output, ".dataset.json");
  write_text(dataset_path,
             dataset_manifest(config.masking, stats, recipe, writer.count(), config.seq_len) +
                 "\n");
  manifest.output(p.output);
  manifest.output(dataset_path);
  manifest.summary()["examples"] = writer.count();
  manifest.write(sibling(p.output, ".manifest.json"));
}

void cmd_recipe(const PipelineConfig& config, const std::string& output, std::ostream& out) {
  const std::string text = recipe_to_json(training_recipe(parse_recipe_variant(config.recipe)));
  if (output.empty()) {
    out << text << '\n';
    return;
  }
  write_text(output, text + "\n");
  Manifest manifest("recipe", config);
  manifest.output(output);
  manifest.write(sibling(output, ".manifest.json"));
}

void cmd_split(const PipelineConfig& config, const std::string& input,
               const std::string& output_dir, std::ostream& err) {
  Manifest manifest("split", config);
  manifest.input(input);
  auto result = stratified_split(read_labeled_examples(input), config.split, config.seed);
  std::filesystem::create_directories(output_dir);
  const std::filesystem::path dir(output_dir);
  for (int j = 0; j < 3; ++j) {
    const auto path = dir / (std::string(kSplitNames[j]) + ".jsonl");
    write_labeled_examples(result.parts[j], path);
    manifest.output(path);
  }
  const auto report = dir / "split_report.json";
  write_text(report, split_report_json(result, config.split, config.seed) + "\n");
  manifest.output(report);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  for (int j = 0; j < 3; ++j) manifest.summary()[kSplitNames[j]] = result.parts[j].size();
  manifest.write(dir / "manifest.json");
}

void cmd_paragraphs(const PipelineConfig& config, const Paths& p) {
  Manifest manifest("paragraphs", config);
  manifest.input(p.input);
  std::vector<Paragraph> all;
  for (const auto& a : read_announcements(p.input)) {
    for (auto& para : build_paragraphs(a)) all.push_back(std::move(para));
  }
  write_paragraphs(all, p.output);
  manifest.output(p.output);
  manifest.summary()["paragraphs"] = all.size();
  manifest.write(sibling(p.output, ".manifest.json"));
}

void cmd_pool(const PipelineConfig& config, const Paths& p, std::ostream& err) {
  Manifest manifest("pool", config);
  manifest.input(p.input);
  auto pool = sample_topic_pool(read_paragraphs(p.input), config.per_topic, config.topics,
                                config.seed);
  write_paragraphs(pool.paragraphs, p.output);
  manifest.output(p.output);
  for (const auto& w : pool.warnings) err << "warning: " << w << '\n';
  auto& s = manifest.summary();
  s["pool_size"] = pool.paragraphs.size();
  s["drawn_per_topic"] = pool.drawn_per_topic;
  s["warnings"] = pool.warnings;
  manifest.write(sibling(p.output, ".manifest.json"));
}

struct RetrieveArgs {
  std::string queries;
  std::string pool;
  std::string query_embeddings;
  std::string pool_embeddings;
  std::string output;
  std::string rankings;
};

void cmd_retrieve(const PipelineConfig& config, const RetrieveArgs& a) {
  Manifest manifest("retrieve", config);
  for (const auto& in : {a.queries, a.pool, a.query_embeddings}) manifest.input(in);
  const auto queries = read_queries(a.queries);
  const auto pool = read_paragraphs(a.pool);
  const EmbeddingSet qemb = load_embeddings(a.query_embeddings);
  EmbeddingSet pemb_storage;
  const EmbeddingSet* pemb = &qemb;
  if (!a.pool_embeddings.empty() && a.pool_embeddings != a.query_embeddings) {
    manifest.input(a.pool_embeddings);
    pemb_storage = load_embeddings(a.pool_embeddings);
    pemb = &pemb_storage;
  }
  const auto curve = evaluate_curve(queries, pool, qemb, *pemb, config.k_max, config.threads);
  write_text(a.output, curve_to_csv(curve));
  manifest.output(a.output);
  if (!a.rankings.empty()) {
    std::vector<RankedList> lists(queries.size());
    parallel_for(queries.size(), config.threads,
                 [&](std::size_t i) { lists[i] = rank(queries[i], pool, qemb, *pemb); });
    std::ofstream out(a.rankings, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + a.rankings + " for writing");
    for (const auto& l : lists) {
      ordered_json obj;
      obj["query_id"] = l.query_id;
      obj["total_relevant"] = l.total_relevant;
      ordered_json items = ordered_json::array();
      const std::size_t n = std::min(l.items.size(), config.k_max);
      for (std::size_t i = 0; i < n; ++i) {
        items.push_back({l.items[i].id, l.items[i].score, l.items[i].relevant ? 1 : 0});
      }
      obj["top"] = std::move(items);
      out << obj.dump() << '\n';
    }
    out.close();
    if (!out) throw IoError("write failed on " + a.rankings);
    manifest.output(a.rankings);
  }
  manifest.summary()["queries"] = queries.size();
  manifest.summary()["excluded_queries"] = curve.excluded_queries;
  manifest.write(sibling(a.output, ".manifest.json"));
}

struct MetricsArgs {
  std::string task = "classification";
  std::string predictions;
  std::string golds;
  std::string labels;
  std::string output;
};

void cmd_metrics(const PipelineConfig& config, const MetricsArgs& a, std::ostream& out) {
  Manifest manifest("metrics", config);
  manifest.input(a.predictions);
  manifest.input(a.golds);
  std::string report;
  if (a.task == "classification") {
    const auto preds = read_label_assignments(a.predictions);
    const auto golds = read_label_assignments(a.golds);
    std::vector<std::string> label_set = split_list(a.labels);
    if (label_set.empty()) {
      std::set<std::string> seen;
      for (const auto* side : {&preds, &golds}) {
        for (const auto& x : *side) seen.insert(x.labels.begin(), x.labels.end());
      }
      label_set.assign(seen.begin(), seen.end());
    }
    const auto counts = confusion_counts(preds, golds, label_set);
    report = classification_report_json(counts, accuracy(preds, golds));
  } else if (a.task == "qa") {
    report = qa_report_json(evaluate_qa(read_qa_predictions(a.predictions, a.golds)));
  } else {
    throw ValidationError("unknown metrics task '" + a.task + "' (expected classification or qa)");
  }
  if (a.output.empty()) {
    out << report << '\n';
    return;
  }
  write_text(a.output, report + "\n");
  manifest.output(a.output);
  manifest.write(sibling(a.output, ".manifest.json"));
}

void cmd_qagen(const PipelineConfig& config, const Paths& p, std::ostream& err) {
  Manifest manifest("qagen", config);
  manifest.input(p.input);
  const AbbreviationSet abbreviations = abbreviations_for(config, manifest);
  std::unique_ptr<LlmClient> client;
  if (config.llm_client == "replay") {
    if (config.replay.empty()) throw ValidationError("replay client needs a fixture (--replay)");
    manifest.input(config.replay);
    client = std::make_unique<ReplayClient>(ReplayClient::load(config.replay));
  } else if (config.llm_client == "http") {
    client = std::make_unique<HttpChatClient>(config.http);
  } else {
    throw ValidationError("unknown llm client '" + config.llm_client + "'");
  }

  auto docs = read_documents(p.input);
  std::vector<QaContext> contexts;
  std::uint64_t skipped = 0;
  for (const auto& d : docs.documents) {
    auto ctx = truncate_context(split_sentences(d.text, abbreviations), config.max_sentences);
    if (ctx) {
      contexts.push_back({d.id, std::move(*ctx)});
    } else {
      ++skipped;
    }
  }
  const GenResult result = generate(contexts, *client, config.qagen);
  write_text(p.output, squad_json(result.records) + "\n");
  auto report = ordered_json::parse(gen_report_json(result.report));
  report["contexts_skipped_empty"] = skipped;
  report["records"] = result.records.size();
  report["malformed_records"] = errors_json(docs.errors);
  const auto report_path = sibling(p.output, ".report.json");
  write_text(report_path, report.dump(2) + "\n");
  for (const auto& id : result.report.failed_contexts) {
    err << "warning: context '" << id << "' failed after transport retries\n";
  }
  manifest.output(p.output);
  manifest.output(report_path);
  manifest.summary()["records"] = result.records.size();
  manifest.write(sibling(p.output, ".manifest.json"));
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::finalize() {
  chunker.seed = seed;
  masking.seed = seed;
  chunker.validate();
  masking.validate();
  split.validate();
  qagen.validate();
  parse_recipe_variant(recipe);
  if (seq_len < 2 || seq_len > kMaxSequenceLength) {
    throw ValidationError("seq_len must lie in [2, 512]");
  }
  if (per_topic == 0) throw ValidationError("per_topic must be positive");
  if (k_max == 0) throw ValidationError("k_max must be positive");
  if (german_floor < 0 || german_floor > 1) throw ValidationError("german_floor must lie in [0, 1]");
}

PipelineConfig parse_config(const std::string& json_text) {
  PipelineConfig c;
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(root,
               {"seed", "threads", "vocab", "abbreviations", "blocklist", "language", "chunker",
                "stats", "masking", "recipe", "seq_len", "split", "pool", "retrieval", "qagen"},
               "the top level");
    read_key(root, "seed", c.seed);
    read_key(root, "threads", c.threads);
    read_key(root, "vocab", c.vocab);
    read_key(root, "abbreviations", c.abbreviations);
    read_key(root, "blocklist", c.blocklist);
    read_key(root, "recipe", c.recipe);
    read_key(root, "seq_len", c.seq_len);
    if (auto it = root.find("language"); it != root.end()) {
      check_keys(*it, {"enabled", "german_stopwords", "english_stopwords", "german_floor"},
                 "language");
      read_key(*it, "enabled", c.language_filter);
      read_key(*it, "german_stopwords", c.german_stopwords);
      read_key(*it, "english_stopwords", c.english_stopwords);
      read_key(*it, "german_floor", c.german_floor);
    }
    if (auto it = root.find("chunker"); it != root.end()) {
      check_keys(*it, {"targets", "discard_below"}, "chunker");
      read_key(*it, "discard_below", c.chunker.discard_below);
      if (auto t = it->find("targets"); t != it->end()) {
        c.chunker.targets.clear();
        for (const auto& entry : *t) {
          if (entry.is_number()) {
            c.chunker.targets.push_back({entry.get<std::uint32_t>(), 1.0});
          } else {
            check_keys(entry, {"min_tokens", "weight"}, "chunker.targets");
            c.chunker.targets.push_back(
                {entry.at("min_tokens").get<std::uint32_t>(), entry.value("weight", 1.0)});
          }
        }
      }
    }
    if (auto it = root.find("stats"); it != root.end()) {
      check_keys(*it, {"truncation_limit"}, "stats");
      read_key(*it, "truncation_limit", c.truncation_limit);
    }
    if (auto it = root.find("masking"); it != root.end()) {
      check_keys(*it,
                 {"mask_prob", "mask_share", "random_share", "keep_share", "whole_word", "epoch"},
                 "masking");
      read_key(*it, "mask_prob", c.masking.mask_prob);
      read_key(*it, "mask_share", c.masking.mask_share);
      read_key(*it, "random_share", c.masking.random_share);
      read_key(*it, "keep_share", c.masking.keep_share);
      read_key(*it, "whole_word", c.masking.whole_word);
      read_key(*it, "epoch", c.masking.epoch);
    }
    if (auto it = root.find("split"); it != root.end()) {
      check_keys(*it, {"train", "validation", "test"}, "split");
      read_key(*it, "train", c.split.train);
      read_key(*it, "validation", c.split.validation);
      read_key(*it, "test", c.split.test);
    }
    if (auto it = root.find("pool"); it != root.end()) {
      check_keys(*it, {"per_topic", "topics"}, "pool");
      read_key(*it, "per_topic", c.per_topic);
      read_key(*it, "topics", c.topics);
    }
    if (auto it = root.find("retrieval"); it != root.end()) {
      check_keys(*it, {"k_max"}, "retrieval");
      read_key(*it, "k_max", c.k_max);
    }
    if (auto it = root.find("qagen"); it != root.end()) {
      check_keys(*it,
                 {"client", "replay", "endpoint", "model", "temperature", "api_key_env",
                  "timeout_seconds", "retries", "transport_retries", "backoff_ms",
                  "max_in_flight", "requests_per_second", "max_sentences"},
                 "qagen");
      read_key(*it, "client", c.llm_client);
      read_key(*it, "replay", c.replay);
      read_key(*it, "endpoint", c.http.endpoint);
      read_key(*it, "model", c.http.model);
      read_key(*it, "temperature", c.http.temperature);
      read_key(*it, "api_key_env", c.http.api_key_env);
      read_key(*it, "timeout_seconds", c.http.timeout_seconds);
      read_key(*it, "retries", c.qagen.retries);
      read_key(*it, "transport_retries", c.qagen.transport_retries);
      read_key(*it, "backoff_ms", c.qagen.backoff_ms);
      read_key(*it, "max_in_flight", c.qagen.max_in_flight);
      read_key(*it, "requests_per_second", c.qagen.requests_per_second);
      read_key(*it, "max_sentences", c.max_sentences);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(slurp(path)); }

std::string config_to_json(const PipelineConfig& c) {
  ordered_json o;
  o["seed"] = c.seed;
  o["vocab"] = std::filesystem::path(c.vocab).filename().string();
  o["abbreviations"] = std::filesystem::path(c.abbreviations).filename().string();
  o["blocklist"] = std::filesystem::path(c.blocklist).filename().string();
  o["language"] = {{"enabled", c.language_filter},
                   {"german_stopwords", std::filesystem::path(c.german_stopwords).filename().string()},
                   {"english_stopwords", std::filesystem::path(c.english_stopwords).filename().string()},
                   {"german_floor", c.german_floor}};
  ordered_json targets = ordered_json::array();
  for (const auto& t : c.chunker.targets) {
    targets.push_back({{"min_tokens", t.min_tokens}, {"weight", t.weight}});
  }
  o["chunker"] = {{"targets", targets}, {"discard_below", c.chunker.discard_below}};
  o["stats"] = {{"truncation_limit", c.truncation_limit}};
  o["masking"] = {{"mask_prob", c.masking.mask_prob},
                  {"mask_share", c.masking.mask_share},
                  {"random_share", c.masking.random_share},
                  {"keep_share", c.masking.keep_share},
                  {"whole_word", c.masking.whole_word},
                  {"epoch", c.masking.epoch}};
  o["recipe"] = c.recipe;
  o["seq_len"] = c.seq_len;
  o["split"] = {{"train", c.split.train}, {"validation", c.split.validation}, {"test", c.split.test}};
  o["pool"] = {{"per_topic", c.per_topic}, {"topics", c.topics}};
  o["retrieval"] = {{"k_max", c.k_max}};
  o["qagen"] = {{"client", c.llm_client},
                {"replay", std::filesystem::path(c.replay).filename().string()},
                {"endpoint", c.http.endpoint},
                {"model", c.http.model},
                {"temperature", c.http.temperature},
                {"api_key_env", c.http.api_key_env},
                {"timeout_seconds", c.http.timeout_seconds},
                {"retries", c.qagen.retries},
                {"transport_retries", c.qagen.transport_retries},
                {"backoff_ms", c.qagen.backoff_ms},
                {"max_in_flight", c.qagen.max_in_flight},
                {"requests_per_second", c.qagen.requests_per_second},
                {"max_sentences", c.max_sentences}};
  return o.dump();
}

// ---------------------------------------------------------------------------
// Dispatcher

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Corpus preparation and evaluation toolkit for domain-adaptive pre-training.",
               "finprep"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", FINPREP_VERSION);

  std::string config_path;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::string vocab;
  std::string abbreviations;
  auto* config_opt = app.add_option("--config", config_path, "Pipeline config (JSON)");
  config_opt->check(CLI::ExistingFile);
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every random decision");
  auto* vocab_opt = app.add_option("--vocab", vocab, "WordPiece vocab file");
  vocab_opt->check(CLI::ExistingFile);
  auto* abbr_opt = app.add_option("--abbreviations", abbreviations,
                                  "Extra abbreviation list merged into the shipped one");
  abbr_opt->check(CLI::ExistingFile);

  Paths paths;
  std::string errors_path;
  bool no_language_filter = false;
  std::string blocklist;
  std::string table_path;
  std::string recipe;
  std::string output_only;
  std::string split_dir;
  std::uint32_t per_topic = 0;
  std::string topics;
  RetrieveArgs retrieve;
  std::size_t k_max = 0;
  MetricsArgs metrics;
  std::string replay;
  bool whole_word = false;
  std::uint32_t epoch = 0;

  auto add_io = [&](CLI::App* sub, bool output_required = true) {
    sub->add_option("--input", paths.input, "Input file")->required()->check(CLI::ExistingFile);
    auto* o = sub->add_option("--output", paths.output, "Output file");
    if (output_required) o->required();
  };

  auto* ingest = app.add_subcommand("ingest", "Read, validate and filter a JSONL corpus");
  add_io(ingest);
  ingest->add_option("--errors", errors_path, "Malformed-record report (JSONL)");
  ingest->add_flag("--no-language-filter", no_language_filter, "Keep documents of any language");
  ingest->add_option("--blocklist", blocklist, "Ids to drop, one per line")
      ->check(CLI::ExistingFile);

  auto* stats = app.add_subcommand("stats", "Corpus statistics and truncation report");
  add_io(stats);
  stats->add_option("--table", table_path, "Write the text table here instead of stdout");

  auto* chunk = app.add_subcommand("chunk", "Split documents into sentence-aligned chunks");
  add_io(chunk);

  auto* mlm = app.add_subcommand("mlm", "Build masked-language-model records from chunks");
  add_io(mlm);
  mlm->add_option("--recipe", recipe, "Training recipe variant: scratch or further");
  mlm->add_flag("--whole-word", whole_word, "Mask whole words");
  auto* epoch_opt = mlm->add_option("--epoch", epoch, "Masking epoch");

  auto* recipe_cmd = app.add_subcommand("recipe", "Print a training recipe");
  recipe_cmd->add_option("--variant", recipe, "scratch or further");
  recipe_cmd->add_option("--output", output_only, "Write here instead of stdout");

  auto* split = app.add_subcommand("split", "Stratified train/validation/test split");
  split->add_option("--input", paths.input, "Labeled JSONL")->required()->check(CLI::ExistingFile);
  split->add_option("--output", split_dir, "Output directory")->required();

  auto* paragraphs = app.add_subcommand("paragraphs", "Group labeled sentences into paragraphs");
  add_io(paragraphs);

  auto* pool = app.add_subcommand("pool", "Sample a per-topic paragraph pool");
  add_io(pool);
  auto* per_topic_opt = pool->add_option("--per-topic", per_topic, "Paragraphs per topic");
  pool->add_option("--topics", topics, "Comma-separated topics (default: all)");

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Rank a pool and emit the nDCG curve");
  retrieve_cmd->add_option("--queries", retrieve.queries, "Query JSONL")
      ->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--pool", retrieve.pool, "Pool paragraphs JSONL")
      ->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--query-embeddings", retrieve.query_embeddings, "Embedding file")
      ->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--pool-embeddings", retrieve.pool_embeddings,
                           "Embedding file for the pool (default: the query file)")
      ->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--output", retrieve.output, "Curve CSV")->required();
  retrieve_cmd->add_option("--rankings", retrieve.rankings, "Top-k rankings JSONL");
  auto* k_opt = retrieve_cmd->add_option("--k-max", k_max, "Largest cut-off");

  auto* metrics_cmd = app.add_subcommand("metrics", "Evaluate classification or QA predictions");
  metrics_cmd->add_option("--task", metrics.task, "classification or qa");
  metrics_cmd->add_option("--predictions", metrics.predictions, "Predictions JSONL")
      ->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--golds", metrics.golds, "Gold JSONL")
      ->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--labels", metrics.labels, "Comma-separated label set");
  metrics_cmd->add_option("--output", metrics.output, "Report JSON (default: stdout)");

  auto* qagen = app.add_subcommand("qagen", "Generate an extractive QA dataset with an LLM");
  add_io(qagen);
  qagen->add_option("--replay", replay, "Replay fixture (JSONL)")->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << FINPREP_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    PipelineConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (threads_opt->count()) config.threads = threads;
    if (seed_opt->count()) config.seed = seed;
    if (vocab_opt->count()) config.vocab = vocab;
    if (abbr_opt->count()) config.abbreviations = abbreviations;
    if (no_language_filter) config.language_filter = false;
    if (!blocklist.empty()) config.blocklist = blocklist;
    if (!recipe.empty()) config.recipe = recipe;
    if (whole_word) config.masking.whole_word = true;
    if (epoch_opt->count()) config.masking.epoch = epoch;
    if (per_topic_opt->count()) config.per_topic = per_topic;
    if (!topics.empty()) config.topics = split_list(topics);
    if (k_opt->count()) config.k_max = k_max;
    if (!replay.empty()) config.replay = replay;
    config.finalize();

    if (ingest->parsed()) {
      cmd_ingest(config, paths, errors_path);
    } else if (stats->parsed()) {
      cmd_stats(config, paths, table_path, out);
    } else if (chunk->parsed()) {
      cmd_chunk(config, paths);
    } else if (mlm->parsed()) {
      cmd_mlm(config, paths);
    } else if (recipe_cmd->parsed()) {
      cmd_recipe(config, output_only, out);
    } else if (split->parsed()) {
      cmd_split(config, paths.input, split_dir, err);
    } else if (paragraphs->parsed()) {
      cmd_paragraphs(config, paths);
    } else if (pool->parsed()) {
      cmd_pool(config, paths, err);
    } else if (retrieve_cmd->parsed()) {
      cmd_retrieve(config, retrieve);
    } else if (metrics_cmd->parsed()) {
      cmd_metrics(config, metrics, out);
    } else if (qagen->parsed()) {
      cmd_qagen(config, paths, err);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what();
    if (e.records_written() > 0) err << " (" << e.records_written() << " records written)";
    err << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace finprep
