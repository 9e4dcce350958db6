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

#include "finprep/chunker.h"

#include <utility>

#include "finprep/error.h"
#include "finprep/parallel.h"
#include "finprep/rng.h"
#include "finprep/unicode.h"
#include "json.hpp"

namespace finprep {

using nlohmann::ordered_json;

void ChunkConfig::validate() const {
  if (targets.empty()) throw ValidationError("chunker: no targets configured");
  for (const auto& t : targets) {
    if (!(t.weight > 0.0)) {
      throw ValidationError("chunker: target " + std::to_string(t.min_tokens) +
                            " has non-positive weight");
    }
    if (t.min_tokens < discard_below) {
      throw ValidationError("chunker: target " + std::to_string(t.min_tokens) +
                            " is below discard threshold " +
                            std::to_string(discard_below));
    }
  }
}

ChunkReport& ChunkReport::combine(const ChunkReport& o) {
  documents += o.documents;
  documents_without_chunks += o.documents_without_chunks;
  sentences += o.sentences;
  chunks_emitted += o.chunks_emitted;
  chunks_discarded += o.chunks_discarded;
  tokens_in += o.tokens_in;
  tokens_emitted += o.tokens_emitted;
  tokens_discarded += o.tokens_discarded;
  chunks_below_target += o.chunks_below_target;
  errors += o.errors;
  return *this;
}

std::vector<Chunk> chunk_sentences(const std::string& doc_id,
                                   const std::vector<std::string>& sentences,
                                   const std::vector<std::uint32_t>& sentence_tokens,
                                   const ChunkConfig& config, ChunkReport* report) {
  if (sentences.size() != sentence_tokens.size()) {
    throw ValidationError("chunk_sentences: sentence and token count lists differ");
  }
  std::vector<double> weights;
  weights.reserve(config.targets.size());
  for (const auto& t : config.targets) weights.push_back(t.weight);
  Rng rng(StreamKey(config.seed).add(doc_id));

  ChunkReport local;
  local.documents = 1;
  local.sentences = sentences.size();

  std::vector<Chunk> chunks;
  const std::size_t n = sentences.size();
  std::size_t i = 0;
  while (i < n) {
    const std::uint32_t target = config.targets[rng.next_weighted(weights)].min_tokens;
    const std::size_t first = i;
    std::uint64_t count = 0;
    while (i < n && count < target) count += sentence_tokens[i++];
    local.tokens_in += count;

    if (count < config.discard_below) {
      ++local.chunks_discarded;
      local.tokens_discarded += count;
      continue;
    }
    Chunk chunk;
    chunk.doc_id = doc_id;
    chunk.index = static_cast<std::uint32_t>(chunks.size());
    chunk.token_count = static_cast<std::uint32_t>(count);
    chunk.first_sentence = static_cast<std::uint32_t>(first);
    chunk.last_sentence = static_cast<std::uint32_t>(i - 1);
    chunk.target = target;
    for (std::size_t s = first; s < i; ++s) {
      if (s > first) chunk.text.push_back(' ');
      chunk.text += sentences[s];
    }
    if (count < target) ++local.chunks_below_target;
    ++local.chunks_emitted;
    local.tokens_emitted += count;
    chunks.push_back(std::move(chunk));
  }
  if (chunks.empty()) local.documents_without_chunks = 1;
  if (report) report->combine(local);
  return chunks;
}

std::vector<Chunk> chunk_document(const Document& doc,
                                  const std::vector<SentenceSpan>& sentences,
                                  const Vocab& vocab, const ChunkConfig& config,
                                  ChunkReport* report) {
  const std::u32string text = unicode::decode(doc.text);
  std::vector<std::string> texts;
  std::vector<std::uint32_t> tokens;
  texts.reserve(sentences.size());
  tokens.reserve(sentences.size());
  for (const auto& span : sentences) {
    if (span.end > text.size() || span.start >= span.end) {
      throw ValidationError("chunk_document: sentence span out of range in " + doc.id);
    }
    texts.push_back(
        unicode::encode(std::u32string_view(text).substr(span.start, span.length())));
    tokens.push_back(static_cast<std::uint32_t>(count_tokens(texts.back(), vocab)));
  }
  return chunk_sentences(doc.id, texts, tokens, config, report);
}

std::vector<Chunk> segment_and_chunk(const Document& doc, const ChunkerContext& ctx,
                                     ChunkReport* report) {
  const auto spans = segment_sentences(std::string_view(doc.text), ctx.abbreviations);
  return chunk_document(doc, spans, ctx.vocab, ctx.config, report);
}

std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs,
                                const ChunkerContext& ctx, unsigned threads,
                                ChunkReport* report) {
  ctx.config.validate();
  std::vector<std::vector<Chunk>> per_doc(docs.size());
  std::vector<ChunkReport> reports(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    per_doc[i] = segment_and_chunk(docs[i], ctx, &reports[i]);
  });
  std::vector<Chunk> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (auto& c : per_doc[i]) out.push_back(std::move(c));
    if (report) report->combine(reports[i]);
  }
  return out;
}

void chunk_corpus(DocumentReader& docs, const ChunkerContext& ctx, unsigned threads,
                  const std::function<void(const Chunk&)>& sink, ChunkReport* report,
                  std::size_t batch_size) {
  ctx.config.validate();
  std::vector<Document> batch;
  batch.reserve(batch_size);
  auto drain = [&] {
    ChunkReport batch_report;
    for (const auto& c : chunk_corpus(batch, ctx, threads, &batch_report)) sink(c);
    if (report) report->combine(batch_report);
    batch.clear();
  };
  while (auto doc = docs.next()) {
    batch.push_back(std::move(*doc));
    if (batch.size() == batch_size) drain();
  }
  if (!batch.empty()) drain();
  if (report) report->errors += docs.errors().size();
}

std::string serialize_chunk(const Chunk& chunk) {
  ordered_json obj;
  obj["doc_id"] = chunk.doc_id;
  obj["index"] = chunk.index;
  obj["text"] = chunk.text;
  obj["token_count"] = chunk.token_count;
  obj["sentence_range"] = {chunk.first_sentence, chunk.last_sentence};
  obj["target"] = chunk.target;
  return obj.dump();
}

Chunk parse_chunk(std::string_view line) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
    Chunk chunk;
    chunk.doc_id = obj.at("doc_id").get<std::string>();
    chunk.index = obj.at("index").get<std::uint32_t>();
    chunk.text = obj.at("text").get<std::string>();
    chunk.token_count = obj.at("token_count").get<std::uint32_t>();
    if (auto it = obj.find("sentence_range"); it != obj.end()) {
      chunk.first_sentence = it->at(0).get<std::uint32_t>();
      chunk.last_sentence = it->at(1).get<std::uint32_t>();
    }
    if (auto it = obj.find("target"); it != obj.end()) {
      chunk.target = it->get<std::uint32_t>();
    }
    return chunk;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid chunk record: ") + e.what());
  }
}

std::string report_to_json(const ChunkReport& r) {
  ordered_json obj;
  obj["documents"] = r.documents;
  obj["documents_without_chunks"] = r.documents_without_chunks;
  obj["sentences"] = r.sentences;
  obj["observations_in"] = r.documents;
  obj["observations_out"] = r.chunks_emitted;
  obj["chunks_discarded"] = r.chunks_discarded;
  obj["chunks_below_target"] = r.chunks_below_target;
  obj["tokens_in"] = r.tokens_in;
  obj["tokens_emitted"] = r.tokens_emitted;
  obj["tokens_discarded"] = r.tokens_discarded;
  obj["record_errors"] = r.errors;
  return obj.dump(2);
}

}  // namespace finprep
