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

// Sentence-aligned chunking of long documents into pre-training
// observations.
//
// For each chunk a minimum token count is drawn from ChunkConfig::targets.
// Sentences of the current document are appended while the running token
// count is below that minimum; the chunk closes as soon as the count reaches
// it or the document runs out of sentences. Chunks below discard_below
// tokens are dropped. Sentences of different documents are never mixed.
//
// Draws come from an Rng keyed by (seed, doc_id), so results do not depend
// on the order or the thread in which documents are processed.

#ifndef FINPREP_CHUNKER_H_
#define FINPREP_CHUNKER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "finprep/corpus.h"
#include "finprep/segmenter.h"
#include "finprep/wordpiece.h"

namespace finprep {

struct ChunkTarget {
  std::uint32_t min_tokens = 0;
  double weight = 1.0;
};

struct ChunkConfig {
  std::vector<ChunkTarget> targets = {{30, 1.0}, {100, 1.0}, {300, 1.0}, {505, 1.0}};
  std::uint32_t discard_below = 11;
  std::uint64_t seed = 0;

  // Throws ValidationError when targets are empty, a weight is not positive,
  // or a target lies below discard_below.
  void validate() const;
};

struct Chunk {
  std::string doc_id;
  std::uint32_t index = 0;        // ordinal among emitted chunks of the document
  std::string text;               // sentences joined by single spaces
  std::uint32_t token_count = 0;
  std::uint32_t first_sentence = 0;
  std::uint32_t last_sentence = 0;  // inclusive
  std::uint32_t target = 0;         // drawn minimum for this chunk

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// Mergeable summary. combine() is associative and commutative.
struct ChunkReport {
  std::uint64_t documents = 0;
  std::uint64_t documents_without_chunks = 0;
  std::uint64_t sentences = 0;
  std::uint64_t chunks_emitted = 0;
  std::uint64_t chunks_discarded = 0;
  std::uint64_t tokens_in = 0;
  std::uint64_t tokens_emitted = 0;
  std::uint64_t tokens_discarded = 0;
  std::uint64_t chunks_below_target = 0;  // final remainders kept
  std::uint64_t errors = 0;

  ChunkReport& combine(const ChunkReport& other);
  friend bool operator==(const ChunkReport&, const ChunkReport&) = default;
};

// Chunks one document given its sentence strings and their token counts.
// The lower-level entry point, used directly by tests.
std::vector<Chunk> chunk_sentences(const std::string& doc_id,
                                   const std::vector<std::string>& sentences,
                                   const std::vector<std::uint32_t>& sentence_tokens,
                                   const ChunkConfig& config, ChunkReport* report = nullptr);

// Chunks `doc` along `sentences`, which must be the segmenter output for
// doc.text.
std::vector<Chunk> chunk_document(const Document& doc,
                                  const std::vector<SentenceSpan>& sentences,
                                  const Vocab& vocab, const ChunkConfig& config,
                                  ChunkReport* report = nullptr);

struct ChunkerContext {
  const Vocab& vocab;
  const AbbreviationSet& abbreviations;
  const ChunkConfig& config;
};

// Segments and chunks one document.
std::vector<Chunk> segment_and_chunk(const Document& doc, const ChunkerContext& ctx,
                                     ChunkReport* report = nullptr);

// Chunks a batch of documents on `threads` workers. Output is the
// concatenation of per-document chunks in input order.
std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs,
                                const ChunkerContext& ctx, unsigned threads,
                                ChunkReport* report);

// Streaming variant: reads `docs` in batches and hands each chunk to
// `sink` in input order.
void chunk_corpus(DocumentReader& docs, const ChunkerContext& ctx, unsigned threads,
                  const std::function<void(const Chunk&)>& sink, ChunkReport* report,
                  std::size_t batch_size = 4096);

std::string serialize_chunk(const Chunk& chunk);
Chunk parse_chunk(std::string_view line);
std::string report_to_json(const ChunkReport& report);

}  // namespace finprep

#endif  // FINPREP_CHUNKER_H_
