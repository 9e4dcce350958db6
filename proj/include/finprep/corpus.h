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

// Document ingestion, language filtering and JSONL serialization.
//
// A corpus file holds one JSON object per line:
//
//   {"id": "...", "source": "...", "text": "...",
//    "published": "2021-03-04", "labels": ["..."]}
//
// `published` and `labels` are optional. Readers stream: only the current
// record is held in memory, plus the set of ids seen so far when duplicate
// detection is on.

#ifndef FINPREP_CORPUS_H_
#define FINPREP_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace finprep {

struct Document {
  std::string id;
  std::string source;
  std::string text;
  std::optional<std::string> published;
  std::optional<std::vector<std::string>> labels;

  friend bool operator==(const Document&, const Document&) = default;
};

// Checks the record-level invariants. Returns an empty string when valid,
// otherwise the reason.
std::string validate_document(const Document& doc);

// A rejected input line.
struct RecordError {
  std::uint64_t line = 0;  // 1-based
  std::string reason;

  friend bool operator==(const RecordError&, const RecordError&) = default;
};

struct ReaderOptions {
  bool reject_duplicate_ids = true;
};

// Streams documents from a JSONL file. Malformed lines are recorded in
// errors() and skipped; they never abort the stream.
class DocumentReader {
 public:
  // Throws IoError when the file cannot be opened.
  explicit DocumentReader(const std::filesystem::path& path,
                          ReaderOptions options = {});

  // Next valid document, or nullopt at end of file.
  std::optional<Document> next();

  const std::vector<RecordError>& errors() const { return errors_; }
  std::uint64_t lines_read() const { return line_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  ReaderOptions options_;
  std::uint64_t line_ = 0;
  std::vector<RecordError> errors_;
  std::unordered_set<std::string> seen_ids_;
};

struct ReadResult {
  std::vector<Document> documents;
  std::vector<RecordError> errors;
};

// Reads a whole file. Convenience for small inputs and tests.
ReadResult read_documents(const std::filesystem::path& path,
                          ReaderOptions options = {});

// Parses one JSONL record. Throws FormatError with the reason on failure.
Document parse_document(std::string_view line);
std::string serialize_document(const Document& doc);

// Writes documents as JSONL. Write failures throw IoError carrying the
// number of records already written.
class DocumentWriter {
 public:
  explicit DocumentWriter(const std::filesystem::path& path);

  void write(const Document& doc);
  // Flushes and closes; throws IoError if the stream went bad.
  void close();
  std::uint64_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t count_ = 0;
};

std::uint64_t write_documents(const std::vector<Document>& docs,
                              const std::filesystem::path& path);

// Error report: one {"line": n, "reason": "..."} object per line.
void write_error_report(const std::vector<RecordError>& errors,
                        const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Language filtering

using StopwordSet = std::unordered_set<std::string>;

// Parses a word list: one entry per line, '#' comments, blank lines ignored.
// Entries are lowercased.
StopwordSet parse_word_list(std::string_view content);
StopwordSet load_word_list(const std::filesystem::path& path);

struct LanguageConfig {
  StopwordSet german;
  StopwordSet english;
  // Minimum share of German stopwords among word tokens.
  double german_floor = 0.05;

  // Config built from the shipped lists.
  static LanguageConfig defaults();
};

struct LanguageDecision {
  bool keep = false;
  double score = 0.0;  // German stopword ratio, in [0, 1]
  std::string method = "stopword-ratio";
};

// Votes German vs English by stopword ratio over lowercased letter runs.
// keep iff german_ratio >= english_ratio and german_ratio >= german_floor.
LanguageDecision classify_language(std::string_view text,
                                   const LanguageConfig& config);

// Predicate deciding whether a document stays in the corpus.
using DocumentFilter = std::function<bool(const Document&)>;

DocumentFilter language_filter(LanguageConfig config);

// Drops documents whose id is listed, e.g. to keep evaluation documents out
// of a pre-training corpus.
DocumentFilter blocklist_filter(std::unordered_set<std::string> blocked_ids);

// Reads one id per line ('#' comments allowed).
std::unordered_set<std::string> load_id_list(const std::filesystem::path& path);

}  // namespace finprep

#endif  // FINPREP_CORPUS_H_
