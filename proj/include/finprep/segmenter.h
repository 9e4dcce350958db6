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

// Rule-based sentence segmentation for German prose.
//
// A boundary is placed after a run of terminators ('.', '!', '?', ':'),
// optionally followed by closing quotes or brackets, when the run is
// followed by whitespace and the next sentence starts (after any opening
// quotes or brackets) with an uppercase letter or a digit. A colon needs an
// uppercase letter. A single period does not end a sentence when the word it
// closes is a known abbreviation ("z.B.", "bzw."), a short number or date
// fragment ("3.", "31.12.") or a single-letter initial ("M.").
//
// Offsets are Unicode scalar indices.

#ifndef FINPREP_SEGMENTER_H_
#define FINPREP_SEGMENTER_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace finprep {

// Half-open range [start, end) of Unicode scalars.
struct SentenceSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

class AbbreviationSet {
 public:
  AbbreviationSet() = default;

  // The shipped German list.
  static AbbreviationSet defaults();
  // One abbreviation per line, '#' comments.
  static AbbreviationSet parse(std::string_view content);
  static AbbreviationSet load(const std::filesystem::path& path);

  void add(std::string abbreviation) { entries_.insert(std::move(abbreviation)); }
  // Appends every entry of `other`.
  void merge(const AbbreviationSet& other);
  bool contains(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

std::vector<SentenceSpan> segment_sentences(std::u32string_view text,
                                            const AbbreviationSet& abbreviations);
std::vector<SentenceSpan> segment_sentences(std::string_view utf8,
                                            const AbbreviationSet& abbreviations);

// Segments and returns the sentence strings themselves (UTF-8).
std::vector<std::string> split_sentences(std::string_view utf8,
                                         const AbbreviationSet& abbreviations);

// Maximal non-whitespace runs that contain at least one letter or digit.
std::size_t count_words(std::string_view utf8);

}  // namespace finprep

#endif  // FINPREP_SEGMENTER_H_
