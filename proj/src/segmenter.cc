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

#include "finprep/segmenter.h"

#include <fstream>
#include <sstream>

#include "finprep/error.h"
#include "finprep/resources.h"
#include "finprep/unicode.h"

namespace finprep {
namespace {

bool is_terminator(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == U':';
}

bool is_closer(char32_t c) {
  switch (c) {
    case U'"':
    case U'\'':
    case U')':
    case U']':
    case U'}':
    case U'»':
    case U'«':
    case U'“':  // German closing quote
    case U'”':
    case U'‘':
    case U'’':
    case U'›':
    case U'‹':
      return true;
    default:
      return false;
  }
}

bool is_opener(char32_t c) {
  switch (c) {
    case U'"':
    case U'\'':
    case U'(':
    case U'[':
    case U'{':
    case U'„':
    case U'‚':
    case U'“':
    case U'‘':
    case U'«':
    case U'»':
    case U'‹':
    case U'›':
      return true;
    default:
      return false;
  }
}

// The word ending at the period t[dot], without leading openers.
std::u32string_view word_before(std::u32string_view t, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !unicode::is_whitespace(t[begin - 1])) --begin;
  while (begin < dot && is_opener(t[begin])) ++begin;
  return t.substr(begin, dot + 1 - begin);
}

// "3.", "15.", "31.12." and similar ordinal or date fragments.
bool is_numeric_fragment(std::u32string_view word) {
  std::size_t digits = 0;
  std::size_t run = 0;
  for (char32_t c : word) {
    if (unicode::is_digit(c)) {
      ++digits;
      if (++run > 3) return false;
    } else if (c == U'.') {
      run = 0;
    } else {
      return false;
    }
  }
  return digits > 0;
}

bool suppresses_boundary(std::u32string_view t, std::size_t dot,
                         const AbbreviationSet& abbreviations) {
  const auto word = word_before(t, dot);
  if (word.size() == 2 && unicode::is_letter(word[0])) return true;
  if (is_numeric_fragment(word)) return true;
  return abbreviations.contains(unicode::encode(word));
}

}  // namespace

AbbreviationSet AbbreviationSet::defaults() {
  return parse(resources::abbreviations_de());
}

AbbreviationSet AbbreviationSet::parse(std::string_view content) {
  AbbreviationSet set;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    auto entry = unicode::trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    set.add(std::string(entry));
  }
  return set;
}

AbbreviationSet AbbreviationSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open abbreviation list " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void AbbreviationSet::merge(const AbbreviationSet& other) {
  entries_.insert(other.entries_.begin(), other.entries_.end());
}

bool AbbreviationSet::contains(std::string_view word) const {
  return entries_.find(std::string(word)) != entries_.end();
}

std::vector<SentenceSpan> segment_sentences(std::u32string_view t,
                                            const AbbreviationSet& abbreviations) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = t.size();
  std::size_t start = 0;
  while (start < n && unicode::is_whitespace(t[start])) ++start;

  std::size_t i = start;
  while (i < n) {
    if (!is_terminator(t[i])) {
      ++i;
      continue;
    }
    // Terminator run plus closing quotes/brackets.
    std::size_t j = i;
    bool only_colons = true;
    while (j < n && (is_terminator(t[j]) || is_closer(t[j]))) {
      if (is_terminator(t[j]) && t[j] != U':') only_colons = false;
      ++j;
    }
    if (j >= n || !unicode::is_whitespace(t[j])) {
      i = j;
      continue;
    }
    std::size_t k = j;
    while (k < n && unicode::is_whitespace(t[k])) ++k;
    std::size_t m = k;
    while (m < n && is_opener(t[m])) ++m;
    if (m >= n) break;

    const char32_t next = t[m];
    const bool starts_sentence =
        only_colons ? unicode::is_upper(next)
                    : unicode::is_upper(next) || unicode::is_digit(next);
    const bool lone_period = t[i] == U'.' && (i + 1 == j || !is_terminator(t[i + 1]));
    if (!starts_sentence ||
        (lone_period && suppresses_boundary(t, i, abbreviations))) {
      i = j;
      continue;
    }
    spans.push_back({start, j});
    start = k;
    i = k;
  }
  if (start < n) {
    std::size_t end = n;
    while (end > start && unicode::is_whitespace(t[end - 1])) --end;
    if (end > start) spans.push_back({start, end});
  }
  return spans;
}

std::vector<SentenceSpan> segment_sentences(std::string_view utf8,
                                            const AbbreviationSet& abbreviations) {
  return segment_sentences(std::u32string_view(unicode::decode(utf8)), abbreviations);
}

std::vector<std::string> split_sentences(std::string_view utf8,
                                         const AbbreviationSet& abbreviations) {
  const std::u32string text = unicode::decode(utf8);
  const auto spans = segment_sentences(std::u32string_view(text), abbreviations);
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (const auto& s : spans) {
    out.push_back(unicode::encode(std::u32string_view(text).substr(s.start, s.length())));
  }
  return out;
}

std::size_t count_words(std::string_view utf8) {
  std::size_t words = 0;
  bool in_run = false;
  bool has_alnum = false;
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    const char32_t c = unicode::next_scalar(utf8, pos);
    if (unicode::is_whitespace(c)) {
      if (in_run && has_alnum) ++words;
      in_run = false;
      has_alnum = false;
    } else {
      in_run = true;
      has_alnum = has_alnum || unicode::is_alnum(c);
    }
  }
  if (in_run && has_alnum) ++words;
  return words;
}

}  // namespace finprep
