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

#include "finprep/wordpiece.h"

#include <fstream>

#include "finprep/error.h"
#include "finprep/unicode.h"

namespace finprep {
namespace {

// Calls emit(word, start) for every basic word. Shared by the allocating
// and the counting paths.
template <typename Emit>
void for_each_basic_word(std::string_view text, Emit&& emit) {
  std::string word;
  std::size_t word_start = 0;
  std::size_t index = 0;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!word.empty()) {
      emit(std::string_view(word), word_start);
      word.clear();
    }
  };
  while (pos < text.size()) {
    const char32_t c = unicode::next_scalar(text, pos);
    const std::size_t at = index++;
    if (unicode::is_whitespace(c)) {
      flush();
      continue;
    }
    if (c == 0 || c == unicode::kReplacement || unicode::is_control(c)) continue;
    if (unicode::is_punctuation(c) || unicode::is_cjk(c)) {
      flush();
      std::string single;
      unicode::append(single, c);
      emit(std::string_view(single), at);
      continue;
    }
    if (word.empty()) word_start = at;
    unicode::append(word, c);
  }
  flush();
}

// Greedy longest match. Returns false when the word maps to [UNK].
template <typename Sink>
bool greedy_pieces(std::string_view word, const Vocab& vocab,
                   std::size_t max_word_chars, Sink&& sink) {
  std::vector<std::size_t> bounds;  // byte offset of each scalar, plus end
  bounds.reserve(word.size() + 1);
  for (std::size_t pos = 0; pos < word.size();) {
    bounds.push_back(pos);
    unicode::next_scalar(word, pos);
  }
  const std::size_t n = bounds.size();
  bounds.push_back(word.size());
  if (n == 0 || n > max_word_chars) return false;

  std::vector<TokenId> pieces;
  std::string candidate;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = n;
    std::optional<TokenId> match;
    while (start < end) {
      candidate.clear();
      if (start > 0) candidate = "##";
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      match = vocab.find(candidate);
      if (match) break;
      --end;
    }
    if (!match) return false;
    pieces.push_back(*match);
    start = end;
  }
  for (TokenId id : pieces) sink(id);
  return true;
}

}  // namespace

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocab file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read failure in " + path.string());
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab vocab;
  vocab.tokens_ = std::move(tokens);
  vocab.index_.reserve(vocab.tokens_.size());
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    auto [it, inserted] = vocab.index_.emplace(vocab.tokens_[i], id);
    if (!inserted) {
      throw FormatError("duplicate vocab token '" + vocab.tokens_[i] + "' at lines " +
                        std::to_string(it->second + 1) + " and " +
                        std::to_string(i + 1));
    }
  }
  auto special = [&](std::string_view name) {
    auto id = vocab.find(name);
    if (!id) throw FormatError("vocab is missing special token " + std::string(name));
    return *id;
  };
  vocab.pad_ = special(kPadToken);
  vocab.unk_ = special(kUnkToken);
  vocab.cls_ = special(kClsToken);
  vocab.sep_ = special(kSepToken);
  vocab.mask_ = special(kMaskToken);
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    if (!vocab.is_special(id)) vocab.regular_.push_back(id);
  }
  return vocab;
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<BasicWord> basic_tokenize(std::string_view text) {
  std::vector<BasicWord> words;
  for_each_basic_word(text, [&](std::string_view w, std::size_t start) {
    words.push_back({std::string(w), start});
  });
  return words;
}

std::vector<std::string> wordpiece_tokenize(std::string_view word, const Vocab& vocab,
                                            std::size_t max_word_chars) {
  std::vector<std::string> out;
  const bool ok = greedy_pieces(word, vocab, max_word_chars,
                                [&](TokenId id) { out.push_back(vocab.token(id)); });
  if (!ok) out.assign(1, std::string(kUnkToken));
  return out;
}

std::size_t append_wordpiece_ids(std::string_view word, const Vocab& vocab,
                                 std::vector<TokenId>& out, std::size_t max_word_chars) {
  const std::size_t before = out.size();
  if (!greedy_pieces(word, vocab, max_word_chars,
                     [&](TokenId id) { out.push_back(id); })) {
    out.push_back(vocab.unk_id());
  }
  return out.size() - before;
}

std::size_t TokenSequence::real_length() const {
  std::size_t n = 0;
  for (auto a : attention) n += a;
  return n;
}

TokenSequence encode(std::string_view text, const Vocab& vocab, std::size_t max_len,
                     bool add_specials) {
  const std::size_t reserved = add_specials ? 2 : 0;
  if (max_len < reserved) {
    throw ValidationError("encode: max_len " + std::to_string(max_len) +
                          " cannot hold [CLS] and [SEP]");
  }
  const std::size_t capacity = max_len - reserved;

  TokenSequence seq;
  seq.ids.reserve(max_len);
  if (add_specials) seq.ids.push_back(vocab.cls_id());
  const std::size_t offset = seq.ids.size();

  std::vector<TokenId> pieces;
  std::vector<std::uint32_t> starts;
  bool full = false;
  for_each_basic_word(text, [&](std::string_view w, std::size_t) {
    if (full) return;
    const std::size_t first = pieces.size();
    append_wordpiece_ids(w, vocab, pieces);
    if (first < capacity) starts.push_back(static_cast<std::uint32_t>(first + offset));
    if (pieces.size() >= capacity) full = true;
  });
  if (pieces.size() > capacity) pieces.resize(capacity);

  seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
  if (add_specials) seq.ids.push_back(vocab.sep_id());
  seq.attention.assign(seq.ids.size(), 1);
  seq.ids.resize(max_len, vocab.pad_id());
  seq.attention.resize(max_len, 0);
  seq.word_starts = std::move(starts);
  return seq;
}

std::size_t count_tokens(std::string_view text, const Vocab& vocab) {
  std::size_t total = 0;
  std::vector<TokenId> scratch;
  for_each_basic_word(text, [&](std::string_view w, std::size_t) {
    scratch.clear();
    total += append_wordpiece_ids(w, vocab, scratch);
  });
  return total;
}

}  // namespace finprep
