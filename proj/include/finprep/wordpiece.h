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

// Cased WordPiece tokenizer reading standard BERT vocab.txt files.

#ifndef FINPREP_WORDPIECE_H_
#define FINPREP_WORDPIECE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace finprep {

using TokenId = std::int32_t;

inline constexpr std::size_t kMaxSequenceLength = 512;
inline constexpr std::size_t kMaxWordChars = 100;

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kMaskToken = "[MASK]";

// Immutable token table; id = zero-based line number of vocab.txt.
class Vocab {
 public:
  // Throws FormatError on a missing special token or a duplicate entry,
  // IoError when the file cannot be read.
  static Vocab load(const std::filesystem::path& path);
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view token) const;

  TokenId pad_id() const { return pad_; }
  TokenId unk_id() const { return unk_; }
  TokenId cls_id() const { return cls_; }
  TokenId sep_id() const { return sep_; }
  TokenId mask_id() const { return mask_; }
  bool is_special(TokenId id) const {
    return id == pad_ || id == unk_ || id == cls_ || id == sep_ || id == mask_;
  }
  // Every id except the five specials, ascending.
  const std::vector<TokenId>& regular_ids() const { return regular_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  Vocab() = default;

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> index_;
  std::vector<TokenId> regular_;
  TokenId pad_ = -1;
  TokenId unk_ = -1;
  TokenId cls_ = -1;
  TokenId sep_ = -1;
  TokenId mask_ = -1;
};

struct BasicWord {
  std::string text;
  std::size_t start = 0;  // Unicode scalar offset into the input

  friend bool operator==(const BasicWord&, const BasicWord&) = default;
};

// BERT pre-tokenization without lowercasing: drops control characters,
// splits on whitespace, and isolates punctuation and CJK ideographs as
// single-character words.
std::vector<BasicWord> basic_tokenize(std::string_view text);

// Greedy longest-prefix WordPiece for one word. Falls back to a single
// [UNK] when any remainder has no match or the word is too long.
std::vector<std::string> wordpiece_tokenize(std::string_view word, const Vocab& vocab,
                                            std::size_t max_word_chars = kMaxWordChars);

// As wordpiece_tokenize, appending ids. Returns the number appended.
std::size_t append_wordpiece_ids(std::string_view word, const Vocab& vocab,
                                 std::vector<TokenId>& out,
                                 std::size_t max_word_chars = kMaxWordChars);

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> attention;      // 1 = real token, 0 = padding
  std::vector<std::uint32_t> word_starts;   // index of each word's first piece

  std::size_t real_length() const;
};

// [CLS] pieces [SEP] (when add_specials), truncated so that [SEP] stays the
// last real token, then right-padded with [PAD] to max_len.
TokenSequence encode(std::string_view text, const Vocab& vocab,
                     std::size_t max_len = kMaxSequenceLength, bool add_specials = true);

// Number of WordPiece pieces, excluding specials and padding.
std::size_t count_tokens(std::string_view text, const Vocab& vocab);

}  // namespace finprep

#endif  // FINPREP_WORDPIECE_H_
