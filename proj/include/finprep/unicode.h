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

// Minimal UTF-8 codec and character classes.
//
// The classes are table-driven approximations of the Unicode general
// categories that matter for European text: letters, decimal digits,
// punctuation (P*), whitespace (Zs plus ASCII spaces) and controls (Cc, Cf).
// Coverage is complete for Latin, Greek and Cyrillic; other scripts are
// covered at block granularity.

#ifndef FINPREP_UNICODE_H_
#define FINPREP_UNICODE_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace finprep::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one scalar starting at `pos` and advances `pos`. Ill-formed
// sequences decode to U+FFFD and consume one byte.
char32_t next_scalar(std::string_view s, std::size_t& pos);

std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t c);

// Number of Unicode scalars in `utf8`.
std::size_t scalar_length(std::string_view utf8);

// Byte offset of the scalar with index `scalar_index`, or s.size() when the
// index is at or past the end.
std::size_t byte_offset(std::string_view utf8, std::size_t scalar_index);

bool is_whitespace(char32_t c);
bool is_control(char32_t c);
bool is_punctuation(char32_t c);
bool is_letter(char32_t c);
bool is_digit(char32_t c);
bool is_upper(char32_t c);
bool is_cjk(char32_t c);
inline bool is_alnum(char32_t c) { return is_letter(c) || is_digit(c); }

char32_t to_lower(char32_t c);
std::string to_lower(std::string_view utf8);

// Trims Unicode whitespace from both ends.
std::string_view trim(std::string_view utf8);

}  // namespace finprep::unicode

#endif  // FINPREP_UNICODE_H_
