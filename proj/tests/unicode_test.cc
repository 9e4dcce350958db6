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

#include "finprep/unicode.h"

#include <gtest/gtest.h>

namespace finprep::unicode {
namespace {

TEST(Utf8Test, DecodeEncodeRoundTrip) {
  const std::string s = "Umsätze – 5 € (§ 15) 株";
  EXPECT_EQ(encode(decode(s)), s);
  EXPECT_EQ(scalar_length(s), decode(s).size());
}

TEST(Utf8Test, IllFormedBytesBecomeReplacementCharacter) {
  const std::string s = "a\xFF" "b";
  const auto d = decode(s);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[1], U'�');
}

TEST(Utf8Test, ByteOffsetOfScalarIndex) {
  const std::string s = "Müller";
  EXPECT_EQ(byte_offset(s, 0), 0u);
  EXPECT_EQ(byte_offset(s, 2), 3u);
  EXPECT_EQ(byte_offset(s, 6), s.size());
}

TEST(CharClassTest, Whitespace) {
  EXPECT_TRUE(is_whitespace(U' '));
  EXPECT_TRUE(is_whitespace(U'\t'));
  EXPECT_TRUE(is_whitespace(U' '));
  EXPECT_TRUE(is_whitespace(U' '));
  EXPECT_FALSE(is_whitespace(U'x'));
}

TEST(CharClassTest, Punctuation) {
  for (char32_t c : {U'.', U',', U'!', U'(', U'§', U'„', U'–', U'$'}) {
    EXPECT_TRUE(is_punctuation(c)) << static_cast<std::uint32_t>(c);
  }
  for (char32_t c : {U'a', U'ß', U'5', U' ', U'€'}) {
    EXPECT_FALSE(is_punctuation(c)) << static_cast<std::uint32_t>(c);
  }
}

TEST(CharClassTest, LettersDigitsCase) {
  EXPECT_TRUE(is_letter(U'ä'));
  EXPECT_TRUE(is_upper(U'Ä'));
  EXPECT_FALSE(is_upper(U'ß'));
  EXPECT_TRUE(is_digit(U'7'));
  EXPECT_FALSE(is_letter(U'7'));
  EXPECT_TRUE(is_cjk(U'株'));
}

TEST(CharClassTest, ControlCharacters) {
  EXPECT_TRUE(is_control(U'\x01'));
  EXPECT_TRUE(is_control(U'​'));
  EXPECT_FALSE(is_control(U'\n'));
  EXPECT_FALSE(is_control(U'\t'));
}

TEST(CaseTest, ToLower) {
  EXPECT_EQ(to_lower("ÄÖÜ Straße ABC"), "äöü straße abc");
}

TEST(TrimTest, TrimsUnicodeWhitespace) {
  EXPECT_EQ(trim("  Hallo \n"), "Hallo");
  EXPECT_EQ(trim("   "), "");
}

}  // namespace
}  // namespace finprep::unicode
