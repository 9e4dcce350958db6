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

#include <gtest/gtest.h>

#include "finprep/error.h"
#include "support/temp_dir.h"

namespace finprep {
namespace {

const Vocab& fixture_vocab() {
  static const Vocab vocab = Vocab::load(std::string(FINPREP_FIXTURES) + "/wordpiece_vocab.txt");
  return vocab;
}

using Pieces = std::vector<std::string>;

Pieces wp(std::string_view word) { return wordpiece_tokenize(word, fixture_vocab()); }

TEST(VocabTest, SpecialIdsFollowLineNumbers) {
  const auto& v = fixture_vocab();
  EXPECT_EQ(v.pad_id(), 0);
  EXPECT_EQ(v.unk_id(), 1);
  EXPECT_EQ(v.cls_id(), 2);
  EXPECT_EQ(v.sep_id(), 3);
  EXPECT_EQ(v.mask_id(), 4);
  EXPECT_EQ(v.regular_ids().size(), v.size() - 5);
  EXPECT_EQ(v.token(*v.find("Umsatz")), "Umsatz");
}

TEST(VocabTest, RejectsDuplicatesAndMissingSpecials) {
  EXPECT_THROW(Vocab::from_tokens({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "a", "a"}),
               FormatError);
  EXPECT_THROW(Vocab::from_tokens({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "a"}), FormatError);
  EXPECT_THROW(Vocab::load("/nonexistent/vocab.txt"), IoError);
}

TEST(VocabTest, CrlfLinesAreAccepted) {
  testing::TempDir dir;
  auto v = Vocab::load(dir.write("v.txt", "[PAD]\r\n[UNK]\r\n[CLS]\r\n[SEP]\r\n[MASK]\r\nab\r\n"));
  EXPECT_EQ(v.find("ab"), 5);
}

TEST(WordPieceTest, GreedyLongestMatch) {
  EXPECT_EQ(wp("unable"), (Pieces{"un", "##able"}));
  EXPECT_EQ(wp("able"), (Pieces{"able"}));
  EXPECT_EQ(wp("unab"), (Pieces{"un", "##ab"}));
  EXPECT_EQ(wp("unle"), (Pieces{"un", "##le"}));
}

TEST(WordPieceTest, GermanCompounds) {
  EXPECT_EQ(wp("Umsatz"), (Pieces{"Umsatz"}));
  EXPECT_EQ(wp("Umsatzsteuer"), (Pieces{"Umsatz", "##steuer"}));
  EXPECT_EQ(wp("Umsatzes"), (Pieces{"Umsatz", "##es"}));
  EXPECT_EQ(wp("Gewinnwarnung"), (Pieces{"Gewinn", "##warnung"}));
  EXPECT_EQ(wp("Gewinnwarn"), (Pieces{"Gewinn", "##war", "##n"}));
  EXPECT_EQ(wp("Aktien"), (Pieces{"Aktie", "##n"}));
  EXPECT_EQ(wp("Aktiengesellschaft"), (Pieces{"Aktie", "##n", "##gesellschaft"}));
  EXPECT_EQ(wp("Bilanzsumme"), (Pieces{"Bilanz", "##summe"}));
  EXPECT_EQ(wp("Quartalsbericht"), (Pieces{"Quartal", "##s", "##bericht"}));
  EXPECT_EQ(wp("Vorjahres"), (Pieces{"Vor", "##jahr", "##es"}));
  EXPECT_EQ(wp("Konzernabschluss"), (Pieces{"Konzern", "##abschluss"}));
  EXPECT_EQ(wp("Steuern"), (Pieces{"Steuer", "##n"}));
}

TEST(WordPieceTest, Numbers) {
  EXPECT_EQ(wp("305"), (Pieces{"3", "##0", "##5"}));
  EXPECT_EQ(wp("15"), (Pieces{"15"}));
}

TEST(WordPieceTest, UnknownWholeWord) {
  EXPECT_EQ(wp("xyzzy"), (Pieces{"[UNK]"}));
  EXPECT_EQ(wp("Umsatzx"), (Pieces{"[UNK]"}));
  EXPECT_EQ(wp("Umsätze"), (Pieces{"[UNK]"}));
  EXPECT_EQ(wp("umsatz"), (Pieces{"[UNK]"}));  // cased
}

TEST(WordPieceTest, MaxWordLength) {
  const std::string ok = "un" + std::string(98, 'a');
  Pieces expected{"un"};
  expected.insert(expected.end(), 98, "##a");
  EXPECT_EQ(wp(ok), expected);
  EXPECT_EQ(wp(ok + "a"), (Pieces{"[UNK]"}));
}

TEST(WordPieceTest, IdsMatchPieces) {
  std::vector<TokenId> ids;
  EXPECT_EQ(append_wordpiece_ids("Quartalsbericht", fixture_vocab(), ids), 3u);
  EXPECT_EQ(fixture_vocab().token(ids[2]), "##bericht");
  EXPECT_EQ(append_wordpiece_ids("xyzzy", fixture_vocab(), ids), 1u);
  EXPECT_EQ(ids.back(), fixture_vocab().unk_id());
}

TEST(BasicTokenizeTest, SplitsPunctuationAndDropsControls) {
  const auto words = basic_tokenize("Hallo,\u200B Welt! (§ 15 WpHG)");
  std::vector<std::string> texts;
  for (const auto& w : words) texts.push_back(w.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"Hallo", ",", "Welt", "!", "(", "§", "15", "WpHG",
                                             ")"}));
  EXPECT_EQ(words[2].start, 8u);
}

TEST(EncodeTest, AddsSpecialsAndPads) {
  const auto& v = fixture_vocab();
  auto seq = encode("Hallo Welt!", v, 8);
  EXPECT_EQ(seq.ids, (std::vector<TokenId>{v.cls_id(), *v.find("Hallo"), *v.find("Welt"),
                                           *v.find("!"), v.sep_id(), 0, 0, 0}));
  EXPECT_EQ(seq.attention, (std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0, 0, 0}));
  EXPECT_EQ(seq.word_starts, (std::vector<std::uint32_t>{1, 2, 3}));
  EXPECT_EQ(seq.real_length(), 5u);
}

TEST(EncodeTest, WithoutSpecials) {
  auto seq = encode("Hallo Welt", fixture_vocab(), 3, false);
  EXPECT_EQ(seq.real_length(), 2u);
  EXPECT_EQ(seq.ids[0], *fixture_vocab().find("Hallo"));
}

TEST(EncodeTest, FullChunkFitsWithSpecials) {
  std::string text;
  for (int i = 0; i < 505; ++i) text += "Hallo ";
  ASSERT_EQ(count_tokens(text, fixture_vocab()), 505u);
  auto seq = encode(text, fixture_vocab());
  EXPECT_EQ(seq.ids.size(), kMaxSequenceLength);
  EXPECT_EQ(seq.real_length(), 507u);
  EXPECT_EQ(seq.ids[506], fixture_vocab().sep_id());
}

TEST(EncodeTest, TruncationKeepsSepLast) {
  std::string text;
  for (int i = 0; i < 300; ++i) text += "Quartalsbericht ";  // 900 pieces
  auto seq = encode(text, fixture_vocab());
  EXPECT_EQ(seq.real_length(), kMaxSequenceLength);
  EXPECT_EQ(seq.ids.back(), fixture_vocab().sep_id());
  EXPECT_EQ(seq.word_starts.size(), 170u);  // words starting within the 510 slots
}

TEST(EncodeTest, RejectsTinyMaxLen) {
  EXPECT_THROW(encode("Hallo", fixture_vocab(), 1), ValidationError);
}

TEST(CountTokensTest, ExcludesSpecials) {
  EXPECT_EQ(count_tokens("", fixture_vocab()), 0u);
  EXPECT_EQ(count_tokens("Umsatzsteuer, Vorjahres.", fixture_vocab()), 7u);
}

}  // namespace
}  // namespace finprep
