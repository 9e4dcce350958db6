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

// Labeled datasets: stratified train/validation/test splits, paragraph
// construction from labeled sentences, and per-topic paragraph pools.

#ifndef FINPREP_DATASETS_H_
#define FINPREP_DATASETS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace finprep {

struct LabeledExample {
  std::string id;
  std::string text;
  std::vector<std::string> labels;  // sorted, unique, non-empty

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;

  // Throws ValidationError unless all three are positive and sum to 1.
  void validate() const;
  std::array<double, 3> as_array() const { return {train, validation, test}; }
};

inline constexpr std::array<const char*, 3> kSplitNames = {"train", "validation", "test"};

struct SplitResult {
  std::array<std::vector<LabeledExample>, 3> parts;  // train, validation, test
  std::vector<std::string> warnings;
  bool multi_label = false;

  // Per-label example counts in each split.
  std::map<std::string, std::array<std::uint64_t, 3>> label_counts() const;
};

// Single-label data: each class is shuffled and cut with largest-remainder
// rounding, so every per-class split count is the floor or ceiling of its
// exact share. Multi-label data: iterative stratification. Input order does
// not matter; examples are sorted by id before seeding.
SplitResult stratified_split(std::vector<LabeledExample> examples,
                             const SplitFractions& fractions, std::uint64_t seed);

// Canonicalizes labels (sort + dedupe) and checks the example invariants.
LabeledExample make_labeled_example(std::string id, std::string text,
                                    std::vector<std::string> labels);

std::vector<LabeledExample> read_labeled_examples(const std::filesystem::path& path);
void write_labeled_examples(const std::vector<LabeledExample>& examples,
                            const std::filesystem::path& path);
std::string split_report_json(const SplitResult& result, const SplitFractions& fractions,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Paragraphs

struct LabeledSentence {
  std::string text;
  std::vector<std::string> labels;
};

struct Announcement {
  std::string id;
  std::vector<LabeledSentence> sentences;  // document order
};

struct Paragraph {
  std::string id;
  std::string announcement_id;
  std::string text;
  std::vector<std::string> labels;  // union over member sentences, sorted
  std::uint32_t sentence_count = 0;

  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

// Groups sentences into paragraphs of three; a lone trailing sentence turns
// the last two groups into 2 + 2. An announcement with a single sentence
// gives a single one-sentence paragraph.
std::vector<Paragraph> build_paragraphs(const Announcement& announcement);

// Group sizes used by build_paragraphs for n sentences.
std::vector<std::uint32_t> paragraph_sizes(std::size_t n);

std::vector<Announcement> read_announcements(const std::filesystem::path& path);
std::vector<Paragraph> read_paragraphs(const std::filesystem::path& path);
void write_paragraphs(const std::vector<Paragraph>& paragraphs,
                      const std::filesystem::path& path);

struct TopicPool {
  std::vector<Paragraph> paragraphs;  // sorted by id, unique
  std::map<std::string, std::uint64_t> drawn_per_topic;
  std::vector<std::string> warnings;
};

// Draws up to per_topic carriers of every topic without replacement and
// returns the deduplicated union. An empty `topics` means every label seen.
TopicPool sample_topic_pool(const std::vector<Paragraph>& paragraphs, std::uint32_t per_topic,
                            std::vector<std::string> topics, std::uint64_t seed);

}  // namespace finprep

#endif  // FINPREP_DATASETS_H_
