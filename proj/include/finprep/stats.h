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

// Corpus statistics: per-source document/sentence/word/token/byte totals,
// exact per-document token-count quantiles, and truncation loss at a
// sequence-length limit.
//
// Quantiles use the nearest-rank definition: the p-quantile of n sorted
// values is the value at 1-based rank ceil(p * n), and the 0-quantile is the
// minimum. No interpolation.

#ifndef FINPREP_STATS_H_
#define FINPREP_STATS_H_

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finprep/corpus.h"
#include "finprep/segmenter.h"
#include "finprep/wordpiece.h"

namespace finprep {

struct DocumentProfile {
  std::uint64_t sentences = 0;
  std::uint64_t words = 0;
  std::uint64_t tokens = 0;
  std::uint64_t bytes = 0;

  friend bool operator==(const DocumentProfile&, const DocumentProfile&) = default;
};

DocumentProfile profile_document(const Document& doc, const Vocab& vocab,
                                 const AbbreviationSet& abbreviations);

struct Totals {
  std::uint64_t documents = 0;
  std::uint64_t sentences = 0;
  std::uint64_t words = 0;
  std::uint64_t tokens = 0;
  std::uint64_t bytes = 0;

  Totals& add(const DocumentProfile& p);
  Totals& combine(const Totals& o);
  friend bool operator==(const Totals&, const Totals&) = default;
};

// Probe points in percent.
inline constexpr std::array<std::uint32_t, 7> kQuantileProbes = {0, 1, 10, 50, 90, 99, 100};

// Values at kQuantileProbes: min, 1%, 10%, 50%, 90%, 99%, max.
using QuantileProfile = std::array<std::uint64_t, kQuantileProbes.size()>;

// Nearest-rank quantile of an ascending, non-empty sequence.
std::uint64_t nearest_rank(std::span<const std::uint64_t> sorted, std::uint32_t percent);

// Quantile profile; nullopt for an empty input.
std::optional<QuantileProfile> quantile_profile(std::vector<std::uint64_t> values);

struct SourceStats {
  Totals totals;
  std::optional<QuantileProfile> token_quantiles;

  friend bool operator==(const SourceStats&, const SourceStats&) = default;
};

struct CorpusStats {
  std::map<std::string, SourceStats> sources;
  SourceStats total;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

// Collects profiles; merging two accumulators equals accumulating the
// concatenated streams. Keeps one count per document for exact quantiles.
class StatsAccumulator {
 public:
  void add(const std::string& source, const DocumentProfile& profile);
  StatsAccumulator& merge(const StatsAccumulator& other);
  CorpusStats finish() const;

  // Token counts of every document added so far, in insertion order.
  const std::vector<std::uint64_t>& token_counts() const { return all_tokens_; }

 private:
  struct PerSource {
    Totals totals;
    std::vector<std::uint64_t> tokens;
  };
  std::map<std::string, PerSource> sources_;
  std::vector<std::uint64_t> all_tokens_;
};

struct TruncationReport {
  std::uint64_t limit = kMaxSequenceLength;
  std::uint64_t documents = 0;
  std::uint64_t docs_over_limit = 0;
  double docs_over_fraction = 0.0;
  std::uint64_t total_tokens = 0;
  std::uint64_t tokens_lost = 0;
  double tokens_lost_fraction = 0.0;
};

inline constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint64_t>::max();

// Documents with more than `limit` tokens and the tokens beyond the limit.
TruncationReport truncation_report(std::span<const std::uint64_t> token_counts,
                                   std::uint64_t limit = kMaxSequenceLength);

std::string stats_to_json(const CorpusStats& stats, const TruncationReport& truncation);
// Aligned-column text tables: corpus totals per source, then the token
// distribution per source.
std::string stats_to_table(const CorpusStats& stats, const TruncationReport& truncation);

}  // namespace finprep

#endif  // FINPREP_STATS_H_
