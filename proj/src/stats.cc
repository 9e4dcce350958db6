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

#include "finprep/stats.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "finprep/error.h"
#include "json.hpp"

namespace finprep {

using nlohmann::ordered_json;

DocumentProfile profile_document(const Document& doc, const Vocab& vocab,
                                 const AbbreviationSet& abbreviations) {
  DocumentProfile p;
  p.sentences = segment_sentences(std::string_view(doc.text), abbreviations).size();
  p.words = count_words(doc.text);
  p.tokens = count_tokens(doc.text, vocab);
  p.bytes = doc.text.size();
  return p;
}

Totals& Totals::add(const DocumentProfile& p) {
  ++documents;
  sentences += p.sentences;
  words += p.words;
  tokens += p.tokens;
  bytes += p.bytes;
  return *this;
}

Totals& Totals::combine(const Totals& o) {
  documents += o.documents;
  sentences += o.sentences;
  words += o.words;
  tokens += o.tokens;
  bytes += o.bytes;
  return *this;
}

std::uint64_t nearest_rank(std::span<const std::uint64_t> sorted, std::uint32_t percent) {
  if (sorted.empty()) throw ValidationError("nearest_rank: empty sample");
  if (percent > 100) throw ValidationError("nearest_rank: percent above 100");
  const std::uint64_t n = sorted.size();
  std::uint64_t rank = (static_cast<std::uint64_t>(percent) * n + 99) / 100;
  rank = std::clamp<std::uint64_t>(rank, 1, n);
  return sorted[rank - 1];
}

std::optional<QuantileProfile> quantile_profile(std::vector<std::uint64_t> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  QuantileProfile q{};
  for (std::size_t i = 0; i < kQuantileProbes.size(); ++i) {
    q[i] = nearest_rank(values, kQuantileProbes[i]);
  }
  return q;
}

void StatsAccumulator::add(const std::string& source, const DocumentProfile& profile) {
  auto& s = sources_[source];
  s.totals.add(profile);
  s.tokens.push_back(profile.tokens);
  all_tokens_.push_back(profile.tokens);
}

StatsAccumulator& StatsAccumulator::merge(const StatsAccumulator& other) {
  for (const auto& [name, s] : other.sources_) {
    auto& mine = sources_[name];
    mine.totals.combine(s.totals);
    mine.tokens.insert(mine.tokens.end(), s.tokens.begin(), s.tokens.end());
  }
  all_tokens_.insert(all_tokens_.end(), other.all_tokens_.begin(), other.all_tokens_.end());
  return *this;
}

CorpusStats StatsAccumulator::finish() const {
  CorpusStats stats;
  for (const auto& [name, s] : sources_) {
    stats.sources[name] = {s.totals, quantile_profile(s.tokens)};
    stats.total.totals.combine(s.totals);
  }
  stats.total.token_quantiles = quantile_profile(all_tokens_);
  return stats;
}

TruncationReport truncation_report(std::span<const std::uint64_t> token_counts,
                                   std::uint64_t limit) {
  TruncationReport r;
  r.limit = limit;
  r.documents = token_counts.size();
  for (auto c : token_counts) {
    r.total_tokens += c;
    if (c > limit) {
      ++r.docs_over_limit;
      r.tokens_lost += c - limit;
    }
  }
  if (r.documents > 0) {
    r.docs_over_fraction =
        static_cast<double>(r.docs_over_limit) / static_cast<double>(r.documents);
  }
  if (r.total_tokens > 0) {
    r.tokens_lost_fraction =
        static_cast<double>(r.tokens_lost) / static_cast<double>(r.total_tokens);
  }
  return r;
}

namespace {

ordered_json source_json(const SourceStats& s) {
  ordered_json obj;
  obj["documents"] = s.totals.documents;
  obj["sentences"] = s.totals.sentences;
  obj["words"] = s.totals.words;
  obj["tokens"] = s.totals.tokens;
  obj["bytes"] = s.totals.bytes;
  obj["size_gb"] = static_cast<double>(s.totals.bytes) / 1e9;
  if (s.token_quantiles) {
    ordered_json q;
    static constexpr const char* kNames[] = {"min", "p1", "p10", "p50", "p90", "p99", "max"};
    for (std::size_t i = 0; i < kQuantileProbes.size(); ++i) {
      q[kNames[i]] = (*s.token_quantiles)[i];
    }
    obj["token_quantiles"] = q;
  } else {
    obj["token_quantiles"] = nullptr;
  }
  return obj;
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

std::string stats_to_json(const CorpusStats& stats, const TruncationReport& t) {
  ordered_json obj;
  obj["quantile_method"] = "nearest-rank: value at 1-based rank ceil(p*n); min for p=0";
  obj["token_count_excludes_specials"] = true;
  ordered_json sources = ordered_json::object();
  for (const auto& [name, s] : stats.sources) sources[name] = source_json(s);
  obj["sources"] = sources;
  obj["total"] = source_json(stats.total);
  ordered_json trunc;
  trunc["limit"] = t.limit;
  trunc["documents"] = t.documents;
  trunc["docs_over_limit"] = t.docs_over_limit;
  trunc["docs_over_fraction"] = t.docs_over_fraction;
  trunc["total_tokens"] = t.total_tokens;
  trunc["tokens_lost"] = t.tokens_lost;
  trunc["tokens_lost_fraction"] = t.tokens_lost_fraction;
  obj["truncation"] = trunc;
  return obj.dump(2);
}

std::string stats_to_table(const CorpusStats& stats, const TruncationReport& t) {
  std::vector<std::pair<std::string, const SourceStats*>> rows;
  for (const auto& [name, s] : stats.sources) rows.emplace_back(name, &s);
  rows.emplace_back("Total", &stats.total);

  std::size_t name_width = 6;
  for (const auto& r : rows) name_width = std::max(name_width, r.first.size());

  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s %15s %15s %15s %15s %10s\n",
                static_cast<int>(name_width), "Source", "Num. Documents", "Num. Sentences",
                "Num. Words", "Num. Tokens", "Size (GB)");
  out << line;
  for (const auto& [name, s] : rows) {
    const auto& tt = s->totals;
    std::snprintf(line, sizeof line, "%-*s %15llu %15llu %15llu %15llu %10s\n",
                  static_cast<int>(name_width), name.c_str(),
                  static_cast<unsigned long long>(tt.documents),
                  static_cast<unsigned long long>(tt.sentences),
                  static_cast<unsigned long long>(tt.words),
                  static_cast<unsigned long long>(tt.tokens),
                  format_double(static_cast<double>(tt.bytes) / 1e9, 4).c_str());
    out << line;
  }

  out << "\nTokens per document (nearest-rank quantiles)\n";
  std::snprintf(line, sizeof line, "%-*s %10s %8s %8s %8s %8s %8s %8s %10s\n",
                static_cast<int>(name_width), "Source", "Num. Obs.", "Min.", "1%", "10%",
                "50%", "90%", "99%", "Max.");
  out << line;
  for (const auto& [name, s] : rows) {
    std::snprintf(line, sizeof line, "%-*s %10llu", static_cast<int>(name_width),
                  name.c_str(), static_cast<unsigned long long>(s->totals.documents));
    out << line;
    for (std::size_t i = 0; i < kQuantileProbes.size(); ++i) {
      const int width = (i == kQuantileProbes.size() - 1) ? 10 : 8;
      if (s->token_quantiles) {
        std::snprintf(line, sizeof line, " %*llu", width,
                      static_cast<unsigned long long>((*s->token_quantiles)[i]));
      } else {
        std::snprintf(line, sizeof line, " %*s", width, "-");
      }
      out << line;
    }
    out << '\n';
  }

  out << "\nTruncation at " << t.limit << " tokens: " << t.docs_over_limit << " of "
      << t.documents << " documents over limit (" << format_double(100 * t.docs_over_fraction, 2)
      << " %), " << t.tokens_lost << " of " << t.total_tokens << " tokens lost ("
      << format_double(100 * t.tokens_lost_fraction, 2) << " %)\n";
  return out.str();
}

}  // namespace finprep
