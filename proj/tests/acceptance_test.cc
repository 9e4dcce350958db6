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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "finprep/chunker.h"
#include "finprep/cli.h"
#include "finprep/corpus.h"
#include "finprep/datasets.h"
#include "finprep/llm_client.h"
#include "finprep/metrics.h"
#include "finprep/mlm.h"
#include "finprep/parallel.h"
#include "finprep/qagen.h"
#include "finprep/retrieval.h"
#include "finprep/rng.h"
#include "finprep/segmenter.h"
#include "finprep/stats.h"
#include "finprep/unicode.h"
#include "finprep/wordpiece.h"
#include "json.hpp"
#include "support/oracles.h"
#include "support/synthetic.h"
#include "support/temp_dir.h"

namespace finprep {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail.clear();
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Metrics against oracles

std::string random_answer(Rng& rng) {
  static const std::vector<std::string> alphabet = [] {
    std::vector<std::string> a;
    for (char c = 'a'; c <= 'e'; ++c) a.emplace_back(1, c);
    for (char c = 'A'; c <= 'E'; ++c) a.emplace_back(1, c);
    for (const char* s : {"\xC3\x84", "\xC3\xA4", "\xC3\x96", "\xC3\xB6", "\xC3\x9C",
                          "\xC3\xBC", "\xC3\x9F", "1", "7"}) {
      a.emplace_back(s);
    }
    for (int c = 33; c <= 126; ++c) {
      if (std::ispunct(c)) a.emplace_back(1, static_cast<char>(c));
    }
    return a;
  }();
  std::string s;
  const std::size_t n = rng.next_below(14);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.next_below(4) == 0) {
      s += std::string(1 + rng.next_below(2), ' ');
    } else if (rng.next_below(3) == 0) {
      s += alphabet[rng.next_below(alphabet.size())];
    } else {
      s += alphabet[rng.next_below(17)];  // letters and umlauts mostly
    }
  }
  return s;
}

Outcome criterion_metrics() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(StreamKey(1).add("metrics"));
  double worst = 0.0;

  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t classes = 1 + rng.next_below(20);
    const std::size_t n = 1 + rng.next_below(30);
    const bool multi = rng.next_below(2) == 0;
    std::vector<std::string> label_set;
    for (std::size_t c = 0; c < classes; ++c) label_set.push_back("L" + std::to_string(c));
    oracle::LabelSets op, og;
    std::vector<LabelAssignment> lp, lg;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> p, g;
      if (multi) {
        for (const auto& l : label_set) {
          if (rng.next_below(3) == 0) p.push_back(l);
          if (rng.next_below(3) == 0) g.push_back(l);
        }
      } else {
        p.push_back(label_set[rng.next_below(classes)]);
        g.push_back(label_set[rng.next_below(classes)]);
      }
      op.push_back(p);
      og.push_back(g);
      lp.push_back({"x" + std::to_string(i), p});
      lg.push_back({"x" + std::to_string(i), g});
    }
    std::reverse(lp.begin(), lp.end());  // alignment is by id, not position
    const auto counts = confusion_counts(lp, lg, label_set);
    worst = std::max(worst, std::abs(f1_macro(counts) - oracle::macro_f1(op, og, label_set)));
    worst = std::max(worst, std::abs(f1_micro(counts) - oracle::micro_f1(op, og, label_set)));
    worst = std::max(worst, std::abs(accuracy(lp, lg) - oracle::subset_accuracy(op, og)));
  }
  o.require(worst <= 1e-9, "classification deviation " + fmt("%.3g", worst));

  double qa_worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string pred = random_answer(rng);
    std::vector<std::string> golds;
    const std::size_t m = 1 + rng.next_below(3);
    for (std::size_t j = 0; j < m; ++j) {
      // Some golds share tokens with the prediction so that F1 is non-trivial.
      golds.push_back(rng.next_below(3) == 0 ? pred + " " + random_answer(rng)
                                             : random_answer(rng));
    }
    if (normalize_answer(pred) != oracle::normalize(pred)) {
      o.require(false, "normalization differs on '" + pred + "'");
      break;
    }
    qa_worst = std::max(qa_worst,
                        std::abs(exact_match(pred, golds) - oracle::exact_match(pred, golds)));
    qa_worst = std::max(qa_worst, std::abs(token_f1(pred, golds) - oracle::token_f1(pred, golds)));
  }
  o.require(qa_worst <= 1e-9, "QA deviation " + fmt("%.3g", qa_worst));

  double ndcg_worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + rng.next_below(20);
    std::vector<std::uint8_t> rel(len);
    std::vector<int> rel_i(len);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < len; ++i) {
      rel[i] = rng.next_below(2);
      rel_i[i] = rel[i];
      hits += rel[i];
    }
    const std::size_t total = std::max<std::size_t>(1, hits + rng.next_below(4));
    const std::size_t k = 1 + rng.next_below(25);
    const auto v = ndcg_at_k(rel, k, total);
    if (!v) {
      o.require(false, "nDCG undefined with relevant items");
      break;
    }
    ndcg_worst = std::max(ndcg_worst,
                          std::abs(*v - oracle::ndcg(rel_i, static_cast<int>(k),
                                                     static_cast<int>(total))));
  }
  o.require(ndcg_worst <= 1e-9, "nDCG deviation " + fmt("%.3g", ndcg_worst));

  const auto worked = confusion_counts(
      {{"1", {"A"}}, {"2", {"A"}}, {"3", {"B"}}, {"4", {"B"}}},
      {{"1", {"A"}}, {"2", {"A"}}, {"3", {"A"}}, {"4", {"B"}}}, {"A", "B"});
  const double macro = f1_macro(worked);
  const double micro = f1_micro(worked);
  const std::vector<std::uint8_t> r101 = {1, 0, 1};
  const double nd = *ndcg_at_k(r101, 3, 2);
  o.require(std::abs(macro - 0.7333) < 5e-5, "worked macro " + fmt("%.6f", macro));
  o.require(std::abs(micro - 0.75) < 1e-12, "worked micro " + fmt("%.6f", micro));
  o.require(std::abs(nd - 0.9197) < 5e-5, "worked nDCG " + fmt("%.6f", nd));

  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + fmt("%.1f s", secs));
  if (o.pass) {
    o.detail = "3000 instances, max deviation " +
               fmt("%.2g", std::max({worst, qa_worst, ndcg_worst})) + "; macro " +
               fmt("%.4f", macro) + ", micro " + fmt("%.4f", micro) + ", nDCG " +
               fmt("%.4f", nd) + "; " + fmt("%.2f s", secs);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 2-4. Chunking on the calibrated corpus

struct ChunkRun {
  testing::SyntheticCorpus corpus;
  std::vector<Chunk> chunks;
  ChunkReport report;
  double generate_seconds = 0.0;
  double chunk_seconds = 0.0;
};

const ChunkRun& chunk_run() {
  static const ChunkRun run = [] {
    ChunkRun r;
    auto t0 = Clock::now();
    r.corpus = testing::make_corpus(10000, 2024);
    r.generate_seconds = seconds_since(t0);
    const AbbreviationSet abbreviations = AbbreviationSet::defaults();
    const ChunkConfig config;
    t0 = Clock::now();
    r.chunks = chunk_corpus(r.corpus.documents,
                            {testing::synthetic_vocab(), abbreviations, config}, 0, &r.report);
    r.chunk_seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome criterion_chunker() {
  Outcome o;
  const auto t0 = Clock::now();
  const ChunkRun& run = chunk_run();
  const auto& docs = run.corpus.documents;
  const AbbreviationSet abbreviations = AbbreviationSet::defaults();

  std::map<std::string, std::size_t> doc_index;
  for (std::size_t i = 0; i < docs.size(); ++i) doc_index[docs[i].id] = i;
  std::vector<std::vector<const Chunk*>> per_doc(docs.size());
  std::size_t last_doc = 0;
  bool ordered = true;
  for (const auto& c : run.chunks) {
    const auto it = doc_index.find(c.doc_id);
    if (it == doc_index.end()) {
      o.require(false, "chunk of unknown document " + c.doc_id);
      return o;
    }
    if (it->second < last_doc) ordered = false;
    last_doc = it->second;
    per_doc[it->second].push_back(&c);
  }
  o.require(ordered, "chunks out of document order");

  std::uint64_t short_chunks = 0, multi_below = 0, cross = 0, reassembly = 0, recount = 0;
  std::vector<std::uint64_t> chunk_tokens(run.chunks.size());
  parallel_for(run.chunks.size(), 0, [&](std::size_t i) {
    chunk_tokens[i] = count_tokens(run.chunks[i].text, testing::synthetic_vocab());
  });
  for (std::size_t i = 0; i < run.chunks.size(); ++i) {
    if (chunk_tokens[i] != run.chunks[i].token_count) ++recount;
    if (chunk_tokens[i] < 11) ++short_chunks;
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto sentences = split_sentences(docs[d].text, abbreviations);
    const auto& st = run.corpus.sentence_tokens[d];
    if (sentences.size() != st.size()) {
      ++cross;
      continue;
    }
    std::size_t below = 0;
    std::size_t next = 0;
    for (const auto* c : per_doc[d]) {
      if (c->token_count < c->target) ++below;
      if (c->first_sentence != next || c->last_sentence >= sentences.size()) {
        ++reassembly;
        break;
      }
      std::string expected;
      for (auto s = c->first_sentence; s <= c->last_sentence; ++s) {
        if (s > c->first_sentence) expected += ' ';
        expected += sentences[s];
      }
      if (expected != c->text) ++cross;
      next = c->last_sentence + 1;
    }
    std::uint64_t rest = 0;
    for (std::size_t s = next; s < st.size(); ++s) rest += st[s];
    if (rest >= 11) ++reassembly;  // only a short trailing remainder may be dropped
    if (below > 1) ++multi_below;
  }
  o.require(short_chunks == 0, std::to_string(short_chunks) + " chunks below 11 tokens");
  o.require(multi_below == 0, std::to_string(multi_below) + " documents with >1 below-target chunk");
  o.require(cross == 0, std::to_string(cross) + " chunks not made of their document's sentences");
  o.require(reassembly == 0, std::to_string(reassembly) + " documents fail reassembly");
  o.require(recount == 0, std::to_string(recount) + " chunk token counts differ on recount");
  const double secs = run.generate_seconds + run.chunk_seconds + seconds_since(t0);
  o.require(secs < 60.0, "runtime " + fmt("%.1f s", secs));
  if (o.pass) {
    o.detail = std::to_string(docs.size()) + " documents, " + std::to_string(run.chunks.size()) +
               " chunks, all invariants exact; " + fmt("%.1f s", secs) + " (chunking " +
               fmt("%.1f s", run.chunk_seconds) + ")";
  }
  return o;
}

Outcome criterion_truncation() {
  Outcome o;
  const auto t0 = Clock::now();
  const ChunkRun& run = chunk_run();
  std::vector<std::uint64_t> doc_tokens(run.corpus.documents.size());
  parallel_for(doc_tokens.size(), 0, [&](std::size_t i) {
    doc_tokens[i] = count_tokens(run.corpus.documents[i].text, testing::synthetic_vocab());
  });
  const auto raw = truncation_report(doc_tokens, 512);

  // After chunking, each chunk is encoded with [CLS] and [SEP]: 510 pieces
  // fit. Discarded remainders count as lost too.
  std::uint64_t lost = run.report.tokens_discarded;
  for (const auto& c : run.chunks) {
    if (c.token_count > kMaxSequenceLength - 2) lost += c.token_count - (kMaxSequenceLength - 2);
  }
  const double post = static_cast<double>(lost) / static_cast<double>(raw.total_tokens);
  o.require(raw.tokens_lost_fraction >= 0.30 && raw.tokens_lost_fraction <= 0.60,
            "raw loss " + fmt("%.3f", raw.tokens_lost_fraction) + " outside [0.30, 0.60]");
  o.require(post < 0.05, "post-chunking loss " + fmt("%.4f", post));
  o.require(raw.docs_over_fraction >= 0.30 && raw.docs_over_fraction <= 0.50,
            "docs over limit " + fmt("%.3f", raw.docs_over_fraction) + " outside [0.30, 0.50]");
  const double secs = run.generate_seconds + run.chunk_seconds + seconds_since(t0);
  o.require(secs < 120.0, "runtime " + fmt("%.1f s", secs));
  std::vector<std::uint64_t> sorted = doc_tokens;
  std::sort(sorted.begin(), sorted.end());
  const std::string profile = "median " + std::to_string(nearest_rank(sorted, 50)) + ", p90 " +
                              std::to_string(nearest_rank(sorted, 90));
  if (o.pass) {
    o.detail = "raw loss " + fmt("%.3f", raw.tokens_lost_fraction) + ", docs over " +
               fmt("%.3f", raw.docs_over_fraction) + ", post-chunking loss " +
               fmt("%.4f", post) + " (" + profile + ")";
  } else {
    o.detail += " (" + profile + ")";
  }
  return o;
}

Outcome criterion_observations() {
  Outcome o;
  const ChunkRun& run = chunk_run();
  const double ratio = static_cast<double>(run.report.chunks_emitted) /
                       static_cast<double>(run.report.documents);
  o.require(ratio >= 2.0 && ratio <= 5.0, "ratio " + fmt("%.3f", ratio) + " outside [2, 5]");
  if (o.pass) {
    o.detail = std::to_string(run.report.documents) + " -> " +
               std::to_string(run.report.chunks_emitted) + " observations, ratio " +
               fmt("%.3f", ratio);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 5. WordPiece

Outcome criterion_tokenizer() {
  Outcome o;
  const Vocab vocab = Vocab::load(std::string(FINPREP_FIXTURES) + "/wordpiece_vocab.txt");
  using P = std::vector<std::string>;
  std::vector<std::pair<std::string, P>> cases = {
      {"unable", {"un", "##able"}},
      {"able", {"able"}},
      {"unab", {"un", "##ab"}},
      {"unle", {"un", "##le"}},
      {"Umsatz", {"Umsatz"}},
      {"Umsatzsteuer", {"Umsatz", "##steuer"}},
      {"Umsatzes", {"Umsatz", "##es"}},
      {"Gewinnwarnung", {"Gewinn", "##warnung"}},
      {"Gewinnwarn", {"Gewinn", "##war", "##n"}},
      {"Aktien", {"Aktie", "##n"}},
      {"Aktiengesellschaft", {"Aktie", "##n", "##gesellschaft"}},
      {"Bilanzsumme", {"Bilanz", "##summe"}},
      {"Quartalsbericht", {"Quartal", "##s", "##bericht"}},
      {"Vorjahres", {"Vor", "##jahr", "##es"}},
      {"Konzernabschluss", {"Konzern", "##abschluss"}},
      {"Steuern", {"Steuer", "##n"}},
      {"305", {"3", "##0", "##5"}},
      {"15", {"15"}},
      {"xyzzy", {"[UNK]"}},
      {"Umsatzx", {"[UNK]"}},
      {"Umsätze", {"[UNK]"}},
  };
  P hundred = {"un"};
  hundred.insert(hundred.end(), 98, "##a");
  cases.emplace_back("un" + std::string(98, 'a'), hundred);
  cases.emplace_back("un" + std::string(99, 'a'), P{"[UNK]"});
  std::size_t wrong = 0;
  for (const auto& [word, expected] : cases) {
    if (wordpiece_tokenize(word, vocab) != expected) {
      ++wrong;
      o.require(false, "'" + word.substr(0, 20) + "' mis-tokenized");
    }
  }

  std::string text;
  for (int i = 0; i < 505; ++i) text += (i % 2 ? "Hallo " : "Welt ");
  const auto seq = encode(text, vocab);
  o.require(seq.ids.size() == 512 && seq.real_length() == 507,
            "505-token chunk gives " + std::to_string(seq.real_length()) + " real ids");
  o.require(seq.ids[0] == vocab.cls_id() && seq.ids[506] == vocab.sep_id() &&
                seq.ids[507] == vocab.pad_id() && seq.attention[507] == 0 &&
                seq.attention[506] == 1,
            "specials or padding misplaced");

  std::string long_text;
  for (int i = 0; i < 300; ++i) long_text += "Aktiengesellschaft ";
  const auto cut = encode(long_text, vocab);
  o.require(cut.real_length() == 512 && cut.ids[511] == vocab.sep_id() &&
                cut.ids[510] == *vocab.find("##gesellschaft"),
            "truncation does not end in [SEP] after 510 pieces");
  const auto empty = encode("", vocab);
  o.require(empty.real_length() == 2 && empty.ids[1] == vocab.sep_id(), "empty input encoding");
  if (o.pass) {
    o.detail = std::to_string(cases.size()) +
               " words exact; 505-token chunk -> 507 real ids; truncation and padding exact";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 6. Masking

Outcome criterion_masking() {
  Outcome o;
  const auto t0 = Clock::now();
  const Vocab& vocab = testing::synthetic_vocab();
  MaskingConfig config;
  config.seed = 6;
  MaskingStats stats;
  std::uint64_t special_violations = 0;
  std::uint64_t label_violations = 0;
  std::uint32_t k = 0;
  while (stats.maskable_tokens < 120000) {
    Rng rng(StreamKey(6).add("masking-text").add(k));
    const auto seq = encode(testing::synthetic_document(200 + rng.next_below(306), rng).text,
                            vocab);
    const auto ex = mask_tokens(seq, vocab, config, {"doc", k}, &stats);
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
      const bool special = !seq.attention[i] || seq.ids[i] == vocab.cls_id() ||
                           seq.ids[i] == vocab.sep_id() || seq.ids[i] == vocab.pad_id();
      if (special && (ex.input_ids[i] != seq.ids[i] || ex.labels[i] != kIgnoreLabel)) {
        ++special_violations;
      }
      if (ex.labels[i] != kIgnoreLabel && ex.labels[i] != seq.ids[i]) ++label_violations;
      if (ex.labels[i] == kIgnoreLabel && ex.input_ids[i] != seq.ids[i]) ++label_violations;
    }
    ++k;
  }
  const double selected = static_cast<double>(stats.selected);
  const double rate = selected / static_cast<double>(stats.maskable_tokens);
  const double mask = stats.replaced_with_mask / selected;
  const double random = stats.replaced_with_random / selected;
  const double keep = stats.kept / selected;
  o.require(std::abs(rate - 0.15) <= 0.005, "selection rate " + fmt("%.4f", rate));
  o.require(std::abs(mask - 0.8) <= 0.02, "[MASK] share " + fmt("%.4f", mask));
  o.require(std::abs(random - 0.1) <= 0.02, "random share " + fmt("%.4f", random));
  o.require(std::abs(keep - 0.1) <= 0.02, "keep share " + fmt("%.4f", keep));
  o.require(special_violations == 0,
            std::to_string(special_violations) + " special positions corrupted");
  o.require(label_violations == 0, std::to_string(label_violations) + " label inconsistencies");

  // Whole-word fixtures: every multi-piece word is selected as a unit.
  MaskingConfig ww = config;
  ww.whole_word = true;
  ww.mask_prob = 0.3;
  std::uint64_t split_words = 0, words_seen = 0, selected_words = 0;
  const Vocab fixture = Vocab::load(std::string(FINPREP_FIXTURES) + "/wordpiece_vocab.txt");
  const std::string sentence =
      "Die Aktiengesellschaft meldet Quartalsbericht und Gewinnwarnung , Umsatzsteuer 305 "
      "Vorjahres Konzernabschluss Bilanzsumme Steuern Umsatzes . ";
  std::string fixture_text;
  for (int i = 0; i < 20; ++i) fixture_text += sentence;
  const auto wseq = encode(fixture_text, fixture);
  for (std::uint32_t key = 0; key < 50; ++key) {
    const auto ex = mask_tokens(wseq, fixture, ww, {"ww", key});
    for (std::size_t w = 0; w < wseq.word_starts.size(); ++w) {
      const std::size_t b = wseq.word_starts[w];
      const std::size_t e =
          w + 1 < wseq.word_starts.size() ? wseq.word_starts[w + 1] : wseq.real_length() - 1;
      std::size_t hit = 0;
      for (std::size_t i = b; i < e; ++i) hit += ex.labels[i] != kIgnoreLabel;
      ++words_seen;
      if (hit != 0 && hit != e - b) ++split_words;
      if (hit != 0) ++selected_words;
    }
  }
  o.require(split_words == 0, std::to_string(split_words) + " words partially masked");
  o.require(selected_words > 0, "whole-word mode selected nothing");
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, "runtime " + fmt("%.1f s", secs));
  if (o.pass) {
    o.detail = std::to_string(stats.maskable_tokens) + " maskable tokens: selected " +
               fmt("%.4f", rate) + ", mask/random/keep " + fmt("%.3f", mask) + "/" +
               fmt("%.3f", random) + "/" + fmt("%.3f", keep) + "; " +
               std::to_string(words_seen) + " whole-word checks; " + fmt("%.1f s", secs);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 7. Stratified split

Outcome criterion_split() {
  Outcome o;
  Rng rng(StreamKey(7).add("split"));
  double worst_single = 0.0;
  for (int d = 0; d < 100; ++d) {
    const std::size_t n = 20 + rng.next_below(1981);
    const std::size_t classes = 2 + rng.next_below(14);
    SplitFractions f;
    if (d % 2) {
      const double val = 0.05 + 0.2 * rng.next_double();
      const double test = 0.05 + 0.2 * rng.next_double();
      f = {1.0 - val - test, val, test};
    }
    // Skewed class sizes.
    std::vector<double> weights;
    for (std::size_t c = 0; c < classes; ++c) weights.push_back(1.0 + rng.next_below(20));
    std::vector<LabeledExample> data;
    std::map<std::string, double> totals;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string label = "c" + std::to_string(rng.next_weighted(weights));
      data.push_back({"d" + std::to_string(d) + "-" + std::to_string(i), "", {label}});
      totals[label] += 1;
    }
    const auto result = stratified_split(data, f, d);
    const auto shares = f.as_array();
    std::size_t placed = 0;
    for (const auto& part : result.parts) placed += part.size();
    o.require(placed == n, "dataset " + std::to_string(d) + " lost examples");
    for (const auto& [label, counts] : result.label_counts()) {
      for (int j = 0; j < 3; ++j) {
        worst_single = std::max(worst_single,
                                std::abs(static_cast<double>(counts[j]) - shares[j] * totals[label]));
      }
    }
  }
  o.require(worst_single <= 1.0 + 1e-9,
            "single-label deviation " + fmt("%.3f", worst_single) + " > 1");

  double worst_multi = 0.0;
  for (int d = 0; d < 20; ++d) {
    const std::size_t n = 100 + rng.next_below(401);
    const std::size_t labels = 3 + rng.next_below(15);
    std::vector<double> p;
    for (std::size_t l = 0; l < labels; ++l) p.push_back(0.03 + 0.3 * rng.next_double());
    std::vector<LabeledExample> data;
    std::map<std::string, double> totals;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> ls;
      for (std::size_t l = 0; l < labels; ++l) {
        if (rng.next_double() < p[l]) ls.push_back("t" + std::to_string(l));
      }
      if (ls.empty()) ls.push_back("t" + std::to_string(rng.next_below(labels)));
      if (ls.size() == 1 && i == 0) ls.push_back(ls[0] == "t0" ? "t1" : "t0");
      for (const auto& l : ls) totals[l] += 1;
      data.push_back(make_labeled_example("m" + std::to_string(i), "", ls));
    }
    const SplitFractions f;
    const auto result = stratified_split(data, f, 100 + d);
    const auto shares = f.as_array();
    for (const auto& [label, counts] : result.label_counts()) {
      for (int j = 0; j < 3; ++j) {
        worst_multi = std::max(worst_multi,
                               std::abs(static_cast<double>(counts[j]) - shares[j] * totals[label]));
      }
    }
  }
  o.require(worst_multi <= 2.0 + 1e-9, "multi-label deviation " + fmt("%.3f", worst_multi) + " > 2");
  if (o.pass) {
    o.detail = "100 single-label datasets, max deviation " + fmt("%.3f", worst_single) +
               "; 20 multi-label fixtures (<= 500 examples), max deviation " +
               fmt("%.3f", worst_multi);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 8. QA generation with replay fixtures

Outcome criterion_qagen() {
  Outcome o;
  const std::string dir = FINPREP_FIXTURES;
  const auto expected = nlohmann::json::parse(testing::read_file(dir + "/qagen_expected.json"));
  auto client = ReplayClient::load(dir + "/qagen_replay.jsonl");
  const auto docs = read_documents(dir + "/qagen_contexts.jsonl");
  const AbbreviationSet abbreviations = AbbreviationSet::defaults();
  std::vector<QaContext> contexts;
  for (const auto& d : docs.documents) {
    contexts.push_back({d.id, *truncate_context(split_sentences(d.text, abbreviations))});
  }
  GenConfig config;
  config.backoff_ms = 0;
  const auto result = generate(contexts, client, config);
  const auto& r = result.report;

  std::size_t slice_failures = 0;
  for (const auto& rec : result.records) {
    const std::u32string ctx = unicode::decode(rec.context);
    const std::u32string ans = unicode::decode(rec.answer);
    if (rec.answer_start + ans.size() > ctx.size() ||
        ctx.compare(rec.answer_start, ans.size(), ans) != 0) {
      ++slice_failures;
    }
  }
  o.require(!result.records.empty() && slice_failures == 0,
            std::to_string(slice_failures) + " records fail the context slice check");
  const auto planted = expected["planted_discards"].get<std::uint64_t>();
  o.require(r.answers_discarded == planted, "discarded " + std::to_string(r.answers_discarded) +
                                                ", planted " + std::to_string(planted));
  o.require(r.question_parse_failures == expected["parse_failures"].get<std::uint64_t>(),
            "parse failures " + std::to_string(r.question_parse_failures));
  o.require(r.duplicate_questions == expected["duplicate_questions"].get<std::uint64_t>(),
            "duplicates " + std::to_string(r.duplicate_questions));
  o.require(r.answered() == r.questions_generated - r.duplicate_questions &&
                r.answers_validated == result.records.size() && r.contexts_failed == 0,
            "report does not reconcile");
  const auto& want = expected["records"];
  bool same = want.size() == result.records.size();
  for (std::size_t i = 0; same && i < want.size(); ++i) {
    same = want[i]["id"] == result.records[i].id && want[i]["answer"] == result.records[i].answer &&
           want[i]["answer_start"] == result.records[i].answer_start;
  }
  o.require(same, "records differ from the fixture expectation");
  bool appendix = false;
  for (const auto& rec : result.records) {
    if (rec.answer == "37 Jahre" && rec.answer_start == 16 &&
        rec.context == "Herr M\xC3\xBCller ist 37 Jahre alt.") {
      appendix = true;
    }
  }
  o.require(appendix, "appendix example not reproduced");
  if (o.pass) {
    o.detail = std::to_string(result.records.size()) + " records, all slices exact; " +
               std::to_string(r.answers_discarded) + " discards = planted; '37 Jahre' at 16";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 9. Retrieval

struct PlantedPool {
  std::vector<Paragraph> pool;
  std::vector<RetrievalQuery> queries;
  EmbeddingSet pool_embeddings{32};
  EmbeddingSet query_embeddings{32};
};

PlantedPool planted_pool() {
  PlantedPool p;
  Rng rng(StreamKey(9).add("retrieval"));
  auto gauss = [&] {
    const double u1 = 1.0 - rng.next_double();
    const double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  std::vector<std::vector<double>> topic_dirs(20, std::vector<double>(32));
  for (auto& d : topic_dirs) {
    for (auto& x : d) x = gauss();
  }
  for (int t = 0; t < 20; ++t) {
    for (int i = 0; i < 50; ++i) {
      Paragraph para;
      para.id = "t" + std::to_string(t) + "-p" + std::to_string(i);
      para.labels = {"topic" + std::to_string(t)};
      std::vector<double> v(32);
      const double signal = 0.05 + 0.3 * rng.next_double();
      for (int j = 0; j < 32; ++j) v[j] = signal * topic_dirs[t][j] + gauss();
      if (rng.next_below(10) == 0) {
        const int other = static_cast<int>(rng.next_below(20));
        if (other != t) {
          para.labels.push_back("topic" + std::to_string(other));
          for (int j = 0; j < 32; ++j) v[j] += 0.5 * topic_dirs[other][j];
        }
      }
      std::sort(para.labels.begin(), para.labels.end());
      p.pool_embeddings.add(para.id, v);
      p.pool.push_back(std::move(para));
    }
    const std::string qid = "q" + std::to_string(t);
    p.queries.push_back({qid, "topic" + std::to_string(t), ""});
    std::vector<double> q(32);
    for (int j = 0; j < 32; ++j) q[j] = topic_dirs[t][j] + 0.3 * gauss();
    p.query_embeddings.add(qid, q);
  }
  p.queries.push_back({"q-none", "absent-topic", ""});
  std::vector<double> none(32);
  for (auto& x : none) x = gauss();
  p.query_embeddings.add("q-none", none);
  return p;
}

// Direct recomputation: plain cosine, sort by score then id, oracle nDCG.
std::vector<double> oracle_curve(const PlantedPool& p, std::size_t k_max) {
  std::vector<double> sum(k_max, 0.0);
  std::size_t included = 0;
  for (const auto& q : p.queries) {
    const auto& qv = p.query_embeddings.at(q.id);
    std::vector<std::pair<double, std::string>> scored;
    std::map<std::string, bool> relevant;
    int total = 0;
    for (const auto& para : p.pool) {
      const auto& v = p.pool_embeddings.at(para.id);
      double dot = 0, nq = 0, nv = 0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        dot += qv[j] * v[j];
        nq += qv[j] * qv[j];
        nv += v[j] * v[j];
      }
      scored.emplace_back(dot / std::sqrt(nq * nv), para.id);
      const bool rel =
          std::find(para.labels.begin(), para.labels.end(), q.topic) != para.labels.end();
      relevant[para.id] = rel;
      total += rel;
    }
    if (total == 0) continue;
    ++included;
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<int> rels;
    for (const auto& s : scored) rels.push_back(relevant[s.second] ? 1 : 0);
    for (std::size_t k = 1; k <= k_max; ++k) {
      sum[k - 1] += oracle::ndcg(rels, static_cast<int>(k), total);
    }
  }
  for (auto& s : sum) s /= static_cast<double>(included);
  return sum;
}

Outcome criterion_retrieval() {
  Outcome o;
  const PlantedPool p = planted_pool();
  const auto curve = evaluate_curve(p.queries, p.pool, p.query_embeddings, p.pool_embeddings, 100);
  const auto expected = oracle_curve(p, 100);
  double worst = 0.0;
  o.require(curve.points.size() == 100, "curve has " + std::to_string(curve.points.size()) +
                                            " points");
  for (std::size_t i = 0; i < curve.points.size() && i < expected.size(); ++i) {
    worst = std::max(worst, std::abs(curve.points[i].mean_ndcg - expected[i]));
    if (curve.points[i].queries_included != 20) {
      o.require(false, "wrong number of included queries");
      break;
    }
  }
  o.require(worst <= 1e-9, "curve deviates from oracle by " + fmt("%.3g", worst));
  o.require(curve.excluded_queries == std::vector<std::string>{"q-none"},
            "zero-relevance query not excluded");

  // Positive rescaling of every vector leaves each ranking unchanged.
  Rng rng(StreamKey(9).add("scale"));
  EmbeddingSet qs(32), ps(32);
  for (const auto& [id, v] : p.query_embeddings.vectors()) {
    const double f = std::exp(rng.next_double() * 18.0 - 9.0);
    std::vector<double> w = v;
    for (auto& x : w) x *= f;
    qs.add(id, w);
  }
  for (const auto& [id, v] : p.pool_embeddings.vectors()) {
    const double f = std::exp(rng.next_double() * 18.0 - 9.0);
    std::vector<double> w = v;
    for (auto& x : w) x *= f;
    ps.add(id, w);
  }
  std::size_t changed = 0;
  for (const auto& q : p.queries) {
    const auto a = rank(q, p.pool, p.query_embeddings, p.pool_embeddings);
    const auto b = rank(q, p.pool, qs, ps);
    bool same = a.items.size() == b.items.size() && a.total_relevant == b.total_relevant;
    for (std::size_t i = 0; same && i < a.items.size(); ++i) {
      same = a.items[i].id == b.items[i].id && a.items[i].relevant == b.items[i].relevant;
    }
    changed += !same;
  }
  o.require(changed == 0, std::to_string(changed) + " rankings changed under rescaling");
  if (o.pass) {
    o.detail = "20 topics x 50 paragraphs, k = 1..100: max deviation " + fmt("%.2g", worst) +
               "; nDCG@10 " + fmt("%.4f", curve.points[9].mean_ndcg) +
               "; rankings invariant under rescaling";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 10. Determinism and throughput

struct CliInputs {
  std::filesystem::path corpus, vocab, labeled, announcements, queries, embeddings, preds, golds;
  std::filesystem::path qa_contexts, replay;
};

CliInputs write_cli_inputs(const testing::TempDir& dir) {
  CliInputs in;
  in.vocab = dir / "vocab.txt";
  {
    std::ofstream v(in.vocab);
    for (const auto& t : testing::synthetic_vocab_tokens()) v << t << '\n';
  }
  auto corpus = testing::make_corpus(400, 10);
  Rng rng(StreamKey(10).add("cli"));
  // A few English and malformed lines exercise the ingest paths.
  std::string text;
  for (const auto& d : corpus.documents) text += serialize_document(d) + "\n";
  text += R"({"id":"en-1","source":"news","text":"The company said that the profit was up."})" "\n";
  text += "{\"id\":\n";
  in.corpus = dir.write("corpus.jsonl", text);

  std::string labeled;
  for (int i = 0; i < 600; ++i) {
    nlohmann::ordered_json ex;
    ex["id"] = "ex" + std::to_string(i);
    ex["text"] = "Satz " + std::to_string(i);
    ex["labels"] = {"c" + std::to_string(rng.next_below(6))};
    if (rng.next_below(4) == 0) ex["labels"].push_back("c" + std::to_string(rng.next_below(6)));
    labeled += ex.dump() + "\n";
  }
  in.labeled = dir.write("labeled.jsonl", labeled);

  std::string ann;
  for (int a = 0; a < 120; ++a) {
    nlohmann::ordered_json obj;
    obj["id"] = "ad" + std::to_string(a);
    obj["sentences"] = nlohmann::ordered_json::array();
    const std::size_t n = 1 + rng.next_below(9);
    for (std::size_t s = 0; s < n; ++s) {
      nlohmann::ordered_json sent;
      sent["text"] = "Satz " + std::to_string(s) + " der Meldung " + std::to_string(a) + ".";
      sent["labels"] = nlohmann::ordered_json::array();
      if (rng.next_below(2)) sent["labels"].push_back("topic" + std::to_string(rng.next_below(5)));
      obj["sentences"].push_back(sent);
    }
    ann += obj.dump() + "\n";
  }
  in.announcements = dir.write("announcements.jsonl", ann);

  std::string queries;
  for (int t = 0; t < 5; ++t) {
    queries += R"({"id":"q)" + std::to_string(t) + R"(","topic":"topic)" + std::to_string(t) +
               R"(","text":"t"})" "\n";
  }
  in.queries = dir.write("queries.jsonl", queries);
  EmbeddingSet emb(8);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> v(8);
    for (auto& x : v) x = rng.next_double() - 0.5;
    emb.add("q" + std::to_string(t), v);
  }
  for (int a = 0; a < 120; ++a) {
    for (int p = 0; p < 4; ++p) {
      std::vector<double> v(8);
      for (auto& x : v) x = rng.next_double() - 0.5;
      emb.add("ad" + std::to_string(a) + "-p" + std::to_string(p), v);
    }
  }
  in.embeddings = dir / "embeddings.txt";
  write_embeddings(emb, in.embeddings);

  in.preds = dir.write("preds.jsonl", R"({"id":"a","label":"x"})" "\n" R"({"id":"b","label":"y"})" "\n");
  in.golds = dir.write("golds.jsonl", R"({"id":"a","label":"x"})" "\n" R"({"id":"b","label":"x"})" "\n");
  in.qa_contexts = std::string(FINPREP_FIXTURES) + "/qagen_contexts.jsonl";
  in.replay = std::string(FINPREP_FIXTURES) + "/qagen_replay.jsonl";
  return in;
}

// Runs every stage into `out`; returns a description of the first failure.
std::string run_pipeline(const CliInputs& in, const std::filesystem::path& out, int threads) {
  std::filesystem::create_directories(out);
  const std::vector<std::string> global = {"finprep", "--threads", std::to_string(threads),
                                           "--seed", "11", "--vocab", in.vocab.string()};
  auto p = [&](const char* name) { return (out / name).string(); };
  const std::vector<std::vector<std::string>> stages = {
      {"ingest", "--input", in.corpus.string(), "--output", p("clean.jsonl")},
      {"stats", "--input", p("clean.jsonl"), "--output", p("stats.json"), "--table",
       p("stats.txt")},
      {"chunk", "--input", p("clean.jsonl"), "--output", p("chunks.jsonl")},
      {"mlm", "--input", p("chunks.jsonl"), "--output", p("mlm.bin")},
      {"mlm", "--input", p("chunks.jsonl"), "--output", p("mlm-ww.bin"), "--whole-word",
       "--recipe", "further", "--epoch", "2"},
      {"recipe", "--variant", "further", "--output", p("recipe.json")},
      {"split", "--input", in.labeled.string(), "--output", p("split")},
      {"paragraphs", "--input", in.announcements.string(), "--output", p("paragraphs.jsonl")},
      {"pool", "--input", p("paragraphs.jsonl"), "--output", p("pool.jsonl"), "--per-topic",
       "20"},
      {"retrieve", "--queries", in.queries.string(), "--pool", p("pool.jsonl"),
       "--query-embeddings", in.embeddings.string(), "--output", p("curve.csv"), "--rankings",
       p("rankings.jsonl"), "--k-max", "30"},
      {"metrics", "--predictions", in.preds.string(), "--golds", in.golds.string(), "--output",
       p("metrics.json")},
      {"qagen", "--replay", in.replay.string(), "--input", in.qa_contexts.string(), "--output",
       p("qa.json")},
  };
  for (const auto& stage : stages) {
    std::vector<std::string> args = global;
    args.insert(args.end(), stage.begin(), stage.end());
    std::ostringstream sout, serr;
    const int code = run_cli(args, sout, serr);
    if (code != kExitOk) return stage[0] + " exited " + std::to_string(code) + ": " + serr.str();
  }
  return "";
}

std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files[std::filesystem::relative(e.path(), root).string()] = testing::read_file(e.path());
    }
  }
  return files;
}

Outcome criterion_determinism() {
  Outcome o;
  testing::TempDir dir;
  const CliInputs in = write_cli_inputs(dir);
  struct Variant {
    const char* name;
    int threads;
  };
  const Variant variants[] = {{"run-a", 1}, {"run-b", 1}, {"run-c", 4}, {"run-d", 3}};
  std::map<std::string, std::string> reference;
  for (const auto& v : variants) {
    const auto error = run_pipeline(in, dir / v.name, v.threads);
    if (!error.empty()) {
      o.require(false, std::string(v.name) + ": " + error);
      return o;
    }
    const auto files = tree_contents(dir / v.name);
    if (reference.empty()) {
      reference = files;
      continue;
    }
    if (files.size() != reference.size()) {
      o.require(false, std::string(v.name) + " produced a different file set");
      continue;
    }
    for (const auto& [name, content] : reference) {
      auto it = files.find(name);
      if (it == files.end() || it->second != content) {
        o.require(false, name + " differs in " + v.name + " (threads " +
                             std::to_string(v.threads) + ")");
      }
    }
  }

  // Throughput: segment + tokenize + chunk on one thread.
  const auto corpus = testing::make_uniform_corpus(4000, 800, 12);
  const AbbreviationSet abbreviations = AbbreviationSet::defaults();
  const ChunkConfig config;
  const auto t0 = Clock::now();
  ChunkReport report;
  const auto chunks = chunk_corpus(corpus.documents,
                                   {testing::synthetic_vocab(), abbreviations, config}, 1, &report);
  const double secs = seconds_since(t0);
  const double mb_per_min = static_cast<double>(corpus.bytes) / 1e6 / secs * 60.0;
  o.require(!chunks.empty(), "throughput run produced no chunks");
  o.require(mb_per_min >= 20.0, "throughput " + fmt("%.1f MB/min/core", mb_per_min));
  if (o.pass) {
    o.detail = std::to_string(reference.size()) +
               " output files byte-identical over 4 runs (threads 1, 1, 4, 3); throughput " +
               fmt("%.1f", mb_per_min) + " MB/min on one core (" +
               fmt("%.1f MB", static_cast<double>(corpus.bytes) / 1e6) + ")";
  }
  return o;
}

}  // namespace
}  // namespace finprep

int main() {
  using finprep::Outcome;
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "metric oracle equivalence", finprep::criterion_metrics},
      {2, "chunker conformance", finprep::criterion_chunker},
      {3, "truncation loss", finprep::criterion_truncation},
      {4, "observation multiplication", finprep::criterion_observations},
      {5, "tokenizer correctness", finprep::criterion_tokenizer},
      {6, "masking statistics", finprep::criterion_masking},
      {7, "stratified split", finprep::criterion_split},
      {8, "QA generation replay", finprep::criterion_qagen},
      {9, "retrieval harness", finprep::criterion_retrieval},
      {10, "determinism and throughput", finprep::criterion_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
