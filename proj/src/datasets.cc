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

#include "finprep/datasets.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <span>
#include <unordered_map>
#include <unordered_set>

#include "finprep/error.h"
#include "finprep/rng.h"
#include "finprep/unicode.h"
#include "json.hpp"

namespace finprep {

using nlohmann::ordered_json;

namespace {

std::vector<std::string> canonical_labels(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (unicode::trim(line).empty()) continue;
    try {
      fn(ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

// Single-label: per-class largest-remainder cut.
void split_single_label(std::vector<LabeledExample>& examples,
                        const std::array<double, 3>& fractions, std::uint64_t seed,
                        SplitResult& result) {
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    by_class[examples[i].labels.front()].push_back(i);
  }
  const double total = static_cast<double>(examples.size());
  std::array<std::uint64_t, 3> assigned_total{};

  for (auto& [label, members] : by_class) {
    Rng rng(StreamKey(seed).add("class").add(label));
    shuffle(std::span(members), rng);
    const double n = static_cast<double>(members.size());
    if (members.size() < 3) {
      result.warnings.push_back("class '" + label + "' has " +
                                std::to_string(members.size()) +
                                " examples, fewer than the number of splits");
    }
    std::array<std::uint64_t, 3> counts{};
    std::array<double, 3> remainder{};
    std::uint64_t placed = 0;
    for (int j = 0; j < 3; ++j) {
      const double exact = fractions[j] * n;
      counts[j] = static_cast<std::uint64_t>(std::floor(exact + 1e-9));
      remainder[j] = exact - static_cast<double>(counts[j]);
      placed += counts[j];
    }
    // Hand out the leftover examples one at a time to the split that lags
    // its overall target the most, among splits with a fractional share.
    for (std::uint64_t left = members.size() - placed; left > 0; --left) {
      int best = -1;
      double best_deficit = 0.0;
      for (int j = 0; j < 3; ++j) {
        if (remainder[j] <= 1e-9) continue;
        const double deficit = fractions[j] * total -
                               static_cast<double>(assigned_total[j] + counts[j]);
        if (best < 0 || deficit > best_deficit + 1e-9 ||
            (std::abs(deficit - best_deficit) <= 1e-9 && remainder[j] > remainder[best])) {
          best = j;
          best_deficit = deficit;
        }
      }
      if (best < 0) best = 0;
      ++counts[best];
      remainder[best] = 0.0;
    }
    std::size_t pos = 0;
    for (int j = 0; j < 3; ++j) {
      for (std::uint64_t k = 0; k < counts[j]; ++k) {
        result.parts[j].push_back(examples[members[pos++]]);
      }
      assigned_total[j] += counts[j];
    }
  }
}

// The greedy pass can overshoot frequent labels, because their examples are
// placed on behalf of rarer ones. Pairwise swaps between splits then pull
// per-label counts back toward their targets; split sizes are unchanged.
void rebalance_multi_label(const std::vector<LabeledExample>& examples,
                           const std::array<double, 3>& fractions,
                           std::vector<int>& destination) {
  std::map<std::string, std::size_t> label_index;
  for (const auto& ex : examples) {
    for (const auto& l : ex.labels) label_index.emplace(l, 0);
  }
  std::size_t next = 0;
  for (auto& [l, i] : label_index) i = next++;
  const std::size_t m = label_index.size();
  std::vector<std::vector<std::size_t>> ids(examples.size());
  std::vector<double> total(m, 0.0);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (const auto& l : examples[i].labels) {
      ids[i].push_back(label_index[l]);
      total[ids[i].back()] += 1.0;
    }
  }
  // dev[l][j]: assigned count minus the exact proportional share.
  std::vector<std::array<double, 3>> dev(m);
  for (std::size_t l = 0; l < m; ++l) {
    for (int j = 0; j < 3; ++j) dev[l][j] = -fractions[j] * total[l];
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (auto l : ids[i]) dev[l][destination[i]] += 1.0;
  }

  // Change in sum of squared deviations when x moves a->b and y moves b->a.
  std::vector<int> delta(m, 0);
  auto swap_gain = [&](std::size_t x, std::size_t y, int a, int b) {
    for (auto l : ids[x]) ++delta[l];
    for (auto l : ids[y]) --delta[l];
    double gain = 0.0;
    auto account = [&](std::size_t l) {
      const int d = delta[l];
      if (d == 0) return;
      const double da = dev[l][a], db = dev[l][b];
      gain += da * da + db * db - (da - d) * (da - d) - (db + d) * (db + d);
      delta[l] = 0;
    };
    for (auto l : ids[x]) account(l);
    for (auto l : ids[y]) account(l);
    return gain;
  };

  // Bounds the pair search on large datasets: evenly spaced candidates.
  constexpr std::size_t kMaxCandidates = 512;
  auto thin = [](std::vector<std::size_t>& v) {
    if (v.size() <= kMaxCandidates) return;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < kMaxCandidates; ++i) kept.push_back(v[i * v.size() / kMaxCandidates]);
    v = std::move(kept);
  };

  const std::size_t max_rounds = 20 * m + 100;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    // Worst label and the pair of splits it is most unbalanced across.
    double worst = 1.0;
    std::size_t wl = m;
    int wa = 0, wb = 0;
    for (std::size_t l = 0; l < m; ++l) {
      const auto hi = std::max_element(dev[l].begin(), dev[l].end()) - dev[l].begin();
      const auto lo = std::min_element(dev[l].begin(), dev[l].end()) - dev[l].begin();
      const double spread = std::max(dev[l][hi], -dev[l][lo]);
      if (spread > worst + 1e-9) {
        worst = spread;
        wl = l;
        wa = static_cast<int>(hi);
        wb = static_cast<int>(lo);
      }
    }
    if (wl == m || wa == wb) break;
    std::vector<std::size_t> xs, ys;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (destination[i] == wa && std::binary_search(ids[i].begin(), ids[i].end(), wl)) {
        xs.push_back(i);
      } else if (destination[i] == wb) {
        ys.push_back(i);
      }
    }
    thin(xs);
    thin(ys);
    double best_gain = 1e-9;
    std::size_t bx = 0, by = 0;
    for (std::size_t x : xs) {
      for (std::size_t y : ys) {
        const double g = swap_gain(x, y, wa, wb);
        if (g > best_gain) {
          best_gain = g;
          bx = x;
          by = y;
        }
      }
    }
    if (best_gain <= 1e-9) break;
    for (auto l : ids[bx]) {
      dev[l][wa] -= 1.0;
      dev[l][wb] += 1.0;
    }
    for (auto l : ids[by]) {
      dev[l][wb] -= 1.0;
      dev[l][wa] += 1.0;
    }
    destination[bx] = wb;
    destination[by] = wa;
  }
}

// Multi-label: iterative stratification. The label with the fewest
// unassigned examples is handled first; each of its examples goes to the
// split that most lacks that label, ties broken by the split's overall
// deficit, then by a seeded coin.
void split_multi_label(std::vector<LabeledExample>& examples,
                       const std::array<double, 3>& fractions, std::uint64_t seed,
                       SplitResult& result) {
  const std::size_t n = examples.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(StreamKey(seed).add("multi-label"));
  shuffle(std::span(order), rng);

  std::map<std::string, std::uint64_t> label_total;
  for (const auto& ex : examples) {
    for (const auto& l : ex.labels) ++label_total[l];
  }
  std::map<std::string, std::array<double, 3>> wanted_label;
  for (const auto& [l, count] : label_total) {
    if (count < 3) {
      result.warnings.push_back("label '" + l + "' has " + std::to_string(count) +
                                " examples, fewer than the number of splits");
    }
    for (int j = 0; j < 3; ++j) wanted_label[l][j] = fractions[j] * static_cast<double>(count);
  }
  std::array<double, 3> wanted{};
  for (int j = 0; j < 3; ++j) wanted[j] = fractions[j] * static_cast<double>(n);

  std::map<std::string, std::uint64_t> remaining = label_total;
  std::vector<bool> done(n, false);
  std::size_t left = n;
  std::vector<int> destination(n, -1);
  while (left > 0) {
    std::string rarest;
    std::uint64_t fewest = 0;
    for (const auto& [l, r] : remaining) {
      if (r == 0) continue;
      if (rarest.empty() || r < fewest) {
        rarest = l;
        fewest = r;
      }
    }
    for (std::size_t idx : order) {
      if (done[idx]) continue;
      const auto& ex = examples[idx];
      if (!std::binary_search(ex.labels.begin(), ex.labels.end(), rarest)) continue;
      const auto& want = wanted_label[rarest];
      std::vector<int> best;
      for (int j = 0; j < 3; ++j) {
        if (best.empty() || want[j] > want[best.front()] + 1e-9) {
          best = {j};
        } else if (std::abs(want[j] - want[best.front()]) <= 1e-9) {
          best.push_back(j);
        }
      }
      if (best.size() > 1) {
        std::vector<int> narrowed;
        for (int j : best) {
          if (narrowed.empty() || wanted[j] > wanted[narrowed.front()] + 1e-9) {
            narrowed = {j};
          } else if (std::abs(wanted[j] - wanted[narrowed.front()]) <= 1e-9) {
            narrowed.push_back(j);
          }
        }
        best = std::move(narrowed);
      }
      const int split = best.size() == 1 ? best.front() : best[rng.next_below(best.size())];
      destination[idx] = split;
      done[idx] = true;
      --left;
      wanted[split] -= 1.0;
      for (const auto& l : ex.labels) {
        wanted_label[l][split] -= 1.0;
        --remaining[l];
      }
    }
  }
  rebalance_multi_label(examples, fractions, destination);
  for (std::size_t i = 0; i < n; ++i) result.parts[destination[i]].push_back(examples[i]);
}

}  // namespace

void SplitFractions::validate() const {
  if (!(train > 0 && validation > 0 && test > 0)) {
    throw ValidationError("split fractions must all be positive");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw ValidationError("split fractions must sum to 1");
  }
}

std::map<std::string, std::array<std::uint64_t, 3>> SplitResult::label_counts() const {
  std::map<std::string, std::array<std::uint64_t, 3>> counts;
  for (int j = 0; j < 3; ++j) {
    for (const auto& ex : parts[j]) {
      for (const auto& l : ex.labels) ++counts[l][j];
    }
  }
  return counts;
}

LabeledExample make_labeled_example(std::string id, std::string text,
                                    std::vector<std::string> labels) {
  if (id.empty()) throw ValidationError("labeled example has an empty id");
  auto canon = canonical_labels(std::move(labels));
  if (canon.empty()) throw ValidationError("labeled example '" + id + "' has no labels");
  return {std::move(id), std::move(text), std::move(canon)};
}

SplitResult stratified_split(std::vector<LabeledExample> examples,
                             const SplitFractions& fractions, std::uint64_t seed) {
  fractions.validate();
  if (examples.empty()) throw ValidationError("cannot split an empty dataset");
  std::sort(examples.begin(), examples.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < examples.size(); ++i) {
    if (examples[i].id == examples[i - 1].id) {
      throw ValidationError("duplicate example id '" + examples[i].id + "'");
    }
  }
  for (auto& ex : examples) {
    ex.labels = canonical_labels(std::move(ex.labels));
    if (ex.labels.empty()) throw ValidationError("example '" + ex.id + "' has no labels");
  }

  SplitResult result;
  result.multi_label = std::any_of(examples.begin(), examples.end(),
                                   [](const auto& ex) { return ex.labels.size() > 1; });
  if (result.multi_label) {
    split_multi_label(examples, fractions.as_array(), seed, result);
  } else {
    split_single_label(examples, fractions.as_array(), seed, result);
  }
  for (auto& part : result.parts) {
    std::sort(part.begin(), part.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  }
  return result;
}

std::vector<LabeledExample> read_labeled_examples(const std::filesystem::path& path) {
  std::vector<LabeledExample> out;
  for_each_json_line(path, [&](const ordered_json& obj) {
    std::vector<std::string> labels;
    const auto& l = obj.contains("labels") ? obj.at("labels") : obj.at("label");
    if (l.is_string()) {
      labels.push_back(l.get<std::string>());
    } else {
      labels = l.get<std::vector<std::string>>();
    }
    out.push_back(make_labeled_example(obj.at("id").get<std::string>(),
                                       obj.value("text", std::string()), std::move(labels)));
  });
  return out;
}

void write_labeled_examples(const std::vector<LabeledExample>& examples,
                            const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& ex : examples) {
    ordered_json obj;
    obj["id"] = ex.id;
    obj["text"] = ex.text;
    obj["labels"] = ex.labels;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failed on " + path.string());
}

std::string split_report_json(const SplitResult& result, const SplitFractions& fractions,
                              std::uint64_t seed) {
  ordered_json obj;
  obj["method"] = result.multi_label ? "iterative-stratification" : "per-class-largest-remainder";
  obj["seed"] = seed;
  obj["fractions"] = {fractions.train, fractions.validation, fractions.test};
  ordered_json sizes;
  for (int j = 0; j < 3; ++j) sizes[kSplitNames[j]] = result.parts[j].size();
  obj["sizes"] = sizes;
  ordered_json labels = ordered_json::object();
  for (const auto& [label, counts] : result.label_counts()) {
    ordered_json c;
    for (int j = 0; j < 3; ++j) c[kSplitNames[j]] = counts[j];
    labels[label] = c;
  }
  obj["label_counts"] = labels;
  obj["warnings"] = result.warnings;
  return obj.dump(2);
}

std::vector<std::uint32_t> paragraph_sizes(std::size_t n) {
  std::vector<std::uint32_t> sizes;
  if (n == 0) return sizes;
  if (n <= 2) return {static_cast<std::uint32_t>(n)};
  const std::size_t threes = n / 3;
  switch (n % 3) {
    case 0:
      sizes.assign(threes, 3);
      break;
    case 1:
      sizes.assign(threes - 1, 3);
      sizes.push_back(2);
      sizes.push_back(2);
      break;
    case 2:
      sizes.assign(threes, 3);
      sizes.push_back(2);
      break;
  }
  return sizes;
}

std::vector<Paragraph> build_paragraphs(const Announcement& a) {
  std::vector<Paragraph> out;
  std::size_t pos = 0;
  for (std::uint32_t size : paragraph_sizes(a.sentences.size())) {
    Paragraph p;
    p.id = a.id + "-p" + std::to_string(out.size());
    p.announcement_id = a.id;
    p.sentence_count = size;
    std::set<std::string> labels;
    for (std::uint32_t k = 0; k < size; ++k, ++pos) {
      const auto& s = a.sentences[pos];
      if (k > 0) p.text.push_back(' ');
      p.text += s.text;
      labels.insert(s.labels.begin(), s.labels.end());
    }
    p.labels.assign(labels.begin(), labels.end());
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Announcement> read_announcements(const std::filesystem::path& path) {
  std::vector<Announcement> out;
  for_each_json_line(path, [&](const ordered_json& obj) {
    Announcement a;
    a.id = obj.at("id").get<std::string>();
    for (const auto& s : obj.at("sentences")) {
      LabeledSentence ls;
      ls.text = s.at("text").get<std::string>();
      if (auto it = s.find("labels"); it != s.end()) {
        ls.labels = it->get<std::vector<std::string>>();
      }
      a.sentences.push_back(std::move(ls));
    }
    out.push_back(std::move(a));
  });
  return out;
}

std::vector<Paragraph> read_paragraphs(const std::filesystem::path& path) {
  std::vector<Paragraph> out;
  for_each_json_line(path, [&](const ordered_json& obj) {
    Paragraph p;
    p.id = obj.at("id").get<std::string>();
    p.announcement_id = obj.value("announcement_id", std::string());
    p.text = obj.value("text", std::string());
    p.labels = canonical_labels(obj.at("labels").get<std::vector<std::string>>());
    p.sentence_count = obj.value("sentence_count", 0u);
    out.push_back(std::move(p));
  });
  return out;
}

void write_paragraphs(const std::vector<Paragraph>& paragraphs,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& p : paragraphs) {
    ordered_json obj;
    obj["id"] = p.id;
    obj["announcement_id"] = p.announcement_id;
    obj["text"] = p.text;
    obj["labels"] = p.labels;
    obj["sentence_count"] = p.sentence_count;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failed on " + path.string());
}

TopicPool sample_topic_pool(const std::vector<Paragraph>& paragraphs, std::uint32_t per_topic,
                            std::vector<std::string> topics, std::uint64_t seed) {
  if (per_topic == 0) throw ValidationError("per_topic must be positive");
  std::vector<const Paragraph*> sorted;
  sorted.reserve(paragraphs.size());
  for (const auto& p : paragraphs) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->id == sorted[i - 1]->id) {
      throw ValidationError("duplicate paragraph id '" + sorted[i]->id + "'");
    }
  }
  if (topics.empty()) {
    std::set<std::string> all;
    for (const auto* p : sorted) all.insert(p->labels.begin(), p->labels.end());
    topics.assign(all.begin(), all.end());
  }
  topics = canonical_labels(std::move(topics));

  TopicPool pool;
  std::set<std::string> chosen;
  for (const auto& topic : topics) {
    std::vector<const Paragraph*> carriers;
    for (const auto* p : sorted) {
      if (std::binary_search(p->labels.begin(), p->labels.end(), topic)) carriers.push_back(p);
    }
    if (carriers.empty()) {
      pool.warnings.push_back("topic '" + topic + "' is carried by no paragraph");
      pool.drawn_per_topic[topic] = 0;
      continue;
    }
    if (carriers.size() < per_topic) {
      pool.warnings.push_back("topic '" + topic + "' has only " +
                              std::to_string(carriers.size()) + " carriers; taking all");
    }
    Rng rng(StreamKey(seed).add("pool").add(topic));
    shuffle(std::span(carriers), rng);
    const std::size_t take = std::min<std::size_t>(per_topic, carriers.size());
    for (std::size_t k = 0; k < take; ++k) chosen.insert(carriers[k]->id);
    pool.drawn_per_topic[topic] = take;
  }
  for (const auto* p : sorted) {
    if (chosen.contains(p->id)) pool.paragraphs.push_back(*p);
  }
  return pool;
}

}  // namespace finprep
