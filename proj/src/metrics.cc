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

#include "finprep/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "finprep/error.h"
#include "finprep/unicode.h"
#include "json.hpp"

namespace finprep {

using nlohmann::ordered_json;

namespace {

std::string list_ids(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) out += ", ";
    out += "'" + ids[i] + "'";
  }
  if (ids.size() > shown) out += " and " + std::to_string(ids.size() - shown) + " more";
  return out;
}

// Pairs predictions with golds by id, in ascending id order.
std::vector<std::pair<const LabelAssignment*, const LabelAssignment*>> align(
    const std::vector<LabelAssignment>& predictions, const std::vector<LabelAssignment>& golds) {
  std::map<std::string, const LabelAssignment*> by_id;
  std::vector<std::string> duplicates;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.id, &p).second) duplicates.push_back(p.id);
  }
  if (!duplicates.empty()) {
    throw ValidationError("duplicate prediction ids: " + list_ids(duplicates));
  }
  std::map<std::string, const LabelAssignment*> gold_by_id;
  for (const auto& g : golds) {
    if (!gold_by_id.emplace(g.id, &g).second) duplicates.push_back(g.id);
  }
  if (!duplicates.empty()) throw ValidationError("duplicate gold ids: " + list_ids(duplicates));

  std::vector<std::string> missing_prediction;
  std::vector<std::string> missing_gold;
  std::vector<std::pair<const LabelAssignment*, const LabelAssignment*>> pairs;
  for (const auto& [id, g] : gold_by_id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      missing_prediction.push_back(id);
    } else {
      pairs.emplace_back(it->second, g);
    }
  }
  for (const auto& [id, p] : by_id) {
    if (!gold_by_id.contains(id)) missing_gold.push_back(id);
  }
  if (!missing_prediction.empty() || !missing_gold.empty()) {
    std::string msg = "predictions and golds are not aligned by id";
    if (!missing_prediction.empty()) msg += "; no prediction for " + list_ids(missing_prediction);
    if (!missing_gold.empty()) msg += "; no gold for " + list_ids(missing_gold);
    throw ValidationError(msg);
  }
  return pairs;
}

std::set<std::string> as_set(const std::vector<std::string>& labels) {
  return {labels.begin(), labels.end()};
}

std::vector<std::string> split_tokens(const std::string& normalized) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    std::size_t end = normalized.find(' ', pos);
    if (end == std::string::npos) end = normalized.size();
    if (end > pos) tokens.push_back(normalized.substr(pos, end - pos));
    pos = end + 1;
  }
  return tokens;
}

double pair_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::unordered_map<std::string, long> bag;
  for (const auto& t : gold) ++bag[t];
  long common = 0;
  for (const auto& t : pred) {
    auto it = bag.find(t);
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
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
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

ClassCounts confusion_counts(const std::vector<LabelAssignment>& predictions,
                             const std::vector<LabelAssignment>& golds,
                             const std::vector<std::string>& label_set) {
  if (label_set.empty()) throw ValidationError("label set is empty");
  ClassCounts counts;
  for (const auto& l : label_set) counts[l];
  auto check = [&](const LabelAssignment& a, const char* side) {
    for (const auto& l : a.labels) {
      if (!counts.contains(l)) {
        throw ValidationError(std::string(side) + " '" + a.id + "' has label '" + l +
                              "' outside the label set");
      }
    }
  };
  for (const auto& [p, g] : align(predictions, golds)) {
    check(*p, "prediction");
    check(*g, "gold");
    const auto ps = as_set(p->labels);
    const auto gs = as_set(g->labels);
    for (const auto& l : ps) {
      if (gs.contains(l)) {
        ++counts[l].tp;
      } else {
        ++counts[l].fp;
      }
    }
    for (const auto& l : gs) {
      if (!ps.contains(l)) ++counts[l].fn;
    }
  }
  return counts;
}

double class_f1(const ClassCount& c) {
  const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 0.0;
  return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double f1_macro(const ClassCounts& counts) {
  if (counts.empty()) throw ValidationError("label set is empty");
  double sum = 0.0;
  for (const auto& [label, c] : counts) sum += class_f1(c);
  return sum / static_cast<double>(counts.size());
}

double f1_micro(const ClassCounts& counts) {
  if (counts.empty()) throw ValidationError("label set is empty");
  ClassCount pooled;
  for (const auto& [label, c] : counts) {
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
  }
  return class_f1(pooled);
}

double accuracy(const std::vector<LabelAssignment>& predictions,
                const std::vector<LabelAssignment>& golds) {
  const auto pairs = align(predictions, golds);
  if (pairs.empty()) throw ValidationError("accuracy of an empty set");
  std::size_t hits = 0;
  for (const auto& [p, g] : pairs) {
    if (as_set(p->labels) == as_set(g->labels)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t c = unicode::next_scalar(text, pos);
    if (unicode::is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (unicode::is_punctuation(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    unicode::append(out, unicode::to_lower(c));
  }
  return out;
}

int exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
  const std::string p = normalize_answer(prediction);
  for (const auto& g : golds) {
    if (normalize_answer(g) == p) return 1;
  }
  return 0;
}

double token_f1(std::string_view prediction, const std::vector<std::string>& golds) {
  const auto p = split_tokens(normalize_answer(prediction));
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, pair_f1(p, split_tokens(normalize_answer(g))));
  return best;
}

double dcg_at_k(std::span<const std::uint8_t> relevances, std::size_t k) {
  double dcg = 0.0;
  const std::size_t n = std::min(k, relevances.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (relevances[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

std::optional<double> ndcg_at_k(std::span<const std::uint8_t> relevances, std::size_t k,
                                std::size_t total_relevant) {
  if (k < 1) throw ValidationError("nDCG cut-off k must be at least 1");
  const auto hits = static_cast<std::size_t>(
      std::count_if(relevances.begin(), relevances.end(), [](auto r) { return r != 0; }));
  if (total_relevant < hits) {
    throw ValidationError("total_relevant " + std::to_string(total_relevant) +
                          " is below the " + std::to_string(hits) + " relevant items ranked");
  }
  if (total_relevant == 0) return std::nullopt;
  double ideal = 0.0;
  const std::size_t n = std::min(k, total_relevant);
  for (std::size_t i = 0; i < n; ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg_at_k(relevances, k) / ideal;
}

MeanSd mean_sd(std::span<const double> values) {
  MeanSd r;
  r.n = values.size();
  if (r.n == 0) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(r.n - 1));
  }
  return r;
}

QaScores evaluate_qa(const std::vector<QaPrediction>& predictions) {
  QaScores s;
  s.n = predictions.size();
  if (s.n == 0) return s;
  double em = 0.0;
  double f1 = 0.0;
  for (const auto& p : predictions) {
    if (p.golds.empty()) throw ValidationError("QA example '" + p.id + "' has no gold answer");
    em += exact_match(p.prediction, p.golds);
    f1 += token_f1(p.prediction, p.golds);
  }
  s.exact_match = em / static_cast<double>(s.n);
  s.f1 = f1 / static_cast<double>(s.n);
  return s;
}

std::vector<LabelAssignment> read_label_assignments(const std::filesystem::path& path) {
  std::vector<LabelAssignment> out;
  for_each_json_line(path, [&](const nlohmann::json& obj) {
    LabelAssignment a;
    a.id = obj.at("id").get<std::string>();
    if (auto it = obj.find("labels"); it != obj.end()) {
      a.labels = it->get<std::vector<std::string>>();
    } else {
      a.labels = {obj.at("label").get<std::string>()};
    }
    out.push_back(std::move(a));
  });
  return out;
}

std::vector<QaPrediction> read_qa_predictions(const std::filesystem::path& predictions,
                                              const std::filesystem::path& golds) {
  std::map<std::string, std::vector<std::string>> gold_by_id;
  for_each_json_line(golds, [&](const nlohmann::json& obj) {
    auto id = obj.at("id").get<std::string>();
    auto answers = obj.at("answers").get<std::vector<std::string>>();
    if (answers.empty()) throw ValidationError("gold '" + id + "' has no answers");
    if (!gold_by_id.emplace(id, std::move(answers)).second) {
      throw ValidationError("duplicate gold id '" + id + "'");
    }
  });
  std::vector<QaPrediction> out;
  std::set<std::string> seen;
  std::vector<std::string> unknown;
  for_each_json_line(predictions, [&](const nlohmann::json& obj) {
    QaPrediction p;
    p.id = obj.at("id").get<std::string>();
    p.prediction = obj.at("prediction").get<std::string>();
    if (!seen.insert(p.id).second) throw ValidationError("duplicate prediction id '" + p.id + "'");
    auto it = gold_by_id.find(p.id);
    if (it == gold_by_id.end()) {
      unknown.push_back(p.id);
      return;
    }
    p.golds = it->second;
    out.push_back(std::move(p));
  });
  std::vector<std::string> missing;
  for (const auto& [id, answers] : gold_by_id) {
    if (!seen.contains(id)) missing.push_back(id);
  }
  if (!unknown.empty() || !missing.empty()) {
    std::string msg = "QA predictions and golds are not aligned by id";
    if (!missing.empty()) msg += "; no prediction for " + list_ids(missing);
    if (!unknown.empty()) msg += "; no gold for " + list_ids(unknown);
    throw ValidationError(msg);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::string classification_report_json(const ClassCounts& counts, double accuracy_value) {
  ordered_json obj;
  obj["accuracy"] = accuracy_value;
  obj["f1_macro"] = f1_macro(counts);
  obj["f1_micro"] = f1_micro(counts);
  ordered_json per_class = ordered_json::object();
  for (const auto& [label, c] : counts) {
    per_class[label] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"f1", class_f1(c)}};
  }
  obj["per_class"] = per_class;
  return obj.dump(2);
}

std::string qa_report_json(const QaScores& scores) {
  ordered_json obj;
  obj["exact_match"] = scores.exact_match;
  obj["f1"] = scores.f1;
  obj["n"] = scores.n;
  obj["normalization"] = "lowercase, punctuation removed, whitespace collapsed";
  return obj.dump(2);
}

}  // namespace finprep
