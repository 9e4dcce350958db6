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

// Evaluation measures: classification F1 and accuracy, extractive-QA exact
// match and token F1, and nDCG for ranked retrieval.

#ifndef FINPREP_METRICS_H_
#define FINPREP_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace finprep {

struct ClassCount {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  friend bool operator==(const ClassCount&, const ClassCount&) = default;
};

// Keyed by class label; every label of the label set is present.
using ClassCounts = std::map<std::string, ClassCount>;

// One example's label set. Single-label tasks use a singleton; a
// prediction may be empty in multi-label tasks.
struct LabelAssignment {
  std::string id;
  std::vector<std::string> labels;
};

// Per-label binary counts. Predictions and golds are matched by id; any id
// present on only one side (or repeated) raises ValidationError listing
// the offenders, as does a label outside `label_set`.
ClassCounts confusion_counts(const std::vector<LabelAssignment>& predictions,
                             const std::vector<LabelAssignment>& golds,
                             const std::vector<std::string>& label_set);

// 2TP / (2TP + FP + FN), or 0 when the denominator is 0.
double class_f1(const ClassCount& c);
// Unweighted mean of class_f1. Throws ValidationError on an empty set.
double f1_macro(const ClassCounts& counts);
// F1 over pooled counts. Throws ValidationError on an empty set.
double f1_micro(const ClassCounts& counts);
// Fraction of examples whose predicted label set equals the gold set.
double accuracy(const std::vector<LabelAssignment>& predictions,
                const std::vector<LabelAssignment>& golds);

// Lowercases, removes punctuation, collapses whitespace, trims.
std::string normalize_answer(std::string_view text);
// 1 if the normalized prediction equals any normalized gold, else 0.
int exact_match(std::string_view prediction, const std::vector<std::string>& golds);
// Max over golds of bag-of-tokens F1 on normalized strings.
double token_f1(std::string_view prediction, const std::vector<std::string>& golds);

// rel_i / log2(i + 1) summed over the first min(k, |relevances|) ranks.
double dcg_at_k(std::span<const std::uint8_t> relevances, std::size_t k);
// DCG normalized by the ideal ranking with total_relevant hits. Returns
// nullopt when total_relevant is 0. Throws ValidationError when k < 1 or
// total_relevant is below the number of hits in `relevances`.
std::optional<double> ndcg_at_k(std::span<const std::uint8_t> relevances, std::size_t k,
                                std::size_t total_relevant);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 when n < 2
  std::size_t n = 0;
};
MeanSd mean_sd(std::span<const double> values);

struct QaPrediction {
  std::string id;
  std::string prediction;
  std::vector<std::string> golds;  // non-empty
};

struct QaScores {
  double exact_match = 0.0;
  double f1 = 0.0;
  std::size_t n = 0;
};
QaScores evaluate_qa(const std::vector<QaPrediction>& predictions);

// JSONL loaders. Label files hold {id, labels:[...]} or {id, label:"..."};
// QA predictions hold {id, prediction}; QA golds hold {id, answers:[...]}.
std::vector<LabelAssignment> read_label_assignments(const std::filesystem::path& path);
std::vector<QaPrediction> read_qa_predictions(const std::filesystem::path& predictions,
                                              const std::filesystem::path& golds);

std::string classification_report_json(const ClassCounts& counts, double accuracy_value);
std::string qa_report_json(const QaScores& scores);

}  // namespace finprep

#endif  // FINPREP_METRICS_H_
