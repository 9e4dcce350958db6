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

// Reference implementations written straight from the metric definitions.
// They share no code with the library and are not to be changed to match
// it: a disagreement means the library is wrong.

#ifndef FINPREP_TESTS_SUPPORT_ORACLES_H_
#define FINPREP_TESTS_SUPPORT_ORACLES_H_

#include <string>
#include <vector>

namespace finprep::oracle {

// Example i has predicted label set preds[i] and gold set golds[i].
using LabelSets = std::vector<std::vector<std::string>>;

// Per class: precision = TP / predicted, recall = TP / actual, F1 = their
// harmonic mean; any undefined ratio or a zero sum gives F1 = 0.
double macro_f1(const LabelSets& preds, const LabelSets& golds,
                const std::vector<std::string>& classes);
double micro_f1(const LabelSets& preds, const LabelSets& golds,
                const std::vector<std::string>& classes);
double subset_accuracy(const LabelSets& preds, const LabelSets& golds);

// Normalization for the restricted test alphabet: ASCII letters and digits,
// the umlauts ÄÖÜäöüß, ASCII punctuation and spaces.
std::string normalize(const std::string& s);
double exact_match(const std::string& pred, const std::vector<std::string>& golds);
double token_f1(const std::string& pred, const std::vector<std::string>& golds);

// Järvelin-Kekäläinen nDCG with log2(rank + 1) discounting.
double ndcg(const std::vector<int>& rels, int k, int total_relevant);

}  // namespace finprep::oracle

#endif  // FINPREP_TESTS_SUPPORT_ORACLES_H_
