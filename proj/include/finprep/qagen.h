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

// Extractive QA generation: prompt rendering, question parsing, substring
// validation and the generation loop that drives an LlmClient.

#ifndef FINPREP_QAGEN_H_
#define FINPREP_QAGEN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finprep/llm_client.h"

namespace finprep {

inline constexpr std::size_t kMaxContextSentences = 15;
inline constexpr std::size_t kQuestionsPerContext = 3;

// First min(max_sentences, n) sentences joined by single spaces; nullopt
// when there are none.
std::optional<std::string> truncate_context(const std::vector<std::string>& sentences,
                                            std::size_t max_sentences = kMaxContextSentences);

// Both throw ValidationError on an empty context or question.
std::string render_question_prompt(std::string_view context);
std::string render_answer_prompt(std::string_view context, std::string_view question);

// One question per non-blank line with list numbering removed ("1.", "2)",
// "-", "*", "Frage 1:", ...). nullopt unless exactly three remain.
std::optional<std::vector<std::string>> parse_questions(std::string_view llm_output);

struct AnswerMatch {
  std::size_t answer_start = 0;  // Unicode scalar offset of the first occurrence
  std::string text;              // the matched answer as it appears in the context
};

// Exact, case-sensitive search for the answer; if absent, retried once with
// surrounding whitespace and paired quotes removed.
std::optional<AnswerMatch> validate_answer(std::string_view context, std::string_view answer);

struct QaContext {
  std::string id;
  std::string text;
};

struct QaRecord {
  std::string id;
  std::string context_id;
  std::string context;
  std::string question;
  std::string answer;
  std::size_t answer_start = 0;

  friend bool operator==(const QaRecord&, const QaRecord&) = default;
};

struct GenConfig {
  std::uint32_t retries = 0;            // re-asks after a parse failure or non-substring answer
  std::uint32_t transport_retries = 3;  // per call, before the context is marked failed
  std::uint32_t backoff_ms = 500;       // doubled after every transport failure
  unsigned max_in_flight = 4;
  double requests_per_second = 0.0;     // 0 disables rate limiting

  void validate() const;
};

struct GenReport {
  std::uint64_t contexts = 0;
  std::uint64_t contexts_failed = 0;
  std::uint64_t question_parse_failures = 0;
  std::uint64_t questions_generated = 0;
  std::uint64_t duplicate_questions = 0;
  std::uint64_t answers_validated = 0;
  std::uint64_t answers_discarded = 0;
  std::uint64_t question_retries = 0;
  std::uint64_t answer_retries = 0;
  // Successful calls made for contexts that completed.
  std::uint64_t question_calls = 0;
  std::uint64_t answer_calls = 0;
  // Successful calls made for contexts that later failed.
  std::uint64_t calls_in_failed_contexts = 0;
  std::uint64_t transport_errors = 0;
  std::vector<std::string> failed_contexts;

  // Over completed contexts:
  //   question_calls = (contexts - contexts_failed) + question_retries
  //   answer_calls   = answered() + answer_retries
  //   answered()     = questions_generated - duplicate_questions
  std::uint64_t answered() const { return answers_validated + answers_discarded; }
  std::uint64_t retries_used() const { return question_retries + answer_retries; }
  std::uint64_t llm_calls() const {
    return question_calls + answer_calls + calls_in_failed_contexts + transport_errors;
  }
  GenReport& combine(const GenReport& o);
};

struct GenResult {
  std::vector<QaRecord> records;
  GenReport report;
};

// Per context: one question call, then one answer call per unique
// question; only validated answers become records. A context whose calls
// keep failing at the transport level contributes no records and is listed
// in the report. Output order follows input order.
GenResult generate(const std::vector<QaContext>& contexts, LlmClient& client,
                   const GenConfig& config);

// SQuAD v1 layout, one paragraph entry per context.
std::string squad_json(const std::vector<QaRecord>& records);
std::string gen_report_json(const GenReport& report);

}  // namespace finprep

#endif  // FINPREP_QAGEN_H_
