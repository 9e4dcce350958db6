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

#include "finprep/qagen.h"

#include <chrono>
#include <mutex>
#include <regex>
#include <set>
#include <thread>

#include "finprep/parallel.h"
#include "finprep/unicode.h"
#include "json.hpp"

namespace finprep {

namespace {

constexpr std::string_view kQuestionTemplate =
    "Create three questions for the following text. It should be possible to answer the "
    "question with a substring of the input text. The questions should ask for different "
    "aspects of the input. The questions should be in German.\n"
    "\n"
    "Text: <<context>>\n"
    "Question:";

constexpr std::string_view kAnswerTemplate =
    "You have given a text and a question to that text. Find the answer as a substring of the "
    "input text. It is crucial that the answer is contained exactly as a substring in the input "
    "text, even if this implies that the answer is not a full sentence. Example:\n"
    "\n"
    "Text: 'Herr M\xC3\xBCller ist 37 Jahre alt.'\n"
    "Question: 'Wie alt ist Herr M\xC3\xBCller?'\n"
    "Answer: '37 Jahre'\n"
    "\n"
    "Text: <<context>>\n"
    "Question: <<question>>\n"
    "Answer:";

std::string substitute(std::string_view tmpl, std::string_view placeholder,
                       std::string_view value) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t hit = tmpl.find(placeholder, pos);
    if (hit == std::string_view::npos) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(value);
    pos = hit + placeholder.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

// Opening/closing quote pairs stripped from model answers.
constexpr std::pair<std::string_view, std::string_view> kQuotePairs[] = {
    {"'", "'"},
    {"\"", "\""},
    {"`", "`"},
    {"\xE2\x80\x9E", "\xE2\x80\x9C"},  // „ “
    {"\xE2\x80\x9C", "\xE2\x80\x9D"},  // “ ”
    {"\xE2\x80\x9A", "\xE2\x80\x98"},  // ‚ ‘
    {"\xE2\x80\x98", "\xE2\x80\x99"},  // ‘ ’
    {"\xC2\xAB", "\xC2\xBB"},          // « »
    {"\xC2\xBB", "\xC2\xAB"},          // » «
};

std::string_view strip_answer(std::string_view s) {
  s = unicode::trim(s);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [open, close] : kQuotePairs) {
      if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
        s = unicode::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        changed = true;
        break;
      }
    }
  }
  return s;
}

std::optional<AnswerMatch> find_answer(std::string_view context, std::string_view answer) {
  if (answer.empty()) return std::nullopt;
  const std::size_t pos = context.find(answer);
  if (pos == std::string_view::npos) return std::nullopt;
  return AnswerMatch{unicode::scalar_length(context.substr(0, pos)), std::string(answer)};
}

class RateLimiter {
 public:
  explicit RateLimiter(double per_second)
      : interval_(per_second > 0 ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                       std::chrono::duration<double>(1.0 / per_second))
                                 : std::chrono::steady_clock::duration::zero()) {}

  void acquire() {
    if (interval_ == std::chrono::steady_clock::duration::zero()) return;
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard<std::mutex> lock(mu_);
      slot = std::max(std::chrono::steady_clock::now(), next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::steady_clock::duration interval_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

struct ContextFailed {};

struct Caller {
  LlmClient& client;
  const GenConfig& config;
  RateLimiter& limiter;
  GenReport& report;
  std::uint64_t successful_calls = 0;

  std::string call(const std::string& prompt) {
    std::uint32_t backoff = config.backoff_ms;
    for (std::uint32_t attempt = 0;; ++attempt) {
      limiter.acquire();
      try {
        std::string reply = client.complete(prompt);
        ++successful_calls;
        return reply;
      } catch (const TransportError&) {
        ++report.transport_errors;
        if (attempt >= config.transport_retries) throw ContextFailed{};
      }
      if (backoff > 0) std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
  }
};

struct ContextOutcome {
  std::vector<QaRecord> records;
  GenReport report;
};

ContextOutcome process_context(const QaContext& ctx, LlmClient& client, const GenConfig& config,
                               RateLimiter& limiter) {
  ContextOutcome out;
  GenReport& r = out.report;
  r.contexts = 1;
  Caller caller{client, config, limiter, r};
  try {
    const std::string question_prompt = render_question_prompt(ctx.text);
    std::optional<std::vector<std::string>> questions;
    for (std::uint32_t attempt = 0; attempt <= config.retries; ++attempt) {
      if (attempt > 0) ++r.question_retries;
      ++r.question_calls;
      questions = parse_questions(caller.call(question_prompt));
      if (questions) break;
    }
    if (!questions) {
      ++r.question_parse_failures;
      return out;
    }
    r.questions_generated += questions->size();

    std::set<std::string> seen;
    std::size_t index = 0;
    for (const auto& q : *questions) {
      if (!seen.insert(q).second) {
        ++r.duplicate_questions;
        continue;
      }
      const std::string answer_prompt = render_answer_prompt(ctx.text, q);
      std::optional<AnswerMatch> match;
      for (std::uint32_t attempt = 0; attempt <= config.retries; ++attempt) {
        if (attempt > 0) ++r.answer_retries;
        ++r.answer_calls;
        match = validate_answer(ctx.text, caller.call(answer_prompt));
        if (match) break;
      }
      if (match) {
        ++r.answers_validated;
        out.records.push_back({ctx.id + "-q" + std::to_string(index), ctx.id, ctx.text, q,
                               match->text, match->answer_start});
      } else {
        ++r.answers_discarded;
      }
      ++index;
    }
  } catch (const ContextFailed&) {
    const std::uint64_t transport = r.transport_errors;
    r = GenReport{};
    r.contexts = 1;
    r.contexts_failed = 1;
    r.transport_errors = transport;
    r.calls_in_failed_contexts = caller.successful_calls;
    r.failed_contexts.push_back(ctx.id);
    out.records.clear();
  }
  return out;
}

}  // namespace

std::optional<std::string> truncate_context(const std::vector<std::string>& sentences,
                                            std::size_t max_sentences) {
  if (sentences.empty() || max_sentences == 0) return std::nullopt;
  std::string out;
  const std::size_t n = std::min(max_sentences, sentences.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

std::string render_question_prompt(std::string_view context) {
  if (unicode::trim(context).empty()) throw ValidationError("question prompt needs a context");
  return substitute(kQuestionTemplate, "<<context>>", context);
}

std::string render_answer_prompt(std::string_view context, std::string_view question) {
  if (unicode::trim(context).empty()) throw ValidationError("answer prompt needs a context");
  if (unicode::trim(question).empty()) throw ValidationError("answer prompt needs a question");
  // Substitute the question first so a context containing the literal
  // placeholder text cannot be rewritten.
  const std::size_t q = kAnswerTemplate.find("<<question>>");
  const std::size_t c = kAnswerTemplate.find("<<context>>");
  std::string out;
  out.append(kAnswerTemplate.substr(0, c));
  out.append(context);
  out.append(kAnswerTemplate.substr(c + 11, q - c - 11));
  out.append(question);
  out.append(kAnswerTemplate.substr(q + 12));
  return out;
}

std::optional<std::vector<std::string>> parse_questions(std::string_view llm_output) {
  static const std::regex kNumbering(
      R"(^(?:(?:Frage|Question)\s*\d*\s*[:.)]|\d+\s*[.):]|[-*]|\xE2\x80\xA2|\xE2\x80\x93)\s*)",
      std::regex::icase);
  std::vector<std::string> questions;
  std::size_t pos = 0;
  while (pos <= llm_output.size()) {
    std::size_t end = llm_output.find('\n', pos);
    if (end == std::string_view::npos) end = llm_output.size();
    std::string line(unicode::trim(llm_output.substr(pos, end - pos)));
    line = std::regex_replace(line, kNumbering, "", std::regex_constants::format_first_only);
    line = std::string(unicode::trim(line));
    if (!line.empty()) questions.push_back(std::move(line));
    pos = end + 1;
  }
  if (questions.size() != kQuestionsPerContext) return std::nullopt;
  return questions;
}

std::optional<AnswerMatch> validate_answer(std::string_view context, std::string_view answer) {
  if (auto m = find_answer(context, answer)) return m;
  const std::string_view stripped = strip_answer(answer);
  if (stripped.size() == answer.size()) return std::nullopt;
  return find_answer(context, stripped);
}

void GenConfig::validate() const {
  if (max_in_flight == 0) throw ValidationError("max_in_flight must be positive");
  if (requests_per_second < 0) throw ValidationError("requests_per_second must be >= 0");
}

GenReport& GenReport::combine(const GenReport& o) {
  contexts += o.contexts;
  contexts_failed += o.contexts_failed;
  question_parse_failures += o.question_parse_failures;
  questions_generated += o.questions_generated;
  duplicate_questions += o.duplicate_questions;
  answers_validated += o.answers_validated;
  answers_discarded += o.answers_discarded;
  question_retries += o.question_retries;
  answer_retries += o.answer_retries;
  question_calls += o.question_calls;
  answer_calls += o.answer_calls;
  calls_in_failed_contexts += o.calls_in_failed_contexts;
  transport_errors += o.transport_errors;
  failed_contexts.insert(failed_contexts.end(), o.failed_contexts.begin(),
                         o.failed_contexts.end());
  return *this;
}

GenResult generate(const std::vector<QaContext>& contexts, LlmClient& client,
                   const GenConfig& config) {
  config.validate();
  RateLimiter limiter(config.requests_per_second);
  std::vector<ContextOutcome> outcomes(contexts.size());
  parallel_for(contexts.size(), config.max_in_flight, [&](std::size_t i) {
    outcomes[i] = process_context(contexts[i], client, config, limiter);
  });
  GenResult result;
  for (auto& o : outcomes) {
    result.report.combine(o.report);
    for (auto& rec : o.records) result.records.push_back(std::move(rec));
  }
  return result;
}

std::string squad_json(const std::vector<QaRecord>& records) {
  nlohmann::ordered_json data = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < records.size();) {
    const std::string& cid = records[i].context_id;
    nlohmann::ordered_json qas = nlohmann::ordered_json::array();
    const std::string& context = records[i].context;
    for (; i < records.size() && records[i].context_id == cid; ++i) {
      const auto& r = records[i];
      nlohmann::ordered_json qa;
      qa["id"] = r.id;
      qa["question"] = r.question;
      qa["answers"] = nlohmann::ordered_json::array(
          {{{"text", r.answer}, {"answer_start", r.answer_start}}});
      qas.push_back(std::move(qa));
    }
    nlohmann::ordered_json paragraph;
    paragraph["context"] = context;
    paragraph["qas"] = std::move(qas);
    nlohmann::ordered_json article;
    article["title"] = cid;
    article["paragraphs"] = nlohmann::ordered_json::array({std::move(paragraph)});
    data.push_back(std::move(article));
  }
  nlohmann::ordered_json root;
  root["version"] = "1.1";
  root["answer_start_unit"] = "unicode_scalar";
  root["data"] = std::move(data);
  return root.dump(2);
}

std::string gen_report_json(const GenReport& r) {
  nlohmann::ordered_json obj;
  obj["contexts"] = r.contexts;
  obj["contexts_failed"] = r.contexts_failed;
  obj["question_parse_failures"] = r.question_parse_failures;
  obj["questions_generated"] = r.questions_generated;
  obj["duplicate_questions"] = r.duplicate_questions;
  obj["answered"] = r.answered();
  obj["answers_validated"] = r.answers_validated;
  obj["answers_discarded"] = r.answers_discarded;
  obj["retries_used"] = r.retries_used();
  obj["question_retries"] = r.question_retries;
  obj["answer_retries"] = r.answer_retries;
  obj["llm_calls"] = r.llm_calls();
  obj["question_calls"] = r.question_calls;
  obj["answer_calls"] = r.answer_calls;
  obj["calls_in_failed_contexts"] = r.calls_in_failed_contexts;
  obj["transport_errors"] = r.transport_errors;
  obj["failed_contexts"] = r.failed_contexts;
  return obj.dump(2);
}

}  // namespace finprep
