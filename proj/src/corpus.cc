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

#include "finprep/corpus.h"

#include <regex>
#include <sstream>
#include <utility>

#include "finprep/error.h"
#include "finprep/resources.h"
#include "finprep/unicode.h"
#include "json.hpp"

namespace finprep {
namespace {

using nlohmann::ordered_json;

bool is_iso8601(const std::string& s) {
  static const std::regex kPattern(
      R"(^(\d{4})-(\d{2})-(\d{2})(T\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?$)");
  std::smatch m;
  if (!std::regex_match(s, m, kPattern)) return false;
  const int month = std::stoi(m[2].str());
  const int day = std::stoi(m[3].str());
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

const std::string& require_string(const ordered_json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("missing field '") + key + "'");
  if (!it->is_string()) {
    throw FormatError(std::string("field '") + key + "' must be a string");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

std::string validate_document(const Document& doc) {
  if (doc.id.empty()) return "empty id";
  if (unicode::trim(doc.text).empty()) return "empty text";
  if (doc.published && !is_iso8601(*doc.published)) {
    return "published is not an ISO-8601 date: " + *doc.published;
  }
  return {};
}

Document parse_document(std::string_view line) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw FormatError("record is not a JSON object");

  Document doc;
  doc.id = require_string(obj, "id");
  doc.source = require_string(obj, "source");
  doc.text = require_string(obj, "text");
  if (auto it = obj.find("published"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw FormatError("field 'published' must be a string");
    doc.published = it->get<std::string>();
  }
  if (auto it = obj.find("labels"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw FormatError("field 'labels' must be an array");
    std::vector<std::string> labels;
    for (const auto& v : *it) {
      if (!v.is_string()) throw FormatError("labels must be strings");
      labels.push_back(v.get<std::string>());
    }
    doc.labels = std::move(labels);
  }
  if (auto reason = validate_document(doc); !reason.empty()) {
    throw FormatError(reason);
  }
  return doc;
}

std::string serialize_document(const Document& doc) {
  ordered_json obj;
  obj["id"] = doc.id;
  obj["source"] = doc.source;
  obj["text"] = doc.text;
  if (doc.published) obj["published"] = *doc.published;
  if (doc.labels) obj["labels"] = *doc.labels;
  return obj.dump();
}

DocumentReader::DocumentReader(const std::filesystem::path& path,
                               ReaderOptions options)
    : path_(path), in_(path, std::ios::binary), options_(options) {
  if (!in_) throw IoError("cannot open corpus file " + path.string());
}

std::optional<Document> DocumentReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (unicode::trim(line).empty()) continue;
    try {
      Document doc = parse_document(line);
      if (options_.reject_duplicate_ids && !seen_ids_.insert(doc.id).second) {
        throw FormatError("duplicate id '" + doc.id + "'");
      }
      return doc;
    } catch (const FormatError& e) {
      errors_.push_back({line_, e.what()});
    }
  }
  if (in_.bad()) throw IoError("read failure in " + path_.string());
  return std::nullopt;
}

ReadResult read_documents(const std::filesystem::path& path,
                          ReaderOptions options) {
  DocumentReader reader(path, options);
  ReadResult result;
  while (auto doc = reader.next()) result.documents.push_back(std::move(*doc));
  result.errors = reader.errors();
  return result;
}

DocumentWriter::DocumentWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

void DocumentWriter::write(const Document& doc) {
  out_ << serialize_document(doc) << '\n';
  if (!out_) {
    throw IoError("write failed on " + path_.string(), count_);
  }
  ++count_;
}

void DocumentWriter::close() {
  out_.flush();
  if (!out_) throw IoError("flush failed on " + path_.string(), count_);
  out_.close();
}

std::uint64_t write_documents(const std::vector<Document>& docs,
                              const std::filesystem::path& path) {
  DocumentWriter writer(path);
  for (const auto& doc : docs) writer.write(doc);
  writer.close();
  return writer.count();
}

void write_error_report(const std::vector<RecordError>& errors,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& e : errors) {
    ordered_json obj;
    obj["line"] = e.line;
    obj["reason"] = e.reason;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failed on " + path.string());
}

StopwordSet parse_word_list(std::string_view content) {
  StopwordSet words;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    auto entry = unicode::trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    words.insert(unicode::to_lower(entry));
  }
  return words;
}

StopwordSet load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open word list " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_word_list(buf.str());
}

LanguageConfig LanguageConfig::defaults() {
  LanguageConfig config;
  config.german = parse_word_list(resources::stopwords_de());
  config.english = parse_word_list(resources::stopwords_en());
  return config;
}

LanguageDecision classify_language(std::string_view text,
                                   const LanguageConfig& config) {
  std::uint64_t tokens = 0;
  std::uint64_t german = 0;
  std::uint64_t english = 0;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    ++tokens;
    if (config.german.contains(word)) ++german;
    if (config.english.contains(word)) ++english;
    word.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t c = unicode::next_scalar(text, pos);
    if (unicode::is_letter(c)) {
      unicode::append(word, unicode::to_lower(c));
    } else {
      flush();
    }
  }
  flush();

  LanguageDecision decision;
  if (tokens == 0) return decision;
  const double de = static_cast<double>(german) / static_cast<double>(tokens);
  const double en = static_cast<double>(english) / static_cast<double>(tokens);
  decision.score = de;
  decision.keep = de >= en && de >= config.german_floor;
  return decision;
}

DocumentFilter language_filter(LanguageConfig config) {
  return [config = std::move(config)](const Document& doc) {
    return classify_language(doc.text, config).keep;
  };
}

DocumentFilter blocklist_filter(std::unordered_set<std::string> blocked_ids) {
  return [blocked = std::move(blocked_ids)](const Document& doc) {
    return !blocked.contains(doc.id);
  };
}

std::unordered_set<std::string> load_id_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open id list " + path.string());
  std::unordered_set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto entry = unicode::trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    ids.emplace(entry);
  }
  return ids;
}

}  // namespace finprep
