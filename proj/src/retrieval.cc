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

#include "finprep/retrieval.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "finprep/error.h"
#include "finprep/llm_client.h"
#include "finprep/metrics.h"
#include "finprep/parallel.h"
#include "finprep/unicode.h"
#include "json.hpp"

namespace finprep {

namespace {

double norm(std::span<const double> v) {
  long double ss = 0.0L;
  for (double x : v) ss += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(ss));
}

double cosine_with_norms(std::span<const double> a, std::span<const double> b, double na,
                         double nb) {
  long double dot = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<long double>(a[i]) * b[i];
  const double c = static_cast<double>(dot / (static_cast<long double>(na) * nb));
  return std::clamp(c, -1.0, 1.0);
}

std::int64_t tie_key(double score) {
  return std::llround(score / kScoreTieResolution);
}

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

void EmbeddingSet::add(const std::string& id, std::vector<double> vector) {
  if (id.empty()) throw ValidationError("embedding with an empty id");
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_) {
    throw ValidationError("embedding '" + id + "' has dimension " +
                          std::to_string(vector.size()) + ", expected " +
                          std::to_string(dimension_));
  }
  for (double x : vector) {
    if (!std::isfinite(x)) throw ValidationError("embedding '" + id + "' has a non-finite component");
  }
  if (!vectors_.emplace(id, std::move(vector)).second) {
    throw ValidationError("duplicate embedding id '" + id + "'");
  }
}

const std::vector<double>& EmbeddingSet::at(const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) throw ValidationError("no embedding for '" + id + "'");
  return it->second;
}

EmbeddingSet parse_embeddings(std::istream& in, const std::string& source_name) {
  std::string line;
  std::uint64_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(source_name + ":" + std::to_string(lineno) + ": " + why);
  };
  std::size_t declared = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++lineno;
    auto t = unicode::trim(line);
    if (t.empty()) continue;
    if (!t.starts_with("dim=")) fail("expected header 'dim=<d>'");
    auto digits = t.substr(4);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), declared);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || declared == 0) {
      fail("bad dimension in header");
    }
    have_header = true;
  }
  if (!have_header) fail("missing header 'dim=<d>'");

  EmbeddingSet set(declared);
  while (std::getline(in, line)) {
    ++lineno;
    if (unicode::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) fail("expected 'id<TAB>values'");
    std::string id = line.substr(0, tab);
    std::vector<double> values;
    values.reserve(declared);
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    for (;;) {
      while (p < end && is_blank(*p)) ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec == std::errc::result_out_of_range) {
        throw ValidationError("embedding '" + id + "' has a non-finite component");
      }
      if (ec != std::errc()) fail("embedding '" + id + "' has a malformed number");
      values.push_back(v);
      p = next;
    }
    set.add(id, std::move(values));
  }
  return set;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_embeddings(in, path.string());
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "dim=" << set.dimension() << '\n';
  char buf[32];
  for (const auto& [id, v] : set.vectors()) {
    out << id << '\t';
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v[i]);
      if (i > 0) out << ' ';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed on " + path.string());
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine of vectors with unequal dimensions");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine of a zero vector");
  return cosine_with_norms(a, b, na, nb);
}

std::vector<RetrievalQuery> read_queries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RetrievalQuery> out;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (unicode::trim(line).empty()) continue;
    try {
      auto obj = nlohmann::json::parse(line);
      out.push_back({obj.at("id").get<std::string>(), obj.at("topic").get<std::string>(),
                     obj.value("text", std::string())});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

namespace {

struct PreparedPool {
  std::vector<const Paragraph*> paragraphs;
  std::vector<const std::vector<double>*> vectors;
  std::vector<double> norms;
};

PreparedPool prepare_pool(const std::vector<Paragraph>& pool, const EmbeddingSet& embeddings) {
  PreparedPool p;
  for (const auto& para : pool) {
    const auto& v = embeddings.at(para.id);
    const double n = norm(v);
    if (n == 0.0) throw ValidationError("embedding of paragraph '" + para.id + "' is zero");
    p.paragraphs.push_back(&para);
    p.vectors.push_back(&v);
    p.norms.push_back(n);
  }
  return p;
}

RankedList rank_prepared(const RetrievalQuery& query, const PreparedPool& pool,
                         const EmbeddingSet& query_embeddings) {
  const auto& q = query_embeddings.at(query.id);
  if (pool.vectors.size() > 0 && q.size() != pool.vectors.front()->size()) {
    throw ValidationError("query '" + query.id + "' and the pool have different dimensions");
  }
  const double qn = norm(q);
  if (qn == 0.0) throw ValidationError("embedding of query '" + query.id + "' is zero");

  struct Scored {
    std::int64_t key;
    RankedItem item;
  };
  std::vector<Scored> scored;
  scored.reserve(pool.paragraphs.size());
  RankedList list;
  list.query_id = query.id;
  for (std::size_t i = 0; i < pool.paragraphs.size(); ++i) {
    const auto* para = pool.paragraphs[i];
    const double s = cosine_with_norms(q, *pool.vectors[i], qn, pool.norms[i]);
    const bool relevant =
        std::binary_search(para->labels.begin(), para->labels.end(), query.topic);
    if (relevant) ++list.total_relevant;
    scored.push_back({tie_key(s), {para->id, s, relevant}});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.key != b.key) return a.key > b.key;
    return a.item.id < b.item.id;
  });
  list.items.reserve(scored.size());
  for (auto& s : scored) list.items.push_back(std::move(s.item));
  return list;
}

void check_unique_ids(const std::vector<Paragraph>& pool) {
  std::vector<std::string_view> ids;
  ids.reserve(pool.size());
  for (const auto& p : pool) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) throw ValidationError("duplicate pool id '" + std::string(*dup) + "'");
}

}  // namespace

RankedList rank(const RetrievalQuery& query, const std::vector<Paragraph>& pool,
                const EmbeddingSet& query_embeddings, const EmbeddingSet& pool_embeddings) {
  check_unique_ids(pool);
  return rank_prepared(query, prepare_pool(pool, pool_embeddings), query_embeddings);
}

RetrievalCurve evaluate_curve(const std::vector<RetrievalQuery>& queries,
                              const std::vector<Paragraph>& pool,
                              const EmbeddingSet& query_embeddings,
                              const EmbeddingSet& pool_embeddings, std::size_t k_max,
                              unsigned threads) {
  if (pool.empty()) throw ValidationError("retrieval pool is empty");
  if (k_max < 1) throw ValidationError("k range is empty");
  check_unique_ids(pool);
  const PreparedPool prepared = prepare_pool(pool, pool_embeddings);

  // Per query: nDCG@k for every k, or empty when the query is excluded.
  std::vector<std::vector<double>> per_query(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t qi) {
    const RankedList list = rank_prepared(queries[qi], prepared, query_embeddings);
    if (list.total_relevant == 0) return;
    std::vector<std::uint8_t> rel(list.items.size());
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = list.items[i].relevant ? 1 : 0;
    auto& out = per_query[qi];
    out.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
      out.push_back(*ndcg_at_k(rel, k, list.total_relevant));
    }
  });

  RetrievalCurve curve;
  std::size_t included = 0;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    if (per_query[qi].empty()) {
      curve.excluded_queries.push_back(queries[qi].id);
    } else {
      ++included;
    }
  }
  for (std::size_t k = 1; k <= k_max; ++k) {
    double sum = 0.0;
    for (const auto& values : per_query) {
      if (!values.empty()) sum += values[k - 1];
    }
    curve.points.push_back(
        {k, included > 0 ? sum / static_cast<double>(included) : std::nan(""), included});
  }
  return curve;
}

std::string curve_to_csv(const RetrievalCurve& curve) {
  std::string out = "k,mean_ndcg,n_queries_included\n";
  char line[96];
  for (const auto& p : curve.points) {
    if (p.queries_included == 0) {
      std::snprintf(line, sizeof line, "%zu,nan,0\n", p.k);
    } else {
      std::snprintf(line, sizeof line, "%zu,%.12f,%zu\n", p.k, p.mean_ndcg, p.queries_included);
    }
    out += line;
  }
  return out;
}

EmbeddingSet embed_texts(const std::vector<std::pair<std::string, std::string>>& id_texts,
                         const EmbeddingClientConfig& config) {
  if (config.endpoint.empty()) throw ValidationError("embedding endpoint is not configured");
  if (config.batch_size == 0) throw ValidationError("embedding batch size must be positive");
  std::string key;
  if (const char* k = std::getenv(config.api_key_env.c_str())) key = k;
  EmbeddingSet set(config.dimension);
  for (std::size_t begin = 0; begin < id_texts.size(); begin += config.batch_size) {
    const std::size_t end = std::min(id_texts.size(), begin + config.batch_size);
    nlohmann::json request;
    if (!config.model.empty()) request["model"] = config.model;
    request["input"] = nlohmann::json::array();
    for (std::size_t i = begin; i < end; ++i) request["input"].push_back(id_texts[i].second);
    const auto body = http_post_json(config.endpoint, request.dump(), key, config.timeout_seconds);
    try {
      auto reply = nlohmann::json::parse(body);
      const auto& data = reply.at("data");
      if (data.size() != end - begin) {
        throw TransportError("embedding endpoint returned " + std::to_string(data.size()) +
                             " vectors for " + std::to_string(end - begin) + " texts");
      }
      for (std::size_t i = begin; i < end; ++i) {
        set.add(id_texts[i].first, data.at(i - begin).at("embedding").get<std::vector<double>>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("unexpected embedding response: ") + e.what());
    }
  }
  return set;
}

}  // namespace finprep
