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

// Zero-shot passage retrieval: cosine ranking of a paragraph pool against
// topic queries and the mean-nDCG@k curve.

#ifndef FINPREP_RETRIEVAL_H_
#define FINPREP_RETRIEVAL_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "finprep/datasets.h"

namespace finprep {

class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::size_t dimension = 0) : dimension_(dimension) {}

  // Throws ValidationError on a dimension mismatch, a non-finite
  // component or a repeated id.
  void add(const std::string& id, std::vector<double> vector);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.contains(id); }
  // Throws ValidationError naming the id when absent.
  const std::vector<double>& at(const std::string& id) const;
  const std::map<std::string, std::vector<double>>& vectors() const { return vectors_; }

 private:
  std::size_t dimension_;
  std::map<std::string, std::vector<double>> vectors_;
};

// Text format: a header line "dim=<d>", then "id<TAB>v1 v2 ... vd" per line.
EmbeddingSet parse_embeddings(std::istream& in, const std::string& source_name);
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

// dot(a, b) / (|a| |b|). Throws ValidationError on unequal dimensions or a
// zero vector.
double cosine(std::span<const double> a, std::span<const double> b);

struct RetrievalQuery {
  std::string id;
  std::string topic;
  std::string text;
};

std::vector<RetrievalQuery> read_queries(const std::filesystem::path& path);

struct RankedItem {
  std::string id;
  double score = 0.0;
  bool relevant = false;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

struct RankedList {
  std::string query_id;
  std::vector<RankedItem> items;     // descending score, ties by ascending id
  std::size_t total_relevant = 0;    // pool paragraphs carrying the topic

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

// Scores closer than this are ranked as ties, so float noise from
// rescaling a vector cannot reorder equal-direction items.
inline constexpr double kScoreTieResolution = 1e-12;

// Ranks the whole pool for one query. Every pool paragraph and the query
// need an embedding; a missing one raises ValidationError naming it.
RankedList rank(const RetrievalQuery& query, const std::vector<Paragraph>& pool,
                const EmbeddingSet& query_embeddings, const EmbeddingSet& pool_embeddings);

struct CurvePoint {
  std::size_t k = 0;
  double mean_ndcg = 0.0;
  std::size_t queries_included = 0;
};

struct RetrievalCurve {
  std::vector<CurvePoint> points;
  std::vector<std::string> excluded_queries;  // topic carried by no pool paragraph
};

// Mean nDCG@k for k = 1..k_max over queries with at least one relevant
// pool paragraph. Throws ValidationError on an empty pool or k_max < 1.
RetrievalCurve evaluate_curve(const std::vector<RetrievalQuery>& queries,
                              const std::vector<Paragraph>& pool,
                              const EmbeddingSet& query_embeddings,
                              const EmbeddingSet& pool_embeddings, std::size_t k_max = 100,
                              unsigned threads = 1);

// "k,mean_ndcg,n_queries_included" with twelve decimals.
std::string curve_to_csv(const RetrievalCurve& curve);

// Optional provider binding: POSTs {"model", "input": [texts]} to an
// OpenAI-compatible embeddings endpoint and checks every returned vector
// against `dimension` (0 accepts the first vector's size).
struct EmbeddingClientConfig {
  std::string endpoint;
  std::string model;
  std::string api_key_env = "FINPREP_EMBEDDING_API_KEY";
  std::size_t dimension = 0;
  int timeout_seconds = 60;
  std::size_t batch_size = 64;
};

EmbeddingSet embed_texts(const std::vector<std::pair<std::string, std::string>>& id_texts,
                         const EmbeddingClientConfig& config);

}  // namespace finprep

#endif  // FINPREP_RETRIEVAL_H_
