/* Copyright (c) 2026 The wordspot Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */


#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wordspot/embeddings.hpp"
#include "wordspot/rng.hpp"

namespace wordspot::retrieval {

// 1 - a.b / (|a| |b|). Throws "zero-norm vector" when either norm is zero.
double cosine_distance(std::span<const double> a, std::span<const double> b);

struct GalleryItem {
  std::string id;
  embeddings::AttributeVector vector;
  std::string label;  // case-folded
};

// Retrieval collection. Ids are unique and all vectors share one
// dimensionality and embedding kind.
class Gallery {
 public:
  void add(std::string id, embeddings::AttributeVector vector, std::string_view label);

  const std::vector<GalleryItem>& items() const noexcept { return items_; }
  const GalleryItem& operator[](std::size_t i) const { return items_[i]; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t dim() const noexcept { return items_.empty() ? 0 : items_.front().vector.dim(); }
  double norm(std::size_t i) const { return norms_[i]; }

 private:
  std::vector<GalleryItem> items_;
  std::vector<double> norms_;
};

struct RankedEntry {
  std::string id;
  double distance = 0.0;
  std::size_t index = 0;  // position in the gallery
};

struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;  // ascending distance, stable on ties
};

RankedList rank(std::string_view query_id, const embeddings::AttributeVector& query,
                const Gallery& gallery, std::optional<std::string_view> exclude = std::nullopt);

// sum_i P(i) r(i) / n_relevant_total, with P(i) the precision at cut-off i.
double average_precision(std::span<const int> relevance, std::size_t n_relevant_total);

struct QueryAP {
  std::string id;
  std::string label;
  double ap = 0.0;
};

struct APReport {
  std::string protocol;
  std::vector<QueryAP> queries;
  double map = 0.0;
};

enum class QueryMode { kQbe, kQbs };

std::string to_string(QueryMode mode);
QueryMode parse_query_mode(std::string_view name);

using StringEmbedder = std::function<embeddings::AttributeVector(const embeddings::WordString&)>;

// Every gallery item queries the rest. Queries without a relevant item, and
// queries whose label is a stop word, are skipped but stay in the gallery.
APReport run_qbe_almazan(const Gallery& test, std::span<const std::string> stopwords = {},
                         std::vector<RankedList>* lists = nullptr);

// Every unique test label, embedded from its string, queries the full gallery.
APReport run_qbs_almazan(const Gallery& test, const StringEmbedder& embed,
                         std::span<const std::string> stopwords = {},
                         std::vector<RankedList>* lists = nullptr);

// Separate query set ranked against the full test gallery. Every query must
// have at least one relevant test item.
APReport run_competition_protocol(const Gallery& queries, const Gallery& test, QueryMode mode,
                                  std::vector<RankedList>* lists = nullptr);

// Query gallery for QbS: one entry per unique case-folded string.
Gallery make_string_queries(std::span<const std::string> labels, const StringEmbedder& embed);

// "#wordspot-apreport v1<TAB>protocol=<name>", then "id<TAB>label<TAB>ap"
// per query and a trailing "mAP<TAB>value" line; 9 decimal places.
void write_ap_report(std::ostream& out, const APReport& report);
APReport read_ap_report(std::istream& in);

// "#wordspot-ranking v1", then "query<TAB>rank<TAB>item<TAB>distance".
void write_ranked_lists(std::ostream& out, std::span<const RankedList> lists);

enum class Sidedness { kTwoSided, kGreater };
enum class PermutationScheme { kPooled, kPaired };

std::string to_string(Sidedness sided);
Sidedness parse_sidedness(std::string_view name);
std::string to_string(PermutationScheme scheme);
PermutationScheme parse_permutation_scheme(std::string_view name);

struct PermutationOptions {
  std::uint64_t k = 10000;
  Sidedness sided = Sidedness::kTwoSided;
  PermutationScheme scheme = PermutationScheme::kPooled;
  bool add_one = false;  // (count + 1) / (k + 1)
};

struct SignificanceResult {
  double observed = 0.0;  // mean(a) - mean(b)
  std::uint64_t k = 0;
  std::uint64_t count = 0;  // permutations at least as extreme
  double p_value = 0.0;
  double std_error = 0.0;
  Sidedness sided = Sidedness::kTwoSided;
  PermutationScheme scheme = PermutationScheme::kPooled;
};

SignificanceResult permutation_test(std::span<const double> a, std::span<const double> b,
                                    const PermutationOptions& options, Rng& rng);

// Paired tests match queries by id; pooled tests use the AP lists as given.
SignificanceResult compare_reports(const APReport& a, const APReport& b,
                                   const PermutationOptions& options, Rng& rng);

// ceil(1 / (4 s^2)).
std::uint64_t permutations_needed(double s_target);
// sqrt(p (1 - p) / k).
double permutation_std_error(double p, std::uint64_t k);

}  // namespace wordspot::retrieval
