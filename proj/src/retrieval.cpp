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

#include "wordspot/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "wordspot/error.hpp"

namespace wordspot::retrieval {
namespace {

double l2norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double distance_with_norms(std::span<const double> a, double na, std::span<const double> b,
                           double nb) {
  if (!(na > 0.0) || !(nb > 0.0)) throw NumericError("zero-norm vector");
  const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return 1.0 - c;
}

std::string format_ap(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

std::unordered_set<std::string> fold_set(std::span<const std::string> words) {
  std::unordered_set<std::string> out;
  for (const auto& w : words) out.insert(embeddings::fold_case_utf8(w));
  return out;
}

double mean_ap(const std::vector<QueryAP>& queries) {
  double s = 0.0;
  for (const auto& q : queries) s += q.ap;
  return s / static_cast<double>(queries.size());
}

std::size_t count_label(const Gallery& g, const std::string& label) {
  std::size_t n = 0;
  for (const auto& item : g.items()) n += item.label == label ? 1 : 0;
  return n;
}

double score(const RankedList& list, const Gallery& gallery, const std::string& label,
             std::size_t n_relevant) {
  std::vector<int> rel(list.entries.size());
  for (std::size_t i = 0; i < rel.size(); ++i) {
    rel[i] = gallery[list.entries[i].index].label == label ? 1 : 0;
  }
  return average_precision(rel, n_relevant);
}

}  // namespace

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  return distance_with_norms(a, l2norm(a), b, l2norm(b));
}

void Gallery::add(std::string id, embeddings::AttributeVector vector, std::string_view label) {
  if (!items_.empty()) {
    if (vector.dim() != dim()) {
      throw ShapeError("gallery item '" + id + "' has dimension " + std::to_string(vector.dim()) +
                       ", expected " + std::to_string(dim()));
    }
    if (vector.kind != items_.front().vector.kind) {
      throw DataError("gallery item '" + id + "' has a different embedding kind");
    }
  }
  for (const auto& item : items_) {
    if (item.id == id) throw DataError("duplicate gallery id '" + id + "'");
  }
  norms_.push_back(l2norm(vector.values));
  items_.push_back({std::move(id), std::move(vector), embeddings::fold_case_utf8(label)});
}

RankedList rank(std::string_view query_id, const embeddings::AttributeVector& query,
                const Gallery& gallery, std::optional<std::string_view> exclude) {
  if (gallery.empty()) throw DataError("empty gallery");
  if (query.dim() != gallery.dim()) {
    throw ShapeError("query dimension " + std::to_string(query.dim()) +
                     " does not match gallery dimension " + std::to_string(gallery.dim()));
  }
  const double nq = l2norm(query.values);
  RankedList list;
  list.query_id = std::string(query_id);
  list.entries.reserve(gallery.size());
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const auto& item = gallery[i];
    if (exclude && item.id == *exclude) continue;
    list.entries.push_back({item.id,
                            distance_with_norms(query.values, nq, item.vector.values, gallery.norm(i)),
                            i});
  }
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [](const RankedEntry& x, const RankedEntry& y) { return x.distance < y.distance; });
  return list;
}

double average_precision(std::span<const int> relevance, std::size_t n_relevant_total) {
  if (n_relevant_total == 0) throw ArgumentError("average precision needs at least one relevant item");
  std::size_t hits = 0;
  long double sum = 0.0L;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    if (relevance[i] != 0 && relevance[i] != 1) throw ArgumentError("relevance must be 0 or 1");
    if (relevance[i] == 1) {
      ++hits;
      sum += static_cast<long double>(hits) / static_cast<long double>(i + 1);
    }
  }
  if (hits > n_relevant_total) {
    throw ArgumentError("relevance sequence has more hits than relevant items");
  }
  return static_cast<double>(sum / static_cast<long double>(n_relevant_total));
}

std::string to_string(QueryMode mode) { return mode == QueryMode::kQbe ? "qbe" : "qbs"; }

QueryMode parse_query_mode(std::string_view name) {
  if (name == "qbe") return QueryMode::kQbe;
  if (name == "qbs") return QueryMode::kQbs;
  throw ConfigError("unknown query mode '" + std::string(name) + "'");
}

APReport run_qbe_almazan(const Gallery& test, std::span<const std::string> stopwords,
                         std::vector<RankedList>* lists) {
  if (test.empty()) throw DataError("empty test set");
  const auto stop = fold_set(stopwords);
  std::map<std::string, std::size_t> counts;
  for (const auto& item : test.items()) ++counts[item.label];

  APReport report;
  report.protocol = "qbe-almazan";
  for (const auto& q : test.items()) {
    const std::size_t n_rel = counts[q.label] - 1;
    if (n_rel == 0 || stop.count(q.label)) continue;
    RankedList list = rank(q.id, q.vector, test, q.id);
    report.queries.push_back({q.id, q.label, score(list, test, q.label, n_rel)});
    if (lists) lists->push_back(std::move(list));
  }
  if (report.queries.empty()) throw DataError("no queries: every query lacks a relevant item");
  report.map = mean_ap(report.queries);
  return report;
}

APReport run_qbs_almazan(const Gallery& test, const StringEmbedder& embed,
                         std::span<const std::string> stopwords, std::vector<RankedList>* lists) {
  if (test.empty()) throw DataError("empty test set");
  const auto stop = fold_set(stopwords);
  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (const auto& item : test.items()) {
    if (stop.count(item.label)) continue;
    if (seen.insert(item.label).second) labels.push_back(item.label);
  }
  if (labels.empty()) throw DataError("no queries");

  APReport report;
  report.protocol = "qbs-almazan";
  for (const auto& label : labels) {
    const auto vec = embed(embeddings::WordString::from_utf8(label));
    RankedList list = rank(label, vec, test);
    report.queries.push_back({label, label, score(list, test, label, count_label(test, label))});
    if (lists) lists->push_back(std::move(list));
  }
  report.map = mean_ap(report.queries);
  return report;
}

APReport run_competition_protocol(const Gallery& queries, const Gallery& test, QueryMode mode,
                                  std::vector<RankedList>* lists) {
  if (test.empty()) throw DataError("empty test set");
  if (queries.empty()) throw DataError("no queries");
  APReport report;
  report.protocol = to_string(mode) + "-competition";
  for (const auto& q : queries.items()) {
    const std::size_t n_rel = count_label(test, q.label);
    if (n_rel == 0) {
      throw DataError("query '" + q.id + "' (" + q.label + ") has no relevant test item");
    }
    RankedList list = rank(q.id, q.vector, test);
    report.queries.push_back({q.id, q.label, score(list, test, q.label, n_rel)});
    if (lists) lists->push_back(std::move(list));
  }
  report.map = mean_ap(report.queries);
  return report;
}

Gallery make_string_queries(std::span<const std::string> labels, const StringEmbedder& embed) {
  Gallery g;
  std::set<std::string> seen;
  for (const auto& raw : labels) {
    const auto word = embeddings::WordString::from_utf8(raw);
    const std::string label = word.utf8();
    if (!seen.insert(label).second) continue;
    g.add(label, embed(word), label);
  }
  return g;
}

void write_ap_report(std::ostream& out, const APReport& report) {
  out << "#wordspot-apreport v1\tprotocol=" << report.protocol << '\n';
  for (const auto& q : report.queries) {
    out << q.id << '\t' << q.label << '\t' << format_ap(q.ap) << '\n';
  }
  out << "mAP\t" << format_ap(report.map) << '\n';
}

APReport read_ap_report(std::istream& in) {
  std::string line;
  const std::string prefix = "#wordspot-apreport v1\tprotocol=";
  if (!std::getline(in, line) || line.rfind(prefix, 0) != 0) throw DataError("not an AP report");
  APReport report;
  report.protocol = line.substr(prefix.size());
  bool have_map = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (have_map) throw DataError("AP report line " + std::to_string(line_no) + ": data after mAP");
    std::vector<std::string> f;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    char* end = nullptr;
    if (f.size() == 2 && f[0] == "mAP") {
      report.map = std::strtod(f[1].c_str(), &end);
      have_map = true;
    } else if (f.size() == 3) {
      const double ap = std::strtod(f[2].c_str(), &end);
      if (*end != '\0' || !(ap >= 0.0 && ap <= 1.0)) {
        throw DataError("AP report line " + std::to_string(line_no) + ": bad AP value");
      }
      report.queries.push_back({f[0], f[1], ap});
      continue;
    } else {
      throw DataError("AP report line " + std::to_string(line_no) + ": expected 3 fields");
    }
    if (*end != '\0') throw DataError("AP report line " + std::to_string(line_no) + ": bad mAP");
  }
  if (!have_map) throw DataError("AP report is missing its mAP line");
  if (report.queries.empty()) throw DataError("AP report has no queries");
  if (std::abs(mean_ap(report.queries) - report.map) > 1e-8) {
    throw DataError("AP report mAP does not match the per-query values");
  }
  return report;
}

void write_ranked_lists(std::ostream& out, std::span<const RankedList> lists) {
  out << "#wordspot-ranking v1\n";
  char buf[32];
  for (const auto& list : lists) {
    for (std::size_t r = 0; r < list.entries.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", list.entries[r].distance);
      out << list.query_id << '\t' << (r + 1) << '\t' << list.entries[r].id << '\t' << buf << '\n';
    }
  }
}

std::string to_string(Sidedness sided) {
  return sided == Sidedness::kTwoSided ? "two-sided" : "greater";
}

Sidedness parse_sidedness(std::string_view name) {
  if (name == "two-sided" || name == "two") return Sidedness::kTwoSided;
  if (name == "greater" || name == "one-sided" || name == "one") return Sidedness::kGreater;
  throw ConfigError("unknown sidedness '" + std::string(name) + "'");
}

std::string to_string(PermutationScheme scheme) {
  return scheme == PermutationScheme::kPooled ? "pooled" : "paired";
}

PermutationScheme parse_permutation_scheme(std::string_view name) {
  if (name == "pooled") return PermutationScheme::kPooled;
  if (name == "paired") return PermutationScheme::kPaired;
  throw ConfigError("unknown permutation scheme '" + std::string(name) + "'");
}

SignificanceResult permutation_test(std::span<const double> a, std::span<const double> b,
                                    const PermutationOptions& options, Rng& rng) {
  if (a.empty() || b.empty()) throw ArgumentError("permutation test needs two non-empty samples");
  if (options.k < 1) throw ArgumentError("permutation count must be >= 1");
  const bool paired = options.scheme == PermutationScheme::kPaired;
  if (paired && a.size() != b.size()) {
    throw ArgumentError("paired permutation test needs samples of equal size");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sum_a = std::accumulate(a.begin(), a.end(), 0.0);
  const double sum_b = std::accumulate(b.begin(), b.end(), 0.0);
  const double observed = sum_a / na - sum_b / nb;
  constexpr double kTol = 1e-12;

  auto extreme = [&](double delta) {
    if (options.sided == Sidedness::kTwoSided) return std::abs(delta) >= std::abs(observed) - kTol;
    return delta >= observed - kTol;
  };

  std::uint64_t count = 0;
  if (paired) {
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    std::bernoulli_distribution coin(0.5);
    for (std::uint64_t t = 0; t < options.k; ++t) {
      double s = 0.0;
      for (double d : diff) s += coin(rng) ? d : -d;
      count += extreme(s / na) ? 1 : 0;
    }
  } else {
    std::vector<double> pool(a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    const double total = sum_a + sum_b;
    for (std::uint64_t t = 0; t < options.k; ++t) {
      // Partial Fisher-Yates: the first |a| slots form the random group a.
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        s += pool[i];
      }
      count += extreme(s / na - (total - s) / nb) ? 1 : 0;
    }
  }

  SignificanceResult r;
  r.observed = observed;
  r.k = options.k;
  r.count = count;
  r.p_value = options.add_one
                  ? static_cast<double>(count + 1) / static_cast<double>(options.k + 1)
                  : static_cast<double>(count) / static_cast<double>(options.k);
  r.std_error = permutation_std_error(r.p_value, options.k);
  r.sided = options.sided;
  r.scheme = options.scheme;
  return r;
}

SignificanceResult compare_reports(const APReport& a, const APReport& b,
                                   const PermutationOptions& options, Rng& rng) {
  if (a.protocol != b.protocol) {
    throw DataError("reports use different protocols: " + a.protocol + " vs " + b.protocol);
  }
  std::vector<double> xa, xb;
  if (options.scheme == PermutationScheme::kPaired) {
    std::map<std::string, double> by_id;
    for (const auto& q : b.queries) by_id[q.id] = q.ap;
    if (by_id.size() != a.queries.size()) throw DataError("paired reports must share their queries");
    for (const auto& q : a.queries) {
      auto it = by_id.find(q.id);
      if (it == by_id.end()) throw DataError("query '" + q.id + "' missing from the second report");
      xa.push_back(q.ap);
      xb.push_back(it->second);
    }
  } else {
    for (const auto& q : a.queries) xa.push_back(q.ap);
    for (const auto& q : b.queries) xb.push_back(q.ap);
  }
  return permutation_test(xa, xb, options, rng);
}

std::uint64_t permutations_needed(double s_target) {
  if (!(s_target > 0.0) || !std::isfinite(s_target)) {
    throw ArgumentError("target standard deviation must be > 0");
  }
  const double x = 1.0 / (4.0 * s_target * s_target);
  if (x > 9.0e18) throw ArgumentError("target standard deviation is too small");
  // Absorb representation error so that exact quotients do not round up.
  const double nearest = std::round(x);
  const double k = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(k));
}

double permutation_std_error(double p, std::uint64_t k) {
  if (k < 1) throw ArgumentError("permutation count must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("p must be in [0, 1]");
  return std::sqrt(p * (1.0 - p) / static_cast<double>(k));
}

}  // namespace wordspot::retrieval
