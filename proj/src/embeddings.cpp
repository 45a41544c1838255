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

#include "wordspot/embeddings.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

#include "wordspot/error.hpp"

namespace wordspot::embeddings {

namespace {

std::string describe(char32_t c) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
  return "'" + encode_utf8(std::u32string(1, c)) + "' (" + buf + ")";
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      throw DataError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= text.size()) {
        throw DataError("truncated UTF-8 sequence at offset " + std::to_string(i));
      }
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        throw DataError("invalid UTF-8 continuation at offset " + std::to_string(i + k));
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

char32_t fold_case(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if (c < 0x80) return c;
  // Latin-1: À..Þ except ×
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  // Latin Extended-A: mostly even upper / odd lower pairs.
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) {
    return (c % 2 == 0) ? c + 1 : c;
  }
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) {
    return (c % 2 == 1) ? c + 1 : c;
  }
  if (c == 0x178) return 0xFF;
  // Greek capitals (0x3A2 is unassigned).
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  // Cyrillic.
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

std::string fold_case_utf8(std::string_view text) {
  auto cps = decode_utf8(text);
  for (auto& c : cps) c = fold_case(c);
  return encode_utf8(cps);
}

WordString WordString::from_utf8(std::string_view text) {
  return from_codepoints(decode_utf8(text));
}

WordString WordString::from_codepoints(std::u32string text) {
  if (text.empty()) throw DataError("empty word string");
  for (auto& c : text) c = fold_case(c);
  return WordString(std::move(text));
}

Alphabet Alphabet::from_symbols(std::u32string symbols) {
  Alphabet a;
  a.sorted_index_.resize(symbols.size());
  std::iota(a.sorted_index_.begin(), a.sorted_index_.end(), 0u);
  std::sort(a.sorted_index_.begin(), a.sorted_index_.end(),
            [&](std::uint32_t l, std::uint32_t r) { return symbols[l] < symbols[r]; });
  a.sorted_.reserve(symbols.size());
  for (auto idx : a.sorted_index_) a.sorted_.push_back(symbols[idx]);
  for (std::size_t i = 1; i < a.sorted_.size(); ++i) {
    if (a.sorted_[i] == a.sorted_[i - 1]) {
      throw DataError("duplicate alphabet symbol " + describe(a.sorted_[i]));
    }
  }
  a.symbols_ = std::move(symbols);
  return a;
}

Alphabet Alphabet::from_utf8(std::string_view symbols) {
  return from_symbols(decode_utf8(symbols));
}

std::optional<std::size_t> Alphabet::find(char32_t c) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), c);
  if (it == sorted_.end() || *it != c) return std::nullopt;
  return sorted_index_[static_cast<std::size_t>(it - sorted_.begin())];
}

std::size_t Alphabet::index_of(char32_t c) const {
  if (auto idx = find(c)) return *idx;
  throw DataError("character " + describe(c) + " is not in the alphabet");
}

Alphabet build_alphabet(std::span<const WordString> transcriptions) {
  std::u32string all;
  for (const auto& w : transcriptions) all += w.text();
  if (all.empty()) throw DataError("empty corpus");
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return Alphabet::from_symbols(std::move(all));
}

Alphabet build_alphabet(std::span<const std::string> transcriptions) {
  std::vector<WordString> words;
  for (const auto& t : transcriptions) {
    if (t.empty()) continue;
    words.push_back(WordString::from_utf8(t));
  }
  return build_alphabet(std::span<const WordString>(words));
}

LevelSet::LevelSet(std::vector<int> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw ConfigError("level set must not be empty");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i] < 1) throw ConfigError("pyramid levels must be >= 1");
    if (i > 0 && levels_[i] <= levels_[i - 1]) {
      throw ConfigError("pyramid levels must be strictly increasing");
    }
  }
}

LevelSet LevelSet::parse(std::string_view csv) {
  std::vector<int> levels;
  std::string item;
  std::istringstream in{std::string(csv)};
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || *end != '\0') throw ConfigError("bad level list '" + std::string(csv) + "'");
    levels.push_back(static_cast<int>(v));
  }
  return LevelSet(std::move(levels));
}

int LevelSet::total_splits() const noexcept {
  return std::accumulate(levels_.begin(), levels_.end(), 0);
}

std::string LevelSet::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(levels_[i]);
  }
  return s;
}

std::string to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::kPhoc: return "PHOC";
    case EmbeddingKind::kSpoc: return "SPOC";
    case EmbeddingKind::kDctow: return "DCTOW";
  }
  return "?";
}

EmbeddingKind parse_embedding_kind(std::string_view name) {
  std::string n = fold_case_utf8(name);
  if (n == "phoc") return EmbeddingKind::kPhoc;
  if (n == "spoc") return EmbeddingKind::kSpoc;
  if (n == "dctow") return EmbeddingKind::kDctow;
  throw ConfigError("unknown embedding kind '" + std::string(name) + "'");
}

Interval normalized_occupancy(std::size_t k, std::size_t n) {
  if (k >= n) throw ArgumentError("index out of range");
  return Interval{static_cast<std::int64_t>(k), static_cast<std::int64_t>(k + 1),
                  static_cast<std::int64_t>(n)};
}

Interval split_interval(int s, int l) {
  if (l < 1 || s < 0 || s >= l) throw ArgumentError("index out of range");
  return Interval{s, s + 1, l};
}

bool char_in_split(const Interval& occ, const Interval& split) {
  // Scale both intervals to the common denominator occ.den * split.den.
  const std::int64_t occ_lo = occ.lo_num * split.den;
  const std::int64_t occ_hi = occ.hi_num * split.den;
  const std::int64_t sp_lo = split.lo_num * occ.den;
  const std::int64_t sp_hi = split.hi_num * occ.den;
  const std::int64_t overlap = std::min(occ_hi, sp_hi) - std::max(occ_lo, sp_lo);
  if (overlap <= 0) return false;
  return 2 * overlap >= occ_hi - occ_lo;
}

namespace {

// Shared by PHOC and SPOC: accumulate counts per (level, split, symbol).
std::vector<double> pyramid_counts(const WordString& word, const Alphabet& alphabet,
                                   const LevelSet& levels) {
  const std::size_t a = alphabet.size();
  std::vector<double> out(a * static_cast<std::size_t>(levels.total_splits()), 0.0);
  const std::size_t n = word.size();
  std::vector<std::size_t> symbol(n);
  for (std::size_t k = 0; k < n; ++k) symbol[k] = alphabet.index_of(word.text()[k]);

  std::size_t block = 0;
  for (int l : levels.levels()) {
    for (int s = 0; s < l; ++s, ++block) {
      const Interval split = split_interval(s, l);
      for (std::size_t k = 0; k < n; ++k) {
        if (char_in_split(normalized_occupancy(k, n), split)) {
          out[block * a + symbol[k]] += 1.0;
        }
      }
    }
  }
  return out;
}

}  // namespace

AttributeVector build_phoc(const WordString& word, const Alphabet& alphabet,
                           const LevelSet& levels) {
  auto values = pyramid_counts(word, alphabet, levels);
  for (auto& v : values) v = v > 0.0 ? 1.0 : 0.0;
  return {EmbeddingKind::kPhoc, std::move(values)};
}

AttributeVector build_spoc(const WordString& word, const Alphabet& alphabet,
                           const LevelSet& levels) {
  return {EmbeddingKind::kSpoc, pyramid_counts(word, alphabet, levels)};
}

namespace {

// FFTW's planner is not re-entrant; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> run_r2r(std::span<const double> in, fftw_r2r_kind kind) {
  const int m = static_cast<int>(in.size());
  std::vector<double> src(in.begin(), in.end());
  std::vector<double> dst(in.size(), 0.0);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_r2r_1d(m, src.data(), dst.data(), kind, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return dst;
}

}  // namespace

std::vector<double> dct_row(std::span<const double> seq) {
  if (seq.empty()) throw ArgumentError("dct of empty sequence");
  // REDFT10 computes 2 * sum x_j cos(pi (j + 1/2) k / m).
  auto out = run_r2r(seq, FFTW_REDFT10);
  const double m = static_cast<double>(seq.size());
  out[0] *= std::sqrt(1.0 / (4.0 * m));
  for (std::size_t k = 1; k < out.size(); ++k) out[k] *= std::sqrt(1.0 / (2.0 * m));
  return out;
}

std::vector<double> idct_row(std::span<const double> coeffs) {
  if (coeffs.empty()) throw ArgumentError("inverse dct of empty sequence");
  const double m = static_cast<double>(coeffs.size());
  std::vector<double> scaled(coeffs.begin(), coeffs.end());
  // REDFT01 computes X_0 + 2 * sum_{j>=1} X_j cos(pi j (k + 1/2) / m).
  scaled[0] *= std::sqrt(1.0 / m);
  for (std::size_t j = 1; j < scaled.size(); ++j) scaled[j] /= std::sqrt(2.0 * m);
  return run_r2r(scaled, FFTW_REDFT01);
}

AttributeVector build_dctow(const WordString& word, const Alphabet& alphabet,
                            std::size_t coeff_count, DctSelection selection) {
  if (coeff_count == 0) throw ConfigError("dctow needs at least one coefficient");
  const std::size_t n = word.size();
  const std::size_t a = alphabet.size();
  // Indicator matrix: row per symbol, column per character position.
  std::vector<std::vector<double>> rows(a, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) rows[alphabet.index_of(word.text()[k])][k] = 1.0;

  std::vector<double> out(a * coeff_count, 0.0);
  for (std::size_t c = 0; c < a; ++c) {
    if (std::none_of(rows[c].begin(), rows[c].end(), [](double v) { return v != 0.0; })) {
      continue;
    }
    auto coeffs = dct_row(rows[c]);
    if (selection == DctSelection::kLargest) {
      std::stable_sort(coeffs.begin(), coeffs.end(),
                       [](double l, double r) { return std::abs(l) > std::abs(r); });
    }
    const std::size_t keep = std::min(coeff_count, coeffs.size());
    std::copy_n(coeffs.begin(), keep, out.begin() + static_cast<std::ptrdiff_t>(c * coeff_count));
  }
  return {EmbeddingKind::kDctow, std::move(out)};
}

std::size_t embedding_dim(std::size_t alphabet_size, const EmbeddingConfig& config) {
  if (config.kind == EmbeddingKind::kDctow) return alphabet_size * config.dct_coefficients;
  return alphabet_size * static_cast<std::size_t>(config.levels.total_splits());
}

AttributeVector embed(const WordString& word, const Alphabet& alphabet,
                      const EmbeddingConfig& config) {
  switch (config.kind) {
    case EmbeddingKind::kPhoc: return build_phoc(word, alphabet, config.levels);
    case EmbeddingKind::kSpoc: return build_spoc(word, alphabet, config.levels);
    case EmbeddingKind::kDctow:
      return build_dctow(word, alphabet, config.dct_coefficients, config.dct_selection);
  }
  throw ConfigError("unknown embedding kind");
}

void write_embedding_dump(std::ostream& out, std::span<const EmbeddingRecord> records) {
  char buf[40];
  for (const auto& r : records) {
    out << r.id << '\t' << r.transcription << '\t' << to_string(r.kind) << '\t'
        << r.values.size() << '\t';
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", r.values[i]);
      if (i) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

std::vector<EmbeddingRecord> read_embedding_dump(std::istream& in) {
  std::vector<EmbeddingRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (int f = 0; f < 4; ++f) {
      const auto tab = line.find('\t', start);
      if (tab == std::string::npos) {
        throw DataError("embedding dump line " + std::to_string(line_no) + ": expected 5 fields");
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    EmbeddingRecord r;
    r.id = fields[0];
    r.transcription = fields[1];
    r.kind = parse_embedding_kind(fields[2]);
    const std::size_t d = std::strtoul(fields[3].c_str(), nullptr, 10);
    std::istringstream values(line.substr(start));
    std::string tok;
    while (values >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (*end != '\0') {
        throw DataError("embedding dump line " + std::to_string(line_no) + ": bad value '" + tok + "'");
      }
      r.values.push_back(v);
    }
    if (r.values.size() != d) {
      throw DataError("embedding dump line " + std::to_string(line_no) + ": expected " +
                      std::to_string(d) + " values, got " + std::to_string(r.values.size()));
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace wordspot::embeddings
