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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wordspot::embeddings {

// UTF-8 <-> code points. Invalid sequences raise DataError.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

// Simple case folding covering ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic. Characters outside these ranges are returned unchanged.
char32_t fold_case(char32_t c);
std::string fold_case_utf8(std::string_view text);

// Case-folded, non-empty transcription.
class WordString {
 public:
  static WordString from_utf8(std::string_view text);
  static WordString from_codepoints(std::u32string text);

  const std::u32string& text() const noexcept { return text_; }
  std::size_t size() const noexcept { return text_.size(); }
  std::string utf8() const { return encode_utf8(text_); }

  friend bool operator==(const WordString&, const WordString&) = default;

 private:
  explicit WordString(std::u32string text) : text_(std::move(text)) {}
  std::u32string text_;
};

// Ordered set of unique symbols; lookup(symbols()[i]) == i.
class Alphabet {
 public:
  Alphabet() = default;
  // Symbols are taken in the given order; duplicates are rejected.
  static Alphabet from_symbols(std::u32string symbols);
  static Alphabet from_utf8(std::string_view symbols);

  std::optional<std::size_t> find(char32_t c) const;
  std::size_t index_of(char32_t c) const;  // throws DataError when absent
  std::size_t size() const noexcept { return symbols_.size(); }
  const std::u32string& symbols() const noexcept { return symbols_; }
  std::string utf8() const { return encode_utf8(symbols_); }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::u32string symbols_;  // in index order
  std::u32string sorted_;   // sorted copy for lookup
  std::vector<std::uint32_t> sorted_index_;
};

// Collects every distinct (case-folded) character, sorted by code point.
// Empty strings are skipped; if nothing remains, throws "empty corpus".
Alphabet build_alphabet(std::span<const std::string> transcriptions);
Alphabet build_alphabet(std::span<const WordString> transcriptions);

// Number of horizontal splits per pyramid level, strictly increasing.
class LevelSet {
 public:
  explicit LevelSet(std::vector<int> levels);
  static LevelSet defaults() { return LevelSet({2, 3, 4, 5}); }
  static LevelSet parse(std::string_view csv);  // "2,3,4,5"

  const std::vector<int>& levels() const noexcept { return levels_; }
  int total_splits() const noexcept;
  std::string to_string() const;

  friend bool operator==(const LevelSet&, const LevelSet&) = default;

 private:
  std::vector<int> levels_;
};

enum class EmbeddingKind { kPhoc, kSpoc, kDctow };

std::string to_string(EmbeddingKind kind);
EmbeddingKind parse_embedding_kind(std::string_view name);

struct AttributeVector {
  EmbeddingKind kind = EmbeddingKind::kPhoc;
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
};

// Interval [lo_num/den, hi_num/den] kept in exact integer form so that the
// 50% overlap rule never flips on a floating-point boundary.
struct Interval {
  std::int64_t lo_num = 0;
  std::int64_t hi_num = 1;
  std::int64_t den = 1;

  double lo() const { return static_cast<double>(lo_num) / den; }
  double hi() const { return static_cast<double>(hi_num) / den; }
};

// Occ(k, n) = [k/n, (k+1)/n].
Interval normalized_occupancy(std::size_t k, std::size_t n);
// Split s of a level with l splits: [s/l, (s+1)/l].
Interval split_interval(int s, int l);
// True iff |occ ∩ split| >= |occ| / 2.
bool char_in_split(const Interval& occ, const Interval& split);

AttributeVector build_phoc(const WordString& word, const Alphabet& alphabet,
                           const LevelSet& levels);
AttributeVector build_spoc(const WordString& word, const Alphabet& alphabet,
                           const LevelSet& levels);

// Orthonormal DCT-II and its inverse (DCT-III).
std::vector<double> dct_row(std::span<const double> seq);
std::vector<double> idct_row(std::span<const double> coeffs);

enum class DctSelection {
  kFirst,    // lowest-frequency coefficients, zero padded
  kLargest,  // largest magnitude coefficients, ordered by decreasing magnitude
};

AttributeVector build_dctow(const WordString& word, const Alphabet& alphabet,
                            std::size_t coeff_count = 3,
                            DctSelection selection = DctSelection::kFirst);

struct EmbeddingConfig {
  EmbeddingKind kind = EmbeddingKind::kPhoc;
  LevelSet levels = LevelSet::defaults();
  std::size_t dct_coefficients = 3;
  DctSelection dct_selection = DctSelection::kFirst;
};

std::size_t embedding_dim(std::size_t alphabet_size, const EmbeddingConfig& config);
AttributeVector embed(const WordString& word, const Alphabet& alphabet,
                      const EmbeddingConfig& config);

// One line per record:
//   id <TAB> transcription <TAB> KIND <TAB> d <TAB> v1 v2 ... vd
// Values are printed with "%.17g" so they parse back bit-exactly.
struct EmbeddingRecord {
  std::string id;
  std::string transcription;
  EmbeddingKind kind = EmbeddingKind::kPhoc;
  std::vector<double> values;
};

void write_embedding_dump(std::ostream& out, std::span<const EmbeddingRecord> records);
std::vector<EmbeddingRecord> read_embedding_dump(std::istream& in);

}  // namespace wordspot::embeddings
