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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wordspot/augment.hpp"

namespace wordspot::datasets {

enum class Partition { kTrain, kTest, kQuery };

std::string to_string(Partition partition);
Partition parse_partition(std::string_view name);

struct ManifestRecord {
  std::string image;  // relative to the manifest directory
  std::string transcription;
  Partition partition = Partition::kTrain;
  std::optional<int> fold;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct CorpusManifest {
  std::filesystem::path root;  // directory that image paths are relative to
  std::vector<ManifestRecord> records;
  std::vector<std::string> stopwords;

  std::vector<ManifestRecord> partition(Partition p) const;
  std::filesystem::path resolve(const ManifestRecord& record) const;
  // Non-empty transcriptions without tabs or newlines, unique image paths.
  void validate() const;
};

// Format:
//   #wordspot-manifest v1
//   #stopwords<TAB>w1<TAB>w2...       (optional)
//   # free-form comment
//   image<TAB>transcription<TAB>train|test|query[<TAB>fold]
CorpusManifest parse_manifest(std::istream& in, const std::filesystem::path& root);
// Parses and additionally checks that every image file exists.
CorpusManifest load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const CorpusManifest& manifest);
void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);

// Binary PGM (P5, maxval <= 255) and 8-bit grayscale PNG.
augment::RawImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const augment::RawImage& image);
augment::RawImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const augment::RawImage& image);
// Dispatches on the file signature.
augment::RawImage read_raw_image(const std::filesystem::path& path);

augment::WordImage load_word_image(
    const std::filesystem::path& path,
    augment::InkPolarity polarity = augment::InkPolarity::kDarkInkOnLight);

struct LoadedSet {
  std::vector<std::string> ids;
  std::vector<std::string> labels;  // case-folded
  std::vector<augment::WordImage> images;
};

LoadedSet load_records(const CorpusManifest& manifest, const std::vector<ManifestRecord>& records);

enum class GlyphStyle { kBlock, kBold };

struct SynthSpec {
  std::vector<std::string> words = default_words();
  std::size_t image_height = 32;
  GlyphStyle style = GlyphStyle::kBlock;
  std::uint64_t seed = 0;
  std::size_t train_per_class = 20;
  std::size_t test_per_class = 10;
  std::size_t query_per_class = 2;
  double noise = 0.05;  // std of additive pixel noise, in ink units

  static std::vector<std::string> default_words();
};

// Renders one word with jittered scale, slant, spacing and baseline.
// Dark ink on a white background.
augment::RawImage render_word(std::string_view word, const SynthSpec& spec, Rng& rng);

// Writes <out_dir>/images/*.pgm and <out_dir>/manifest.tsv.
CorpusManifest generate_synthetic_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

struct FoldSplit {
  std::vector<ManifestRecord> train;
  std::vector<ManifestRecord> test;
};

// Uses the manifest's fold labels when present, otherwise a seeded
// round-robin assignment over a shuffled order.
FoldSplit fold_split(const CorpusManifest& manifest, int fold, int n_folds = 4,
                     std::uint64_t seed = 0);

}  // namespace wordspot::datasets
