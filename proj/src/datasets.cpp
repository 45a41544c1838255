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

#include "wordspot/datasets.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "wordspot/embeddings.hpp"
#include "wordspot/error.hpp"
#include "wordspot/io.hpp"

namespace wordspot::datasets {

namespace fs = std::filesystem;
using augment::RawImage;
using augment::WordImage;

std::string to_string(Partition partition) {
  switch (partition) {
    case Partition::kTrain: return "train";
    case Partition::kTest: return "test";
    case Partition::kQuery: return "query";
  }
  return "train";
}

Partition parse_partition(std::string_view name) {
  if (name == "train") return Partition::kTrain;
  if (name == "test") return Partition::kTest;
  if (name == "query") return Partition::kQuery;
  throw DataError("unknown partition '" + std::string(name) + "'");
}

std::vector<ManifestRecord> CorpusManifest::partition(Partition p) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    if (r.partition == p) out.push_back(r);
  }
  return out;
}

fs::path CorpusManifest::resolve(const ManifestRecord& record) const {
  const fs::path p(record.image);
  return p.is_absolute() ? p : root / p;
}

namespace {

bool has_control(std::string_view s) {
  return s.find_first_of("\t\r\n") != std::string_view::npos;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

const char* kManifestHeader = "#wordspot-manifest v1";

}  // namespace

void CorpusManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (r.image.empty() || has_control(r.image)) throw DataError("invalid image path '" + r.image + "'");
    if (has_control(r.transcription)) {
      throw DataError("transcription of '" + r.image + "' contains a tab or newline");
    }
    if (embeddings::fold_case_utf8(r.transcription).empty()) {
      throw DataError("empty transcription for '" + r.image + "'");
    }
    if (r.fold && *r.fold < 0) throw DataError("negative fold label for '" + r.image + "'");
    if (!seen.insert(r.image).second) throw DataError("duplicate image '" + r.image + "'");
  }
  for (const auto& w : stopwords) {
    if (w.empty() || has_control(w)) throw DataError("invalid stop word");
  }
}

CorpusManifest parse_manifest(std::istream& in, const fs::path& root) {
  CorpusManifest m;
  m.root = root;
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw DataError("manifest line 1: expected header '" + std::string(kManifestHeader) + "'");
  }
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = "manifest line " + std::to_string(line_no) + ": ";
    auto f = split_tabs(line);
    if (line[0] == '#') {
      if (f[0] == "#stopwords") {
        for (std::size_t i = 1; i < f.size(); ++i) {
          if (!f[i].empty()) m.stopwords.push_back(f[i]);
        }
      }
      continue;
    }
    if (f.size() != 3 && f.size() != 4) throw DataError(where + "expected 3 or 4 tab-separated fields");
    ManifestRecord r;
    r.image = f[0];
    r.transcription = f[1];
    try {
      r.partition = parse_partition(f[2]);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    if (f.size() == 4) {
      char* end = nullptr;
      const long v = std::strtol(f[3].c_str(), &end, 10);
      if (f[3].empty() || *end != '\0' || v < 0 || v > 1000000) throw DataError(where + "bad fold label");
      r.fold = static_cast<int>(v);
    }
    if (r.image.empty()) throw DataError(where + "empty image path");
    if (!seen.insert(r.image).second) throw DataError(where + "duplicate image '" + r.image + "'");
    try {
      if (embeddings::fold_case_utf8(r.transcription).empty()) throw DataError("empty transcription");
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

CorpusManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  CorpusManifest m = parse_manifest(in, path.parent_path());
  for (const auto& r : m.records) {
    if (!fs::exists(m.resolve(r))) throw DataError("missing image file '" + m.resolve(r).string() + "'");
  }
  return m;
}

void write_manifest(std::ostream& out, const CorpusManifest& manifest) {
  manifest.validate();
  out << kManifestHeader << '\n';
  if (!manifest.stopwords.empty()) {
    out << "#stopwords";
    for (const auto& w : manifest.stopwords) out << '\t' << w;
    out << '\n';
  }
  for (const auto& r : manifest.records) {
    out << r.image << '\t' << r.transcription << '\t' << to_string(r.partition);
    if (r.fold) out << '\t' << *r.fold;
    out << '\n';
  }
}

void save_manifest(const fs::path& path, const CorpusManifest& manifest) {
  std::ostringstream ss;
  write_manifest(ss, manifest);
  write_file_atomic(path, ss.str());
}

// ---------------------------------------------------------------------------
// Image files

namespace {

void check_dims(std::size_t w, std::size_t h, const fs::path& path) {
  if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16) {
    throw DataError("'" + path.string() + "': unsupported image size");
  }
}

}  // namespace

RawImage read_pgm(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> DataError {
    return DataError("'" + path.string() + "': corrupt PGM header (" + why + ")");
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      throw fail("expected a number");
    }
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (v > (1u << 20)) throw fail("value too large");
      ++pos;
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw fail("missing P5 magic");
  pos = 2;
  RawImage img;
  img.width = number();
  img.height = number();
  const std::size_t maxval = number();
  if (maxval == 0 || maxval > 255) throw fail("maxval must be in 1..255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw fail("missing separator");
  }
  ++pos;
  check_dims(img.width, img.height, path);
  const std::size_t n = img.width * img.height;
  if (bytes.size() - pos < n) throw DataError("'" + path.string() + "': truncated pixel data");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<std::size_t>(static_cast<unsigned char>(bytes[pos + i]));
    if (v > maxval) throw DataError("'" + path.string() + "': pixel exceeds maxval");
    img.pixels[i] = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  }
  return img;
}

void write_pgm(const fs::path& path, const RawImage& image) {
  if (image.pixels.size() != image.width * image.height) throw ShapeError("raw image size mismatch");
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  write_file_atomic(path, out);
}

RawImage read_png(const fs::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  const std::string bytes = read_file(path);
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw DataError("'" + path.string() + "': " + png.message);
  }
  if (png.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_COLORMAP)) {
    png_image_free(&png);
    throw DataError("'" + path.string() + "': colour images are not supported, convert to grayscale");
  }
  png.format = PNG_FORMAT_GRAY;
  RawImage img;
  img.width = png.width;
  img.height = png.height;
  check_dims(img.width, img.height, path);
  img.pixels.resize(PNG_IMAGE_SIZE(png));
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&png, &background, img.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw DataError("'" + path.string() + "': " + msg);
  }
  return img;
}

void write_png(const fs::path& path, const RawImage& image) {
  if (image.pixels.size() != image.width * image.height) throw ShapeError("raw image size mismatch");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png, size, 0, image.pixels.data(), 0, nullptr)) {
    throw DataError("'" + path.string() + "': " + png.message);
  }
  std::string buf(size, '\0');
  if (!png_image_write_to_memory(&png, buf.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw DataError("'" + path.string() + "': " + png.message);
  }
  buf.resize(size);
  write_file_atomic(path, buf);
}

RawImage read_raw_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image '" + path.string() + "'");
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() >= 2 && magic[0] == 'P' && magic[1] == '5') return read_pgm(path);
  static const unsigned char kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() == 8 && std::equal(magic, magic + 8, reinterpret_cast<const char*>(kPng))) {
    return read_png(path);
  }
  throw DataError("'" + path.string() + "': unrecognized image format (expected binary PGM or PNG)");
}

WordImage load_word_image(const fs::path& path, augment::InkPolarity polarity) {
  return augment::normalize_pixels(read_raw_image(path), polarity);
}

LoadedSet load_records(const CorpusManifest& manifest, const std::vector<ManifestRecord>& records) {
  LoadedSet set;
  for (const auto& r : records) {
    set.ids.push_back(r.image);
    set.labels.push_back(embeddings::fold_case_utf8(r.transcription));
    set.images.push_back(load_word_image(manifest.resolve(r)));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

constexpr int kGlyphW = 5;
constexpr int kGlyphH = 7;
using Glyph = std::array<const char*, kGlyphH>;

const std::map<char32_t, Glyph>& font() {
  static const std::map<char32_t, Glyph> f = {
      {U'a', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {U'b', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
      {U'c', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
      {U'd', {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."}},
      {U'e', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
      {U'f', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
      {U'g', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"}},
      {U'h', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {U'i', {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {U'j', {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
      {U'k', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
      {U'l', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
      {U'm', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
      {U'n', {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"}},
      {U'o', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
      {U'p', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
      {U'q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
      {U'r', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
      {U's', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
      {U't', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
      {U'u', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
      {U'v', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
      {U'w', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."}},
      {U'x', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
      {U'y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
      {U'z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
      {U'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
      {U'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {U'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
      {U'3', {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."}},
      {U'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
      {U'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
      {U'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
      {U'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
      {U'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
      {U'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
  };
  return f;
}

bool glyph_on(const Glyph& g, int col, int row, GlyphStyle style) {
  auto on = [&](int c, int r) {
    return c >= 0 && c < kGlyphW && r >= 0 && r < kGlyphH && g[r][c] == '#';
  };
  if (on(col, row)) return true;
  return style == GlyphStyle::kBold && on(col - 1, row);
}

struct PlacedGlyph {
  const Glyph* glyph;
  double x0, y0;  // top-left of the glyph box
  double sx, sy;  // pixels per glyph cell
  double slant;   // horizontal shift per pixel above the glyph bottom
};

}  // namespace

std::vector<std::string> SynthSpec::default_words() {
  return {"and", "the", "word", "spot", "query", "image", "letter", "river", "north", "garden"};
}

RawImage render_word(std::string_view word, const SynthSpec& spec, Rng& rng) {
  if (spec.image_height < 12) throw ConfigError("synthetic image height must be >= 12");
  const auto text = embeddings::WordString::from_utf8(word).text();
  const auto& f = font();
  std::vector<const Glyph*> glyphs;
  for (char32_t c : text) {
    auto it = f.find(c);
    if (it == f.end()) {
      throw DataError("no glyph for character '" + embeddings::encode_utf8(std::u32string(1, c)) +
                      "' in word '" + std::string(word) + "'");
    }
    glyphs.push_back(&it->second);
  }

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = static_cast<double>(spec.image_height);
  const double base_sy = 0.55 * h / kGlyphH * (1.0 + 0.08 * u(rng));
  const double base_sx = base_sy * (0.85 + 0.1 * u(rng));
  const double slant = 0.15 * u(rng);
  const double margin = 2.0 + 1.5 * (1.0 + u(rng));

  std::vector<PlacedGlyph> placed;
  double x = margin;
  for (const Glyph* g : glyphs) {
    PlacedGlyph p;
    p.glyph = g;
    p.sx = base_sx * (1.0 + 0.05 * u(rng));
    p.sy = base_sy * (1.0 + 0.05 * u(rng));
    p.y0 = 0.5 * (h - kGlyphH * p.sy) + 0.06 * h * u(rng);
    p.x0 = x;
    p.slant = slant;
    placed.push_back(p);
    x += kGlyphW * p.sx + base_sx * (1.0 + 0.3 * u(rng));
  }
  const double slant_room = std::abs(slant) * h;
  const auto width = static_cast<std::size_t>(std::ceil(x + margin + slant_room));
  const double shift = slant > 0.0 ? 0.0 : slant_room;

  std::vector<double> ink(width * spec.image_height, 0.0);
  constexpr int kSuper = 3;
  for (const auto& p : placed) {
    const double bottom = p.y0 + kGlyphH * p.sy;
    const auto y_lo = static_cast<std::ptrdiff_t>(std::floor(p.y0));
    const auto y_hi = static_cast<std::ptrdiff_t>(std::ceil(bottom));
    const double x_min = p.x0 + shift - slant_room;
    const double x_max = p.x0 + shift + kGlyphW * p.sx + slant_room;
    for (std::ptrdiff_t py = std::max<std::ptrdiff_t>(0, y_lo);
         py < std::min<std::ptrdiff_t>(y_hi + 1, static_cast<std::ptrdiff_t>(spec.image_height)); ++py) {
      for (std::ptrdiff_t px = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(x_min));
           px < std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x_max) + 1,
                                         static_cast<std::ptrdiff_t>(width));
           ++px) {
        int hits = 0;
        for (int sy = 0; sy < kSuper; ++sy) {
          for (int sx = 0; sx < kSuper; ++sx) {
            const double fy = static_cast<double>(py) + (sy + 0.5) / kSuper;
            const double fx = static_cast<double>(px) + (sx + 0.5) / kSuper;
            const double gx = fx - shift - p.x0 - p.slant * (bottom - fy);
            const double u_cell = gx / p.sx;
            const double v_cell = (fy - p.y0) / p.sy;
            if (u_cell < 0.0 || v_cell < 0.0) continue;
            const int col = static_cast<int>(u_cell);
            const int row = static_cast<int>(v_cell);
            hits += glyph_on(*p.glyph, col, row, spec.style) ? 1 : 0;
          }
        }
        double& v = ink[static_cast<std::size_t>(py) * width + static_cast<std::size_t>(px)];
        v = std::max(v, static_cast<double>(hits) / (kSuper * kSuper));
      }
    }
  }

  const double strength = 0.85 + 0.1 * u(rng);
  std::normal_distribution<double> noise(0.0, spec.noise > 0.0 ? spec.noise : 1.0);
  RawImage img;
  img.height = spec.image_height;
  img.width = width;
  img.pixels.resize(ink.size());
  for (std::size_t i = 0; i < ink.size(); ++i) {
    double v = ink[i] * strength;
    if (spec.noise > 0.0) v += noise(rng);
    v = std::clamp(v, 0.0, 1.0);
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - v)));
  }
  return img;
}

CorpusManifest generate_synthetic_corpus(const SynthSpec& spec, const fs::path& out_dir) {
  if (spec.words.empty()) throw ConfigError("synthetic word list is empty");
  if (spec.noise < 0.0) throw ConfigError("noise must be >= 0");
  std::set<std::string> unique;
  for (const auto& w : spec.words) {
    const std::string folded = embeddings::fold_case_utf8(w);
    if (folded.empty()) throw DataError("empty word in synthetic word list");
    if (!unique.insert(folded).second) throw ConfigError("duplicate word '" + w + "' in word list");
    for (char32_t c : embeddings::decode_utf8(folded)) {
      if (!font().count(c)) {
        throw DataError("no glyph for character '" + embeddings::encode_utf8(std::u32string(1, c)) +
                        "' in word '" + w + "'");
      }
    }
  }

  fs::create_directories(out_dir / "images");
  CorpusManifest m;
  m.root = out_dir;
  std::uint64_t counter = 0;
  const std::array<std::pair<Partition, std::size_t>, 3> parts{
      {{Partition::kTrain, spec.train_per_class},
       {Partition::kTest, spec.test_per_class},
       {Partition::kQuery, spec.query_per_class}}};
  for (const auto& word : spec.words) {
    const std::string folded = embeddings::fold_case_utf8(word);
    for (const auto& [part, count] : parts) {
      for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(spec.seed, RngStream::kSynth, counter++);
        char name[64];
        std::snprintf(name, sizeof(name), "_%s_%03zu.pgm", to_string(part).c_str(), i);
        const std::string rel = "images/" + folded + name;
        write_pgm(out_dir / rel, render_word(folded, spec, rng));
        m.records.push_back({rel, folded, part, std::nullopt});
      }
    }
  }
  save_manifest(out_dir / "manifest.tsv", m);
  return m;
}

FoldSplit fold_split(const CorpusManifest& manifest, int fold, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ArgumentError("need at least 2 folds");
  if (fold < 0 || fold >= n_folds) {
    throw ArgumentError("fold index " + std::to_string(fold) + " out of range [0, " +
                        std::to_string(n_folds) + ")");
  }
  const auto& recs = manifest.records;
  const std::size_t labelled = static_cast<std::size_t>(
      std::count_if(recs.begin(), recs.end(), [](const ManifestRecord& r) { return r.fold.has_value(); }));
  std::vector<int> assignment(recs.size());
  if (labelled == recs.size() && !recs.empty()) {
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (*recs[i].fold >= n_folds) {
        throw DataError("fold label " + std::to_string(*recs[i].fold) + " of '" + recs[i].image +
                        "' exceeds the fold count");
      }
      assignment[i] = *recs[i].fold;
    }
  } else if (labelled == 0) {
    std::vector<std::size_t> order(recs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, RngStream::kFolds);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t p = 0; p < order.size(); ++p) assignment[order[p]] = static_cast<int>(p % n_folds);
  } else {
    throw DataError("fold labels must be given for all records or none");
  }
  FoldSplit split;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    (assignment[i] == fold ? split.test : split.train).push_back(recs[i]);
  }
  return split;
}

}  // namespace wordspot::datasets
