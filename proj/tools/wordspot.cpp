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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wordspot/app.hpp"
#include "wordspot/datasets.hpp"
#include "wordspot/embeddings.hpp"
#include "wordspot/error.hpp"
#include "wordspot/io.hpp"
#include "wordspot/retrieval.hpp"

namespace fs = std::filesystem;
using namespace wordspot;

namespace {

enum ExitCode { kOk = 0, kGeneric = 1, kConfig = 2, kData = 3, kNumeric = 4 };

// Relative paths that do not exist are retried under $WORDSPOT_DATA_ROOT.
fs::path data_path(const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || fs::exists(path)) return path;
  if (const char* root = std::getenv("WORDSPOT_DATA_ROOT"); root && *root) {
    const fs::path alt = fs::path(root) / path;
    if (fs::exists(alt)) return alt;
  }
  return path;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

std::vector<std::string> read_word_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list '" + path.string() + "'");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') words.push_back(line);
  }
  return words;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

// Run configuration overrides shared by train / embed.
struct Overrides {
  std::string embedding, levels, loss, optimizer, arch, pooling;
  std::optional<std::uint64_t> iterations;
  std::optional<double> lr;
  std::optional<std::size_t> batch;
  std::optional<std::uint64_t> eval_every;
  std::optional<bool> augment;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--embedding", o.embedding, "phoc | spoc | dctow");
  cmd->add_option("--levels", o.levels, "embedding pyramid levels, e.g. 2,3,4,5");
  cmd->add_option("--loss", o.loss, "bce | cosine | euclidean");
  cmd->add_option("--optimizer", o.optimizer, "adam | sgd");
  cmd->add_option("--arch", o.arch, "phocnet-full | phocnet-mini | custom");
  cmd->add_option("--pooling", o.pooling, "spp | tpp");
  cmd->add_option("--iterations", o.iterations, "total training iterations");
  cmd->add_option("--lr", o.lr, "initial learning rate");
  cmd->add_option("--batch", o.batch, "mini-batch size");
  cmd->add_option("--eval-every", o.eval_every, "evaluate QbS mAP every N iterations");
  cmd->add_flag("--augment,!--no-augment", o.augment, "random affine augmentation");
}

app::RunConfig resolve_config(const Common& c, const Overrides& o,
                              std::optional<app::RunConfig> base = std::nullopt,
                              bool embedding_only = false) {
  nlohmann::json j = base ? base->to_json() : nlohmann::json::object();
  if (!c.config.empty()) {
    j = app::load_run_config(data_path(c.config)).to_json();
  }
  if (c.seed) j["seed"] = *c.seed;
  if (!o.embedding.empty()) j["embedding"]["kind"] = o.embedding;
  if (!o.levels.empty()) j["embedding"]["levels"] = embeddings::LevelSet::parse(o.levels).levels();
  if (!o.loss.empty()) j["loss"] = o.loss;
  if (!o.optimizer.empty()) j["optimizer"]["kind"] = o.optimizer;
  if (!o.arch.empty()) j["arch"] = o.arch;
  if (!o.pooling.empty()) j["pooling"] = o.pooling;
  if (o.iterations) j["iterations"] = *o.iterations;
  if (o.lr) j["optimizer"]["learning_rate"] = *o.lr;
  if (o.batch) j["batch_size"] = *o.batch;
  if (o.eval_every) j["eval_every"] = *o.eval_every;
  if (o.augment) j["augment"] = *o.augment;
  // String embedding never touches a loss; any label kind is acceptable.
  if (embedding_only) j["loss"] = "cosine";
  return app::RunConfig::from_json(j);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string words, word_file, style = "block";
  std::optional<std::size_t> train, test, query, height;
  std::optional<double> noise;
};

int cmd_synth(const Common& c, const SynthArgs& a) {
  if (c.out.empty()) throw ConfigError("synth needs --out <directory>");
  datasets::SynthSpec spec;
  if (!c.config.empty()) {
    nlohmann::json j;
    std::ifstream in(data_path(c.config));
    if (!in) throw ConfigError("cannot open config '" + c.config + "'");
    try {
      in >> j;
      const auto& s = j.contains("synth") ? j["synth"] : j;
      if (s.contains("words")) spec.words = s["words"].get<std::vector<std::string>>();
      spec.image_height = s.value("height", spec.image_height);
      spec.seed = s.value("seed", spec.seed);
      spec.train_per_class = s.value("train", spec.train_per_class);
      spec.test_per_class = s.value("test", spec.test_per_class);
      spec.query_per_class = s.value("query", spec.query_per_class);
      spec.noise = s.value("noise", spec.noise);
      if (s.contains("style")) spec.style = s["style"] == "bold" ? datasets::GlyphStyle::kBold
                                                                 : datasets::GlyphStyle::kBlock;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + c.config + "': " + e.what());
    }
  }
  if (!a.words.empty()) spec.words = split_csv(a.words);
  if (!a.word_file.empty()) spec.words = read_word_list(data_path(a.word_file));
  if (c.seed) spec.seed = *c.seed;
  if (a.train) spec.train_per_class = *a.train;
  if (a.test) spec.test_per_class = *a.test;
  if (a.query) spec.query_per_class = *a.query;
  if (a.height) spec.image_height = *a.height;
  if (a.noise) spec.noise = *a.noise;
  if (a.style == "bold") {
    spec.style = datasets::GlyphStyle::kBold;
  } else if (a.style != "block") {
    throw ConfigError("unknown glyph style '" + a.style + "'");
  }
  const auto m = datasets::generate_synthetic_corpus(spec, c.out);
  std::cerr << "wrote " << m.records.size() << " images for " << spec.words.size() << " words to "
            << c.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string manifest, resume, trace;
  Overrides o;
};

int cmd_train(const Common& c, const TrainArgs& a) {
  if (c.out.empty()) throw ConfigError("train needs --out <checkpoint>");
  const auto manifest = datasets::load_manifest(data_path(a.manifest));
  const auto train_recs = manifest.partition(datasets::Partition::kTrain);
  if (train_recs.empty()) throw DataError("manifest has no train partition");
  const auto train = datasets::load_records(manifest, train_recs);

  std::optional<app::Model> model;
  optim::TrainState state;
  if (!a.resume.empty()) {
    const auto ckpt = nn::load_checkpoint(data_path(a.resume));
    model.emplace(app::model_from_checkpoint(ckpt));
    auto restored = app::train_state_from_checkpoint(ckpt, *model);
    if (!restored) throw DataError("checkpoint '" + a.resume + "' has no training state");
    state = std::move(*restored);
    // Only the budget and evaluation schedule may change on resume.
    const Overrides& o = a.o;
    if (!c.config.empty() || c.seed || !o.embedding.empty() || !o.levels.empty() || !o.loss.empty() ||
        !o.optimizer.empty() || !o.arch.empty() || !o.pooling.empty() || o.lr || o.batch || o.augment) {
      throw ConfigError("--resume keeps the checkpoint's configuration; only --iterations and --eval-every may change");
    }
    Overrides budget;
    budget.iterations = a.o.iterations;
    budget.eval_every = a.o.eval_every;
    model->config = resolve_config({"", std::nullopt, ""}, budget, model->config);
  } else {
    const auto config = resolve_config(c, a.o);
    model.emplace(app::create_model(config, embeddings::build_alphabet(train.labels)));
    state = app::initial_train_state(*model);
  }
  std::optional<datasets::LoadedSet> eval_set;
  if (model->config.eval_every > 0) {
    eval_set = datasets::load_records(manifest, manifest.partition(datasets::Partition::kTest));
  }

  const std::uint64_t total = model->config.iterations;
  const std::uint64_t remaining = total > state.iteration ? total - state.iteration : 0;
  std::cerr << "training " << model->config.arch << " (" << model->net.parameter_count()
            << " parameters, d=" << model->output_dim() << ") for " << remaining << " iterations\n";
  auto result = app::train_model(*model, train, std::move(state), remaining,
                                 eval_set && !eval_set->images.empty() ? &*eval_set : nullptr);
  nn::save_checkpoint(c.out, app::to_checkpoint(*model, &result.state));

  std::ostringstream trace;
  optim::write_trace(trace, result.trace);
  const std::string trace_path = a.trace.empty() ? c.out + ".trace" : a.trace;
  emit(trace_path, trace.str());
  if (!result.trace.empty()) {
    std::cerr << "iteration " << result.trace.back().iteration << " loss " << result.trace.back().loss
              << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct EmbedArgs {
  std::string checkpoint, manifest, partition = "test", alphabet;
  bool strings = false;
  std::vector<std::string> words;
  Overrides o;
};

int cmd_embed(const Common& c, const EmbedArgs& a) {
  std::vector<embeddings::EmbeddingRecord> records;
  std::optional<app::Model> model;
  if (!a.checkpoint.empty()) model.emplace(app::model_from_checkpoint(nn::load_checkpoint(data_path(a.checkpoint))));

  if (a.strings) {
    std::vector<std::string> words = a.words;
    std::optional<datasets::CorpusManifest> manifest;
    if (!a.manifest.empty()) manifest = datasets::load_manifest(data_path(a.manifest));
    if (words.empty()) {
      if (!manifest) throw ConfigError("embed --strings needs words or --manifest");
      for (const auto& r : manifest->partition(datasets::parse_partition(a.partition))) {
        words.push_back(r.transcription);
      }
    }
    embeddings::Alphabet alphabet;
    embeddings::EmbeddingConfig ecfg;
    if (model) {
      alphabet = model->alphabet;
      ecfg = model->config.embedding;
    } else {
      ecfg = resolve_config(c, a.o, std::nullopt, true).embedding;
      if (!a.alphabet.empty()) {
        alphabet = embeddings::Alphabet::from_utf8(a.alphabet);
      } else if (manifest) {
        std::vector<std::string> labels;
        for (const auto& r : manifest->partition(datasets::Partition::kTrain)) labels.push_back(r.transcription);
        alphabet = embeddings::build_alphabet(labels);
      } else {
        alphabet = embeddings::build_alphabet(words);
      }
    }
    for (const auto& w : words) {
      const auto ws = embeddings::WordString::from_utf8(w);
      const auto v = embeddings::embed(ws, alphabet, ecfg);
      records.push_back({w, ws.utf8(), v.kind, v.values});
    }
  } else {
    if (!model) throw ConfigError("embedding images needs --checkpoint");
    if (a.manifest.empty()) throw ConfigError("embedding images needs --manifest");
    const auto manifest = datasets::load_manifest(data_path(a.manifest));
    const auto set = datasets::load_records(manifest, manifest.partition(datasets::parse_partition(a.partition)));
    for (std::size_t i = 0; i < set.images.size(); ++i) {
      const auto v = app::embed_image(*model, set.images[i]);
      records.push_back({set.ids[i], set.labels[i], v.kind, v.values});
    }
  }
  std::ostringstream ss;
  embeddings::write_embedding_dump(ss, records);
  emit(c.out, ss.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct SpotArgs {
  std::string checkpoint, manifest, mode = "qbe", protocol = "almazan", stopwords, ranking;
};

app::EvalOptions eval_options(const SpotArgs& a, const datasets::CorpusManifest& manifest) {
  app::EvalOptions eo;
  eo.mode = retrieval::parse_query_mode(a.mode);
  eo.protocol = app::parse_protocol(a.protocol);
  eo.stopwords = a.stopwords.empty() ? manifest.stopwords : read_word_list(data_path(a.stopwords));
  return eo;
}

int run_eval(const Common& c, const SpotArgs& a, bool with_ranking) {
  if (a.checkpoint.empty() || a.manifest.empty()) throw ConfigError("needs --checkpoint and --manifest");
  const auto model = app::model_from_checkpoint(nn::load_checkpoint(data_path(a.checkpoint)));
  const auto manifest = datasets::load_manifest(data_path(a.manifest));
  std::vector<retrieval::RankedList> lists;
  const auto report = app::evaluate(model, manifest, eval_options(a, manifest), with_ranking ? &lists : nullptr);
  std::ostringstream ss;
  retrieval::write_ap_report(ss, report);
  emit(c.out, ss.str());
  if (with_ranking) {
    std::ostringstream rs;
    retrieval::write_ranked_lists(rs, lists);
    const std::string path = !a.ranking.empty() ? a.ranking
                             : (c.out.empty() || c.out == "-") ? std::string()
                                                               : c.out + ".ranking";
    if (!path.empty()) emit(path, rs.str());
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", report.map);
  std::cerr << report.protocol << " mAP " << buf << " over " << report.queries.size() << " queries\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct SigArgs {
  std::string a, b, sided = "two-sided", scheme = "pooled";
  std::optional<double> s_target;
  std::optional<std::uint64_t> k;
  bool add_one = false;
};

int cmd_sigtest(const Common& c, const SigArgs& a) {
  auto read_report = [](const std::string& p) {
    std::ifstream in(data_path(p));
    if (!in) throw DataError("cannot open report '" + p + "'");
    return retrieval::read_ap_report(in);
  };
  const auto ra = read_report(a.a);
  const auto rb = read_report(a.b);
  retrieval::PermutationOptions opt;
  if (a.k && a.s_target) throw ConfigError("give either --k or --s-target, not both");
  if (a.k) opt.k = *a.k;
  if (a.s_target) opt.k = retrieval::permutations_needed(*a.s_target);
  opt.sided = retrieval::parse_sidedness(a.sided);
  opt.scheme = retrieval::parse_permutation_scheme(a.scheme);
  opt.add_one = a.add_one;
  Rng rng = make_rng(c.seed.value_or(0), RngStream::kPermutation);
  const auto r = retrieval::compare_reports(ra, rb, opt, rng);
  nlohmann::json j{{"protocol", ra.protocol},
                   {"map_a", ra.map},
                   {"map_b", rb.map},
                   {"observed_difference", r.observed},
                   {"permutations", r.k},
                   {"count", r.count},
                   {"p_value", r.p_value},
                   {"std_error", r.std_error},
                   {"sided", retrieval::to_string(r.sided)},
                   {"scheme", retrieval::to_string(r.scheme)},
                   {"add_one", opt.add_one},
                   {"seed", c.seed.value_or(0)}};
  emit(c.out, j.dump(2) + "\n");
  return kOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kArgument: return kConfig;
    case ErrorKind::kData:
    case ErrorKind::kShape: return kData;
    case ErrorKind::kNumeric: return kNumeric;
  }
  return kGeneric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Word spotting with attribute embeddings"};
  cli.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config, "JSON configuration file");
    cmd->add_option("--seed", common.seed, "master seed");
    cmd->add_option("--out", common.out, "output path");
  };

  SynthArgs synth;
  auto* s = cli.add_subcommand("synth", "generate a synthetic word-image corpus");
  add_common(s);
  s->add_option("--words", synth.words, "comma-separated word list");
  s->add_option("--word-file", synth.word_file, "word list, one per line");
  s->add_option("--train", synth.train, "training images per word");
  s->add_option("--test", synth.test, "test images per word");
  s->add_option("--query", synth.query, "query images per word");
  s->add_option("--height", synth.height, "image height in pixels");
  s->add_option("--noise", synth.noise, "pixel noise standard deviation");
  s->add_option("--style", synth.style, "block | bold");

  TrainArgs train;
  auto* t = cli.add_subcommand("train", "train a network on a manifest");
  add_common(t);
  t->add_option("manifest", train.manifest, "corpus manifest")->required();
  t->add_option("--resume", train.resume, "continue from a checkpoint");
  t->add_option("--trace", train.trace, "loss trace path (default <out>.trace)");
  add_overrides(t, train.o);

  EmbedArgs embed;
  auto* e = cli.add_subcommand("embed", "embed strings or word images");
  add_common(e);
  e->add_option("words", embed.words, "words to embed with --strings");
  e->add_flag("--strings", embed.strings, "embed transcription strings");
  e->add_option("--checkpoint", embed.checkpoint, "trained checkpoint");
  e->add_option("--manifest", embed.manifest, "corpus manifest");
  e->add_option("--partition", embed.partition, "train | test | query");
  e->add_option("--alphabet", embed.alphabet, "explicit alphabet for --strings");
  add_overrides(e, embed.o);

  SpotArgs spot;
  auto add_spot = [&](CLI::App* cmd) {
    add_common(cmd);
    cmd->add_option("--checkpoint", spot.checkpoint, "trained checkpoint")->required();
    cmd->add_option("--manifest", spot.manifest, "corpus manifest")->required();
    cmd->add_option("--mode", spot.mode, "qbe | qbs");
    cmd->add_option("--protocol", spot.protocol, "almazan | competition");
    cmd->add_option("--stopwords", spot.stopwords, "stop-word file (default: manifest list)");
  };
  auto* sp = cli.add_subcommand("spot", "rank and report average precision");
  add_spot(sp);
  sp->add_option("--ranking", spot.ranking, "ranked list path (default <out>.ranking)");
  auto* ev = cli.add_subcommand("eval", "report average precision");
  add_spot(ev);

  SigArgs sig;
  auto* sg = cli.add_subcommand("sigtest", "permutation test between two AP reports");
  add_common(sg);
  sg->add_option("report_a", sig.a)->required();
  sg->add_option("report_b", sig.b)->required();
  sg->add_option("--s-target", sig.s_target, "target standard deviation of the p-value");
  sg->add_option("--k", sig.k, "number of permutations");
  sg->add_option("--sided", sig.sided, "two-sided | greater");
  sg->add_option("--scheme", sig.scheme, "pooled | paired");
  sg->add_flag("--add-one", sig.add_one, "(count + 1) / (k + 1)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = cli.exit(err);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*s) return cmd_synth(common, synth);
    if (*t) return cmd_train(common, train);
    if (*e) return cmd_embed(common, embed);
    if (*sp) return run_eval(common, spot, true);
    if (*ev) return run_eval(common, spot, false);
    if (*sg) return cmd_sigtest(common, sig);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code(err.kind());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kGeneric;
  }
  return kGeneric;
}
