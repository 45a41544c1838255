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

#include "wordspot/app.hpp"

#include <fstream>

#include "wordspot/error.hpp"
#include "wordspot/io.hpp"

namespace wordspot::app {

namespace {

std::string pooling_name(nn::Pooling p) { return p == nn::Pooling::kSpp ? "spp" : "tpp"; }

nn::Pooling parse_pooling(const std::string& name) {
  if (name == "spp") return nn::Pooling::kSpp;
  if (name == "tpp") return nn::Pooling::kTpp;
  throw ConfigError("unknown pooling '" + name + "'");
}

std::string selection_name(embeddings::DctSelection s) {
  return s == embeddings::DctSelection::kFirst ? "first" : "largest";
}

embeddings::DctSelection parse_selection(const std::string& name) {
  if (name == "first") return embeddings::DctSelection::kFirst;
  if (name == "largest") return embeddings::DctSelection::kLargest;
  throw ConfigError("unknown DCT coefficient selection '" + name + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (arch == "custom") {
    if (!custom_network) throw ConfigError("arch 'custom' needs a 'network' entry");
    custom_network->validate();
  } else if (arch != "phocnet-full" && arch != "phocnet-mini") {
    throw ConfigError("unknown architecture preset '" + arch + "'");
  }
  if (loss == losses::LossKind::kBce && embedding.kind != embeddings::EmbeddingKind::kPhoc) {
    throw ConfigError("the BCE loss needs binary PHOC labels; use the cosine loss with " +
                      embeddings::to_string(embedding.kind));
  }
  if (embedding.kind == embeddings::EmbeddingKind::kDctow && embedding.dct_coefficients < 1) {
    throw ConfigError("DCToW needs at least one coefficient");
  }
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (learning_rate && !(*learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  resolved_optimizer().validate();
}

optim::OptimizerConfig RunConfig::resolved_optimizer() const {
  optim::OptimizerConfig c = optimizer;
  c.learning_rate = learning_rate ? *learning_rate : optim::default_learning_rate(c.kind, loss);
  return c;
}

nn::OutputLink RunConfig::link() const {
  switch (loss) {
    case losses::LossKind::kBce: return nn::OutputLink::kSigmoid;
    case losses::LossKind::kCosine: return nn::OutputLink::kNormalize;
    case losses::LossKind::kEuclidean: return nn::OutputLink::kNone;
  }
  return nn::OutputLink::kNone;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json opt = optimizer.to_json();
  if (learning_rate) {
    opt["learning_rate"] = *learning_rate;
  } else {
    opt.erase("learning_rate");
  }
  nlohmann::json j{
      {"arch", arch},
      {"pooling", pooling_name(pooling)},
      {"embedding",
       {{"kind", embeddings::to_string(embedding.kind)},
        {"levels", embedding.levels.levels()},
        {"dct_coefficients", embedding.dct_coefficients},
        {"dct_selection", selection_name(embedding.dct_selection)}}},
      {"loss", losses::to_string(loss)},
      {"optimizer", opt},
      {"augment", augment},
      {"seed", seed},
      {"iterations", iterations},
      {"batch_size", batch_size},
      {"eval_every", eval_every},
      {"log_every", log_every},
  };
  if (pyramid_levels) j["pyramid_levels"] = *pyramid_levels;
  if (custom_network) j["network"] = custom_network->to_json();
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("run configuration must be a JSON object");
    static const char* kKeys[] = {"arch",      "pooling",    "pyramid_levels", "network",
                                  "embedding", "loss",       "optimizer",      "augment",
                                  "seed",      "iterations", "batch_size",     "eval_every",
                                  "log_every"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
        throw ConfigError("unknown configuration key '" + key + "'");
      }
    }
    c.arch = j.value("arch", c.arch);
    if (j.contains("pooling")) c.pooling = parse_pooling(j["pooling"].get<std::string>());
    if (j.contains("pyramid_levels")) c.pyramid_levels = j["pyramid_levels"].get<std::vector<int>>();
    if (j.contains("network")) c.custom_network = nn::NetworkSpec::from_json(j["network"]);
    if (j.contains("embedding")) {
      const auto& e = j["embedding"];
      if (e.contains("kind")) c.embedding.kind = embeddings::parse_embedding_kind(e["kind"].get<std::string>());
      if (e.contains("levels")) {
        c.embedding.levels = embeddings::LevelSet(e["levels"].get<std::vector<int>>());
      }
      c.embedding.dct_coefficients = e.value("dct_coefficients", c.embedding.dct_coefficients);
      if (e.contains("dct_selection")) {
        c.embedding.dct_selection = parse_selection(e["dct_selection"].get<std::string>());
      }
    }
    if (j.contains("loss")) c.loss = losses::parse_loss_kind(j["loss"].get<std::string>());
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      if (o.contains("learning_rate")) c.learning_rate = o["learning_rate"].get<double>();
      c.optimizer = optim::OptimizerConfig::from_json(o);
    }
    c.augment = j.value("augment", c.augment);
    c.seed = j.value("seed", c.seed);
    c.iterations = j.value("iterations", c.iterations);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.log_every = j.value("log_every", c.log_every);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad run configuration: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("bad run configuration: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return RunConfig::from_json(j);
}

nn::NetworkSpec build_network_spec(const RunConfig& config, std::size_t output_dim) {
  nn::NetworkSpec spec;
  if (config.arch == "custom") {
    if (!config.custom_network) throw ConfigError("arch 'custom' needs a 'network' entry");
    spec = *config.custom_network;
    if (spec.output_dim() != output_dim) {
      throw ConfigError("custom network outputs " + std::to_string(spec.output_dim()) +
                        " values, the embedding has " + std::to_string(output_dim));
    }
    return spec;
  }
  spec = nn::make_preset(config.arch, output_dim, config.pooling, config.link());
  if (config.pyramid_levels) {
    for (auto& l : spec.layers) {
      if (l.kind == nn::LayerKind::kSpp || l.kind == nn::LayerKind::kTpp) l.levels = *config.pyramid_levels;
    }
    spec.validate();
  }
  return spec;
}

embeddings::AttributeVector Model::embed_string(const embeddings::WordString& word) const {
  return embeddings::embed(word, alphabet, config.embedding);
}

retrieval::StringEmbedder Model::string_embedder() const {
  return [this](const embeddings::WordString& w) { return embed_string(w); };
}

Model create_model(const RunConfig& config, const embeddings::Alphabet& alphabet) {
  config.validate();
  const std::size_t d = embeddings::embedding_dim(alphabet.size(), config.embedding);
  Model model{config, alphabet, nn::Network(build_network_spec(config, d))};
  Rng rng = make_rng(config.seed, RngStream::kInit);
  optim::initialize_network(model.net, rng);
  return model;
}

nn::Checkpoint to_checkpoint(const Model& model, const optim::TrainState* state) {
  nlohmann::json meta{{"config", model.config.to_json()},
                      {"alphabet", model.alphabet.utf8()},
                      {"embedding_dim", model.output_dim()}};
  nn::Checkpoint ckpt = nn::make_checkpoint(model.net, model.config.seed, meta);
  if (state) ckpt.metadata["train_state"] = state->save(ckpt.state);
  return ckpt;
}

Model model_from_checkpoint(const nn::Checkpoint& ckpt) {
  try {
    RunConfig config = RunConfig::from_json(ckpt.metadata.at("config"));
    auto alphabet = embeddings::Alphabet::from_utf8(ckpt.metadata.at("alphabet").get<std::string>());
    Model model{std::move(config), std::move(alphabet), nn::Network(ckpt.network)};
    const std::size_t d = embeddings::embedding_dim(model.alphabet.size(), model.config.embedding);
    if (d != model.output_dim()) {
      throw DataError("checkpoint network outputs " + std::to_string(model.output_dim()) +
                      " values, its embedding has " + std::to_string(d));
    }
    nn::load_parameters(model.net, ckpt);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint metadata is incomplete: ") + e.what());
  }
}

std::optional<optim::TrainState> train_state_from_checkpoint(const nn::Checkpoint& ckpt,
                                                             const Model& model) {
  if (!ckpt.metadata.contains("train_state")) return std::nullopt;
  return optim::TrainState::restore(ckpt.metadata["train_state"], ckpt.state, model.net);
}

optim::TrainData make_train_data(const Model& model, const datasets::LoadedSet& train) {
  optim::TrainData data;
  data.images = train.images;
  for (const auto& label : train.labels) {
    data.labels.push_back(model.embed_string(embeddings::WordString::from_utf8(label)).values);
  }
  return data;
}

optim::TrainState initial_train_state(const Model& model) {
  return optim::TrainState::create(model.net, model.config.seed);
}

TrainResult train_model(Model& model, const datasets::LoadedSet& train, optim::TrainState state,
                        std::uint64_t iterations, const datasets::LoadedSet* eval_set) {
  model.config.validate();
  if (train.images.empty()) throw DataError("the training partition is empty");
  const optim::TrainData data = make_train_data(model, train);
  optim::TrainOptions options;
  options.optimizer = model.config.resolved_optimizer();
  options.loss = model.config.loss;
  options.batch_size = model.config.batch_size;
  options.log_every = model.config.log_every;
  options.eval_every = eval_set ? model.config.eval_every : 0;

  optim::AugmentHook augment;
  if (model.config.augment) {
    augment = [](const augment::WordImage& img, Rng& rng) { return augment::augment_image(img, rng); };
  }
  optim::EvalHook eval;
  if (eval_set && options.eval_every > 0) {
    eval = [&](const nn::Network&, std::uint64_t) {
      EvalOptions eo;
      eo.mode = retrieval::QueryMode::kQbs;
      return evaluate_sets(model, *eval_set, nullptr, eo).map;
    };
  }
  TrainResult result;
  result.trace = optim::train_loop(model.net, data, options, state, iterations, augment, eval);
  result.state = std::move(state);
  return result;
}

embeddings::AttributeVector embed_image(const Model& model, const augment::WordImage& image) {
  const auto& spec = model.net.spec();
  const auto padded = augment::pad_to(image, spec.min_input_height(), spec.min_input_width());
  nn::Tensor out = model.net.predict(augment::to_tensor(padded));
  return {model.config.embedding.kind, std::move(out.storage())};
}

retrieval::Gallery build_gallery(const Model& model, const datasets::LoadedSet& set) {
  retrieval::Gallery g;
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    g.add(set.ids[i], embed_image(model, set.images[i]), set.labels[i]);
  }
  return g;
}

retrieval::Gallery build_string_gallery(const Model& model, const datasets::LoadedSet& set) {
  return retrieval::make_string_queries(set.labels, model.string_embedder());
}

std::string to_string(Protocol protocol) {
  return protocol == Protocol::kAlmazan ? "almazan" : "competition";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "almazan") return Protocol::kAlmazan;
  if (name == "competition") return Protocol::kCompetition;
  throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

retrieval::APReport evaluate_sets(const Model& model, const datasets::LoadedSet& test,
                                  const datasets::LoadedSet* queries, const EvalOptions& options,
                                  std::vector<retrieval::RankedList>* lists) {
  if (test.images.empty()) throw DataError("the test partition is empty");
  const retrieval::Gallery gallery = build_gallery(model, test);
  if (options.protocol == Protocol::kAlmazan) {
    if (options.mode == retrieval::QueryMode::kQbe) {
      return retrieval::run_qbe_almazan(gallery, options.stopwords, lists);
    }
    return retrieval::run_qbs_almazan(gallery, model.string_embedder(), options.stopwords, lists);
  }
  if (!queries || queries->labels.empty()) throw DataError("the query partition is empty");
  const retrieval::Gallery q = options.mode == retrieval::QueryMode::kQbe
                                   ? build_gallery(model, *queries)
                                   : build_string_gallery(model, *queries);
  return retrieval::run_competition_protocol(q, gallery, options.mode, lists);
}

retrieval::APReport evaluate(const Model& model, const datasets::CorpusManifest& manifest,
                             const EvalOptions& options, std::vector<retrieval::RankedList>* lists) {
  const auto test = datasets::load_records(manifest, manifest.partition(datasets::Partition::kTest));
  if (options.protocol == Protocol::kAlmazan) return evaluate_sets(model, test, nullptr, options, lists);
  datasets::LoadedSet queries;
  const auto qrecs = manifest.partition(datasets::Partition::kQuery);
  if (options.mode == retrieval::QueryMode::kQbe) {
    queries = datasets::load_records(manifest, qrecs);
  } else {
    for (const auto& r : qrecs) {
      queries.ids.push_back(r.image);
      queries.labels.push_back(embeddings::fold_case_utf8(r.transcription));
    }
  }
  return evaluate_sets(model, test, &queries, options, lists);
}

}  // namespace wordspot::app
