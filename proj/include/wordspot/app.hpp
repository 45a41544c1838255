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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wordspot/augment.hpp"
#include "wordspot/datasets.hpp"
#include "wordspot/embeddings.hpp"
#include "wordspot/losses.hpp"
#include "wordspot/network.hpp"
#include "wordspot/optim.hpp"
#include "wordspot/retrieval.hpp"

namespace wordspot::app {

struct RunConfig {
  std::string arch = "phocnet-mini";  // phocnet-full | phocnet-mini | custom
  nn::Pooling pooling = nn::Pooling::kTpp;
  std::optional<std::vector<int>> pyramid_levels;
  std::optional<nn::NetworkSpec> custom_network;  // required for arch "custom"
  embeddings::EmbeddingConfig embedding;
  losses::LossKind loss = losses::LossKind::kBce;
  optim::OptimizerConfig optimizer;
  // Unset: the default for the optimizer / loss pair.
  std::optional<double> learning_rate;
  bool augment = false;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 2000;
  std::size_t batch_size = 10;
  std::uint64_t eval_every = 0;
  std::uint64_t log_every = 10;

  // Throws ConfigError, e.g. for BCE with a non-PHOC embedding.
  void validate() const;
  optim::OptimizerConfig resolved_optimizer() const;
  nn::OutputLink link() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

RunConfig load_run_config(const std::filesystem::path& path);

nn::NetworkSpec build_network_spec(const RunConfig& config, std::size_t output_dim);

// A network together with everything needed to interpret its outputs.
struct Model {
  RunConfig config;
  embeddings::Alphabet alphabet;
  nn::Network net;

  std::size_t output_dim() const { return net.spec().output_dim(); }
  embeddings::AttributeVector embed_string(const embeddings::WordString& word) const;
  retrieval::StringEmbedder string_embedder() const;
};

// Freshly initialized network for the alphabet.
Model create_model(const RunConfig& config, const embeddings::Alphabet& alphabet);

// Metadata carries the run configuration, alphabet and, when given, the
// optimizer state needed to resume training.
nn::Checkpoint to_checkpoint(const Model& model, const optim::TrainState* state = nullptr);
Model model_from_checkpoint(const nn::Checkpoint& ckpt);
std::optional<optim::TrainState> train_state_from_checkpoint(const nn::Checkpoint& ckpt,
                                                             const Model& model);

optim::TrainData make_train_data(const Model& model, const datasets::LoadedSet& train);

struct TrainResult {
  optim::TrainState state;
  std::vector<optim::TraceEntry> trace;
};

// Runs `iterations` more iterations. When `eval_set` is given and the config
// sets eval_every, the trace records the QbS mAP on it.
TrainResult train_model(Model& model, const datasets::LoadedSet& train,
                        optim::TrainState state, std::uint64_t iterations,
                        const datasets::LoadedSet* eval_set = nullptr);
optim::TrainState initial_train_state(const Model& model);

// Pads to the network minimum and runs an evaluation-mode forward pass with
// the output link applied.
embeddings::AttributeVector embed_image(const Model& model, const augment::WordImage& image);

retrieval::Gallery build_gallery(const Model& model, const datasets::LoadedSet& set);
retrieval::Gallery build_string_gallery(const Model& model, const datasets::LoadedSet& set);

enum class Protocol { kAlmazan, kCompetition };
std::string to_string(Protocol protocol);
Protocol parse_protocol(std::string_view name);

struct EvalOptions {
  retrieval::QueryMode mode = retrieval::QueryMode::kQbe;
  Protocol protocol = Protocol::kAlmazan;
  std::vector<std::string> stopwords;
};

// Almazan: queries come from the test partition. Competition: queries are the
// query partition (images for QbE, transcriptions for QbS).
retrieval::APReport evaluate(const Model& model, const datasets::CorpusManifest& manifest,
                             const EvalOptions& options,
                             std::vector<retrieval::RankedList>* lists = nullptr);

retrieval::APReport evaluate_sets(const Model& model, const datasets::LoadedSet& test,
                                  const datasets::LoadedSet* queries, const EvalOptions& options,
                                  std::vector<retrieval::RankedList>* lists = nullptr);

}  // namespace wordspot::app
