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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "wordspot/augment.hpp"
#include "wordspot/losses.hpp"
#include "wordspot/network.hpp"
#include "wordspot/rng.hpp"

namespace wordspot::optim {

enum class OptimizerKind { kSgdMomentum, kAdam };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

inline constexpr std::uint64_t kNoStep = std::numeric_limits<std::uint64_t>::max();

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 5e-5;
  // Coupled L2 (added to the gradient) unless set.
  bool decoupled_weight_decay = false;
  // The learning rate is divided by `step_divisor` from this iteration on.
  std::uint64_t step_iteration = 70000;
  double step_divisor = 10.0;

  void validate() const;
  nlohmann::json to_json() const;
  static OptimizerConfig from_json(const nlohmann::json& j);
};

// Initial learning rates: SGD 1e-4 with BCE, 1e-2 with the cosine loss;
// Adam 1e-4.
double default_learning_rate(OptimizerKind kind, losses::LossKind loss);
OptimizerConfig default_config(OptimizerKind kind, losses::LossKind loss);

double lr_at(std::uint64_t iteration, const OptimizerConfig& config);

// Samples N(0, 2 / fan_in).
void he_init(std::span<double> values, std::size_t fan_in, Rng& rng);
// He initialization for weights, zeros for biases.
void initialize_network(nn::Network& net, Rng& rng);

struct SlotState {
  std::vector<double> velocity;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t steps = 0;
};

// v <- mu v - lr (g + wd p);  p <- p + v
void sgd_momentum_step(std::span<double> param, std::span<const double> grad, SlotState& state,
                       const OptimizerConfig& config, double lr, bool apply_decay = true);
// Bias-corrected Adam.
void adam_step(std::span<double> param, std::span<const double> grad, SlotState& state,
               const OptimizerConfig& config, double lr, bool apply_decay = true);

struct TrainState {
  std::uint64_t iteration = 0;  // completed iterations
  std::vector<SlotState> slots;
  Rng batching;
  Rng dropout;
  Rng augmentation;

  static TrainState create(const nn::Network& net, std::uint64_t seed);

  // Checkpoint round trip: accumulators become state blocks, counters and rng
  // streams go into the returned JSON.
  nlohmann::json save(std::vector<nn::CheckpointBlock>& blocks) const;
  static TrainState restore(const nlohmann::json& meta, const std::vector<nn::CheckpointBlock>& blocks,
                            const nn::Network& net);
};

// Applies one update to every parameter from its accumulated gradient.
void apply_update(nn::Network& net, TrainState& state, const OptimizerConfig& config);

struct TrainData {
  std::vector<augment::WordImage> images;
  std::vector<std::vector<double>> labels;
};

struct TrainOptions {
  OptimizerConfig optimizer;
  losses::LossKind loss = losses::LossKind::kBce;
  std::size_t batch_size = 10;
  std::uint64_t log_every = 1;
  std::uint64_t eval_every = 0;  // 0 disables the eval hook
};

struct TraceEntry {
  std::uint64_t iteration = 0;
  double loss = 0.0;
  std::optional<double> map;
};

using AugmentHook = std::function<augment::WordImage(const augment::WordImage&, Rng&)>;
using EvalHook = std::function<double(const nn::Network&, std::uint64_t iteration)>;

// Runs `iterations` more mini-batch iterations from `state`. Each iteration
// samples batch_size examples uniformly with replacement, accumulates the
// summed loss gradient sample by sample, and applies one optimizer update.
// A non-finite loss or parameter aborts with NumericError.
std::vector<TraceEntry> train_loop(nn::Network& net, const TrainData& data, const TrainOptions& options,
                                   TrainState& state, std::uint64_t iterations,
                                   const AugmentHook& augment = {}, const EvalHook& eval = {});

// "#wordspot-trace v1" header, then "iteration<TAB>loss<TAB>map" lines, with
// "-" for iterations without an evaluation.
void write_trace(std::ostream& out, std::span<const TraceEntry> trace);
std::vector<TraceEntry> read_trace(std::istream& in);

}  // namespace wordspot::optim
