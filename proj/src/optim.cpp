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

#include "wordspot/optim.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "wordspot/error.hpp"

namespace wordspot::optim {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd" || name == "sgd_momentum") return OptimizerKind::kSgdMomentum;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1)");
  };
  unit(momentum, "momentum");
  unit(beta1, "beta1");
  unit(beta2, "beta2");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (!(step_divisor > 0.0)) throw ConfigError("step divisor must be > 0");
}

nlohmann::json OptimizerConfig::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)},
                   {"learning_rate", learning_rate},
                   {"momentum", momentum},
                   {"beta1", beta1},
                   {"beta2", beta2},
                   {"epsilon", epsilon},
                   {"weight_decay", weight_decay},
                   {"decoupled_weight_decay", decoupled_weight_decay},
                   {"step_divisor", step_divisor}};
  if (step_iteration == kNoStep) {
    j["step_iteration"] = nullptr;
  } else {
    j["step_iteration"] = step_iteration;
  }
  return j;
}

OptimizerConfig OptimizerConfig::from_json(const nlohmann::json& j) {
  OptimizerConfig c;
  try {
    if (j.contains("kind")) c.kind = parse_optimizer_kind(j["kind"].get<std::string>());
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.momentum = j.value("momentum", c.momentum);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.decoupled_weight_decay = j.value("decoupled_weight_decay", c.decoupled_weight_decay);
    c.step_divisor = j.value("step_divisor", c.step_divisor);
    if (j.contains("step_iteration")) {
      c.step_iteration = j["step_iteration"].is_null() ? kNoStep
                                                       : j["step_iteration"].get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad optimizer config: ") + e.what());
  }
  c.validate();
  return c;
}

double default_learning_rate(OptimizerKind kind, losses::LossKind loss) {
  if (kind == OptimizerKind::kAdam) return 1e-4;
  return loss == losses::LossKind::kCosine ? 1e-2 : 1e-4;
}

OptimizerConfig default_config(OptimizerKind kind, losses::LossKind loss) {
  OptimizerConfig c;
  c.kind = kind;
  c.learning_rate = default_learning_rate(kind, loss);
  return c;
}

double lr_at(std::uint64_t iteration, const OptimizerConfig& config) {
  if (config.step_iteration != kNoStep && iteration >= config.step_iteration) {
    return config.learning_rate / config.step_divisor;
  }
  return config.learning_rate;
}

void he_init(std::span<double> values, std::size_t fan_in, Rng& rng) {
  if (fan_in == 0) throw ArgumentError("he_init needs fan_in >= 1");
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& v : values) v = normal(rng);
}

void initialize_network(nn::Network& net, Rng& rng) {
  for (auto& p : net.parameters()) {
    if (p.decay) {
      he_init(p.value.data(), p.fan_in, rng);
    } else {
      std::fill(p.value.data().begin(), p.value.data().end(), 0.0);
    }
  }
}

namespace {

void check_sizes(std::span<double> param, std::span<const double> grad) {
  if (param.size() != grad.size()) {
    throw ShapeError("parameter has " + std::to_string(param.size()) + " values, gradient has " +
                     std::to_string(grad.size()));
  }
}

double coupled_decay(const OptimizerConfig& config, bool apply_decay) {
  return apply_decay && !config.decoupled_weight_decay ? config.weight_decay : 0.0;
}

void decoupled_decay(std::span<double> param, const OptimizerConfig& config, double lr,
                     bool apply_decay) {
  if (!apply_decay || !config.decoupled_weight_decay || config.weight_decay == 0.0) return;
  for (auto& p : param) p -= lr * config.weight_decay * p;
}

}  // namespace

void sgd_momentum_step(std::span<double> param, std::span<const double> grad, SlotState& state,
                       const OptimizerConfig& config, double lr, bool apply_decay) {
  check_sizes(param, grad);
  if (state.velocity.size() != param.size()) state.velocity.assign(param.size(), 0.0);
  const double wd = coupled_decay(config, apply_decay);
  decoupled_decay(param, config, lr, apply_decay);
  for (std::size_t i = 0; i < param.size(); ++i) {
    state.velocity[i] = config.momentum * state.velocity[i] - lr * (grad[i] + wd * param[i]);
    param[i] += state.velocity[i];
  }
  ++state.steps;
}

void adam_step(std::span<double> param, std::span<const double> grad, SlotState& state,
               const OptimizerConfig& config, double lr, bool apply_decay) {
  check_sizes(param, grad);
  if (state.first_moment.size() != param.size()) {
    state.first_moment.assign(param.size(), 0.0);
    state.second_moment.assign(param.size(), 0.0);
  }
  const double wd = coupled_decay(config, apply_decay);
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  decoupled_decay(param, config, lr, apply_decay);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + wd * param[i];
    state.first_moment[i] = config.beta1 * state.first_moment[i] + (1.0 - config.beta1) * g;
    state.second_moment[i] = config.beta2 * state.second_moment[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.first_moment[i] / c1;
    const double v_hat = state.second_moment[i] / c2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

TrainState TrainState::create(const nn::Network& net, std::uint64_t seed) {
  TrainState s;
  s.slots.resize(net.parameters().size());
  s.batching = make_rng(seed, RngStream::kBatching);
  s.dropout = make_rng(seed, RngStream::kDropout);
  s.augmentation = make_rng(seed, RngStream::kAugment);
  return s;
}

nlohmann::json TrainState::save(std::vector<nn::CheckpointBlock>& blocks) const {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    steps.push_back(s.steps);
    const std::string base = "slot" + std::to_string(i);
    blocks.push_back({base + ".velocity", {s.velocity.size()}, s.velocity});
    blocks.push_back({base + ".m", {s.first_moment.size()}, s.first_moment});
    blocks.push_back({base + ".v", {s.second_moment.size()}, s.second_moment});
  }
  return {{"iteration", iteration},
          {"slot_steps", steps},
          {"rng_batching", serialize_rng(batching)},
          {"rng_dropout", serialize_rng(dropout)},
          {"rng_augmentation", serialize_rng(augmentation)}};
}

TrainState TrainState::restore(const nlohmann::json& meta, const std::vector<nn::CheckpointBlock>& blocks,
                               const nn::Network& net) {
  TrainState s;
  const std::size_t n = net.parameters().size();
  if (blocks.size() != 3 * n) throw DataError("checkpoint optimizer state does not match network");
  try {
    s.iteration = meta.at("iteration").get<std::uint64_t>();
    const auto steps = meta.at("slot_steps").get<std::vector<std::uint64_t>>();
    if (steps.size() != n) throw DataError("checkpoint optimizer state does not match network");
    s.slots.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.slots[i].steps = steps[i];
      s.slots[i].velocity = blocks[3 * i].values;
      s.slots[i].first_moment = blocks[3 * i + 1].values;
      s.slots[i].second_moment = blocks[3 * i + 2].values;
    }
    s.batching = deserialize_rng(meta.at("rng_batching").get<std::string>());
    s.dropout = deserialize_rng(meta.at("rng_dropout").get<std::string>());
    s.augmentation = deserialize_rng(meta.at("rng_augmentation").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt training state: ") + e.what());
  }
  return s;
}

void apply_update(nn::Network& net, TrainState& state, const OptimizerConfig& config) {
  auto& params = net.parameters();
  if (state.slots.size() != params.size()) state.slots.resize(params.size());
  const double lr = lr_at(state.iteration, config);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (config.kind == OptimizerKind::kAdam) {
      adam_step(p.value.data(), p.grad.data(), state.slots[i], config, lr, p.decay);
    } else {
      sgd_momentum_step(p.value.data(), p.grad.data(), state.slots[i], config, lr, p.decay);
    }
  }
}

std::vector<TraceEntry> train_loop(nn::Network& net, const TrainData& data, const TrainOptions& options,
                                   TrainState& state, std::uint64_t iterations,
                                   const AugmentHook& augment, const EvalHook& eval) {
  if (data.images.empty()) throw DataError("training set is empty");
  if (data.images.size() != data.labels.size()) throw DataError("images and labels differ in count");
  if (options.batch_size < 1) throw ConfigError("batch size must be >= 1");
  options.optimizer.validate();
  const std::size_t d = net.spec().output_dim();
  for (const auto& l : data.labels) {
    if (l.size() != d) {
      throw DataError("label dimensionality " + std::to_string(l.size()) +
                      " does not match network output " + std::to_string(d));
    }
  }
  const std::size_t min_h = net.spec().min_input_height();
  const std::size_t min_w = net.spec().min_input_width();

  std::vector<TraceEntry> trace;
  std::uniform_int_distribution<std::size_t> pick(0, data.images.size() - 1);
  nn::ForwardCache cache;
  for (std::uint64_t it = 0; it < iterations; ++it) {
    net.zero_grad();
    double batch_loss = 0.0;
    for (std::size_t b = 0; b < options.batch_size; ++b) {
      const std::size_t idx = pick(state.batching);
      augment::WordImage img =
          augment ? augment(data.images[idx], state.augmentation) : data.images[idx];
      img = augment::pad_to(img, min_h, min_w);
      const nn::Tensor x = augment::to_tensor(img);
      const nn::Tensor logits = net.forward(x, nn::Mode::kTrain, &state.dropout, &cache);
      const nn::Tensor label({1, d, 1, 1}, data.labels[idx]);
      losses::LossValue lv = losses::compute_loss(options.loss, logits, label);
      batch_loss += lv.loss;
      net.backward(cache, lv.grad);
    }
    if (!std::isfinite(batch_loss)) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "training diverged: non-finite loss at iteration %llu (learning rate %g)",
                    static_cast<unsigned long long>(state.iteration + 1),
                    lr_at(state.iteration, options.optimizer));
      throw NumericError(msg);
    }
    apply_update(net, state, options.optimizer);
    for (const auto& p : net.parameters()) {
      if (!p.value.all_finite()) {
        throw NumericError("training diverged: parameter '" + p.name +
                           "' became non-finite at iteration " + std::to_string(state.iteration + 1));
      }
    }
    ++state.iteration;
    const bool log = options.log_every > 0 && state.iteration % options.log_every == 0;
    const bool evaluate = eval && options.eval_every > 0 && state.iteration % options.eval_every == 0;
    if (log || evaluate) {
      TraceEntry e{state.iteration, batch_loss, std::nullopt};
      if (evaluate) e.map = eval(net, state.iteration);
      trace.push_back(e);
    }
  }
  return trace;
}

void write_trace(std::ostream& out, std::span<const TraceEntry> trace) {
  out << "#wordspot-trace v1\n";
  char buf[64];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.loss);
    out << e.iteration << '\t' << buf << '\t';
    if (e.map) {
      std::snprintf(buf, sizeof(buf), "%.9f", *e.map);
      out << buf;
    } else {
      out << '-';
    }
    out << '\n';
  }
}

std::vector<TraceEntry> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "#wordspot-trace v1") throw DataError("not a trace file");
  std::vector<TraceEntry> trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string it, loss, map;
    if (!std::getline(ss, it, '\t') || !std::getline(ss, loss, '\t') || !std::getline(ss, map)) {
      throw DataError("trace line " + std::to_string(line_no) + ": expected 3 fields");
    }
    TraceEntry e;
    e.iteration = std::strtoull(it.c_str(), nullptr, 10);
    e.loss = std::strtod(loss.c_str(), nullptr);
    if (map != "-") e.map = std::strtod(map.c_str(), nullptr);
    trace.push_back(e);
  }
  return trace;
}

}  // namespace wordspot::optim
