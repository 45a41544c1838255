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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gradcheck.hpp"
#include "wordspot/embeddings.hpp"
#include "wordspot/error.hpp"
#include "wordspot/optim.hpp"

using namespace wordspot;
using namespace wordspot::optim;

namespace {

OptimizerConfig plain(OptimizerKind kind, double lr) {
  OptimizerConfig c;
  c.kind = kind;
  c.learning_rate = lr;
  c.weight_decay = 0.0;
  return c;
}

nn::NetworkSpec small_spec() {
  nn::NetworkSpec s;
  s.name = "small";
  s.layers = {nn::LayerSpec::conv(3), nn::LayerSpec::relu(), nn::LayerSpec::maxpool(),
              nn::LayerSpec::tpp({1, 2}), nn::LayerSpec::fc(16), nn::LayerSpec::relu(),
              nn::LayerSpec::dropout_layer(0.5), nn::LayerSpec::fc(6), nn::LayerSpec::sigmoid()};
  return s;
}

TrainData toy_data(std::size_t count, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  TrainData data;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t w = 8 + 3 * i;
    data.images.push_back(augment::WordImage(8, w, gradcheck::vec(gradcheck::random_tensor({1, 1, 8, w}, rng, 0.0, 1.0))));
    std::vector<double> y(d);
    for (auto& v : y) v = std::uniform_int_distribution<int>(0, 1)(rng);
    data.labels.push_back(std::move(y));
  }
  return data;
}

nn::Network initialized(const nn::NetworkSpec& spec, std::uint64_t seed) {
  nn::Network net(spec);
  Rng rng = make_rng(seed, RngStream::kInit);
  initialize_network(net, rng);
  return net;
}

}  // namespace

TEST(OptimizerConfigTest, Validation) {
  EXPECT_NO_THROW(OptimizerConfig{}.validate());
  OptimizerConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.momentum = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.beta2 = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_optimizer_kind("rmsprop"), ConfigError);
}

TEST(OptimizerConfigTest, JsonRoundTrip) {
  OptimizerConfig c = default_config(OptimizerKind::kSgdMomentum, losses::LossKind::kCosine);
  c.decoupled_weight_decay = true;
  c.step_iteration = 1234;
  const OptimizerConfig back = OptimizerConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  c.step_iteration = kNoStep;
  EXPECT_EQ(OptimizerConfig::from_json(c.to_json()).step_iteration, kNoStep);
}

TEST(OptimizerConfigTest, DefaultLearningRates) {
  EXPECT_EQ(default_learning_rate(OptimizerKind::kSgdMomentum, losses::LossKind::kBce), 1e-4);
  EXPECT_EQ(default_learning_rate(OptimizerKind::kSgdMomentum, losses::LossKind::kCosine), 1e-2);
  EXPECT_EQ(default_learning_rate(OptimizerKind::kAdam, losses::LossKind::kBce), 1e-4);
  const OptimizerConfig c{};
  EXPECT_EQ(c.momentum, 0.9);
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.epsilon, 1e-8);
  EXPECT_EQ(c.weight_decay, 5e-5);
  EXPECT_FALSE(c.decoupled_weight_decay);
}

TEST(LearningRate, StepSchedule) {
  OptimizerConfig c;
  c.learning_rate = 1e-4;
  EXPECT_EQ(lr_at(0, c), 1e-4);
  EXPECT_EQ(lr_at(69999, c), 1e-4);
  EXPECT_DOUBLE_EQ(lr_at(70001, c), 1e-5);
  c.step_iteration = kNoStep;
  EXPECT_EQ(lr_at(10'000'000, c), 1e-4);
}

TEST(HeInit, VarianceAndDeterminism) {
  std::vector<double> a(100000), b(100000);
  Rng r1(5), r2(5);
  he_init(a, 512, r1);
  he_init(b, 512, r2);
  EXPECT_EQ(a, b);
  double mean = 0.0, sq = 0.0;
  for (double v : a) mean += v;
  mean /= a.size();
  for (double v : a) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / (a.size() - 1));
  EXPECT_NEAR(sd, 0.0625, 0.05 * 0.0625);
  EXPECT_THROW(he_init(a, 0, r1), Error);
}

TEST(HeInit, BiasesZeroWeightsDecay) {
  const nn::Network net = initialized(nn::phocnet_mini(10, nn::Pooling::kTpp, nn::OutputLink::kSigmoid), 2);
  for (const auto& p : net.parameters()) {
    const bool bias = p.name.find(".bias") != std::string::npos;
    EXPECT_EQ(p.decay, !bias) << p.name;
    if (bias) {
      for (double v : p.value.data()) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(SgdMomentum, HandExamples) {
  const OptimizerConfig c = plain(OptimizerKind::kSgdMomentum, 0.1);
  std::vector<double> p{1.0, -2.0};
  SlotState s;
  sgd_momentum_step(p, std::vector<double>{0.0, 0.0}, s, c, 0.1);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));

  OptimizerConfig no_mu = c;
  no_mu.momentum = 0.0;
  std::vector<double> q{1.0};
  SlotState t;
  for (int i = 1; i <= 3; ++i) {
    sgd_momentum_step(q, std::vector<double>{0.5}, t, no_mu, 0.1);
    EXPECT_NEAR(q[0], 1.0 - 0.05 * i, 1e-15);
  }

  std::vector<double> r{1.0};
  SlotState u;
  sgd_momentum_step(r, std::vector<double>{0.5}, u, c, 0.1);
  EXPECT_NEAR(r[0], 0.95, 1e-15);
  sgd_momentum_step(r, std::vector<double>{0.5}, u, c, 0.1);
  EXPECT_NEAR(u.velocity[0], -0.095, 1e-15);
  EXPECT_NEAR(r[0], 0.855, 1e-15);

  EXPECT_THROW(sgd_momentum_step(r, std::vector<double>{0.5, 1.0}, u, c, 0.1), ShapeError);
}

TEST(SgdMomentum, CoupledDecayEntersVelocity) {
  OptimizerConfig c = plain(OptimizerKind::kSgdMomentum, 0.1);
  c.weight_decay = 0.5;
  std::vector<double> p{2.0};
  SlotState s;
  sgd_momentum_step(p, std::vector<double>{0.0}, s, c, 0.1);
  EXPECT_NEAR(p[0], 2.0 - 0.1 * 0.5 * 2.0, 1e-15);
  std::vector<double> b{2.0};
  SlotState sb;
  sgd_momentum_step(b, std::vector<double>{0.0}, sb, c, 0.1, false);
  EXPECT_EQ(b[0], 2.0);
}

TEST(Adam, FirstStepHasMagnitudeLr) {
  const OptimizerConfig c = plain(OptimizerKind::kAdam, 1e-3);
  for (double g : {1e-3, -0.7, 25.0}) {
    std::vector<double> p{0.3};
    SlotState s;
    adam_step(p, std::vector<double>{g}, s, c, 1e-3);
    EXPECT_NEAR(std::abs(p[0] - 0.3), 1e-3, 1e-8);
    EXPECT_EQ(std::signbit(p[0] - 0.3), !std::signbit(g));
  }
  std::vector<double> z{0.3};
  SlotState s;
  for (int i = 0; i < 10; ++i) adam_step(z, std::vector<double>{0.0}, s, c, 1e-3);
  EXPECT_EQ(z[0], 0.3);
}

TEST(Adam, MatchesScalarReferenceTrace) {
  OptimizerConfig c = plain(OptimizerKind::kAdam, 1e-3);
  c.weight_decay = 5e-5;
  const double grads[10] = {0.3, -0.1, 0.25, 0.0, -0.4, 0.05, 0.2, -0.2, 0.1, 0.33};
  const double expected[10] = {0.49900000003333056, 0.4985996897967383,  0.4979606185663435,
                               0.4974370943756362,  0.49750772028880186, 0.49752248102966085,
                               0.4973667253674303,  0.49739247356640204, 0.49733898846953417,
                               0.49707516323519346};
  std::vector<double> p{0.5};
  SlotState s;
  for (int t = 0; t < 10; ++t) {
    adam_step(p, std::vector<double>{grads[t]}, s, c, 1e-3);
    EXPECT_NEAR(p[0], expected[t], 1e-15) << t;
  }
  EXPECT_EQ(s.steps, 10u);
}

TEST(Adam, LongRunStepIsScaleInvariant) {
  const OptimizerConfig c = plain(OptimizerKind::kAdam, 1e-3);
  double steps[2];
  int k = 0;
  for (double g : {0.02, 0.2}) {
    std::vector<double> p{0.0};
    SlotState s;
    double before = 0.0;
    for (int i = 0; i < 100; ++i) {
      before = p[0];
      adam_step(p, std::vector<double>{g}, s, c, 1e-3);
    }
    steps[k++] = std::abs(p[0] - before);
  }
  EXPECT_NEAR(steps[0] / steps[1], 1.0, 0.01);
}

TEST(ApplyUpdate, DecayTouchesWeightsOnly) {
  nn::Network net = initialized(small_spec(), 3);
  for (auto& p : net.parameters()) {
    if (!p.decay) std::fill(p.value.data().begin(), p.value.data().end(), 0.25);
  }
  const nn::Network before = net;
  net.zero_grad();
  TrainState state = TrainState::create(net, 1);
  OptimizerConfig c = plain(OptimizerKind::kSgdMomentum, 0.1);
  c.weight_decay = 0.01;
  apply_update(net, state, c);
  for (std::size_t i = 0; i < net.parameters().size(); ++i) {
    const auto& now = net.parameters()[i];
    const auto& then = before.parameters()[i];
    for (std::size_t j = 0; j < now.value.size(); ++j) {
      if (now.decay) {
        EXPECT_DOUBLE_EQ(now.value.data()[j], then.value.data()[j] * (1.0 - 0.1 * 0.01));
      } else {
        EXPECT_EQ(now.value.data()[j], 0.25);
      }
    }
  }
}

TEST(TrainLoop, SingleSampleOverfits) {
  const auto alphabet = embeddings::Alphabet::from_utf8("dorw");
  const embeddings::EmbeddingConfig ec;
  const auto y = embeddings::embed(embeddings::WordString::from_utf8("word"), alphabet, ec);
  nn::Network net = initialized(nn::phocnet_mini(y.dim(), nn::Pooling::kTpp, nn::OutputLink::kSigmoid), 4);
  Rng rng(4);
  TrainData data;
  data.images.push_back(augment::WordImage(32, 48, gradcheck::vec(gradcheck::random_tensor({1, 1, 32, 48}, rng, 0.0, 1.0))));
  data.labels.push_back(y.values);
  TrainOptions opts;
  opts.optimizer = default_config(OptimizerKind::kAdam, losses::LossKind::kBce);
  opts.optimizer.learning_rate = 1e-3;
  opts.batch_size = 1;
  TrainState state = TrainState::create(net, 4);
  const auto trace = train_loop(net, data, opts, state, 500);
  ASSERT_EQ(trace.size(), 500u);
  EXPECT_LT(trace.back().loss, 0.01);
  EXPECT_LT(trace.back().loss, trace.front().loss);
  EXPECT_EQ(state.iteration, 500u);
}

TEST(TrainLoop, DeterministicGivenSeed) {
  const TrainData data = toy_data(5, 6, 7);
  TrainOptions opts;
  opts.optimizer = plain(OptimizerKind::kAdam, 1e-2);
  opts.batch_size = 3;
  auto run = [&](const AugmentHook& hook) {
    nn::Network net = initialized(small_spec(), 8);
    TrainState state = TrainState::create(net, 8);
    return train_loop(net, data, opts, state, 30, hook);
  };
  const AugmentHook jitter = [](const augment::WordImage& img, Rng& r) {
    augment::WordImage out = img;
    for (auto& v : out.pixels()) v += std::normal_distribution<double>(0.0, 0.01)(r);
    return out;
  };
  for (const AugmentHook& hook : {AugmentHook{}, jitter}) {
    const auto a = run(hook);
    const auto b = run(hook);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].loss, b[i].loss);
  }
}

TEST(TrainLoop, EvalHookFollowsSchedule) {
  const TrainData data = toy_data(3, 6, 9);
  nn::Network net = initialized(small_spec(), 9);
  TrainState state = TrainState::create(net, 9);
  TrainOptions opts;
  opts.log_every = 5;
  opts.eval_every = 10;
  std::vector<std::uint64_t> seen;
  const auto trace = train_loop(net, data, opts, state, 20, {}, [&](const nn::Network&, std::uint64_t it) {
    seen.push_back(it);
    return 0.5;
  });
  EXPECT_EQ(seen, (std::vector<std::uint64_t>{10, 20}));
  std::vector<std::uint64_t> logged;
  for (const auto& e : trace) {
    logged.push_back(e.iteration);
    EXPECT_EQ(e.map.has_value(), e.iteration % 10 == 0);
  }
  EXPECT_EQ(logged, (std::vector<std::uint64_t>{5, 10, 15, 20}));
}

TEST(TrainLoop, DivergenceAborts) {
  const TrainData data = toy_data(3, 6, 10);
  nn::Network net = initialized(small_spec(), 10);
  TrainState state = TrainState::create(net, 10);
  TrainOptions opts;
  opts.loss = losses::LossKind::kEuclidean;
  opts.optimizer = plain(OptimizerKind::kSgdMomentum, 1e200);
  EXPECT_THROW(train_loop(net, data, opts, state, 50), NumericError);
}

TEST(TrainLoop, EmptyCorpusRejected) {
  nn::Network net = initialized(small_spec(), 1);
  TrainState state = TrainState::create(net, 1);
  EXPECT_THROW(train_loop(net, TrainData{}, TrainOptions{}, state, 1), Error);
}

TEST(TrainStateTest, ResumeMatchesUninterruptedRun) {
  const TrainData data = toy_data(6, 6, 11);
  TrainOptions opts;
  opts.optimizer = plain(OptimizerKind::kAdam, 1e-2);
  opts.optimizer.weight_decay = 5e-5;
  opts.batch_size = 2;

  nn::Network straight = initialized(small_spec(), 12);
  TrainState s1 = TrainState::create(straight, 12);
  const auto full = train_loop(straight, data, opts, s1, 20);

  nn::Network first = initialized(small_spec(), 12);
  TrainState s2 = TrainState::create(first, 12);
  train_loop(first, data, opts, s2, 10);
  std::vector<nn::CheckpointBlock> blocks;
  const nlohmann::json meta = s2.save(blocks);
  EXPECT_EQ(blocks.size(), 3 * first.parameters().size());
  nn::Checkpoint ckpt = nn::make_checkpoint(first, 12, {{"train_state", meta}});
  ckpt.state = blocks;
  std::stringstream bytes;
  nn::write_checkpoint(bytes, ckpt);
  const nn::Checkpoint back = nn::read_checkpoint(bytes);

  nn::Network resumed(back.network);
  nn::load_parameters(resumed, back);
  TrainState s3 = TrainState::restore(back.metadata["train_state"], back.state, resumed);
  EXPECT_EQ(s3.iteration, 10u);
  const auto tail = train_loop(resumed, data, opts, s3, 10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(tail[i].loss, full[10 + i].loss) << i;
  for (std::size_t i = 0; i < resumed.parameters().size(); ++i) {
    EXPECT_EQ(gradcheck::vec(resumed.parameters()[i].value), gradcheck::vec(straight.parameters()[i].value));
  }
}

TEST(TrainStateTest, RestoreRejectsMismatch) {
  nn::Network net = initialized(small_spec(), 1);
  TrainState s = TrainState::create(net, 1);
  std::vector<nn::CheckpointBlock> blocks;
  nlohmann::json meta = s.save(blocks);
  blocks.pop_back();
  EXPECT_THROW(TrainState::restore(meta, blocks, net), DataError);
}

TEST(TraceIo, RoundTrip) {
  const std::vector<TraceEntry> trace{{10, 1.0 / 3.0, std::nullopt}, {20, 0.125, 0.75}, {30, 1e-300, 1.0}};
  std::stringstream ss;
  write_trace(ss, trace);
  EXPECT_EQ(ss.str().rfind("#wordspot-trace v1\n", 0), 0u);
  const auto back = read_trace(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].iteration, trace[i].iteration);
    EXPECT_EQ(back[i].loss, trace[i].loss);
    EXPECT_EQ(back[i].map.has_value(), trace[i].map.has_value());
  }
  EXPECT_NEAR(*back[1].map, 0.75, 1e-9);
  std::stringstream bad("not a trace\n");
  EXPECT_THROW(read_trace(bad), Error);
}
