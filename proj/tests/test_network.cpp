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

#include <filesystem>
#include <sstream>

#include "gradcheck.hpp"
#include "wordspot/error.hpp"
#include "wordspot/losses.hpp"
#include "wordspot/network.hpp"
#include "wordspot/optim.hpp"

using namespace wordspot;
using namespace wordspot::nn;

namespace {

NetworkSpec tiny_spec(bool with_dropout) {
  NetworkSpec s;
  s.name = "tiny";
  s.layers = {LayerSpec::conv(2), LayerSpec::relu(), LayerSpec::tpp({1, 2}), LayerSpec::fc(4)};
  if (with_dropout) {
    s.layers = {LayerSpec::conv(2), LayerSpec::relu(), LayerSpec::maxpool(), LayerSpec::tpp({1, 2}),
                LayerSpec::fc(6), LayerSpec::relu(), LayerSpec::dropout_layer(0.5), LayerSpec::fc(4)};
  }
  s.layers.push_back(LayerSpec::sigmoid());
  return s;
}

Network initialized(const NetworkSpec& spec, std::uint64_t seed) {
  Network net(spec);
  Rng rng = make_rng(seed, RngStream::kInit);
  optim::initialize_network(net, rng);
  // Non-zero biases exercise their gradients too.
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& p : net.parameters()) {
    if (!p.decay) {
      for (auto& v : p.value.data()) v = u(rng);
    }
  }
  return net;
}

constexpr double kStep = 1e-5;

double end_to_end_error(const NetworkSpec& spec, std::uint64_t seed) {
  Network net = initialized(spec, seed);
  Rng rng(seed);
  const Tensor x = gradcheck::random_tensor({1, 1, 6, 9}, rng, 0.0, 1.0);
  Tensor y({1, 4, 1, 1});
  for (auto& v : y.data()) v = std::uniform_int_distribution<int>(0, 1)(rng);
  const std::uint64_t dropout_seed = seed + 99;

  auto loss_at = [&](const Tensor& input) {
    Rng d(dropout_seed);
    return losses::bce_loss(net.forward(input, Mode::kTrain, &d), y);
  };
  Rng d(dropout_seed);
  ForwardCache cache;
  const Tensor logits = net.forward(x, Mode::kTrain, &d, &cache);
  net.zero_grad();
  const Tensor grad_x = net.backward(cache, losses::bce_loss(logits, y).grad);

  double worst = oracle::max_relative_error(
      oracle::numeric_gradient([&](const std::vector<double>& v) { return loss_at(Tensor(x.shape(), v)).loss; },
                               gradcheck::vec(x), kStep),
      gradcheck::vec(grad_x));
  for (auto& p : net.parameters()) {
    const std::vector<double> analytic = gradcheck::vec(p.grad);
    const std::vector<double> keep = gradcheck::vec(p.value);
    auto f = [&](const std::vector<double>& v) {
      std::copy(v.begin(), v.end(), p.value.data().begin());
      const double l = loss_at(x).loss;
      std::copy(keep.begin(), keep.end(), p.value.data().begin());
      return l;
    };
    worst = std::max(worst, oracle::max_relative_error(oracle::numeric_gradient(f, keep, kStep), analytic));
  }
  return worst;
}

}  // namespace

TEST(NetworkSpecTest, Validation) {
  NetworkSpec ok = tiny_spec(false);
  EXPECT_NO_THROW(ok.validate());
  EXPECT_EQ(ok.output_dim(), 4u);
  EXPECT_EQ(ok.link(), OutputLink::kSigmoid);

  NetworkSpec two = ok;
  two.layers.insert(two.layers.begin() + 3, LayerSpec::spp({1}));
  EXPECT_THROW(two.validate(), ConfigError);

  NetworkSpec none = ok;
  none.layers.erase(none.layers.begin() + 2);
  EXPECT_THROW(none.validate(), ConfigError);

  NetworkSpec conv_after = ok;
  conv_after.layers.insert(conv_after.layers.begin() + 3, LayerSpec::conv(2));
  EXPECT_THROW(conv_after.validate(), ConfigError);

  NetworkSpec fc_before = ok;
  fc_before.layers.insert(fc_before.layers.begin(), LayerSpec::fc(3));
  EXPECT_THROW(fc_before.validate(), ConfigError);

  NetworkSpec link_mid = ok;
  link_mid.layers.insert(link_mid.layers.begin() + 3, LayerSpec::sigmoid());
  EXPECT_THROW(link_mid.validate(), ConfigError);
}

TEST(NetworkSpecTest, JsonRoundTrip) {
  for (const auto& spec : {tiny_spec(true), phocnet_mini(100, Pooling::kSpp, OutputLink::kNormalize),
                           phocnet_full(604, Pooling::kTpp, OutputLink::kSigmoid)}) {
    EXPECT_EQ(NetworkSpec::from_json(spec.to_json()), spec);
  }
  EXPECT_THROW(parse_layer_kind("conv5x5"), Error);
}

TEST(Presets, FullArchitecture) {
  const Network tpp(phocnet_full(604, Pooling::kTpp, OutputLink::kSigmoid));
  std::size_t convs = 0;
  for (const auto& l : tpp.spec().layers) convs += l.kind == LayerKind::kConv3x3 ? 1 : 0;
  EXPECT_EQ(convs, 13u);
  EXPECT_EQ(tpp.spec().pyramid_output_length(), 7680u);
  const Network spp(phocnet_full(604, Pooling::kSpp, OutputLink::kSigmoid));
  EXPECT_EQ(spp.spec().pyramid_output_length(), 10752u);
  for (const auto& p : tpp.parameters()) {
    if (p.name == "fc1.weight") EXPECT_EQ(p.value.shape(), (Shape{4096, 7680, 1, 1}));
    if (p.name == "fc3.weight") EXPECT_EQ(p.value.shape(), (Shape{604, 4096, 1, 1}));
    if (p.name.find(".bias") != std::string::npos) EXPECT_FALSE(p.decay);
  }
  EXPECT_EQ(tpp.spec().min_input_width(), 20u);
  EXPECT_THROW(make_preset("phocnet-huge", 10, Pooling::kTpp, OutputLink::kSigmoid), ConfigError);
}

TEST(NetworkTest, VariableWidthsGiveFixedLength) {
  const Network net = initialized(phocnet_mini(37, Pooling::kTpp, OutputLink::kSigmoid), 1);
  Rng rng(2);
  for (std::size_t w : {20u, 37u, 120u}) {
    const Tensor out = net.predict(gradcheck::random_tensor({1, 1, 32, w}, rng, 0.0, 1.0));
    EXPECT_EQ(out.shape(), (Shape{1, 37, 1, 1}));
    for (double v : out.data()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(NetworkTest, EqualImagesGiveEqualOutputs) {
  const Network net = initialized(phocnet_mini(12, Pooling::kSpp, OutputLink::kNormalize), 3);
  Rng rng(4);
  const Tensor one = gradcheck::random_tensor({1, 1, 16, 24}, rng, 0.0, 1.0);
  Tensor batch({3, 1, 16, 24});
  for (std::size_t n = 0; n < 3; ++n) std::copy(one.data().begin(), one.data().end(), batch.sample(n).begin());
  const Tensor out = net.predict(batch);
  for (std::size_t n = 1; n < 3; ++n) {
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(out.sample(n)[i], out.sample(0)[i]);
  }
}

TEST(NetworkTest, ForwardIsDeterministicGivenSeed) {
  const Network net = initialized(tiny_spec(true), 5);
  Rng rng(6);
  const Tensor x = gradcheck::random_tensor({2, 1, 8, 10}, rng, 0.0, 1.0);
  Rng a(7), b(7);
  EXPECT_EQ(gradcheck::vec(net.forward(x, Mode::kTrain, &a)), gradcheck::vec(net.forward(x, Mode::kTrain, &b)));
  EXPECT_THROW(net.forward(x, Mode::kTrain), Error);
}

TEST(NetworkTest, EndToEndGradient) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LE(end_to_end_error(tiny_spec(false), seed), 1e-4) << seed;
    EXPECT_LE(end_to_end_error(tiny_spec(true), seed), 1e-4) << seed;
  }
}

TEST(CheckpointTest, BitExactRoundTrip) {
  const Network net = initialized(phocnet_mini(20, Pooling::kTpp, OutputLink::kSigmoid), 8);
  Checkpoint c = make_checkpoint(net, 8, {{"note", "x"}});
  c.state.push_back({"extra", {3}, {1.0 / 3.0, -0.0, 1e-300}});
  std::stringstream first;
  write_checkpoint(first, c);
  const Checkpoint back = read_checkpoint(first);
  EXPECT_EQ(back.network, c.network);
  EXPECT_EQ(back.seed, 8u);
  EXPECT_EQ(back.metadata["note"], "x");
  EXPECT_EQ(back.parameters, c.parameters);
  EXPECT_EQ(back.state, c.state);
  std::stringstream second;
  write_checkpoint(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(first.str().substr(0, 8), "WSPOTCKP");

  Network copy(back.network);
  load_parameters(copy, back);
  Rng rng(9);
  const Tensor x = gradcheck::random_tensor({1, 1, 32, 50}, rng, 0.0, 1.0);
  EXPECT_EQ(gradcheck::vec(copy.predict(x)), gradcheck::vec(net.predict(x)));
}

TEST(CheckpointTest, CorruptInputRejected) {
  const Network net(tiny_spec(false));
  std::stringstream ss;
  write_checkpoint(ss, make_checkpoint(net, 0));
  std::string bytes = ss.str();

  std::stringstream bad_magic("NOTACKPT" + bytes.substr(8));
  EXPECT_THROW(read_checkpoint(bad_magic), DataError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(read_checkpoint(truncated), DataError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), Error);

  Network other(phocnet_mini(4, Pooling::kTpp, OutputLink::kSigmoid));
  EXPECT_THROW(load_parameters(other, make_checkpoint(net, 0)), DataError);
}

TEST(CheckpointTest, SaveIsAtomic) {
  const auto dir = std::filesystem::temp_directory_path() / "wordspot_ckpt_test";
  std::filesystem::create_directories(dir);
  const Network net(tiny_spec(false));
  save_checkpoint(dir / "m.ckpt", make_checkpoint(net, 1));
  EXPECT_TRUE(std::filesystem::exists(dir / "m.ckpt"));
  EXPECT_FALSE(std::filesystem::exists(dir / "m.ckpt.tmp"));
  EXPECT_EQ(load_checkpoint(dir / "m.ckpt").parameters, make_checkpoint(net, 1).parameters);
  std::filesystem::remove_all(dir);
}
