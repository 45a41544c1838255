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

#include "gradcheck.hpp"
#include "wordspot/error.hpp"
#include "wordspot/layers.hpp"
#include "wordspot/network.hpp"

using namespace wordspot;
using namespace wordspot::nn;

namespace {

constexpr int kInstances = 20;

template <class F>
double worst_of(F check, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < kInstances; ++i) worst = std::max(worst, check(rng));
  return worst;
}

}  // namespace

TEST(Conv3x3, IdentityKernel) {
  Rng rng(1);
  const Tensor x = gradcheck::random_tensor({1, 1, 5, 7}, rng);
  Tensor w({1, 1, 3, 3});
  w.at(0, 0, 1, 1) = 1.0;
  const Tensor y = conv3x3_forward(x, w, std::vector<double>{0.0});
  EXPECT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], x.data()[i]);
}

TEST(Conv3x3, ZeroInputGivesBias) {
  Rng rng(2);
  const Tensor w = gradcheck::random_tensor({3, 2, 3, 3}, rng);
  const Tensor y = conv3x3_forward(Tensor({2, 2, 4, 6}), w, std::vector<double>{0.5, -1.0, 2.0});
  EXPECT_EQ(y.shape(), (Shape{2, 3, 4, 6}));
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(y.at(n, c, 3, 5), (std::vector<double>{0.5, -1.0, 2.0})[c]);
  }
}

TEST(Conv3x3, ChannelMismatchThrows) {
  EXPECT_THROW(conv3x3_forward(Tensor({1, 2, 4, 4}), Tensor({1, 3, 3, 3}), std::vector<double>{0.0}),
               ShapeError);
}

TEST(Conv3x3, FiniteDifferenceFixedShape) {
  Rng rng(3);
  const Tensor x = gradcheck::random_tensor({1, 2, 5, 4}, rng);
  const Tensor w = gradcheck::random_tensor({3, 2, 3, 3}, rng);
  const std::vector<double> b{0.1, 0.2, 0.3};
  const Tensor g = gradcheck::random_tensor({1, 3, 5, 4}, rng);
  const auto grads = conv3x3_backward(x, w, g);
  EXPECT_LE(gradcheck::check_input(x, g, grads.grad_x, [&](const Tensor& t) { return conv3x3_forward(t, w, b); }),
            1e-5);
  EXPECT_LE(gradcheck::check_input(w, g, grads.grad_w, [&](const Tensor& t) { return conv3x3_forward(x, t, b); }),
            1e-5);
}

TEST(GradientSuite, Conv) { EXPECT_LE(worst_of(gradcheck::conv, 10), 1e-5); }
TEST(GradientSuite, Relu) { EXPECT_LE(worst_of(gradcheck::relu, 11), 1e-5); }
TEST(GradientSuite, MaxPool) { EXPECT_LE(worst_of(gradcheck::maxpool, 12), 1e-5); }
TEST(GradientSuite, Spp) { EXPECT_LE(worst_of(gradcheck::spp, 13), 1e-5); }
TEST(GradientSuite, Tpp) { EXPECT_LE(worst_of(gradcheck::tpp, 14), 1e-5); }
TEST(GradientSuite, FullyConnected) { EXPECT_LE(worst_of(gradcheck::fc, 15), 1e-5); }
TEST(GradientSuite, Sigmoid) { EXPECT_LE(worst_of(gradcheck::sigmoid, 16), 1e-5); }
TEST(GradientSuite, Normalize) { EXPECT_LE(worst_of(gradcheck::normalize, 17), 1e-5); }
TEST(GradientSuite, Softmax) { EXPECT_LE(worst_of(gradcheck::softmax, 18), 1e-5); }

TEST(Relu, Values) {
  const Tensor x({1, 1, 1, 3}, {-1.0, 0.0, 2.0});
  const Tensor y = relu_forward(x);
  EXPECT_EQ(gradcheck::vec(y), (std::vector<double>{0.0, 0.0, 2.0}));
  const Tensor g = relu_backward(x, Tensor({1, 1, 1, 3}, 1.0));
  EXPECT_EQ(gradcheck::vec(g), (std::vector<double>{0.0, 0.0, 1.0}));
}

TEST(MaxPool, Values) {
  const auto r = maxpool2x2_forward(Tensor({1, 1, 2, 2}, {1.0, 3.0, 2.0, 0.0}));
  EXPECT_EQ(r.out.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(r.out.data()[0], 3.0);
  const auto c = maxpool2x2_forward(Tensor({1, 2, 5, 7}, 4.0));
  EXPECT_EQ(c.out.shape(), (Shape{1, 2, 2, 3}));
  for (double v : c.out.data()) EXPECT_EQ(v, 4.0);
  EXPECT_THROW(maxpool2x2_forward(Tensor({1, 1, 1, 4})), ShapeError);
}

TEST(MaxPool, FirstMaximumWinsTies) {
  const auto r = maxpool2x2_forward(Tensor({1, 1, 2, 2}, 1.0));
  EXPECT_EQ(r.argmax[0], 0u);
}

TEST(MaxPool, ChannelPermutationEquivariant) {
  Rng rng(4);
  const Tensor x = gradcheck::random_tensor({1, 3, 6, 6}, rng);
  Tensor p(x.shape());
  const std::size_t perm[3] = {2, 0, 1};
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t h = 0; h < 6; ++h) {
      for (std::size_t w = 0; w < 6; ++w) p.at(0, c, h, w) = x.at(0, perm[c], h, w);
    }
  }
  const Tensor a = maxpool2x2_forward(x).out;
  const Tensor b = maxpool2x2_forward(p).out;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t h = 0; h < 3; ++h) {
      for (std::size_t w = 0; w < 3; ++w) EXPECT_EQ(b.at(0, c, h, w), a.at(0, perm[c], h, w));
    }
  }
}

TEST(Pyramid, ConstantMap) {
  const Tensor x({2, 3, 9, 13}, 0.75);
  const auto s = spp_forward(x, default_spp_levels());
  EXPECT_EQ(s.out.shape(), (Shape{2, 63, 1, 1}));
  for (double v : s.out.data()) EXPECT_EQ(v, 0.75);
  const auto t = tpp_forward(x, default_tpp_levels());
  EXPECT_EQ(t.out.shape(), (Shape{2, 45, 1, 1}));
  for (double v : t.out.data()) EXPECT_EQ(v, 0.75);
}

TEST(Pyramid, LengthsAtFiveTwelveChannels) {
  EXPECT_EQ(tpp_output_length(512, default_tpp_levels()), 7680u);
  EXPECT_EQ(spp_output_length(512, default_spp_levels()), 10752u);
  EXPECT_EQ(tpp_output_length(512, default_tpp_levels()) * 7, spp_output_length(512, default_spp_levels()) * 5);
}

TEST(Pyramid, TppCellsOnSingleColumn) {
  Tensor x({1, 1, 2, 6}, 0.0);
  x.at(0, 0, 1, 5) = 9.0;
  const std::vector<int> levels{1, 3};
  const auto r = tpp_forward(x, levels);
  ASSERT_EQ(r.out.size(), 4u);
  EXPECT_EQ(r.out.data()[0], 9.0);  // level 1
  EXPECT_EQ(r.out.data()[1], 0.0);  // level 3, cell 0
  EXPECT_EQ(r.out.data()[2], 0.0);  // level 3, cell 1
  EXPECT_EQ(r.out.data()[3], 9.0);  // level 3, cell 2
}

TEST(Pyramid, FloorCellBoundaries) {
  EXPECT_EQ(cell_begin(0, 3, 7), 0u);
  EXPECT_EQ(cell_begin(1, 3, 7), 2u);
  EXPECT_EQ(cell_begin(2, 3, 7), 4u);
  EXPECT_EQ(cell_begin(3, 3, 7), 7u);
}

TEST(Pyramid, TooSmallInputThrows) {
  try {
    spp_forward(Tensor({1, 1, 3, 10}), default_spp_levels());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("input too small for pyramid", 0), 0u);
  }
  EXPECT_THROW(tpp_forward(Tensor({1, 1, 3, 4}), default_tpp_levels()), Error);
}

TEST(Pyramid, LengthIndependentOfInputSize) {
  Rng rng(5);
  std::uniform_int_distribution<std::size_t> d(5, 40);
  for (int i = 0; i < 30; ++i) {
    const Tensor x = gradcheck::random_tensor({1, 4, d(rng), d(rng)}, rng);
    EXPECT_EQ(spp_forward(x, default_spp_levels()).out.size(), 84u);
    EXPECT_EQ(tpp_forward(x, default_tpp_levels()).out.size(), 60u);
  }
}

TEST(FullyConnected, IdentityAndBias) {
  Tensor w({3, 3, 1, 1});
  for (std::size_t i = 0; i < 3; ++i) w.at(i, i, 0, 0) = 1.0;
  const Tensor x({1, 3, 1, 1}, {1.0, -2.0, 3.0});
  EXPECT_EQ(gradcheck::vec(fc_forward(x, w, std::vector<double>(3, 0.0))), gradcheck::vec(x));
  EXPECT_EQ(gradcheck::vec(fc_forward(Tensor({1, 3, 1, 1}), w, std::vector<double>{4, 5, 6})),
            (std::vector<double>{4, 5, 6}));
  EXPECT_THROW(fc_forward(Tensor({1, 4, 1, 1}), w, std::vector<double>(3, 0.0)), ShapeError);
}

TEST(Dropout, IdentityCases) {
  Rng rng(6);
  const Tensor x = gradcheck::random_tensor({2, 10, 1, 1}, rng);
  EXPECT_EQ(gradcheck::vec(dropout_forward(x, 0.5, Mode::kEval, rng)), gradcheck::vec(x));
  EXPECT_EQ(gradcheck::vec(dropout_forward(x, 0.0, Mode::kTrain, rng)), gradcheck::vec(x));
  EXPECT_THROW(dropout_forward(x, 1.0, Mode::kTrain, rng), Error);
  EXPECT_THROW(dropout_forward(x, -0.1, Mode::kTrain, rng), Error);
}

TEST(Dropout, ZeroFractionAndScaling) {
  Rng rng(7);
  const Tensor x({1, 1000000, 1, 1}, 1.0);
  std::vector<double> mask;
  const Tensor y = dropout_forward(x, 0.5, Mode::kTrain, rng, &mask);
  std::size_t zeros = 0;
  for (double v : y.data()) {
    if (v == 0.0) {
      ++zeros;
    } else {
      EXPECT_EQ(v, 2.0);
    }
  }
  EXPECT_NEAR(static_cast<double>(zeros) / 1e6, 0.5, 0.002);
  const Tensor g = dropout_backward(mask, Tensor(x.shape(), 1.0));
  EXPECT_EQ(gradcheck::vec(g), gradcheck::vec(y));
}

TEST(Sigmoid, Values) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  for (double x : {-30.0, -2.5, 0.3, 7.0, 40.0}) EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-15);
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
  EXPECT_TRUE(std::isfinite(sigmoid(1000.0)));
}

TEST(Softmax, Properties) {
  const auto u = softmax(std::vector<double>(4, 2.0));
  for (double v : u) EXPECT_DOUBLE_EQ(v, 0.25);
  const std::vector<double> o{0.3, -1.2, 2.5};
  const std::vector<double> shifted{100.3, 98.8, 102.5};
  const auto a = softmax(o);
  const auto b = softmax(shifted);
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(a[i], b[i], 1e-12);
    sum += a[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-15);
  for (double v : softmax(std::vector<double>{1000.0, -1000.0, 999.0})) EXPECT_TRUE(std::isfinite(v));
}

TEST(Normalize, DegenerateThrows) {
  try {
    normalize_forward(Tensor({1, 3, 1, 1}, 0.0));
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("degenerate output", 0), 0u);
  }
}
