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


// Randomized central-difference checks for every layer and loss. Each
// function draws one random instance and returns the worst relative error
// over all analytic gradients it exercises.

#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "wordspot/layers.hpp"
#include "wordspot/losses.hpp"
#include "wordspot/rng.hpp"

namespace gradcheck {

using wordspot::Rng;
using wordspot::nn::Shape;
using wordspot::nn::Tensor;

inline Tensor random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(s);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

// Distinct values spaced far apart relative to the step, so that no
// perturbation can change a max-pooling decision.
inline Tensor distinct_tensor(Shape s, Rng& rng) {
  std::vector<double> v(s.size());
  std::iota(v.begin(), v.end(), 0.0);
  std::shuffle(v.begin(), v.end(), rng);
  for (auto& x : v) x = 0.01 * x - 0.005 * static_cast<double>(v.size());
  return Tensor(s, std::move(v));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<double> vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

// f(x) = <g, layer(x)>; compares d f / d x against the analytic input gradient.
template <class Forward>
double check_input(const Tensor& x, const Tensor& g, const Tensor& analytic, Forward forward,
                   double h = 1e-6) {
  auto f = [&](const std::vector<double>& xs) {
    return dot(g.data(), forward(Tensor(x.shape(), xs)).data());
  };
  return oracle::max_relative_error(oracle::numeric_gradient(f, vec(x), h), vec(analytic));
}

inline double conv(Rng& rng) {
  std::uniform_int_distribution<int> d(1, 4);
  const Shape xs{static_cast<std::size_t>(d(rng)), static_cast<std::size_t>(d(rng)),
                 static_cast<std::size_t>(d(rng) + 1), static_cast<std::size_t>(d(rng) + 2)};
  const std::size_t cout = static_cast<std::size_t>(d(rng));
  const Tensor x = random_tensor(xs, rng);
  const Tensor w = random_tensor({cout, xs.c, 3, 3}, rng);
  const std::vector<double> b = vec(random_tensor({1, cout, 1, 1}, rng));
  const Tensor y = wordspot::nn::conv3x3_forward(x, w, b);
  const Tensor g = random_tensor(y.shape(), rng);
  const auto grads = wordspot::nn::conv3x3_backward(x, w, g);
  double err = check_input(x, g, grads.grad_x,
                           [&](const Tensor& t) { return wordspot::nn::conv3x3_forward(t, w, b); });
  err = std::max(err, check_input(w, g, grads.grad_w, [&](const Tensor& t) {
                   return wordspot::nn::conv3x3_forward(x, t, b);
                 }));
  auto fb = [&](const std::vector<double>& bs) {
    return dot(g.data(), wordspot::nn::conv3x3_forward(x, w, bs).data());
  };
  return std::max(err, oracle::max_relative_error(oracle::numeric_gradient(fb, b), grads.grad_b));
}

inline double fc(Rng& rng) {
  std::uniform_int_distribution<int> d(1, 6);
  const Shape xs{static_cast<std::size_t>(d(rng)), static_cast<std::size_t>(d(rng)),
                 static_cast<std::size_t>(d(rng)), 1};
  const std::size_t out = static_cast<std::size_t>(d(rng));
  const Tensor x = random_tensor(xs, rng);
  const Tensor w = random_tensor({out, xs.per_sample(), 1, 1}, rng);
  const std::vector<double> b = vec(random_tensor({1, out, 1, 1}, rng));
  const Tensor y = wordspot::nn::fc_forward(x, w, b);
  const Tensor g = random_tensor(y.shape(), rng);
  const auto grads = wordspot::nn::fc_backward(x, w, g);
  double err = check_input(x, g, grads.grad_x,
                           [&](const Tensor& t) { return wordspot::nn::fc_forward(t, w, b); });
  err = std::max(err, check_input(w, g, grads.grad_w,
                                  [&](const Tensor& t) { return wordspot::nn::fc_forward(x, t, b); }));
  auto fb = [&](const std::vector<double>& bs) {
    return dot(g.data(), wordspot::nn::fc_forward(x, w, bs).data());
  };
  return std::max(err, oracle::max_relative_error(oracle::numeric_gradient(fb, b), grads.grad_b));
}

inline double relu(Rng& rng) {
  Tensor x = random_tensor({2, 3, 4, 5}, rng);
  // Keep inputs away from the kink.
  for (auto& v : x.data()) v = v < 0.0 ? v - 0.05 : v + 0.05;
  const Tensor g = random_tensor(x.shape(), rng);
  return check_input(x, g, wordspot::nn::relu_backward(x, g), wordspot::nn::relu_forward);
}

inline double maxpool(Rng& rng) {
  std::uniform_int_distribution<int> d(2, 7);
  const Tensor x = distinct_tensor({2, 2, static_cast<std::size_t>(d(rng)), static_cast<std::size_t>(d(rng))}, rng);
  const auto r = wordspot::nn::maxpool2x2_forward(x);
  const Tensor g = random_tensor(r.out.shape(), rng);
  return check_input(x, g, wordspot::nn::pool_backward(x.shape(), r.argmax, g),
                     [](const Tensor& t) { return wordspot::nn::maxpool2x2_forward(t).out; });
}

inline double spp(Rng& rng) {
  std::uniform_int_distribution<int> d(4, 9);
  const std::vector<int> levels{1, 2, 4};
  const Tensor x = distinct_tensor({1, 2, static_cast<std::size_t>(d(rng)), static_cast<std::size_t>(d(rng))}, rng);
  const auto r = wordspot::nn::spp_forward(x, levels);
  const Tensor g = random_tensor(r.out.shape(), rng);
  return check_input(x, g, wordspot::nn::pool_backward(x.shape(), r.argmax, g),
                     [&](const Tensor& t) { return wordspot::nn::spp_forward(t, levels).out; });
}

inline double tpp(Rng& rng) {
  std::uniform_int_distribution<int> d(5, 11);
  const std::vector<int> levels{1, 2, 3, 4, 5};
  const Tensor x = distinct_tensor({1, 2, static_cast<std::size_t>(d(rng) - 3), static_cast<std::size_t>(d(rng))}, rng);
  const auto r = wordspot::nn::tpp_forward(x, levels);
  const Tensor g = random_tensor(r.out.shape(), rng);
  return check_input(x, g, wordspot::nn::pool_backward(x.shape(), r.argmax, g),
                     [&](const Tensor& t) { return wordspot::nn::tpp_forward(t, levels).out; });
}

inline double sigmoid(Rng& rng) {
  const Tensor x = random_tensor({2, 7, 1, 1}, rng, -4.0, 4.0);
  const Tensor g = random_tensor(x.shape(), rng);
  const Tensor y = wordspot::nn::sigmoid_forward(x);
  return check_input(x, g, wordspot::nn::sigmoid_backward(y, g), wordspot::nn::sigmoid_forward);
}

inline double normalize(Rng& rng) {
  const Tensor x = random_tensor({2, 9, 1, 1}, rng);
  const Tensor g = random_tensor(x.shape(), rng);
  return check_input(x, g, wordspot::nn::normalize_backward(x, g), wordspot::nn::normalize_forward);
}

inline double softmax(Rng& rng) {
  const Tensor x = random_tensor({2, 6, 1, 1}, rng, -3.0, 3.0);
  const Tensor g = random_tensor(x.shape(), rng);
  const Tensor y = wordspot::nn::softmax_forward(x);
  return check_input(x, g, wordspot::nn::softmax_backward(y, g), wordspot::nn::softmax_forward);
}

// Loss gradient against differences of the loss value itself.
inline double loss(wordspot::losses::LossKind kind, Rng& rng) {
  const Shape s{3, 17, 1, 1};
  const Tensor o = random_tensor(s, rng, -3.0, 3.0);
  Tensor y = random_tensor(s, rng, 0.0, 1.0);
  if (kind == wordspot::losses::LossKind::kBce) {
    for (auto& v : y.data()) v = v < 0.5 ? 0.0 : 1.0;
  }
  const auto lv = wordspot::losses::compute_loss(kind, o, y);
  auto f = [&](const std::vector<double>& os) {
    return wordspot::losses::compute_loss(kind, Tensor(s, os), y).loss;
  };
  return oracle::max_relative_error(oracle::numeric_gradient5(f, vec(o)), vec(lv.grad));
}

}  // namespace gradcheck
