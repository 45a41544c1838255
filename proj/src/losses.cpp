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

#include "wordspot/losses.hpp"

#include <cmath>
#include <numeric>

#include "wordspot/error.hpp"
#include "wordspot/layers.hpp"

namespace wordspot::losses {

namespace {

void check_same(const nn::Tensor& a, const nn::Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": output shape " + a.shape().to_string() +
                     " does not match label shape " + b.shape().to_string());
  }
}

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

LossValue bce_loss(const nn::Tensor& logits, const nn::Tensor& labels) {
  check_same(logits, labels, "bce_loss");
  LossValue r{0.0, nn::Tensor(logits.shape())};
  auto o = logits.data();
  auto y = labels.data();
  auto g = r.grad.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) throw ArgumentError("bce_loss labels must lie in [0, 1]");
    // -[y log s(o) + (1-y) log(1-s(o))] = max(o,0) - o y + log(1 + exp(-|o|))
    r.loss += std::max(o[i], 0.0) - o[i] * y[i] + std::log1p(std::exp(-std::abs(o[i])));
    g[i] = nn::sigmoid(o[i]) - y[i];
  }
  return r;
}

std::vector<double> normalize_output(std::span<const double> o) {
  const double n = norm(o);
  if (!(n > nn::kNormEpsilon)) throw NumericError("degenerate output");
  std::vector<double> out(o.begin(), o.end());
  for (auto& v : out) v /= n;
  return out;
}

LossValue cosine_loss(const nn::Tensor& outputs, const nn::Tensor& labels) {
  check_same(outputs, labels, "cosine_loss");
  LossValue r{0.0, nn::Tensor(outputs.shape())};
  for (std::size_t n = 0; n < outputs.shape().n; ++n) {
    auto o = outputs.sample(n);
    auto y = labels.sample(n);
    const double ny = norm(y);
    if (!(ny > 0.0)) throw NumericError("zero-norm label");
    const double no = norm(o);
    if (!(no > nn::kNormEpsilon)) throw NumericError("degenerate output");
    double cos = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) cos += y[i] * o[i];
    cos /= ny * no;
    r.loss += 1.0 - cos;
    // d/do [-(y/|y|)^T (o/|o|)] = -(y/|y| - cos * o/|o|) / |o|
    auto g = r.grad.sample(n);
    for (std::size_t i = 0; i < o.size(); ++i) {
      g[i] = -(y[i] / ny - cos * o[i] / no) / no;
    }
  }
  return r;
}

LossValue euclidean_loss(const nn::Tensor& predictions, const nn::Tensor& labels) {
  check_same(predictions, labels, "euclidean_loss");
  LossValue r{0.0, nn::Tensor(predictions.shape())};
  auto p = predictions.data();
  auto y = labels.data();
  auto g = r.grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - y[i];
    r.loss += 0.5 * d * d;
    g[i] = d;
  }
  return r;
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kBce: return "bce";
    case LossKind::kCosine: return "cosine";
    case LossKind::kEuclidean: return "euclidean";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "bce") return LossKind::kBce;
  if (name == "cosine") return LossKind::kCosine;
  if (name == "euclidean") return LossKind::kEuclidean;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

LossValue compute_loss(LossKind kind, const nn::Tensor& logits, const nn::Tensor& labels) {
  switch (kind) {
    case LossKind::kBce: return bce_loss(logits, labels);
    case LossKind::kCosine: return cosine_loss(logits, labels);
    case LossKind::kEuclidean: return euclidean_loss(logits, labels);
  }
  throw ConfigError("unknown loss");
}

}  // namespace wordspot::losses
