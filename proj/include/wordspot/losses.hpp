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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wordspot/tensor.hpp"

// Losses over a batch of per-sample outputs. Every loss is summed over
// samples and returns its gradient with respect to the tensor it consumes.
//
// The von Mises-Fisher normalizer C_d(kappa) and concentration kappa do not
// depend on the network weights and so are absent from the cosine loss.

namespace wordspot::losses {

struct LossValue {
  double loss = 0.0;
  nn::Tensor grad;
};

// Binary cross entropy on pre-sigmoid outputs, fused with the sigmoid:
//   loss = -sum y log s(o) + (1 - y) log(1 - s(o)),   d loss / d o = s(o) - y.
LossValue bce_loss(const nn::Tensor& logits, const nn::Tensor& labels);

// o / ||o||_2; throws NumericError("degenerate output") for ||o|| <= 1e-12.
std::vector<double> normalize_output(std::span<const double> o);

// sum_i 1 - y_i^T o_i / (||y_i|| ||o_i||) on pre-normalization outputs. Labels
// are normalized internally; a zero-norm label raises "zero-norm label".
LossValue cosine_loss(const nn::Tensor& outputs, const nn::Tensor& labels);

// 1/2 sum ||y - y_hat||^2, gradient y_hat - y.
LossValue euclidean_loss(const nn::Tensor& predictions, const nn::Tensor& labels);

enum class LossKind { kBce, kCosine, kEuclidean };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

// Loss on the network's pre-link output.
LossValue compute_loss(LossKind kind, const nn::Tensor& logits, const nn::Tensor& labels);

}  // namespace wordspot::losses
