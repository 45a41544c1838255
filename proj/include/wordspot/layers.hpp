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
#include <span>
#include <vector>

#include "wordspot/rng.hpp"
#include "wordspot/tensor.hpp"

// Forward/backward kernels for the layer set used by the attribute networks.
// All kernels are pure: they read their inputs and return fresh tensors.

namespace wordspot::nn {

enum class Mode { kTrain, kEval };

// 3x3 convolution, stride 1, zero padding 1. weights: (C_out, C_in, 3, 3).
Tensor conv3x3_forward(const Tensor& x, const Tensor& weights, std::span<const double> bias);

struct ConvGrads {
  Tensor grad_x;
  Tensor grad_w;
  std::vector<double> grad_b;
};
ConvGrads conv3x3_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out);

Tensor relu_forward(const Tensor& x);
// Passes gradient where x > 0; the subgradient at 0 is 0.
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

// Max pooling result. argmax holds, for every output element, the linear
// index of the selected input element (first maximum on ties).
struct PoolResult {
  Tensor out;
  std::vector<std::size_t> argmax;
};

// 2x2 window, stride 2. A trailing odd row/column is dropped.
PoolResult maxpool2x2_forward(const Tensor& x);

// Spatial pyramid: level n pools an n x n grid. Output (N, C * sum n^2, 1, 1).
PoolResult spp_forward(const Tensor& x, std::span<const int> levels);
// Temporal pyramid: level n pools n full-height column bands.
// Output (N, C * sum n, 1, 1).
PoolResult tpp_forward(const Tensor& x, std::span<const int> levels);

// Cell i of n over an extent spans [floor(i*extent/n), floor((i+1)*extent/n)).
std::size_t cell_begin(std::size_t i, std::size_t n, std::size_t extent);

std::size_t spp_output_length(std::size_t channels, std::span<const int> levels);
std::size_t tpp_output_length(std::size_t channels, std::span<const int> levels);

// Routes each output gradient to its argmax input position (all pooling kinds).
Tensor pool_backward(const Shape& input_shape, std::span<const std::size_t> argmax,
                     const Tensor& grad_out);

// Affine layer on the per-sample flattened input. weights: (out, in, 1, 1).
Tensor fc_forward(const Tensor& x, const Tensor& weights, std::span<const double> bias);

struct FcGrads {
  Tensor grad_x;
  Tensor grad_w;
  std::vector<double> grad_b;
};
FcGrads fc_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out);

// Inverted dropout: in training each activation is zeroed with probability p
// and survivors are scaled by 1/(1-p); evaluation is the identity. When
// `mask` is given it receives the per-element multiplier.
Tensor dropout_forward(const Tensor& x, double p, Mode mode, Rng& rng,
                       std::vector<double>* mask = nullptr);
Tensor dropout_backward(std::span<const double> mask, const Tensor& grad_out);

double sigmoid(double x);
Tensor sigmoid_forward(const Tensor& x);
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);

// Max-subtracted softmax over the whole array.
std::vector<double> softmax(std::span<const double> o);
// Per-sample softmax over the flattened features.
Tensor softmax_forward(const Tensor& x);
Tensor softmax_backward(const Tensor& y, const Tensor& grad_out);

inline constexpr double kNormEpsilon = 1e-12;

// Per-sample L2 normalization. Throws NumericError("degenerate output") when
// a sample's norm is <= kNormEpsilon.
Tensor normalize_forward(const Tensor& x);
Tensor normalize_backward(const Tensor& x, const Tensor& grad_out);

}  // namespace wordspot::nn
