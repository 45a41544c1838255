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
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "wordspot/layers.hpp"
#include "wordspot/rng.hpp"
#include "wordspot/tensor.hpp"

namespace wordspot::nn {

enum class LayerKind {
  kConv3x3,
  kRelu,
  kMaxPool2x2,
  kSpp,
  kTpp,
  kFullyConnected,
  kDropout,
  kSigmoid,
  kSoftmax,
  kNormalize,
};

std::string to_string(LayerKind kind);
LayerKind parse_layer_kind(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t units = 0;    // conv filters or fully connected outputs
  std::vector<int> levels;  // pyramid levels
  double dropout = 0.5;

  static LayerSpec conv(std::size_t filters) { return {LayerKind::kConv3x3, filters, {}, 0.5}; }
  static LayerSpec relu() { return {LayerKind::kRelu, 0, {}, 0.5}; }
  static LayerSpec maxpool() { return {LayerKind::kMaxPool2x2, 0, {}, 0.5}; }
  static LayerSpec spp(std::vector<int> levels) { return {LayerKind::kSpp, 0, std::move(levels), 0.5}; }
  static LayerSpec tpp(std::vector<int> levels) { return {LayerKind::kTpp, 0, std::move(levels), 0.5}; }
  static LayerSpec fc(std::size_t units) { return {LayerKind::kFullyConnected, units, {}, 0.5}; }
  static LayerSpec dropout_layer(double p) { return {LayerKind::kDropout, 0, {}, p}; }
  static LayerSpec sigmoid() { return {LayerKind::kSigmoid, 0, {}, 0.5}; }
  static LayerSpec softmax() { return {LayerKind::kSoftmax, 0, {}, 0.5}; }
  static LayerSpec normalize() { return {LayerKind::kNormalize, 0, {}, 0.5}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class Pooling { kSpp, kTpp };
enum class OutputLink { kNone, kSigmoid, kNormalize, kSoftmax };

// Declarative layer stack: a convolutional part, exactly one pyramid pooling
// layer, and a fully connected part whose last layer has `output_dim()` units,
// optionally followed by a link layer (sigmoid / softmax / normalize).
struct NetworkSpec {
  std::string name = "custom";
  std::size_t input_channels = 1;
  std::vector<LayerSpec> layers;

  void validate() const;
  std::size_t output_dim() const;
  OutputLink link() const;
  // Length of the pyramid pooling output; independent of the input size.
  std::size_t pyramid_output_length() const;
  // Smallest input height / width the stack accepts.
  std::size_t min_input_height() const;
  std::size_t min_input_width() const;

  nlohmann::json to_json() const;
  static NetworkSpec from_json(const nlohmann::json& j);

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Reconstruction of the full architecture: 13 conv layers
// (64,64 | 128,128 | 256 x6, 512 x3) with 2x2 pooling after the 2nd and 4th,
// a pyramid layer, and FC 4096 - 4096 - d with dropout after the first two.
NetworkSpec phocnet_full(std::size_t output_dim, Pooling pooling, OutputLink link);
// Desk-scale variant with the same topology: convs 8,8 | 16,16 | 32 and
// FC 512 - 512 - d.
NetworkSpec phocnet_mini(std::size_t output_dim, Pooling pooling, OutputLink link);
NetworkSpec make_preset(const std::string& name, std::size_t output_dim, Pooling pooling,
                        OutputLink link);

std::vector<int> default_spp_levels();  // {1, 2, 4}
std::vector<int> default_tpp_levels();  // {1, 2, 3, 4, 5}

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool decay = true;  // weights decay, biases do not
  std::size_t fan_in = 0;
};

struct LayerCache {
  Shape input_shape;
  Tensor input;
  Tensor output;
  std::vector<std::size_t> argmax;
  std::vector<double> mask;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
};

class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;

  // Runs every layer except a terminal link layer and returns its output
  // (the pre-link "logits" the losses consume). Training mode needs an rng
  // for dropout. When `cache` is given, it receives what backward() needs.
  Tensor forward(const Tensor& images, Mode mode, Rng* dropout_rng = nullptr,
                 ForwardCache* cache = nullptr) const;
  Tensor apply_link(const Tensor& logits) const;
  // Evaluation-mode forward pass with the link applied.
  Tensor predict(const Tensor& images) const;

  // Accumulates parameter gradients for d(loss)/d(logits) into Parameter::grad
  // and returns the gradient with respect to the input images.
  Tensor backward(const ForwardCache& cache, const Tensor& grad_logits);
  void zero_grad();

 private:
  NetworkSpec spec_;
  std::vector<Parameter> params_;
  std::vector<int> param_index_;  // first parameter of each layer, -1 if none
  std::size_t body_layers_ = 0;   // layers before the link
};

// Binary checkpoint:
//   "WSPOTCKP" | u32 LE format version | u64 LE header length | JSON header |
//   little-endian float64 blocks (parameters in declaration order, then
//   state blocks).
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  friend bool operator==(const CheckpointBlock&, const CheckpointBlock&) = default;
};

struct Checkpoint {
  NetworkSpec network;
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<CheckpointBlock> parameters;
  std::vector<CheckpointBlock> state;
};

Checkpoint make_checkpoint(const Network& net, std::uint64_t seed, nlohmann::json metadata = {});
void load_parameters(Network& net, const Checkpoint& ckpt);

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
// Written to a temporary sibling and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wordspot::nn
