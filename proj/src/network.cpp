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

#include "wordspot/network.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "wordspot/error.hpp"
#include "wordspot/io.hpp"

namespace wordspot::nn {

namespace {

bool is_link(LayerKind k) {
  return k == LayerKind::kSigmoid || k == LayerKind::kSoftmax || k == LayerKind::kNormalize;
}

bool is_pyramid(LayerKind k) { return k == LayerKind::kSpp || k == LayerKind::kTpp; }

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv3x3: return "conv3x3";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2x2: return "maxpool2x2";
    case LayerKind::kSpp: return "spp";
    case LayerKind::kTpp: return "tpp";
    case LayerKind::kFullyConnected: return "fully_connected";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kSigmoid: return "sigmoid";
    case LayerKind::kSoftmax: return "softmax";
    case LayerKind::kNormalize: return "normalize";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& name) {
  for (auto k : {LayerKind::kConv3x3, LayerKind::kRelu, LayerKind::kMaxPool2x2, LayerKind::kSpp,
                 LayerKind::kTpp, LayerKind::kFullyConnected, LayerKind::kDropout,
                 LayerKind::kSigmoid, LayerKind::kSoftmax, LayerKind::kNormalize}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown layer kind '" + name + "'");
}

void NetworkSpec::validate() const {
  if (input_channels < 1) throw ConfigError("network needs at least one input channel");
  int pyramids = 0;
  bool seen_fc = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const bool after = pyramids > 0;
    switch (l.kind) {
      case LayerKind::kConv3x3:
      case LayerKind::kMaxPool2x2:
        if (after) throw ConfigError(to_string(l.kind) + " after the pyramid layer");
        if (l.kind == LayerKind::kConv3x3 && l.units < 1) throw ConfigError("conv3x3 needs filters");
        break;
      case LayerKind::kSpp:
      case LayerKind::kTpp:
        ++pyramids;
        if (l.levels.empty()) throw ConfigError("pyramid layer needs levels");
        for (int v : l.levels) {
          if (v < 1) throw ConfigError("pyramid levels must be >= 1");
        }
        break;
      case LayerKind::kFullyConnected:
        if (!after) throw ConfigError("fully_connected before the pyramid layer");
        if (l.units < 1) throw ConfigError("fully_connected needs units");
        seen_fc = true;
        break;
      case LayerKind::kDropout:
        if (!(l.dropout >= 0.0 && l.dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
        break;
      case LayerKind::kRelu:
        break;
      case LayerKind::kSigmoid:
      case LayerKind::kSoftmax:
      case LayerKind::kNormalize:
        if (i + 1 != layers.size()) throw ConfigError(to_string(l.kind) + " must be the last layer");
        break;
    }
  }
  if (pyramids != 1) throw ConfigError("network needs exactly one SPP or TPP layer");
  if (!seen_fc) throw ConfigError("network needs a fully connected output layer");
  std::size_t last = layers.size();
  if (is_link(layers.back().kind)) --last;
  if (layers[last - 1].kind != LayerKind::kFullyConnected) {
    throw ConfigError("the last layer before the link must be fully_connected");
  }
}

std::size_t NetworkSpec::output_dim() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->kind == LayerKind::kFullyConnected) return it->units;
  }
  return 0;
}

OutputLink NetworkSpec::link() const {
  if (layers.empty()) return OutputLink::kNone;
  switch (layers.back().kind) {
    case LayerKind::kSigmoid: return OutputLink::kSigmoid;
    case LayerKind::kNormalize: return OutputLink::kNormalize;
    case LayerKind::kSoftmax: return OutputLink::kSoftmax;
    default: return OutputLink::kNone;
  }
}

std::size_t NetworkSpec::pyramid_output_length() const {
  std::size_t channels = input_channels;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::kConv3x3) channels = l.units;
    if (l.kind == LayerKind::kSpp) return spp_output_length(channels, l.levels);
    if (l.kind == LayerKind::kTpp) return tpp_output_length(channels, l.levels);
  }
  throw ConfigError("network has no pyramid layer");
}

namespace {

std::size_t pools_before_pyramid(const NetworkSpec& spec) {
  std::size_t pools = 0;
  for (const auto& l : spec.layers) {
    if (is_pyramid(l.kind)) break;
    if (l.kind == LayerKind::kMaxPool2x2) ++pools;
  }
  return pools;
}

const LayerSpec& pyramid_layer(const NetworkSpec& spec) {
  for (const auto& l : spec.layers) {
    if (is_pyramid(l.kind)) return l;
  }
  throw ConfigError("network has no pyramid layer");
}

}  // namespace

std::size_t NetworkSpec::min_input_height() const {
  const std::size_t scale = std::size_t{1} << pools_before_pyramid(*this);
  const auto& p = pyramid_layer(*this);
  if (p.kind == LayerKind::kTpp) return std::max<std::size_t>(scale, 1);
  const int top = *std::max_element(p.levels.begin(), p.levels.end());
  return scale * static_cast<std::size_t>(top);
}

std::size_t NetworkSpec::min_input_width() const {
  const std::size_t scale = std::size_t{1} << pools_before_pyramid(*this);
  const auto& p = pyramid_layer(*this);
  const int top = *std::max_element(p.levels.begin(), p.levels.end());
  return scale * static_cast<std::size_t>(top);
}

nlohmann::json NetworkSpec::to_json() const {
  nlohmann::json layers_json = nlohmann::json::array();
  for (const auto& l : layers) {
    nlohmann::json j{{"kind", to_string(l.kind)}};
    switch (l.kind) {
      case LayerKind::kConv3x3:
      case LayerKind::kFullyConnected: j["units"] = l.units; break;
      case LayerKind::kSpp:
      case LayerKind::kTpp: j["levels"] = l.levels; break;
      case LayerKind::kDropout: j["p"] = l.dropout; break;
      default: break;
    }
    layers_json.push_back(std::move(j));
  }
  return {{"name", name}, {"input_channels", input_channels}, {"layers", layers_json}};
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
  try {
    NetworkSpec s;
    s.name = j.at("name").get<std::string>();
    s.input_channels = j.at("input_channels").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
      LayerSpec l;
      l.kind = parse_layer_kind(lj.at("kind").get<std::string>());
      if (lj.contains("units")) l.units = lj["units"].get<std::size_t>();
      if (lj.contains("levels")) l.levels = lj["levels"].get<std::vector<int>>();
      if (lj.contains("p")) l.dropout = lj["p"].get<double>();
      s.layers.push_back(std::move(l));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad network description: ") + e.what());
  }
}

std::vector<int> default_spp_levels() { return {1, 2, 4}; }
std::vector<int> default_tpp_levels() { return {1, 2, 3, 4, 5}; }

namespace {

NetworkSpec build_vgg_like(const std::string& name, const std::vector<std::size_t>& block1,
                           const std::vector<std::size_t>& block2,
                           const std::vector<std::size_t>& rest, std::size_t fc_units,
                           std::size_t output_dim, Pooling pooling, OutputLink link) {
  NetworkSpec s;
  s.name = name;
  auto add_convs = [&](const std::vector<std::size_t>& filters) {
    for (auto f : filters) {
      s.layers.push_back(LayerSpec::conv(f));
      s.layers.push_back(LayerSpec::relu());
    }
  };
  add_convs(block1);
  s.layers.push_back(LayerSpec::maxpool());
  add_convs(block2);
  s.layers.push_back(LayerSpec::maxpool());
  add_convs(rest);
  s.layers.push_back(pooling == Pooling::kTpp ? LayerSpec::tpp(default_tpp_levels())
                                              : LayerSpec::spp(default_spp_levels()));
  for (int i = 0; i < 2; ++i) {
    s.layers.push_back(LayerSpec::fc(fc_units));
    s.layers.push_back(LayerSpec::relu());
    s.layers.push_back(LayerSpec::dropout_layer(0.5));
  }
  s.layers.push_back(LayerSpec::fc(output_dim));
  switch (link) {
    case OutputLink::kSigmoid: s.layers.push_back(LayerSpec::sigmoid()); break;
    case OutputLink::kNormalize: s.layers.push_back(LayerSpec::normalize()); break;
    case OutputLink::kSoftmax: s.layers.push_back(LayerSpec::softmax()); break;
    case OutputLink::kNone: break;
  }
  s.validate();
  return s;
}

}  // namespace

NetworkSpec phocnet_full(std::size_t output_dim, Pooling pooling, OutputLink link) {
  return build_vgg_like("phocnet-full", {64, 64}, {128, 128},
                        {256, 256, 256, 256, 256, 256, 512, 512, 512}, 4096, output_dim, pooling,
                        link);
}

NetworkSpec phocnet_mini(std::size_t output_dim, Pooling pooling, OutputLink link) {
  return build_vgg_like("phocnet-mini", {8, 8}, {16, 16}, {32}, 512, output_dim, pooling, link);
}

NetworkSpec make_preset(const std::string& name, std::size_t output_dim, Pooling pooling,
                        OutputLink link) {
  if (name == "phocnet-full") return phocnet_full(output_dim, pooling, link);
  if (name == "phocnet-mini") return phocnet_mini(output_dim, pooling, link);
  throw ConfigError("unknown architecture preset '" + name + "'");
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t channels = spec_.input_channels;
  std::size_t features = 0;
  int conv_i = 0;
  int fc_i = 0;
  body_layers_ = spec_.layers.size() - (spec_.link() == OutputLink::kNone ? 0 : 1);
  for (const auto& l : spec_.layers) {
    param_index_.push_back(-1);
    if (l.kind == LayerKind::kConv3x3) {
      param_index_.back() = static_cast<int>(params_.size());
      const std::string base = "conv" + std::to_string(++conv_i);
      params_.push_back({base + ".weight", Tensor({l.units, channels, 3, 3}),
                         Tensor({l.units, channels, 3, 3}), true, channels * 9});
      params_.push_back({base + ".bias", Tensor({1, l.units, 1, 1}), Tensor({1, l.units, 1, 1}),
                         false, channels * 9});
      channels = l.units;
    } else if (is_pyramid(l.kind)) {
      features = l.kind == LayerKind::kSpp ? spp_output_length(channels, l.levels)
                                           : tpp_output_length(channels, l.levels);
    } else if (l.kind == LayerKind::kFullyConnected) {
      param_index_.back() = static_cast<int>(params_.size());
      const std::string base = "fc" + std::to_string(++fc_i);
      params_.push_back({base + ".weight", Tensor({l.units, features, 1, 1}),
                         Tensor({l.units, features, 1, 1}), true, features});
      params_.push_back({base + ".bias", Tensor({1, l.units, 1, 1}), Tensor({1, l.units, 1, 1}),
                         false, features});
      features = l.units;
    }
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

Tensor Network::forward(const Tensor& images, Mode mode, Rng* dropout_rng,
                        ForwardCache* cache) const {
  if (images.shape().c != spec_.input_channels) {
    throw ShapeError("network expects " + std::to_string(spec_.input_channels) +
                     " input channels, got " + images.shape().to_string());
  }
  if (cache) cache->layers.assign(body_layers_, LayerCache{});
  Tensor x = images;
  for (std::size_t i = 0; i < body_layers_; ++i) {
    const auto& l = spec_.layers[i];
    LayerCache* lc = cache ? &cache->layers[i] : nullptr;
    const int p = param_index_[i];
    switch (l.kind) {
      case LayerKind::kConv3x3: {
        Tensor y = conv3x3_forward(x, params_[p].value, params_[p + 1].value.data());
        if (lc) lc->input = std::move(x);
        x = std::move(y);
        break;
      }
      case LayerKind::kRelu:
        x = relu_forward(x);
        if (lc) lc->output = x;
        break;
      case LayerKind::kMaxPool2x2:
      case LayerKind::kSpp:
      case LayerKind::kTpp: {
        PoolResult r = l.kind == LayerKind::kMaxPool2x2 ? maxpool2x2_forward(x)
                       : l.kind == LayerKind::kSpp      ? spp_forward(x, l.levels)
                                                        : tpp_forward(x, l.levels);
        if (lc) {
          lc->input_shape = x.shape();
          lc->argmax = std::move(r.argmax);
        }
        x = std::move(r.out);
        break;
      }
      case LayerKind::kFullyConnected: {
        Tensor y = fc_forward(x, params_[p].value, params_[p + 1].value.data());
        if (lc) lc->input = std::move(x);
        x = std::move(y);
        break;
      }
      case LayerKind::kDropout: {
        if (mode == Mode::kTrain && l.dropout > 0.0 && !dropout_rng) {
          throw ArgumentError("training-mode forward pass needs a dropout rng");
        }
        Rng unused;
        x = dropout_forward(x, l.dropout, mode, dropout_rng ? *dropout_rng : unused,
                            lc ? &lc->mask : nullptr);
        break;
      }
      case LayerKind::kSigmoid:
      case LayerKind::kSoftmax:
      case LayerKind::kNormalize:
        break;  // validated to be terminal
    }
  }
  return x;
}

Tensor Network::apply_link(const Tensor& logits) const {
  switch (spec_.link()) {
    case OutputLink::kSigmoid: return sigmoid_forward(logits);
    case OutputLink::kNormalize: return normalize_forward(logits);
    case OutputLink::kSoftmax: return softmax_forward(logits);
    case OutputLink::kNone: return logits;
  }
  return logits;
}

Tensor Network::predict(const Tensor& images) const {
  return apply_link(forward(images, Mode::kEval));
}

Tensor Network::backward(const ForwardCache& cache, const Tensor& grad_logits) {
  if (cache.layers.size() != body_layers_) throw ArgumentError("forward cache does not match network");
  Tensor g = grad_logits;
  for (std::size_t i = body_layers_; i-- > 0;) {
    const auto& l = spec_.layers[i];
    const LayerCache& lc = cache.layers[i];
    const int p = param_index_[i];
    switch (l.kind) {
      case LayerKind::kConv3x3: {
        ConvGrads cg = conv3x3_backward(lc.input, params_[p].value, g);
        auto gw = params_[p].grad.data();
        auto gb = params_[p + 1].grad.data();
        for (std::size_t k = 0; k < gw.size(); ++k) gw[k] += cg.grad_w.data()[k];
        for (std::size_t k = 0; k < gb.size(); ++k) gb[k] += cg.grad_b[k];
        g = std::move(cg.grad_x);
        break;
      }
      case LayerKind::kRelu:
        g = relu_backward(lc.output, g);
        break;
      case LayerKind::kMaxPool2x2:
      case LayerKind::kSpp:
      case LayerKind::kTpp:
        g = pool_backward(lc.input_shape, lc.argmax, g);
        break;
      case LayerKind::kFullyConnected: {
        FcGrads fg = fc_backward(lc.input, params_[p].value, g);
        auto gw = params_[p].grad.data();
        auto gb = params_[p + 1].grad.data();
        for (std::size_t k = 0; k < gw.size(); ++k) gw[k] += fg.grad_w.data()[k];
        for (std::size_t k = 0; k < gb.size(); ++k) gb[k] += fg.grad_b[k];
        g = std::move(fg.grad_x);
        break;
      }
      case LayerKind::kDropout:
        g = dropout_backward(lc.mask, g);
        break;
      case LayerKind::kSigmoid:
      case LayerKind::kSoftmax:
      case LayerKind::kNormalize:
        break;
    }
  }
  return g;
}

void Network::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.data().begin(), p.grad.data().end(), 0.0);
}

Checkpoint make_checkpoint(const Network& net, std::uint64_t seed, nlohmann::json metadata) {
  Checkpoint c;
  c.network = net.spec();
  c.seed = seed;
  c.metadata = metadata.is_null() ? nlohmann::json::object() : std::move(metadata);
  for (const auto& p : net.parameters()) {
    const Shape& s = p.value.shape();
    c.parameters.push_back({p.name, {s.n, s.c, s.h, s.w},
                            std::vector<double>(p.value.data().begin(), p.value.data().end())});
  }
  return c;
}

void load_parameters(Network& net, const Checkpoint& ckpt) {
  auto& params = net.parameters();
  if (ckpt.parameters.size() != params.size()) {
    throw DataError("checkpoint has " + std::to_string(ckpt.parameters.size()) +
                    " parameters, network has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& b = ckpt.parameters[i];
    if (b.name != params[i].name || b.values.size() != params[i].value.size()) {
      throw DataError("checkpoint parameter '" + b.name + "' does not match '" + params[i].name + "'");
    }
    std::copy(b.values.begin(), b.values.end(), params[i].value.data().begin());
  }
}

namespace {

constexpr char kMagic[8] = {'W', 'S', 'P', 'O', 'T', 'C', 'K', 'P'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw DataError(std::string("truncated checkpoint while reading ") + what);
  }
}

nlohmann::json describe_blocks(const std::vector<CheckpointBlock>& blocks) {
  auto arr = nlohmann::json::array();
  for (const auto& b : blocks) {
    arr.push_back({{"name", b.name}, {"shape", b.shape}, {"count", b.values.size()}});
  }
  return arr;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  nlohmann::json header{{"format_version", kCheckpointVersion},
                        {"network", ckpt.network.to_json()},
                        {"seed", ckpt.seed},
                        {"metadata", ckpt.metadata},
                        {"parameters", describe_blocks(ckpt.parameters)},
                        {"state", describe_blocks(ckpt.state)}};
  const std::string header_text = header.dump();
  std::string bytes(kMagic, sizeof(kMagic));
  put_u32(bytes, kCheckpointVersion);
  put_u64(bytes, header_text.size());
  bytes += header_text;
  for (const auto* blocks : {&ckpt.parameters, &ckpt.state}) {
    for (const auto& b : *blocks) {
      for (double v : b.values) put_u64(bytes, std::bit_cast<std::uint64_t>(v));
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  read_exact(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw DataError("not a checkpoint file");
  unsigned char buf[8];
  read_exact(in, buf, 4, "version");
  const std::uint32_t version = buf[0] | (buf[1] << 8) | (buf[2] << 16) |
                                (static_cast<std::uint32_t>(buf[3]) << 24);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  read_exact(in, buf, 8, "header length");
  const std::uint64_t header_len = get_u64(buf);
  std::string header_text(header_len, '\0');
  read_exact(in, header_text.data(), header_len, "header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint header: ") + e.what());
  }
  Checkpoint c;
  c.network = NetworkSpec::from_json(header.at("network"));
  c.seed = header.at("seed").get<std::uint64_t>();
  c.metadata = header.at("metadata");
  auto read_blocks = [&](const nlohmann::json& desc, std::vector<CheckpointBlock>& blocks) {
    for (const auto& d : desc) {
      CheckpointBlock b;
      b.name = d.at("name").get<std::string>();
      b.shape = d.at("shape").get<std::vector<std::size_t>>();
      b.values.resize(d.at("count").get<std::size_t>());
      for (auto& v : b.values) {
        read_exact(in, buf, 8, "parameter data");
        v = std::bit_cast<double>(get_u64(buf));
      }
      blocks.push_back(std::move(b));
    }
  };
  read_blocks(header.at("parameters"), c.parameters);
  read_blocks(header.at("state"), c.state);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ostringstream ss(std::ios::binary);
  write_checkpoint(ss, ckpt);
  write_file_atomic(path, ss.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::istringstream ss(read_file(path), std::ios::binary);
  return read_checkpoint(ss);
}

}  // namespace wordspot::nn
