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

#include "wordspot/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wordspot/error.hpp"

namespace wordspot::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

void check_weights(const Tensor& x, const Tensor& weights, std::size_t bias_size) {
  const Shape& ws = weights.shape();
  if (ws.h != 3 || ws.w != 3) throw ShapeError("conv3x3 weights must be (C_out, C_in, 3, 3)");
  if (ws.c != x.shape().c) {
    throw ShapeError("conv3x3 channel mismatch: input has " + std::to_string(x.shape().c) +
                     " channels, weights expect " + std::to_string(ws.c));
  }
  if (bias_size != ws.n) throw ShapeError("conv3x3 bias length must equal C_out");
  if (x.shape().h < 1 || x.shape().w < 1) throw ShapeError("conv3x3 input is empty");
}

// cols is (C_in * 9) x (H * W), row-major.
void im2col(std::span<const double> img, std::size_t c, std::size_t h, std::size_t w,
            std::vector<double>& cols) {
  const std::size_t hw = h * w;
  cols.assign(c * 9 * hw, 0.0);
  for (std::size_t ci = 0; ci < c; ++ci) {
    const double* plane = img.data() + ci * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row = cols.data() + ((ci * 9) + ky * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          const double* src = plane + static_cast<std::size_t>(sy) * w;
          double* dst = row + y * w;
          const long x_lo = std::max(0L, 1L - kx);
          const long x_hi = std::min(static_cast<long>(w), static_cast<long>(w) + 1 - kx);
          for (long x = x_lo; x < x_hi; ++x) dst[x] = src[x + kx - 1];
        }
      }
    }
  }
}

void col2im(const std::vector<double>& cols, std::size_t c, std::size_t h, std::size_t w,
            std::span<double> img) {
  const std::size_t hw = h * w;
  for (std::size_t ci = 0; ci < c; ++ci) {
    double* plane = img.data() + ci * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row = cols.data() + ((ci * 9) + ky * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          double* dst = plane + static_cast<std::size_t>(sy) * w;
          const double* src = row + y * w;
          const long x_lo = std::max(0L, 1L - kx);
          const long x_hi = std::min(static_cast<long>(w), static_cast<long>(w) + 1 - kx);
          for (long x = x_lo; x < x_hi; ++x) dst[x + kx - 1] += src[x];
        }
      }
    }
  }
}

}  // namespace

Tensor conv3x3_forward(const Tensor& x, const Tensor& weights, std::span<const double> bias) {
  check_weights(x, weights, bias.size());
  const Shape& s = x.shape();
  const std::size_t c_out = weights.shape().n;
  const std::size_t hw = s.h * s.w;
  Tensor out({s.n, c_out, s.h, s.w});
  ConstMatMap wmat(weights.data().data(), static_cast<Eigen::Index>(c_out),
                   static_cast<Eigen::Index>(s.c * 9));
  Eigen::Map<const Eigen::VectorXd> b(bias.data(), static_cast<Eigen::Index>(c_out));
  std::vector<double> cols;
  for (std::size_t n = 0; n < s.n; ++n) {
    im2col(x.sample(n), s.c, s.h, s.w, cols);
    ConstMatMap cmat(cols.data(), static_cast<Eigen::Index>(s.c * 9),
                     static_cast<Eigen::Index>(hw));
    MatMap omat(out.sample(n).data(), static_cast<Eigen::Index>(c_out),
                static_cast<Eigen::Index>(hw));
    omat.noalias() = wmat * cmat;
    omat.colwise() += b;
  }
  return out;
}

ConvGrads conv3x3_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out) {
  const Shape& s = x.shape();
  const std::size_t c_out = weights.shape().n;
  check_weights(x, weights, c_out);
  if (grad_out.shape() != Shape{s.n, c_out, s.h, s.w}) {
    throw ShapeError("conv3x3 gradient shape mismatch");
  }
  const std::size_t hw = s.h * s.w;
  ConvGrads g{Tensor(s), Tensor(weights.shape()), std::vector<double>(c_out, 0.0)};
  ConstMatMap wmat(weights.data().data(), static_cast<Eigen::Index>(c_out),
                   static_cast<Eigen::Index>(s.c * 9));
  MatMap gw(g.grad_w.data().data(), static_cast<Eigen::Index>(c_out),
            static_cast<Eigen::Index>(s.c * 9));
  Eigen::Map<Eigen::VectorXd> gb(g.grad_b.data(), static_cast<Eigen::Index>(c_out));
  std::vector<double> cols;
  std::vector<double> gcols(s.c * 9 * hw);
  for (std::size_t n = 0; n < s.n; ++n) {
    im2col(x.sample(n), s.c, s.h, s.w, cols);
    ConstMatMap cmat(cols.data(), static_cast<Eigen::Index>(s.c * 9),
                     static_cast<Eigen::Index>(hw));
    ConstMatMap go(grad_out.sample(n).data(), static_cast<Eigen::Index>(c_out),
                   static_cast<Eigen::Index>(hw));
    gw.noalias() += go * cmat.transpose();
    gb += go.rowwise().sum();
    MatMap gc(gcols.data(), static_cast<Eigen::Index>(s.c * 9), static_cast<Eigen::Index>(hw));
    gc.noalias() = wmat.transpose() * go;
    col2im(gcols, s.c, s.h, s.w, g.grad_x.sample(n));
  }
  return g;
}

Tensor relu_forward(const Tensor& x) {
  Tensor y(x.shape());
  auto in = x.data();
  auto out = y.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (x.shape() != grad_out.shape()) throw ShapeError("relu gradient shape mismatch");
  Tensor g(x.shape());
  auto in = x.data();
  auto go = grad_out.data();
  auto out = g.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? go[i] : 0.0;
  return g;
}

std::size_t cell_begin(std::size_t i, std::size_t n, std::size_t extent) {
  return i * extent / n;
}

namespace {

// Max over rows [y0,y1) x cols [x0,x1) of one plane; first maximum wins.
std::pair<double, std::size_t> region_max(const double* plane, std::size_t w, std::size_t y0,
                                          std::size_t y1, std::size_t x0, std::size_t x1) {
  std::size_t best = y0 * w + x0;
  double best_v = plane[best];
  for (std::size_t y = y0; y < y1; ++y) {
    for (std::size_t x = x0; x < x1; ++x) {
      const double v = plane[y * w + x];
      if (v > best_v) {
        best_v = v;
        best = y * w + x;
      }
    }
  }
  return {best_v, best};
}

}  // namespace

PoolResult maxpool2x2_forward(const Tensor& x) {
  const Shape& s = x.shape();
  if (s.h < 2 || s.w < 2) throw ShapeError("maxpool2x2 needs H >= 2 and W >= 2, got " + s.to_string());
  const std::size_t oh = s.h / 2;
  const std::size_t ow = s.w / 2;
  PoolResult r{Tensor({s.n, s.c, oh, ow}), {}};
  r.argmax.resize(r.out.size());
  auto out = r.out.data();
  std::size_t o = 0;
  for (std::size_t p = 0; p < s.n * s.c; ++p) {
    const double* plane = x.data().data() + p * s.h * s.w;
    const std::size_t base = p * s.h * s.w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx, ++o) {
        auto [v, idx] = region_max(plane, s.w, 2 * y, 2 * y + 2, 2 * xx, 2 * xx + 2);
        out[o] = v;
        r.argmax[o] = base + idx;
      }
    }
  }
  return r;
}

std::size_t spp_output_length(std::size_t channels, std::span<const int> levels) {
  std::size_t cells = 0;
  for (int l : levels) cells += static_cast<std::size_t>(l) * static_cast<std::size_t>(l);
  return channels * cells;
}

std::size_t tpp_output_length(std::size_t channels, std::span<const int> levels) {
  std::size_t cells = 0;
  for (int l : levels) cells += static_cast<std::size_t>(l);
  return channels * cells;
}

namespace {

void check_levels(std::span<const int> levels) {
  if (levels.empty()) throw ShapeError("pyramid needs at least one level");
  for (int l : levels) {
    if (l < 1) throw ShapeError("pyramid levels must be >= 1");
  }
}

// Output layout per sample: level-major, then channel, then cell (row-major).
PoolResult pyramid_pool(const Tensor& x, std::span<const int> levels, bool temporal) {
  check_levels(levels);
  const Shape& s = x.shape();
  const int max_level = *std::max_element(levels.begin(), levels.end());
  const auto ml = static_cast<std::size_t>(max_level);
  if (s.w < ml || (!temporal && s.h < ml)) {
    throw ShapeError("input too small for pyramid: " + s.to_string() + " with largest level " +
                     std::to_string(max_level));
  }
  const std::size_t len = temporal ? tpp_output_length(s.c, levels) : spp_output_length(s.c, levels);
  PoolResult r{Tensor({s.n, len, 1, 1}), {}};
  r.argmax.resize(r.out.size());
  auto out = r.out.data();
  std::size_t o = 0;
  for (std::size_t n = 0; n < s.n; ++n) {
    for (int level : levels) {
      const auto l = static_cast<std::size_t>(level);
      const std::size_t rows = temporal ? 1 : l;
      for (std::size_t c = 0; c < s.c; ++c) {
        const std::size_t base = (n * s.c + c) * s.h * s.w;
        const double* plane = x.data().data() + base;
        for (std::size_t i = 0; i < rows; ++i) {
          const std::size_t y0 = temporal ? 0 : cell_begin(i, l, s.h);
          const std::size_t y1 = temporal ? s.h : cell_begin(i + 1, l, s.h);
          for (std::size_t j = 0; j < l; ++j, ++o) {
            auto [v, idx] =
                region_max(plane, s.w, y0, y1, cell_begin(j, l, s.w), cell_begin(j + 1, l, s.w));
            out[o] = v;
            r.argmax[o] = base + idx;
          }
        }
      }
    }
  }
  return r;
}

}  // namespace

PoolResult spp_forward(const Tensor& x, std::span<const int> levels) {
  return pyramid_pool(x, levels, false);
}

PoolResult tpp_forward(const Tensor& x, std::span<const int> levels) {
  return pyramid_pool(x, levels, true);
}

Tensor pool_backward(const Shape& input_shape, std::span<const std::size_t> argmax,
                     const Tensor& grad_out) {
  if (argmax.size() != grad_out.size()) throw ShapeError("pool gradient shape mismatch");
  Tensor g(input_shape);
  auto gi = g.data();
  auto go = grad_out.data();
  for (std::size_t i = 0; i < argmax.size(); ++i) gi[argmax[i]] += go[i];
  return g;
}

Tensor fc_forward(const Tensor& x, const Tensor& weights, std::span<const double> bias) {
  const std::size_t in = x.shape().per_sample();
  const std::size_t out_dim = weights.shape().n;
  if (weights.shape().per_sample() != in) {
    throw ShapeError("fully connected input length " + std::to_string(in) +
                     " does not match weight columns " +
                     std::to_string(weights.shape().per_sample()));
  }
  if (bias.size() != out_dim) throw ShapeError("fully connected bias length mismatch");
  const std::size_t n = x.shape().n;
  Tensor y({n, out_dim, 1, 1});
  ConstMatMap xm(x.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in));
  ConstMatMap wm(weights.data().data(), static_cast<Eigen::Index>(out_dim),
                 static_cast<Eigen::Index>(in));
  MatMap ym(y.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out_dim));
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data(), static_cast<Eigen::Index>(out_dim));
  return y;
}

FcGrads fc_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out) {
  const std::size_t in = x.shape().per_sample();
  const std::size_t out_dim = weights.shape().n;
  const std::size_t n = x.shape().n;
  if (weights.shape().per_sample() != in || grad_out.size() != n * out_dim) {
    throw ShapeError("fully connected gradient shape mismatch");
  }
  FcGrads g{Tensor(x.shape()), Tensor(weights.shape()), std::vector<double>(out_dim, 0.0)};
  ConstMatMap xm(x.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in));
  ConstMatMap wm(weights.data().data(), static_cast<Eigen::Index>(out_dim),
                 static_cast<Eigen::Index>(in));
  ConstMatMap gm(grad_out.data().data(), static_cast<Eigen::Index>(n),
                 static_cast<Eigen::Index>(out_dim));
  MatMap(g.grad_w.data().data(), static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in))
      .noalias() = gm.transpose() * xm;
  Eigen::Map<Eigen::RowVectorXd>(g.grad_b.data(), static_cast<Eigen::Index>(out_dim)) =
      gm.colwise().sum();
  MatMap(g.grad_x.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in))
      .noalias() = gm * wm;
  return g;
}

Tensor dropout_forward(const Tensor& x, double p, Mode mode, Rng& rng, std::vector<double>* mask) {
  if (!(p >= 0.0 && p < 1.0)) throw ArgumentError("dropout probability must be in [0, 1)");
  if (mode == Mode::kEval || p == 0.0) {
    if (mask) mask->assign(x.size(), 1.0);
    return x;
  }
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> m(x.size());
  std::bernoulli_distribution drop(p);
  for (auto& v : m) v = drop(rng) ? 0.0 : keep_scale;
  Tensor y(x.shape());
  auto in = x.data();
  auto out = y.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * m[i];
  if (mask) *mask = std::move(m);
  return y;
}

Tensor dropout_backward(std::span<const double> mask, const Tensor& grad_out) {
  if (mask.size() != grad_out.size()) throw ShapeError("dropout gradient shape mismatch");
  Tensor g(grad_out.shape());
  auto go = grad_out.data();
  auto out = g.data();
  for (std::size_t i = 0; i < go.size(); ++i) out[i] = go[i] * mask[i];
  return g;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid_forward(const Tensor& x) {
  Tensor y(x.shape());
  auto in = x.data();
  auto out = y.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = sigmoid(in[i]);
  return y;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
  if (y.shape() != grad_out.shape()) throw ShapeError("sigmoid gradient shape mismatch");
  Tensor g(y.shape());
  auto s = y.data();
  auto go = grad_out.data();
  auto out = g.data();
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = go[i] * s[i] * (1.0 - s[i]);
  return g;
}

std::vector<double> softmax(std::span<const double> o) {
  if (o.empty()) throw ArgumentError("softmax of empty array");
  const double mx = *std::max_element(o.begin(), o.end());
  std::vector<double> out(o.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    out[i] = std::exp(o[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

Tensor softmax_forward(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t n = 0; n < x.shape().n; ++n) {
    auto s = softmax(x.sample(n));
    std::copy(s.begin(), s.end(), y.sample(n).begin());
  }
  return y;
}

Tensor softmax_backward(const Tensor& y, const Tensor& grad_out) {
  if (y.shape() != grad_out.shape()) throw ShapeError("softmax gradient shape mismatch");
  Tensor g(y.shape());
  for (std::size_t n = 0; n < y.shape().n; ++n) {
    auto s = y.sample(n);
    auto go = grad_out.sample(n);
    auto out = g.sample(n);
    const double dot = std::inner_product(s.begin(), s.end(), go.begin(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] * (go[i] - dot);
  }
  return g;
}

namespace {

double sample_norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

Tensor normalize_forward(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t n = 0; n < x.shape().n; ++n) {
    auto in = x.sample(n);
    const double norm = sample_norm(in);
    if (!(norm > kNormEpsilon)) throw NumericError("degenerate output: norm " + std::to_string(norm));
    auto out = y.sample(n);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] / norm;
  }
  return y;
}

Tensor normalize_backward(const Tensor& x, const Tensor& grad_out) {
  if (x.shape() != grad_out.shape()) throw ShapeError("normalize gradient shape mismatch");
  Tensor g(x.shape());
  for (std::size_t n = 0; n < x.shape().n; ++n) {
    auto in = x.sample(n);
    auto go = grad_out.sample(n);
    auto out = g.sample(n);
    const double norm = sample_norm(in);
    if (!(norm > kNormEpsilon)) throw NumericError("degenerate output: norm " + std::to_string(norm));
    // d(x/|x|) = (I - y y^T) / |x|
    double dot = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) dot += in[i] * go[i];
    dot /= norm;
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = (go[i] - (in[i] / norm) * dot) / norm;
  }
  return g;
}

}  // namespace wordspot::nn
