// Copyright 2026 The SAFD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "safd/layers.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace safd {
namespace {

int OutDim(int in, const ConvGeometry& g) {
  return (in + 2 * g.pad - g.kernel) / g.stride + 1;
}

// Output columns [lo, hi) whose input column ox * stride + kx - pad is valid.
std::pair<int, int> ValidColumns(int out_w, int in_w, int kx,
                                 const ConvGeometry& g) {
  const int shift = kx - g.pad;
  int lo = 0;
  if (shift < 0) lo = (-shift + g.stride - 1) / g.stride;
  int hi = out_w;
  // Need ox * stride + shift <= in_w - 1.
  const int last = in_w - 1 - shift;
  if (last < 0) return {0, 0};
  hi = std::min(hi, last / g.stride + 1);
  return {lo, std::max(lo, hi)};
}

void CheckConvInput(const std::vector<int>& shape, const ConvGeometry& g) {
  if (shape.size() != 3 || shape[0] != g.in_channels) {
    throw Error(ErrorKind::kShape, "conv expects " +
                                       std::to_string(g.in_channels) +
                                       " input channels, got " +
                                       ShapeString(shape));
  }
  if (shape[1] + 2 * g.pad < g.kernel || shape[2] + 2 * g.pad < g.kernel) {
    throw Error(ErrorKind::kShape, "kernel does not fit padded input " +
                                       ShapeString(shape));
  }
}

}  // namespace

template <typename T>
Tensor<T> Conv2dForward(const Tensor<T>& input, std::span<const T> weights,
                        std::span<const T> bias, const ConvGeometry& g) {
  CheckConvInput(input.shape(), g);
  const std::size_t kk = static_cast<std::size_t>(g.kernel) * g.kernel;
  if (weights.size() != kk * g.in_channels * g.out_channels ||
      bias.size() != static_cast<std::size_t>(g.out_channels)) {
    throw Error(ErrorKind::kShape, "conv parameter size mismatch");
  }
  const int in_h = input.height();
  const int in_w = input.width();
  const int out_h = OutDim(in_h, g);
  const int out_w = OutDim(in_w, g);
  Tensor<T> out({g.out_channels, out_h, out_w});

  std::vector<std::pair<int, int>> cols(g.kernel);
  for (int kx = 0; kx < g.kernel; ++kx) cols[kx] = ValidColumns(out_w, in_w, kx, g);

  for (int oc = 0; oc < g.out_channels; ++oc) {
    T* out_plane = out.plane(oc);
    const T* w_oc = weights.data() + kk * g.in_channels * oc;
    for (int oy = 0; oy < out_h; ++oy) {
      T* row = out_plane + static_cast<std::size_t>(oy) * out_w;
      std::fill(row, row + out_w, bias[oc]);
      for (int ic = 0; ic < g.in_channels; ++ic) {
        const T* in_plane = input.plane(ic);
        const T* w = w_oc + kk * ic;
        for (int ky = 0; ky < g.kernel; ++ky) {
          const int iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= in_h) continue;
          const T* in_row = in_plane + static_cast<std::size_t>(iy) * in_w;
          for (int kx = 0; kx < g.kernel; ++kx) {
            const T wv = w[ky * g.kernel + kx];
            const auto [lo, hi] = cols[kx];
            const int shift = kx - g.pad;
            if (g.stride == 1) {
              const T* src = in_row + shift;
              for (int ox = lo; ox < hi; ++ox) row[ox] += wv * src[ox];
            } else {
              for (int ox = lo; ox < hi; ++ox) {
                row[ox] += wv * in_row[ox * g.stride + shift];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> Conv2dBackward(const Tensor<T>& input, const Tensor<T>& grad_out,
                         std::span<const T> weights, const ConvGeometry& g,
                         std::span<T> weight_grad, std::span<T> bias_grad) {
  const std::size_t kk = static_cast<std::size_t>(g.kernel) * g.kernel;
  const int in_h = input.height();
  const int in_w = input.width();
  const int out_h = grad_out.height();
  const int out_w = grad_out.width();
  if (grad_out.channels() != g.out_channels || out_h != OutDim(in_h, g) ||
      out_w != OutDim(in_w, g)) {
    throw Error(ErrorKind::kShape, "conv gradient shape mismatch");
  }
  Tensor<T> grad_in(input.shape());

  std::vector<std::pair<int, int>> cols(g.kernel);
  for (int kx = 0; kx < g.kernel; ++kx) cols[kx] = ValidColumns(out_w, in_w, kx, g);

  // Rows of grad_out that are entirely zero are skipped; after a global max
  // pool the upstream gradient is very sparse.
  std::vector<char> live(static_cast<std::size_t>(g.out_channels) * out_h, 0);
  for (int oc = 0; oc < g.out_channels; ++oc) {
    const T* gp = grad_out.plane(oc);
    T bsum = T(0);
    for (int oy = 0; oy < out_h; ++oy) {
      const T* row = gp + static_cast<std::size_t>(oy) * out_w;
      bool any = false;
      for (int ox = 0; ox < out_w; ++ox) {
        any |= row[ox] != T(0);
        bsum += row[ox];
      }
      live[static_cast<std::size_t>(oc) * out_h + oy] = any;
    }
    bias_grad[oc] += bsum;
  }

  for (int oc = 0; oc < g.out_channels; ++oc) {
    const T* gp = grad_out.plane(oc);
    const char* live_rows = live.data() + static_cast<std::size_t>(oc) * out_h;
    for (int ic = 0; ic < g.in_channels; ++ic) {
      const T* in_plane = input.plane(ic);
      T* gin_plane = grad_in.plane(ic);
      const std::size_t woff = (static_cast<std::size_t>(oc) * g.in_channels + ic) * kk;
      const T* w = weights.data() + woff;
      T* dw = weight_grad.data() + woff;
      for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
          const T wv = w[ky * g.kernel + kx];
          const auto [lo, hi] = cols[kx];
          const int shift = kx - g.pad;
          T acc = T(0);
          for (int oy = 0; oy < out_h; ++oy) {
            if (!live_rows[oy]) continue;
            const int iy = oy * g.stride + ky - g.pad;
            if (iy < 0 || iy >= in_h) continue;
            const T* grow = gp + static_cast<std::size_t>(oy) * out_w;
            const T* in_row = in_plane + static_cast<std::size_t>(iy) * in_w;
            T* gin_row = gin_plane + static_cast<std::size_t>(iy) * in_w;
            if (g.stride == 1) {
              const T* src = in_row + shift;
              T* dst = gin_row + shift;
#pragma omp simd reduction(+ : acc)
              for (int ox = lo; ox < hi; ++ox) {
                acc += grow[ox] * src[ox];
                dst[ox] += wv * grow[ox];
              }
            } else {
              for (int ox = lo; ox < hi; ++ox) {
                const int ix = ox * g.stride + shift;
                acc += grow[ox] * in_row[ix];
                gin_row[ix] += wv * grow[ox];
              }
            }
          }
          dw[ky * g.kernel + kx] += acc;
        }
      }
    }
  }
  return grad_in;
}

template <typename T>
std::pair<Tensor<T>, std::vector<PlanePosition>> GlobalMaxPoolForward(
    const Tensor<T>& input) {
  if (input.rank() != 3 || input.height() < 1 || input.width() < 1) {
    throw Error(ErrorKind::kShape, "global max pool expects c x h x w, got " +
                                       ShapeString(input.shape()));
  }
  const int c = input.channels();
  const std::size_t hw = static_cast<std::size_t>(input.height()) * input.width();
  Tensor<T> out({c});
  std::vector<PlanePosition> argmax(c);
  for (int ch = 0; ch < c; ++ch) {
    const T* p = input.plane(ch);
    std::size_t best = 0;
    for (std::size_t i = 1; i < hw; ++i) {
      if (p[i] > p[best]) best = i;
    }
    out[ch] = p[best];
    argmax[ch] = {static_cast<int>(best / input.width()),
                  static_cast<int>(best % input.width())};
  }
  return {std::move(out), std::move(argmax)};
}

template <typename T>
Tensor<T> GlobalMaxPoolBackward(const Tensor<T>& grad_out,
                                std::span<const PlanePosition> argmax,
                                const std::vector<int>& input_shape) {
  if (input_shape.size() != 3 || argmax.size() != static_cast<std::size_t>(input_shape[0]) ||
      grad_out.size() != argmax.size()) {
    throw Error(ErrorKind::kState,
                "global max pool backward without a matching forward pass");
  }
  Tensor<T> grad_in(input_shape);
  for (int ch = 0; ch < input_shape[0]; ++ch) {
    grad_in.at(ch, argmax[ch].y, argmax[ch].x) = grad_out[ch];
  }
  return grad_in;
}

template <typename T>
Layer<T> Layer<T>::Conv(const ConvGeometry& geom) {
  if (geom.in_channels < 1 || geom.out_channels < 1 || geom.kernel < 1 ||
      geom.stride < 1 || geom.pad < 0) {
    throw Error(ErrorKind::kConfig, "invalid convolution geometry");
  }
  Layer layer(LayerKind::kConv);
  layer.geom_ = geom;
  const std::size_t n = static_cast<std::size_t>(geom.out_channels) *
                        geom.in_channels * geom.kernel * geom.kernel;
  layer.weights_.assign(n, T(0));
  layer.weight_grad_.assign(n, T(0));
  layer.bias_.assign(geom.out_channels, T(0));
  layer.bias_grad_.assign(geom.out_channels, T(0));
  return layer;
}

template <typename T>
std::vector<int> Layer<T>::OutputShape(const std::vector<int>& s) const {
  switch (kind_) {
    case LayerKind::kConv:
      CheckConvInput(s, geom_);
      return {geom_.out_channels, OutDim(s[1], geom_), OutDim(s[2], geom_)};
    case LayerKind::kMaxPool2:
      if (s.size() != 3 || s[1] < 2 || s[2] < 2) {
        throw Error(ErrorKind::kShape, "maxpool2 needs at least 2x2 input, got " +
                                           ShapeString(s));
      }
      return {s[0], s[1] / 2, s[2] / 2};
    case LayerKind::kGlobalMaxPool:
      if (s.size() != 3 || s[1] < 1 || s[2] < 1) {
        throw Error(ErrorKind::kShape, "global max pool expects c x h x w");
      }
      return {s[0]};
    case LayerKind::kRelu:
    case LayerKind::kSigmoid:
      return s;
  }
  return s;
}

template <typename T>
Tensor<T> Layer<T>::Apply(const Tensor<T>& x) const {
  switch (kind_) {
    case LayerKind::kConv:
      return Conv2dForward<T>(x, weights_, bias_, geom_);
    case LayerKind::kRelu: {
      Tensor<T> y = x;
      for (T& v : y.values()) v = v > T(0) ? v : T(0);
      return y;
    }
    case LayerKind::kSigmoid: {
      Tensor<T> y = x;
      for (T& v : y.values()) v = T(1) / (T(1) + std::exp(-v));
      return y;
    }
    case LayerKind::kMaxPool2: {
      const auto s = OutputShape(x.shape());
      Tensor<T> y(s);
      for (int c = 0; c < s[0]; ++c) {
        for (int oy = 0; oy < s[1]; ++oy) {
          for (int ox = 0; ox < s[2]; ++ox) {
            const int iy = 2 * oy;
            const int ix = 2 * ox;
            y.at(c, oy, ox) = std::max({x.at(c, iy, ix), x.at(c, iy, ix + 1),
                                        x.at(c, iy + 1, ix), x.at(c, iy + 1, ix + 1)});
          }
        }
      }
      return y;
    }
    case LayerKind::kGlobalMaxPool:
      return GlobalMaxPoolForward(x).first;
  }
  return x;
}

template <typename T>
Tensor<T> Layer<T>::Forward(const Tensor<T>& x) {
  switch (kind_) {
    case LayerKind::kConv:
    case LayerKind::kRelu:
      cached_input_ = x;
      return Apply(x);
    case LayerKind::kSigmoid: {
      Tensor<T> y = Apply(x);
      cached_output_ = y;
      return y;
    }
    case LayerKind::kMaxPool2: {
      const auto s = OutputShape(x.shape());
      Tensor<T> y(s);
      cached_indices_.assign(y.size(), 0);
      std::size_t k = 0;
      for (int c = 0; c < s[0]; ++c) {
        for (int oy = 0; oy < s[1]; ++oy) {
          for (int ox = 0; ox < s[2]; ++ox, ++k) {
            int by = 2 * oy;
            int bx = 2 * ox;
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                if (x.at(c, 2 * oy + dy, 2 * ox + dx) > x.at(c, by, bx)) {
                  by = 2 * oy + dy;
                  bx = 2 * ox + dx;
                }
              }
            }
            y[k] = x.at(c, by, bx);
            cached_indices_[k] = static_cast<std::uint32_t>(
                (static_cast<std::size_t>(c) * x.height() + by) * x.width() + bx);
          }
        }
      }
      cached_input_ = Tensor<T>(x.shape());  // shape only
      return y;
    }
    case LayerKind::kGlobalMaxPool: {
      auto [y, argmax] = GlobalMaxPoolForward(x);
      cached_argmax_ = std::move(argmax);
      cached_input_ = Tensor<T>(x.shape());  // shape only
      return y;
    }
  }
  return x;
}

template <typename T>
Tensor<T> Layer<T>::Backward(const Tensor<T>& grad_out) {
  switch (kind_) {
    case LayerKind::kConv:
      if (!cached_input_) break;
      return Conv2dBackward<T>(*cached_input_, grad_out, weights_, geom_,
                               weight_grad_, bias_grad_);
    case LayerKind::kRelu: {
      if (!cached_input_) break;
      Tensor<T> g = grad_out;
      const auto in = cached_input_->values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(in[i] > T(0))) g[i] = T(0);
      }
      return g;
    }
    case LayerKind::kSigmoid: {
      if (!cached_output_) break;
      Tensor<T> g = grad_out;
      const auto y = cached_output_->values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (T(1) - y[i]);
      return g;
    }
    case LayerKind::kMaxPool2: {
      if (!cached_input_ || cached_indices_.size() != grad_out.size()) break;
      Tensor<T> g(cached_input_->shape());
      for (std::size_t k = 0; k < grad_out.size(); ++k) {
        g[cached_indices_[k]] += grad_out[k];
      }
      return g;
    }
    case LayerKind::kGlobalMaxPool: {
      if (!cached_input_) break;
      Tensor<T> g =
          GlobalMaxPoolBackward<T>(grad_out, cached_argmax_, cached_input_->shape());
      last_nonzeros_ = 0;
      for (T v : g.values()) last_nonzeros_ += v != T(0);
      return g;
    }
  }
  throw Error(ErrorKind::kState, "backward called without a cached forward pass");
}

#define SAFD_INSTANTIATE_LAYERS(T)                                           \
  template Tensor<T> Conv2dForward<T>(const Tensor<T>&, std::span<const T>,  \
                                      std::span<const T>, const ConvGeometry&); \
  template Tensor<T> Conv2dBackward<T>(const Tensor<T>&, const Tensor<T>&,   \
                                       std::span<const T>, const ConvGeometry&, \
                                       std::span<T>, std::span<T>);          \
  template std::pair<Tensor<T>, std::vector<PlanePosition>>                  \
  GlobalMaxPoolForward<T>(const Tensor<T>&);                                 \
  template Tensor<T> GlobalMaxPoolBackward<T>(                               \
      const Tensor<T>&, std::span<const PlanePosition>, const std::vector<int>&); \
  template class Layer<T>;

SAFD_INSTANTIATE_LAYERS(float)
SAFD_INSTANTIATE_LAYERS(double)

#undef SAFD_INSTANTIATE_LAYERS

}  // namespace safd
