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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "safd/tensor.h"

namespace safd {

struct ConvGeometry {
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 3;
  int stride = 1;
  int pad = 0;
};

// Cross-correlation. weights: out x in x k x k, bias: out.
// Output spatial size is floor((in + 2 * pad - k) / stride) + 1.
template <typename T>
Tensor<T> Conv2dForward(const Tensor<T>& input, std::span<const T> weights,
                        std::span<const T> bias, const ConvGeometry& geom);

// Accumulates into weight_grad and bias_grad; returns the input gradient.
template <typename T>
Tensor<T> Conv2dBackward(const Tensor<T>& input, const Tensor<T>& grad_out,
                         std::span<const T> weights, const ConvGeometry& geom,
                         std::span<T> weight_grad, std::span<T> bias_grad);

struct PlanePosition {
  int y = 0;
  int x = 0;
};

// Per-channel maximum and its first row-major position.
template <typename T>
std::pair<Tensor<T>, std::vector<PlanePosition>> GlobalMaxPoolForward(
    const Tensor<T>& input);

// Gradient is written only at the recorded argmax of each channel.
template <typename T>
Tensor<T> GlobalMaxPoolBackward(const Tensor<T>& grad_out,
                                std::span<const PlanePosition> argmax,
                                const std::vector<int>& input_shape);

enum class LayerKind : std::uint32_t {
  kConv = 1,
  kRelu = 2,
  kMaxPool2 = 3,
  kGlobalMaxPool = 4,
  kSigmoid = 5,
};

// One layer of a Network. Forward() caches what Backward() needs, so a layer
// instance must not be shared between threads while training. Apply() is
// const and cache-free.
template <typename T>
class Layer {
 public:
  static Layer Conv(const ConvGeometry& geom);
  static Layer Relu() { return Layer(LayerKind::kRelu); }
  static Layer MaxPool2() { return Layer(LayerKind::kMaxPool2); }
  static Layer GlobalMaxPool() { return Layer(LayerKind::kGlobalMaxPool); }
  static Layer Sigmoid() { return Layer(LayerKind::kSigmoid); }

  LayerKind kind() const { return kind_; }
  const ConvGeometry& geometry() const { return geom_; }

  std::vector<int> OutputShape(const std::vector<int>& input_shape) const;

  Tensor<T> Apply(const Tensor<T>& x) const;
  Tensor<T> Forward(const Tensor<T>& x);
  Tensor<T> Backward(const Tensor<T>& grad_out);

  std::vector<T>& weights() { return weights_; }
  const std::vector<T>& weights() const { return weights_; }
  std::vector<T>& bias() { return bias_; }
  const std::vector<T>& bias() const { return bias_; }
  std::vector<T>& weight_grad() { return weight_grad_; }
  std::vector<T>& bias_grad() { return bias_grad_; }
  const std::vector<T>& weight_grad() const { return weight_grad_; }
  const std::vector<T>& bias_grad() const { return bias_grad_; }

  // Number of nonzero entries written by the last GlobalMaxPool backward.
  std::size_t last_backward_nonzeros() const { return last_nonzeros_; }

  template <typename U>
  Layer<U> Cast() const;

 private:
  template <typename>
  friend class Layer;

  explicit Layer(LayerKind kind) : kind_(kind) {}

  LayerKind kind_;
  ConvGeometry geom_;
  std::vector<T> weights_;
  std::vector<T> bias_;
  std::vector<T> weight_grad_;
  std::vector<T> bias_grad_;

  // Forward caches.
  std::optional<Tensor<T>> cached_input_;
  std::optional<Tensor<T>> cached_output_;
  std::vector<std::uint32_t> cached_indices_;
  std::vector<PlanePosition> cached_argmax_;
  std::size_t last_nonzeros_ = 0;
};

template <typename T>
template <typename U>
Layer<U> Layer<T>::Cast() const {
  Layer<U> out(kind_);
  out.geom_ = geom_;
  out.weights_.assign(weights_.begin(), weights_.end());
  out.bias_.assign(bias_.begin(), bias_.end());
  out.weight_grad_.assign(weights_.size(), U(0));
  out.bias_grad_.assign(bias_.size(), U(0));
  return out;
}

}  // namespace safd
