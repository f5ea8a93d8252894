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
#include <filesystem>
#include <random>
#include <span>
#include <type_traits>
#include <vector>

#include "safd/layers.h"
#include "safd/tensor.h"

namespace safd {

template <typename T>
class Network {
 public:
  Network& AddConv(int in_channels, int out_channels, int kernel, int stride = 1,
                   int pad = 0);
  Network& AddRelu();
  Network& AddMaxPool2();
  Network& AddGlobalMaxPool();
  Network& AddSigmoid();
  Network& Add(Layer<T> layer);

  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return layers_.at(i); }
  const Layer<T>& layer(std::size_t i) const { return layers_.at(i); }

  // Glorot-uniform weights, zero bias.
  void InitWeights(std::uint64_t seed);

  std::vector<int> OutputShape(const std::vector<int>& input_shape) const;

  // Training pass; caches activations for Backward.
  Tensor<T> Forward(const Tensor<T>& x);
  // Accumulates parameter gradients and returns the input gradient.
  Tensor<T> Backward(const Tensor<T>& grad_out);
  void ZeroGrad();

  // Cache-free inference over layers [begin, end). Safe to call concurrently.
  Tensor<T> Infer(const Tensor<T>& x) const { return Infer(x, 0, layers_.size()); }
  Tensor<T> Infer(const Tensor<T>& x, std::size_t begin, std::size_t end) const;

  // Product of all pooling strides.
  int TotalStride() const;
  int ReceptiveField() const;
  std::size_t ParameterCount() const;

  template <typename U>
  Network<U> Cast() const {
    Network<U> out;
    for (const auto& l : layers_) out.Add(l.template Cast<U>());
    return out;
  }

 private:
  std::vector<Layer<T>> layers_;
};

// Plain SGD with momentum: v = momentum * v - lr * g; p += v.
// Throws a numeric error if any gradient is not finite.
template <typename T>
void SgdStep(std::span<T> params, std::span<const T> grads,
             std::span<T> velocity, T lr, T momentum);

template <typename T>
class Sgd {
 public:
  Sgd(T lr, T momentum, T weight_decay = T(0))
      : lr_(lr), momentum_(momentum), weight_decay_(weight_decay) {}

  void set_lr(T lr) { lr_ = lr; }
  T lr() const { return lr_; }
  void Step(Network<T>& net);

 private:
  T lr_;
  T momentum_;
  T weight_decay_;
  std::vector<std::vector<T>> velocity_;
};

// Fourth-order central-difference check of the sigmoid cross-entropy loss on the flattened
// network output. Returns max |analytic - numeric| / max(|a|, |n|, 1e-8). The analytic
// gradient is computed in T and the numeric one in double. Instantiated for float and double.
template <typename T>
double GradCheck(Network<T>& net, const Tensor<T>& input,
                 std::type_identity_t<std::span<const T>> target,
                 double epsilon);

// Binary model file: "SAFDNET\0", u32 version, u32 layer count, then per
// layer a u32 kind, conv geometry as five u32 and little-endian float32
// weights followed by bias.
void SaveModel(const Network<float>& net, const std::filesystem::path& path);
Network<float> LoadModel(const std::filesystem::path& path);

}  // namespace safd
