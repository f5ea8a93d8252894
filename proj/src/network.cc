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

#include "safd/network.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "safd/error.h"
#include "safd/loss.h"

namespace safd {

template <typename T>
Network<T>& Network<T>::AddConv(int in_channels, int out_channels, int kernel,
                                int stride, int pad) {
  return Add(Layer<T>::Conv({in_channels, out_channels, kernel, stride, pad}));
}
template <typename T>
Network<T>& Network<T>::AddRelu() { return Add(Layer<T>::Relu()); }
template <typename T>
Network<T>& Network<T>::AddMaxPool2() { return Add(Layer<T>::MaxPool2()); }
template <typename T>
Network<T>& Network<T>::AddGlobalMaxPool() { return Add(Layer<T>::GlobalMaxPool()); }
template <typename T>
Network<T>& Network<T>::AddSigmoid() { return Add(Layer<T>::Sigmoid()); }

template <typename T>
Network<T>& Network<T>::Add(Layer<T> layer) {
  if (layer.kind() == LayerKind::kConv) {
    // The channel plan must chain: find the previous conv's output width.
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      if (it->kind() == LayerKind::kConv) {
        if (it->geometry().out_channels != layer.geometry().in_channels) {
          throw Error(ErrorKind::kConfig,
                      "conv input channels do not match previous conv output");
        }
        break;
      }
      if (it->kind() == LayerKind::kGlobalMaxPool) {
        throw Error(ErrorKind::kConfig, "conv after global max pool");
      }
    }
  }
  layers_.push_back(std::move(layer));
  return *this;
}

template <typename T>
void Network<T>::InitWeights(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& l : layers_) {
    if (l.kind() != LayerKind::kConv) continue;
    const auto& g = l.geometry();
    const double fan_in = static_cast<double>(g.in_channels) * g.kernel * g.kernel;
    const double fan_out = static_cast<double>(g.out_channels) * g.kernel * g.kernel;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (T& w : l.weights()) w = static_cast<T>(dist(rng));
    for (T& b : l.bias()) b = T(0);
  }
}

template <typename T>
std::vector<int> Network<T>::OutputShape(const std::vector<int>& input_shape) const {
  std::vector<int> s = input_shape;
  for (const auto& l : layers_) s = l.OutputShape(s);
  return s;
}

template <typename T>
Tensor<T> Network<T>::Forward(const Tensor<T>& x) {
  Tensor<T> h = x;
  for (auto& l : layers_) h = l.Forward(h);
  return h;
}

template <typename T>
Tensor<T> Network<T>::Backward(const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = it->Backward(g);
  return g;
}

template <typename T>
void Network<T>::ZeroGrad() {
  for (auto& l : layers_) {
    std::fill(l.weight_grad().begin(), l.weight_grad().end(), T(0));
    std::fill(l.bias_grad().begin(), l.bias_grad().end(), T(0));
  }
}

template <typename T>
Tensor<T> Network<T>::Infer(const Tensor<T>& x, std::size_t begin,
                            std::size_t end) const {
  Tensor<T> h = x;
  for (std::size_t i = begin; i < end && i < layers_.size(); ++i) {
    h = layers_[i].Apply(h);
  }
  return h;
}

template <typename T>
int Network<T>::TotalStride() const {
  int stride = 1;
  for (const auto& l : layers_) {
    if (l.kind() == LayerKind::kMaxPool2) stride *= 2;
    if (l.kind() == LayerKind::kConv) stride *= l.geometry().stride;
  }
  return stride;
}

template <typename T>
int Network<T>::ReceptiveField() const {
  int rf = 1;
  int jump = 1;
  for (const auto& l : layers_) {
    if (l.kind() == LayerKind::kConv) {
      rf += (l.geometry().kernel - 1) * jump;
      jump *= l.geometry().stride;
    } else if (l.kind() == LayerKind::kMaxPool2) {
      rf += jump;
      jump *= 2;
    }
  }
  return rf;
}

template <typename T>
std::size_t Network<T>::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights().size() + l.bias().size();
  return n;
}

template <typename T>
void SgdStep(std::span<T> params, std::span<const T> grads,
             std::span<T> velocity, T lr, T momentum) {
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw Error(ErrorKind::kShape, "sgd buffers differ in size");
  }
  for (T g : grads) {
    if (!std::isfinite(g)) {
      throw Error(ErrorKind::kNumeric, "non-finite gradient; training aborted");
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] - lr * grads[i];
    params[i] += velocity[i];
  }
}

template <typename T>
void Sgd<T>::Step(Network<T>& net) {
  std::size_t slot = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    auto& l = net.layer(i);
    if (l.kind() != LayerKind::kConv) continue;
    for (int part = 0; part < 2; ++part) {
      std::vector<T>& p = part == 0 ? l.weights() : l.bias();
      std::vector<T>& g = part == 0 ? l.weight_grad() : l.bias_grad();
      if (velocity_.size() <= slot) velocity_.emplace_back(p.size(), T(0));
      if (part == 0 && weight_decay_ != T(0)) {
        for (std::size_t k = 0; k < p.size(); ++k) g[k] += weight_decay_ * p[k];
      }
      SgdStep<T>(p, g, velocity_[slot], lr_, momentum_);
      ++slot;
    }
  }
}

namespace {

template <typename T>
double LossOf(Network<T>& net, const Tensor<T>& input, std::span<const T> target) {
  const Tensor<T> out = net.Infer(input);
  return SigmoidCeLoss<T>(out.values(), target).loss;
}

}  // namespace

template <typename T>
double GradCheck(Network<T>& net, const Tensor<T>& input,
                 std::type_identity_t<std::span<const T>> target,
                 double epsilon) {
  net.ZeroGrad();
  const Tensor<T> out = net.Forward(input);
  const auto lg = SigmoidCeLoss<T>(out.values(), target);
  net.Backward(Tensor<T>(out.shape(), lg.grad));

  // The numeric side always runs in double on a copy of the same weights, so
  // a float network is judged against a reference rather than float noise.
  Network<double> ref = net.template Cast<double>();
  Tensor<double> ref_input(input.shape());
  std::copy(input.values().begin(), input.values().end(), ref_input.values().begin());
  const std::vector<double> ref_target(target.begin(), target.end());

  double worst = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& l = net.layer(i);
    if (l.kind() != LayerKind::kConv) continue;
    auto& rl = ref.layer(i);
    for (int part = 0; part < 2; ++part) {
      std::vector<double>& p = part == 0 ? rl.weights() : rl.bias();
      const std::vector<T>& g = part == 0 ? l.weight_grad() : l.bias_grad();
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double saved = p[k];
        auto at = [&](double offset) {
          p[k] = saved + offset;
          return LossOf(ref, ref_input, std::span<const double>(ref_target));
        };
        // Fourth-order central stencil.
        const double numeric = (8.0 * (at(epsilon) - at(-epsilon)) -
                                (at(2.0 * epsilon) - at(-2.0 * epsilon))) /
                               (12.0 * epsilon);
        p[k] = saved;
        const double analytic = g[k];
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
      }
    }
  }
  return worst;
}

template double GradCheck(Network<float>&, const Tensor<float>&, std::span<const float>,
                          double);
template double GradCheck(Network<double>&, const Tensor<double>&, std::span<const double>,
                          double);

namespace {

constexpr char kMagic[8] = {'S', 'A', 'F', 'D', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void PutU32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t GetU32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw Error(ErrorKind::kIo, "truncated model file");
  }
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void PutFloats(std::ostream& os, const std::vector<float>& v) {
  for (float f : v) PutU32(os, std::bit_cast<std::uint32_t>(f));
}

void GetFloats(std::istream& is, std::vector<float>& v) {
  for (float& f : v) f = std::bit_cast<float>(GetU32(is));
}

}  // namespace

void SaveModel(const Network<float>& net, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os.write(kMagic, sizeof(kMagic));
  PutU32(os, kVersion);
  PutU32(os, static_cast<std::uint32_t>(net.size()));
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& l = net.layer(i);
    PutU32(os, static_cast<std::uint32_t>(l.kind()));
    if (l.kind() != LayerKind::kConv) continue;
    const auto& g = l.geometry();
    for (int v : {g.in_channels, g.out_channels, g.kernel, g.stride, g.pad}) {
      PutU32(os, static_cast<std::uint32_t>(v));
    }
    PutFloats(os, l.weights());
    PutFloats(os, l.bias());
  }
  if (!os) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

Network<float> LoadModel(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error(ErrorKind::kIo, path.string() + " is not a model file");
  }
  if (GetU32(is) != kVersion) {
    throw Error(ErrorKind::kIo, "unsupported model file version");
  }
  const std::uint32_t count = GetU32(is);
  Network<float> net;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto kind = static_cast<LayerKind>(GetU32(is));
    switch (kind) {
      case LayerKind::kConv: {
        ConvGeometry g;
        g.in_channels = static_cast<int>(GetU32(is));
        g.out_channels = static_cast<int>(GetU32(is));
        g.kernel = static_cast<int>(GetU32(is));
        g.stride = static_cast<int>(GetU32(is));
        g.pad = static_cast<int>(GetU32(is));
        auto layer = Layer<float>::Conv(g);
        GetFloats(is, layer.weights());
        GetFloats(is, layer.bias());
        net.Add(std::move(layer));
        break;
      }
      case LayerKind::kRelu: net.AddRelu(); break;
      case LayerKind::kMaxPool2: net.AddMaxPool2(); break;
      case LayerKind::kGlobalMaxPool: net.AddGlobalMaxPool(); break;
      case LayerKind::kSigmoid: net.AddSigmoid(); break;
      default:
        throw Error(ErrorKind::kIo, "unknown layer kind in model file");
    }
  }
  return net;
}

template class Network<float>;
template class Network<double>;
template class Sgd<float>;
template class Sgd<double>;
template void SgdStep<float>(std::span<float>, std::span<const float>,
                             std::span<float>, float, float);
template void SgdStep<double>(std::span<double>, std::span<const double>,
                              std::span<double>, double, double);

}  // namespace safd
