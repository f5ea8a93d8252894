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

#include "safd/spn.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "safd/error.h"
#include "safd/loss.h"
#include "safd/training.h"

namespace safd {

namespace {

// Pixel values are in [0, 1]; the SPN sees them shifted to zero mid-gray.
void Center(Image& image) {
  for (float& v : image.values()) v -= 0.5f;
}

}  // namespace

Network<float> BuildSpn(const SpnConfig& cfg) {
  if (cfg.channels.size() < 2) {
    throw Error(ErrorKind::kConfig, "SPN needs at least two conv stages");
  }
  if (!(cfg.sigma > 0.0)) throw Error(ErrorKind::kConfig, "sigma must be positive");
  for (int c : cfg.channels) {
    if (c < 1) throw Error(ErrorKind::kConfig, "SPN channel widths must be positive");
  }
  Network<float> net;
  int in = 1;
  const std::size_t last = cfg.channels.size() - 1;
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    const int k = (i == 0 || i == last) ? 5 : 3;
    net.AddConv(in, cfg.channels[i], k, 1, k / 2).AddRelu();
    if (i < 2) net.AddMaxPool2();
    in = cfg.channels[i];
  }
  net.AddConv(in, cfg.spec.bins(), 1, 1, 0).AddGlobalMaxPool();
  return net;
}

void FillIgnoreRegions(Image& image, std::span<const Rect> regions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (const Rect& r : regions) {
    const int x0 = std::max(0, static_cast<int>(std::floor(r.x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(r.y)));
    const int x1 = std::min(image.width(), static_cast<int>(std::ceil(r.x + r.w)));
    const int y1 = std::min(image.height(), static_cast<int>(std::ceil(r.y + r.h)));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) image.at(0, y, x) = unit(rng);
    }
  }
}

SpnTrainResult TrainSpn(const SpnConfig& cfg, std::span<const Sample> dataset,
                        std::uint64_t seed) {
  if (dataset.empty()) throw Error(ErrorKind::kConfig, "empty SPN training set");
  SpnTrainResult result{BuildSpn(cfg), {}};
  Network<float>& net = result.net;
  net.InitWeights(seed);
  const std::size_t pool_index = net.size() - 1;

  // Targets depend only on annotations; compute them once.
  std::vector<std::vector<float>> targets;
  targets.reserve(dataset.size());
  for (const Sample& s : dataset) {
    const auto h = GtHistogram(cfg.spec, FaceSizes(s.annotation, cfg.offsets), cfg.sigma);
    targets.emplace_back(h.values().begin(), h.values().end());
  }
  // Start the head at the per-bin prior so early updates need not drive every
  // logit down through the hidden layers.
  {
    std::vector<float>& bias = net.layer(pool_index - 1).bias();
    for (std::size_t k = 0; k < bias.size(); ++k) {
      double mean = 0.0;
      for (const auto& t : targets) mean += t[k];
      mean = std::clamp(mean / static_cast<double>(targets.size()), 1e-3, 1.0 - 1e-3);
      bias[k] = static_cast<float>(std::log(mean / (1.0 - mean)));
    }
  }

  Sgd<float> opt(static_cast<float>(cfg.train.lr), static_cast<float>(cfg.train.momentum),
                 static_cast<float>(cfg.train.weight_decay));
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  // Shuffled epochs; the ignore fill is redrawn every time a sample is seen.
  std::vector<std::size_t> order(dataset.size());
  std::size_t cursor = order.size();
  result.log.loss.reserve(cfg.train.iterations);

  for (int it = 0; it < cfg.train.iterations; ++it) {
    if (cursor == order.size()) {
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t idx = order[cursor++];
    const Sample& sample = dataset[idx];
    Image image = ResizeToLongSide(sample.image, cfg.input_long_side);
    double f = static_cast<double>(cfg.input_long_side) /
               std::max(sample.image.height(), sample.image.width());
    std::vector<Rect> ignores;
    for (const Rect& r : sample.annotation.ignore_regions) {
      ignores.push_back({r.x * f, r.y * f, r.w * f, r.h * f});
    }
    FillIgnoreRegions(image, ignores, rng());
    if (cfg.train.flip && (rng() & 1)) {
      for (int y = 0; y < image.height(); ++y) {
        float* row = &image.at(0, y, 0);
        std::reverse(row, row + image.width());
      }
    }

    Center(image);
    opt.set_lr(static_cast<float>(StepLr(cfg.train.lr, it, cfg.train.iterations)));
    net.ZeroGrad();
    const Tensor<float> logits = net.Forward(image);
    const auto lg = SigmoidCeLoss<float>(logits.values(), targets[idx]);
    net.Backward(Tensor<float>(logits.shape(), lg.grad));
    result.log.max_pool_gradient_nonzeros =
        std::max(result.log.max_pool_gradient_nonzeros,
                 net.layer(pool_index).last_backward_nonzeros());
    opt.Step(net);
    result.log.loss.push_back(lg.loss);
  }
  return result;
}

SpnOutput InferHistogram(const Network<float>& net, const Image& image, const SpnConfig& cfg) {
  if (image.rank() != 3 || image.height() < 1 || image.width() < 1) {
    throw Error(ErrorKind::kInput, "degenerate image dimensions");
  }
  Image input = ResizeToLongSide(image, cfg.input_long_side);
  Center(input);
  const std::size_t pool = net.size() - 1;
  if (net.layer(pool).kind() != LayerKind::kGlobalMaxPool) {
    throw Error(ErrorKind::kConfig, "network does not end in a global max pool");
  }
  Tensor<float> responses = net.Infer(input, 0, pool);
  const auto [maxima, argmax] = GlobalMaxPoolForward(responses);
  std::vector<double> values(maxima.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = Sigmoid(static_cast<double>(maxima[k]));
  }
  return {ScaleHistogram(cfg.spec, std::move(values)),
          ScaleHeatmap{std::move(responses), net.TotalStride()}};
}

}  // namespace safd
