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
#include <span>
#include <vector>

#include "safd/image.h"
#include "safd/network.h"
#include "safd/scale_histogram.h"
#include "safd/synthgen.h"

namespace safd {

struct SpnTrainParams {
  int iterations = 8000;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  bool flip = true;
};

struct SpnConfig {
  HistogramSpec spec{2.0, 8.0, 60};
  int input_long_side = 192;
  std::vector<int> channels{8, 16, 32, 32};
  double sigma = 0.4;
  LandmarkBoxOffsets offsets;
  SpnTrainParams train;
};

// Responses before global max pooling; one channel per histogram bin.
struct ScaleHeatmap {
  Tensor<float> responses;
  int stride = 1;
};

// conv/relu/maxpool trunk, 1x1 conv to one channel per bin, global max pool.
// The sigmoid is not part of the network; training folds it into the loss.
Network<float> BuildSpn(const SpnConfig& cfg);

struct SpnTrainLog {
  std::vector<float> loss;
  // Largest number of heatmap entries any backward pass wrote through the
  // global max pool; bounded by the bin count.
  std::size_t max_pool_gradient_nonzeros = 0;
};

struct SpnTrainResult {
  Network<float> net;
  SpnTrainLog log;
};

SpnTrainResult TrainSpn(const SpnConfig& cfg, std::span<const Sample> dataset,
                        std::uint64_t seed);

// Overwrites each ignore region with independent uniform noise per pixel.
void FillIgnoreRegions(Image& image, std::span<const Rect> regions, std::uint64_t seed);

struct SpnOutput {
  ScaleHistogram histogram;
  ScaleHeatmap heatmap;
};

// Resizes so the long side matches cfg.input_long_side, then runs the SPN.
SpnOutput InferHistogram(const Network<float>& net, const Image& image, const SpnConfig& cfg);

}  // namespace safd
