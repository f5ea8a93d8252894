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
#include <string>
#include <vector>

#include "safd/network.h"
#include "safd/proposal.h"

namespace safd {

struct ConvLayerSpec {
  int in_channels = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int pad = 0;
};

// One entry of a layer chain: a convolution or a 2x downsampling pool.
struct CostLayer {
  enum class Kind { kConv, kPool } kind = Kind::kConv;
  ConvLayerSpec conv;
  std::string name;
};

struct LayerCost {
  std::string name;
  int out_h = 0;
  int out_w = 0;
  std::uint64_t flops = 0;
};

struct StrategyCost {
  std::string strategy;
  std::uint64_t spn_flops = 0;
  std::uint64_t detector_flops = 0;
  std::uint64_t total() const { return spn_flops + detector_flops; }
};

struct CostReport {
  std::vector<LayerCost> layers;
  std::uint64_t total_flops = 0;
  std::vector<StrategyCost> strategies;

  double total_mflops() const { return total_flops / 1e6; }
};

// One multiply-accumulate counts as one FLOP.
std::uint64_t LayerFlops(const ConvLayerSpec& spec, int in_h, int in_w);

// Pools halve spatial dims (floor) and cost nothing.
CostReport NetworkFlops(std::span<const CostLayer> layers, int in_h, int in_w);

// Text format, one layer per line; '#' starts a comment:
//   conv <name> <in> <out> <kernel> <stride> <pad>
//   conv <name> <in> <out> <kernel_h>x<kernel_w> <stride> <pad>
//   pool <name>
std::vector<CostLayer> ParseLayerSpecs(const std::string& text);
std::vector<CostLayer> ReadLayerSpecs(const std::string& path);

// Chain mirroring a built Network (convs and 2x max pools).
std::vector<CostLayer> LayersFromNetwork(const Network<float>& net);

enum class Strategy { kScaleAware, kMultiScaleTesting, kSingleShot };

struct StrategyInputs {
  int image_h = 0;
  int image_w = 0;
  std::optional<std::vector<ZoomAction>> plan;  // required for kScaleAware
  std::vector<CostLayer> spn;
  std::vector<CostLayer> detector;
  std::vector<CostLayer> multi_anchor_detector;
  int spn_long_side = 448;
  int pyramid_base_long_side = 1414;
  int pyramid_levels = 6;  // base * 2^k for k = 0 .. -(levels-1)
  int single_shot_long_side = 1414;
};

// Long sides of the multi-scale testing pyramid, rounded half up, min 1.
std::vector<int> PyramidLongSides(int base, int levels);

// (h, w) after aspect-preserving resize to the given long side.
std::pair<int, int> DimsForLongSide(int h, int w, int long_side);

StrategyCost StrategyCostFor(Strategy strategy, const StrategyInputs& in);

std::string StrategyName(Strategy s);

struct ImageCostInput {
  int image_h = 0;
  int image_w = 0;
  std::vector<ZoomAction> plan;
};

// Mean cost of all three strategies over a set of images, rounded to whole
// FLOPs. The image dims and plan of each entry replace those in base.
std::vector<StrategyCost> MeanStrategyCosts(std::span<const ImageCostInput> images,
                                            const StrategyInputs& base);

// Copy of a chain whose last conv emits out_channels, e.g. a multi-anchor head.
std::vector<CostLayer> WithHeadChannels(std::vector<CostLayer> layers, int out_channels);

// Per-layer rows plus strategy summary rows.
std::string CostReportCsv(const CostReport& report);

}  // namespace safd
