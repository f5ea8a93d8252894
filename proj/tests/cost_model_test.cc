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

#include "safd/cost_model.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "safd/error.h"

namespace safd {
namespace {

CostLayer Conv(const char* name, int in, int out, int k, int stride, int pad) {
  return {CostLayer::Kind::kConv, {in, out, k, k, stride, pad}, name};
}

CostLayer Pool(const char* name) {
  CostLayer p;
  p.kind = CostLayer::Kind::kPool;
  p.name = name;
  return p;
}

TEST(LayerFlopsTest, GoogleNetConv1) {
  const std::uint64_t full = LayerFlops({3, 64, 7, 7, 2, 3}, 224, 224);
  EXPECT_EQ(full, 64ull * 7 * 7 * 3 * 112 * 112);
  EXPECT_EQ(full, 118013952ull);
  EXPECT_EQ(std::llround(full / 1e6), 118);

  const std::uint64_t quarter = LayerFlops({3, 16, 7, 7, 2, 3}, 224, 224);
  EXPECT_EQ(quarter, 29503488ull);
  EXPECT_EQ(std::llround(quarter / 1e6), 30);
}

TEST(LayerFlopsTest, GoogleNetConv2Stage) {
  // conv1 -> pool -> 1x1 reduce -> 3x3; pooled input is 56x56.
  const std::vector<CostLayer> full = {Conv("conv1", 3, 64, 7, 2, 3), Pool("pool1"),
                                       Conv("conv2_reduce", 64, 64, 1, 1, 0),
                                       Conv("conv2", 64, 192, 3, 1, 1)};
  const CostReport r = NetworkFlops(full, 224, 224);
  EXPECT_EQ(std::llround((r.layers[2].flops + r.layers[3].flops) / 1e6), 360);

  const std::vector<CostLayer> quarter = {Conv("conv1", 3, 16, 7, 2, 3), Pool("pool1"),
                                          Conv("conv2_reduce", 16, 16, 1, 1, 0),
                                          Conv("conv2", 16, 48, 3, 1, 1)};
  const CostReport q = NetworkFlops(quarter, 224, 224);
  EXPECT_EQ(std::llround((q.layers[2].flops + q.layers[3].flops) / 1e6), 22);
}

TEST(LayerFlopsTest, IdentityConv) {
  for (int n : {1, 5, 17}) {
    EXPECT_EQ(LayerFlops({1, 1, 1, 1, 1, 0}, n, n), static_cast<std::uint64_t>(n * n));
  }
}

TEST(LayerFlopsTest, KernelLargerThanInput) {
  try {
    LayerFlops({1, 1, 7, 7, 1, 0}, 5, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
  EXPECT_NO_THROW(LayerFlops({1, 1, 7, 7, 1, 1}, 5, 5));
}

TEST(LayerFlopsTest, MatchesBruteForceCount) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> small(1, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const ConvLayerSpec s{small(rng), small(rng), small(rng), small(rng), small(rng),
                          small(rng) - 1};
    const int h = s.kernel_h + small(rng) * 3;
    const int w = s.kernel_w + small(rng) * 3;
    std::uint64_t count = 0;
    for (int y = -s.pad; y + s.kernel_h <= h + s.pad; y += s.stride) {
      for (int x = -s.pad; x + s.kernel_w <= w + s.pad; x += s.stride) {
        count += static_cast<std::uint64_t>(s.out_channels) * s.in_channels * s.kernel_h *
                 s.kernel_w;
      }
    }
    EXPECT_EQ(LayerFlops(s, h, w), count);
  }
}

TEST(NetworkFlopsTest, SingleLayerEqualsLayerFlops) {
  const std::vector<CostLayer> one = {Conv("c", 3, 8, 3, 1, 1)};
  EXPECT_EQ(NetworkFlops(one, 40, 30).total_flops, LayerFlops(one[0].conv, 40, 30));
}

TEST(NetworkFlopsTest, DoublingInputQuadruplesCost) {
  const auto layers = ParseLayerSpecs(
      "conv c1 1 8 5 1 2\npool p1\nconv c2 8 16 3 1 1\npool p2\n"
      "conv c3 16 32 3 1 1\nconv c4 32 32 5 1 2\nconv head 32 60 1 1 0\n");
  const CostReport a = NetworkFlops(layers, 150, 200);
  const CostReport b = NetworkFlops(layers, 300, 400);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind == CostLayer::Kind::kPool) continue;
    const double ratio = static_cast<double>(b.layers[i].flops) / a.layers[i].flops;
    EXPECT_NEAR(ratio, 4.0, 0.2) << layers[i].name;
  }
  EXPECT_EQ(NetworkFlops(layers, 336, 448).total_flops,
            NetworkFlops(layers, 336, 448).total_flops);
}

TEST(NetworkFlopsTest, ChannelBreak) {
  const std::vector<CostLayer> bad = {Conv("a", 3, 8, 3, 1, 1), Conv("b", 4, 8, 3, 1, 1)};
  try {
    NetworkFlops(bad, 32, 32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
}

TEST(ParseLayerSpecsTest, FormatAndErrors) {
  const auto layers = ParseLayerSpecs("# header\nconv a 3 64 7 2 3  # trailing\n\npool p\n"
                                      "conv b 64 64 1x3 1 0\n");
  ASSERT_EQ(layers.size(), 3u);
  EXPECT_EQ(layers[0].name, "a");
  EXPECT_EQ(layers[0].conv.kernel_h, 7);
  EXPECT_EQ(layers[1].kind, CostLayer::Kind::kPool);
  EXPECT_EQ(layers[2].conv.kernel_h, 1);
  EXPECT_EQ(layers[2].conv.kernel_w, 3);
  EXPECT_THROW(ParseLayerSpecs("conv a 3 64\n"), Error);
  EXPECT_THROW(ParseLayerSpecs("dense a 3 4 1 1 0\n"), Error);
  EXPECT_THROW(ParseLayerSpecs("conv a 3 64 q 1 0\n"), Error);
}

TEST(StrategyCostTest, PyramidSides) {
  EXPECT_EQ(PyramidLongSides(1414, 6), (std::vector<int>{1414, 707, 354, 177, 88, 44}));
  const auto [h, w] = DimsForLongSide(1500, 2000, 1414);
  EXPECT_EQ(w, 1414);
  EXPECT_NEAR(h, 1500.0 * 1414 / 2000, 0.5 + 1e-9);
}

StrategyInputs ToyInputs() {
  StrategyInputs in;
  in.image_h = 1500;
  in.image_w = 2000;
  in.spn = ParseLayerSpecs("conv c1 1 8 5 1 2\npool\nconv c2 8 60 1 1 0\n");
  in.detector = ParseLayerSpecs("conv c1 1 16 5 1 2\npool\nconv c2 16 4 1 1 0\n");
  in.multi_anchor_detector = ParseLayerSpecs("conv c1 1 16 5 1 2\npool\nconv c2 16 24 1 1 0\n");
  return in;
}

TEST(StrategyCostTest, ZeroZoomsIsSpnOnly) {
  StrategyInputs in = ToyInputs();
  in.plan = std::vector<ZoomAction>{};
  const StrategyCost c = StrategyCostFor(Strategy::kScaleAware, in);
  EXPECT_EQ(c.detector_flops, 0u);
  const auto [h, w] = DimsForLongSide(1500, 2000, 448);
  EXPECT_EQ(c.total(), NetworkFlops(in.spn, h, w).total_flops);
}

TEST(StrategyCostTest, MissingPlan) {
  try {
    StrategyCostFor(Strategy::kScaleAware, ToyInputs());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParameter);
  }
}

TEST(StrategyCostTest, MultiScaleSumsPyramid) {
  const StrategyInputs in = ToyInputs();
  std::uint64_t expect = 0;
  for (int side : {1414, 707, 354, 177, 88, 44}) {
    const auto [h, w] = DimsForLongSide(1500, 2000, side);
    expect += NetworkFlops(in.detector, h, w).total_flops;
  }
  EXPECT_EQ(StrategyCostFor(Strategy::kMultiScaleTesting, in).total(), expect);
}

TEST(StrategyCostTest, ScaleAwareProportionalToZoomArea) {
  StrategyInputs in = ToyInputs();
  in.plan = std::vector<ZoomAction>{{0.5, {}}};
  const auto half = StrategyCostFor(Strategy::kScaleAware, in);
  in.plan = std::vector<ZoomAction>{{0.25, {}}};
  const auto quarter = StrategyCostFor(Strategy::kScaleAware, in);
  EXPECT_EQ(half.spn_flops, quarter.spn_flops);
  EXPECT_NEAR(static_cast<double>(half.detector_flops) / quarter.detector_flops, 4.0, 0.05);
}

}  // namespace
}  // namespace safd
