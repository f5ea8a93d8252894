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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "safd/error.h"
#include "safd/synthgen.h"

namespace safd {
namespace {

BackgroundParams Black() {
  BackgroundParams bg;
  bg.base_min = bg.base_max = 0.0;
  bg.blob_amplitude = 0.0;
  bg.grain_amplitude = 0.0;
  bg.distractors = 0;
  return bg;
}

Image GlyphOnBlack(double cx, double cy, double side) {
  SceneSpec spec;
  spec.glyphs = {{cx, cy, side, 17}};
  spec.background = Black();
  return RenderScene(spec).image;
}

Network<float> RandomSpn(const SpnConfig& cfg, std::uint64_t seed) {
  Network<float> net = BuildSpn(cfg);
  net.InitWeights(seed);
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (float& b : net.layer(i).bias()) b = 0.01f;
  }
  return net;
}

TEST(BuildSpnTest, Geometry) {
  SpnConfig cfg;
  const Network<float> net = BuildSpn(cfg);
  EXPECT_EQ(net.TotalStride(), 4);
  EXPECT_EQ(net.ReceptiveField(), 36);
  EXPECT_EQ(net.OutputShape({1, 192, 192}), (std::vector<int>{60}));

  cfg.spec = HistogramSpec(3, 7, 40);
  const Network<float> small = BuildSpn(cfg);
  EXPECT_EQ(small.OutputShape({1, 64, 64}), (std::vector<int>{40}));
  EXPECT_EQ(small.OutputShape({1, 128, 96}), (std::vector<int>{40}));
}

TEST(BuildSpnTest, BadConfig) {
  SpnConfig cfg;
  cfg.channels = {8, 0, 16};
  EXPECT_THROW(BuildSpn(cfg), Error);
  cfg.channels = {8};
  EXPECT_THROW(BuildSpn(cfg), Error);
}

TEST(InferHistogramTest, HeatmapGrowsWithInput) {
  SpnConfig cfg;
  const Network<float> net = RandomSpn(cfg, 1);
  Image small({1, 96, 96}, 0.2f);
  cfg.input_long_side = 96;
  const SpnOutput a = InferHistogram(net, small, cfg);
  cfg.input_long_side = 192;
  const SpnOutput b = InferHistogram(net, small, cfg);
  EXPECT_EQ(a.histogram.size(), 60);
  EXPECT_EQ(b.histogram.size(), 60);
  EXPECT_EQ(a.heatmap.responses.height() * 2, b.heatmap.responses.height());
  EXPECT_EQ(a.heatmap.stride, 4);
  for (double v : b.histogram.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(InferHistogramTest, DegenerateImage) {
  SpnConfig cfg;
  const Network<float> net = RandomSpn(cfg, 1);
  try {
    InferHistogram(net, Image({1, 0, 5}), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInput);
  }
}

TEST(InferHistogramTest, StrideTranslationInvariance) {
  SpnConfig cfg;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Network<float> net = RandomSpn(cfg, seed);
    const Image a = GlyphOnBlack(80, 90, 40);
    const Image b = GlyphOnBlack(84, 90, 40);
    const Image c = GlyphOnBlack(80, 98, 40);
    const ScaleHistogram ha = InferHistogram(net, a, cfg).histogram;
    const ScaleHistogram hb = InferHistogram(net, b, cfg).histogram;
    const ScaleHistogram hc = InferHistogram(net, c, cfg).histogram;
    for (int k = 0; k < ha.size(); ++k) {
      EXPECT_EQ(ha[k], hb[k]) << k;
      EXPECT_EQ(ha[k], hc[k]) << k;
    }
  }
}

TEST(InferHistogramTest, ConstantImageGivesConstantInterior) {
  SpnConfig cfg;
  const Network<float> net = RandomSpn(cfg, 4);
  // Cells whose receptive field never reaches zero padding.
  const int margin = 36 / 4 + 1;
  for (float value : {0.0f, 0.6f}) {
    const SpnOutput out = InferHistogram(net, Image({1, 192, 192}, value), cfg);
    const Tensor<float>& r = out.heatmap.responses;
    for (int c = 0; c < r.channels(); ++c) {
      for (int y = margin; y < r.height() - margin; ++y) {
        for (int x = margin; x < r.width() - margin; ++x) {
          ASSERT_EQ(r.at(c, y, x), r.at(c, margin, margin)) << value;
        }
      }
    }
  }
}

TEST(FillIgnoreRegionsTest, OnlyInsideRegion) {
  Image img({1, 20, 30}, 0.5f);
  const std::vector<Rect> regions = {{5, 4, 10, 6}};
  FillIgnoreRegions(img, regions, 3);
  int changed = 0;
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) {
      const bool inside = regions[0].Contains(x + 0.5, y + 0.5);
      if (!inside) {
        EXPECT_EQ(img.at(0, y, x), 0.5f);
      }
      changed += img.at(0, y, x) != 0.5f;
    }
  }
  EXPECT_GT(changed, 50);
}

TEST(TrainSpnTest, EmptyDatasetIsConfigError) {
  SpnConfig cfg;
  try {
    TrainSpn(cfg, {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(TrainSpnTest, DeterministicAndSparseGradient) {
  SynthConfig sc;
  sc.count = 6;
  const Dataset ds = SampleDataset(sc, 3);
  SpnConfig cfg;
  cfg.offsets = GlyphLandmarkOffsets();
  cfg.train.iterations = 30;
  const SpnTrainResult a = TrainSpn(cfg, ds.train, 9);
  const SpnTrainResult b = TrainSpn(cfg, ds.train, 9);
  EXPECT_EQ(a.log.loss, b.log.loss);
  EXPECT_LE(a.log.max_pool_gradient_nonzeros, static_cast<std::size_t>(cfg.spec.bins()));
  EXPECT_GT(a.log.max_pool_gradient_nonzeros, 0u);
}

}  // namespace
}  // namespace safd
