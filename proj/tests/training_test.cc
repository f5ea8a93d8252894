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

#include <vector>

#include <gtest/gtest.h>

#include "safd/detector.h"
#include "safd/spn.h"
#include "safd/synthgen.h"

namespace safd {
namespace {

double MeanOf(const std::vector<float>& v, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += v[i];
  return sum / static_cast<double>(end - begin);
}

std::vector<Sample> SmallCorpus() {
  SynthConfig sc;
  sc.count = 50;
  return SampleDataset(sc, 31).train;
}

// Window means smooth out the per-image noise of single-sample SGD.
TEST(TrainingTest, SpnLossHalvesWithin2000Iterations) {
  SpnConfig cfg;
  cfg.offsets = GlyphLandmarkOffsets();
  cfg.train.iterations = 2000;
  const auto log = TrainSpn(cfg, SmallCorpus(), 3).log.loss;
  ASSERT_EQ(log.size(), 2000u);
  EXPECT_LT(MeanOf(log, 1800, 2000), 0.5 * MeanOf(log, 0, 50));
}

TEST(TrainingTest, DetectorLossHalvesWithin2000Iterations) {
  DetectorConfig cfg;
  cfg.offsets = GlyphLandmarkOffsets();
  cfg.train.iterations = 2000;
  const auto log = TrainDetector(SmallCorpus(), cfg, 3).loss_log;
  ASSERT_EQ(log.size(), 2000u);
  EXPECT_LT(MeanOf(log, 1800, 2000), 0.5 * MeanOf(log, 0, 50));
}

}  // namespace
}  // namespace safd
