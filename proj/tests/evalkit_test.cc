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

#include "safd/evalkit.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace safd {
namespace {

const DetectorRange kRange(36, 72);

TEST(ScaleRecalledTest, Examples) {
  const std::vector<ZoomAction> plan = {{std::sqrt(2592.0) / 128.0, {7, 0.9}}};
  EXPECT_TRUE(ScaleRecalled(128, plan, kRange));
  EXPECT_FALSE(ScaleRecalled(128, {}, kRange));
  const double f = 0.5;
  const std::vector<ZoomAction> half = {{f, {}}};
  EXPECT_TRUE(ScaleRecalled(36 / f, half, kRange));
  EXPECT_TRUE(ScaleRecalled(72 / f, half, kRange));
  EXPECT_FALSE(ScaleRecalled(72 / f + 1e-6, half, kRange));
}

std::vector<ImageScaleData> OracleImages(int count, std::uint64_t seed) {
  const HistogramSpec spec(2, 8, 60);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> faces(0, 3);
  std::uniform_real_distribution<double> log_size(3, 7);
  std::vector<ImageScaleData> out;
  for (int i = 0; i < count; ++i) {
    std::vector<double> sizes(faces(rng));
    for (double& s : sizes) s = std::exp2(log_size(rng));
    out.push_back({GtHistogram(spec, sizes, 0.4), sizes});
  }
  return out;
}

TEST(RecallCurveTest, Endpoints) {
  const auto images = OracleImages(50, 1);
  ProposalParams base;
  base.max_count = -1;
  const std::vector<double> thresholds = {0.0, 0.25, 0.5, 0.75, 1.0};
  const auto curve = RecallCurve(images, base, kRange, thresholds);
  ASSERT_EQ(curve.size(), 5u);
  EXPECT_EQ(curve.back().recall, 0.0);
  EXPECT_EQ(curve.back().avg_proposals_per_image, 0.0);
  for (const auto& p : curve) EXPECT_LE(p.recall, curve.front().recall);
  for (std::size_t k = 1; k < curve.size(); ++k) {
    EXPECT_LE(curve[k].avg_proposals_per_image, curve[k - 1].avg_proposals_per_image);
  }
}

TEST(RecallCurveTest, OracleHistogramsNearPerfect) {
  const auto images = OracleImages(300, 2);
  ProposalParams params;
  params.max_count = -1;
  const ScaleRecallResult r = EvaluateScaleRecall(images, params, DetectorRange(24, 48));
  EXPECT_GE(r.point.recall, 0.99);
  EXPECT_LE(r.point.avg_proposals_per_image, 2.0);
}

TEST(BestRecallWithinTest, RespectsBudget) {
  const std::vector<RecallPoint> curve = {{0.1, 3.0, 0.99}, {0.3, 1.9, 0.95}, {0.5, 1.0, 0.8}};
  EXPECT_DOUBLE_EQ(BestRecallWithin(curve, 2.0).recall, 0.95);
  EXPECT_DOUBLE_EQ(BestRecallWithin(curve, 0.5).recall, 0.0);
}

TEST(MissRateTest, Conventions) {
  const std::vector<FaceRecall> all = {{10, true}, {40, true}, {100, true}};
  const auto bins = UniformSizeBins(3, 7, 4);
  for (const auto& b : MissRateBySize(all, bins)) EXPECT_EQ(b.miss_rate, 0.0);

  const std::vector<FaceRecall> mixed = {{9, true}, {10, false}, {100, false}};
  const auto rates = MissRateBySize(mixed, bins);
  // 9 and 10 fall in [3,4); 100 in [6,7); bins [4,5) and [5,6) are empty.
  ASSERT_EQ(rates.size(), 2u);
  EXPECT_DOUBLE_EQ(rates[0].miss_rate, 0.5);
  EXPECT_EQ(rates[0].population, 2u);
  EXPECT_DOUBLE_EQ(rates[1].miss_rate, 1.0);
}

TEST(MissRateTest, HalfOpenBins) {
  const std::vector<FaceRecall> faces = {{16, false}};
  const std::vector<SizeBin> bins = {{3, 4}, {4, 5}};
  const auto rates = MissRateBySize(faces, bins);
  ASSERT_EQ(rates.size(), 1u);
  EXPECT_DOUBLE_EQ(rates[0].bin.left_log2, 4.0);
}

TEST(MissRateTest, OracleRunHasNoMissesForSeparatedSizes) {
  // Faces at least an octave apart each keep their own histogram peak.
  const HistogramSpec spec(2, 8, 60);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> faces(1, 3);
  std::uniform_real_distribution<double> jitter(0, 0.3);
  std::vector<ImageScaleData> images;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> sizes;
    double s = 3.0 + jitter(rng);
    for (int k = faces(rng); k > 0 && s <= 7.0; --k) {
      sizes.push_back(std::exp2(s));
      s += 1.0 + jitter(rng);
    }
    images.push_back({GtHistogram(spec, sizes, 0.4), sizes});
  }
  ProposalParams params;
  params.max_count = -1;
  const auto r = EvaluateScaleRecall(images, params, DetectorRange(24, 48));
  const auto rates = MissRateBySize(r.faces, UniformSizeBins(3, 7, 8));
  EXPECT_FALSE(rates.empty());
  for (const auto& b : rates) EXPECT_EQ(b.miss_rate, 0.0);
}

Detection Det(double cx, double cy, double side, double score) {
  return {{cx, cy, side}, score, 1.0};
}

TEST(AveragePrecisionTest, Examples) {
  const std::vector<SquareBox> gt = {{10, 10, 8}, {50, 50, 8}, {90, 90, 8}};
  const std::vector<Detection> perfect = {Det(10, 10, 8, 0.9), Det(50, 50, 8, 0.8),
                                          Det(90, 90, 8, 0.7)};
  EXPECT_DOUBLE_EQ(AveragePrecision(perfect, gt, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(AveragePrecision({}, gt, 0.5), 0.0);

  const std::vector<Detection> tp_fp_tp = {Det(10, 10, 8, 0.9), Det(200, 200, 8, 0.8),
                                           Det(50, 50, 8, 0.7)};
  EXPECT_NEAR(AveragePrecision(tp_fp_tp, gt, 0.5), 1.0 / 3 + (1.0 / 3) * (2.0 / 3), 1e-12);
  EXPECT_NEAR(AveragePrecision(tp_fp_tp, gt, 0.5), 0.5556, 1e-4);
}

TEST(AveragePrecisionTest, DuplicateIsFalsePositive) {
  const std::vector<SquareBox> gt = {{10, 10, 8}};
  const std::vector<Detection> dets = {Det(10, 10, 8, 0.9), Det(10, 10, 8, 0.8)};
  EXPECT_DOUBLE_EQ(AveragePrecision(dets, gt, 0.5), 1.0);
  const std::vector<Detection> flipped = {Det(10, 10, 8, 0.8), Det(30, 30, 8, 0.9)};
  EXPECT_DOUBLE_EQ(AveragePrecision(flipped, gt, 0.5), 0.5);
}

TEST(AveragePrecisionTest, IgnoreRegionDropsUnmatched) {
  ImageDetections img;
  img.ground_truth = {{10, 10, 8}};
  img.detections = {Det(60, 60, 8, 0.9), Det(10, 10, 8, 0.8)};
  const std::vector<ImageDetections> without = {img};
  EXPECT_DOUBLE_EQ(AveragePrecision(without, 0.5), 0.5);
  img.ignore_regions = {{50, 50, 20, 20}};
  const std::vector<ImageDetections> with = {img};
  EXPECT_DOUBLE_EQ(AveragePrecision(with, 0.5), 1.0);
}

// Reference from TP flags in score order: each TP adds 1/G times the best
// precision reached at that rank or later.
double ReferenceAp(const std::vector<bool>& tp, std::size_t total_gt) {
  std::vector<double> prec(tp.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    hits += tp[k];
    prec[k] = static_cast<double>(hits) / (k + 1);
  }
  double ap = 0.0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    if (!tp[k]) continue;
    ap += *std::max_element(prec.begin() + k, prec.end()) / total_gt;
  }
  return ap;
}

TEST(AveragePrecisionTest, MatchesReferenceOnRandomRankings) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 300; ++trial) {
    const int gt_count = 1 + trial % 7;
    std::vector<SquareBox> gt;
    for (int g = 0; g < gt_count; ++g) gt.push_back({20.0 + 40 * g, 20, 10});
    std::vector<Detection> dets;
    std::vector<bool> flags;
    int next_gt = 0;
    const int n = trial % 11;
    for (int k = 0; k < n; ++k) {
      const double score = 1.0 - 0.05 * k;
      if (next_gt < gt_count && coin(rng)) {
        dets.push_back(Det(gt[next_gt].cx, gt[next_gt].cy, 10, score));
        ++next_gt;
        flags.push_back(true);
      } else {
        dets.push_back(Det(1000 + 40 * k, 1000, 10, score));
        flags.push_back(false);
      }
    }
    std::shuffle(dets.begin(), dets.end(), rng);
    EXPECT_NEAR(AveragePrecision(dets, gt, 0.5), ReferenceAp(flags, gt_count), 1e-12);
  }
}

TEST(CsvTest, Headers) {
  EXPECT_EQ(RecallCurveCsv({}), "threshold,avg_proposals,recall\n");
  EXPECT_EQ(MissRateCsv({}), "bin_left_log2,bin_right_log2,miss_rate,population\n");
  const std::vector<RecallPoint> one = {{0.5, 1.25, 0.75}};
  EXPECT_EQ(RecallCurveCsv(one), "threshold,avg_proposals,recall\n0.5,1.25,0.75\n");
}

}  // namespace
}  // namespace safd
