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

#include "safd/proposal.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "safd/error.h"

namespace safd {
namespace {

ScaleHistogram Hist(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return ScaleHistogram(HistogramSpec(0, n, n), std::move(v));
}

// Brute-force peak scan: v[i] > 0 and v[i] beats every neighbor within the
// radius, with ties going to the lower index.
std::vector<int> ReferencePeaks(const std::vector<double>& v, int radius) {
  std::vector<int> out;
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    if (!(v[i] > 0)) continue;
    bool peak = true;
    for (int j = std::max(0, i - radius); j <= std::min(n - 1, i + radius); ++j) {
      if (j < i && v[j] >= v[i]) peak = false;
      if (j > i && v[j] > v[i]) peak = false;
    }
    if (peak) out.push_back(i);
  }
  return out;
}

TEST(SmoothTest, ConstantUnchanged) {
  const ScaleHistogram h = Smooth(Hist(std::vector<double>(9, 0.3)), 5);
  for (double v : h.values()) EXPECT_NEAR(v, 0.3, 1e-15);
}

TEST(SmoothTest, CenteredImpulse) {
  const ScaleHistogram h = Smooth(Hist({0, 0, 1, 0, 0}), 3);
  const double expect[5] = {0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0};
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(h[k], expect[k], 1e-15);
}

TEST(SmoothTest, EdgeWindowShrinks) {
  const ScaleHistogram h = Smooth(Hist({1, 0, 0, 0, 0}), 3);
  const double expect[5] = {0.5, 1.0 / 3, 0, 0, 0};
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(h[k], expect[k], 1e-15);
}

TEST(SmoothTest, BadWindow) {
  const ScaleHistogram h = Hist({1, 0, 0, 0, 0});
  for (int w : {0, 2, 4, 7, -1}) {
    try {
      Smooth(h, w);
      FAIL() << w;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kParameter);
    }
  }
}

TEST(SmoothTest, MatchesDirectMean) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(30);
    for (double& x : v) x = u(rng);
    for (int w : {1, 3, 5, 9, 29}) {
      const ScaleHistogram h = Smooth(Hist(v), w);
      const int r = w / 2;
      for (int i = 0; i < 30; ++i) {
        double sum = 0;
        int cnt = 0;
        for (int j = i - r; j <= i + r; ++j) {
          if (j < 0 || j >= 30) continue;
          sum += v[j];
          ++cnt;
        }
        EXPECT_NEAR(h[i], sum / cnt, 1e-12);
      }
    }
  }
}

TEST(Nms1dTest, TwoPeaks) {
  const auto peaks = Nms1d(Hist({0.1, 0.9, 0.1, 0.1, 0.8, 0.1}), 1);
  ASSERT_EQ(peaks.size(), 2u);
  // Bins 2 and 5 have centers 1.5 and 4.5 on this grid.
  EXPECT_DOUBLE_EQ(peaks[0].log2_size, 1.5);
  EXPECT_DOUBLE_EQ(peaks[0].confidence, 0.9);
  EXPECT_DOUBLE_EQ(peaks[1].log2_size, 4.5);
  EXPECT_DOUBLE_EQ(peaks[1].confidence, 0.8);
}

TEST(Nms1dTest, MonotoneAndZero) {
  const auto mono = Nms1d(Hist({0.1, 0.2, 0.3, 0.4, 0.5}), 1);
  ASSERT_EQ(mono.size(), 1u);
  EXPECT_DOUBLE_EQ(mono[0].confidence, 0.5);
  EXPECT_TRUE(Nms1d(Hist(std::vector<double>(6, 0.0)), 1).empty());
}

TEST(Nms1dTest, PlateauKeepsLowestIndex) {
  const auto peaks = Nms1d(Hist({0, 0.5, 0.5, 0.5, 0}), 2);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_DOUBLE_EQ(peaks[0].log2_size, 1.5);
}

TEST(Nms1dTest, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> level(0, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(25);
    // Coarse levels produce plenty of ties.
    for (double& x : v) x = level(rng) / 5.0;
    for (int r : {1, 2, 4}) {
      const auto peaks = Nms1d(Hist(v), r);
      const auto ref = ReferencePeaks(v, r);
      ASSERT_EQ(peaks.size(), ref.size());
      for (size_t k = 0; k < ref.size(); ++k) {
        EXPECT_DOUBLE_EQ(peaks[k].log2_size, ref[k] + 0.5);
        EXPECT_DOUBLE_EQ(peaks[k].confidence, v[ref[k]]);
      }
    }
  }
}

TEST(SelectProposalsTest, Examples) {
  const std::vector<ScaleProposal> two = {{5, 0.9}, {6, 0.3}};
  const auto one = SelectProposals(two, 0.5, 4);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0].confidence, 0.9);

  EXPECT_TRUE(SelectProposals({}, 0.5, 4).empty());

  const std::vector<ScaleProposal> three = {{4, 0.7}, {5, 0.9}, {6, 0.8}};
  const auto top = SelectProposals(three, 0.5, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_DOUBLE_EQ(top[0].confidence, 0.9);
  EXPECT_DOUBLE_EQ(top[1].confidence, 0.8);
}

TEST(SelectProposalsTest, MatchesSortFilterTruncate) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> level(0, 10);
  std::uniform_int_distribution<int> count(0, 12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ScaleProposal> peaks(count(rng));
    for (size_t k = 0; k < peaks.size(); ++k) {
      peaks[k] = {static_cast<double>(k), level(rng) / 10.0};
    }
    const double thr = level(rng) / 10.0;
    const int max_count = count(rng) % 5;
    std::vector<ScaleProposal> ref;
    for (const auto& p : peaks) {
      if (p.confidence > thr) ref.push_back(p);
    }
    // Insertion sort keeps equal confidences in input order.
    for (size_t i = 1; i < ref.size(); ++i) {
      for (size_t j = i; j > 0 && ref[j - 1].confidence < ref[j].confidence; --j) {
        std::swap(ref[j - 1], ref[j]);
      }
    }
    if (ref.size() > static_cast<size_t>(max_count)) ref.resize(max_count);
    const auto got = SelectProposals(peaks, thr, max_count);
    ASSERT_EQ(got.size(), ref.size());
    for (size_t k = 0; k < ref.size(); ++k) {
      EXPECT_EQ(got[k].log2_size, ref[k].log2_size);
    }
  }
}

TEST(SelectProposalsTest, BadParams) {
  const std::vector<ScaleProposal> p = {{5, 0.9}};
  EXPECT_THROW(SelectProposals(p, 1.5, 2), Error);
  EXPECT_THROW(SelectProposals(p, -0.1, 2), Error);
}

TEST(DetectorRangeTest, Validation) {
  EXPECT_NO_THROW(DetectorRange(36, 72));
  EXPECT_THROW(DetectorRange(36, 80), Error);
  EXPECT_THROW(DetectorRange(0, 0), Error);
  EXPECT_NEAR(DetectorRange(36, 72).target(), std::sqrt(36.0 * 72.0), 1e-12);
}

TEST(PlanZoomsTest, Examples) {
  const DetectorRange range(36, 72);
  const std::vector<ScaleProposal> p = {{7, 0.9}};
  const auto plan = PlanZooms(p, range);
  ASSERT_EQ(plan.size(), 1u);
  EXPECT_NEAR(plan[0].scale_factor, std::sqrt(2592.0) / 128.0, 1e-12);
  EXPECT_NEAR(plan[0].scale_factor, 0.39775, 1e-5);

  const std::vector<ScaleProposal> at_target = {{std::log2(range.target()), 0.9}};
  EXPECT_NEAR(PlanZooms(at_target, range)[0].scale_factor, 1.0, 1e-12);

  const std::vector<ScaleProposal> octave = {{5, 0.9}, {6, 0.8}};
  const auto pair = PlanZooms(octave, range);
  EXPECT_NEAR(pair[0].scale_factor / pair[1].scale_factor, 2.0, 1e-12);
}

TEST(ProposeZoomsTest, SingleFaceSweep) {
  const HistogramSpec spec(2, 8, 60);
  const DetectorRange range(24, 48);
  ProposalParams params;
  params.smooth_window = SmoothingWindowForSpec(spec);
  for (int i = 1; i <= spec.bins(); ++i) {
    const double s = BinCenter(spec, i);
    const std::vector<double> faces = {std::exp2(s)};
    const auto plan = ProposeZooms(GtHistogram(spec, faces, 0.4), params, range);
    ASSERT_EQ(plan.size(), 1u) << "bin " << i;
    EXPECT_TRUE(range.Contains(std::exp2(s) * plan[0].scale_factor)) << "bin " << i;
  }
}

TEST(SmoothingWindowTest, HalfOctave) {
  EXPECT_EQ(SmoothingWindowForSpec(HistogramSpec(3, 9, 60)), 5);
  EXPECT_EQ(SmoothingWindowForSpec(HistogramSpec(2, 8, 60)), 5);
  EXPECT_EQ(SmoothingWindowForSpec(HistogramSpec(3, 7, 40)), 5);
  EXPECT_EQ(SmoothingWindowForSpec(HistogramSpec(0, 6, 6)), 1);
}

}  // namespace
}  // namespace safd
