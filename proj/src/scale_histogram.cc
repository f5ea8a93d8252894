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

#include "safd/scale_histogram.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "safd/error.h"

namespace safd {

HistogramSpec::HistogramSpec(double s0, double sn, int n)
    : s0_(s0), sn_(sn), n_(n) {
  if (!(std::isfinite(s0) && std::isfinite(sn)) || !(s0 < sn) || n < 1) {
    throw Error(ErrorKind::kParameter,
                "histogram spec requires s0 < sn and n >= 1");
  }
}

ScaleHistogram::ScaleHistogram(const HistogramSpec& spec)
    : spec_(spec), values_(spec.bins(), 0.0) {}

ScaleHistogram::ScaleHistogram(const HistogramSpec& spec,
                               std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != spec_.bins()) {
    throw Error(ErrorKind::kShape, "histogram length " +
                                       std::to_string(values_.size()) +
                                       " != bin count " +
                                       std::to_string(spec_.bins()));
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::kRange, "histogram value outside [0,1]");
    }
  }
}

std::pair<double, double> BinEdges(const HistogramSpec& spec, int i) {
  if (i < 1 || i > spec.bins()) {
    throw Error(ErrorKind::kRange, "bin index " + std::to_string(i) +
                                       " outside 1.." +
                                       std::to_string(spec.bins()));
  }
  const double d = spec.bin_width();
  return {spec.s0() + (i - 1) * d, spec.s0() + i * d};
}

double BinCenter(const HistogramSpec& spec, int i) {
  const auto [left, right] = BinEdges(spec, i);
  return 0.5 * (left + right);
}

SquareBox BoxFromLandmarks(const Landmarks5& lm,
                           const LandmarkBoxOffsets& off) {
  if (!(off.os > 0.0)) {
    throw Error(ErrorKind::kParameter, "landmark offset os must be positive");
  }
  double mx = 0.0;
  double my = 0.0;
  for (const Point2& p : lm.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::kAnnotation, "non-finite landmark coordinate");
    }
    mx += p.x;
    my += p.y;
  }
  mx /= 5.0;
  my /= 5.0;
  double var = 0.0;
  for (const Point2& p : lm.points) var += (p.y - my) * (p.y - my);
  const double side = std::sqrt(var / 5.0) * off.os;
  if (!(side > 0.0)) {
    throw Error(ErrorKind::kDegenerateAnnotation,
                "landmark y coordinates are identical; box side is zero");
  }
  return {mx + off.ox * side, my + off.oy * side, side};
}

double GaussianLabel(double face_log2_size, double bin_center, double sigma) {
  const double z = bin_center - face_log2_size;
  return std::exp(-(z * z) / (2.0 * sigma * sigma));
}

ScaleHistogram GtHistogram(const HistogramSpec& spec,
                           std::span<const double> face_sizes, double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorKind::kParameter, "sigma must be positive");
  }
  std::vector<double> values(spec.bins(), 0.0);
  for (double size : face_sizes) {
    if (!(size > 0.0) || !std::isfinite(size)) {
      throw Error(ErrorKind::kAnnotation, "face size must be positive");
    }
    const double log_size = std::log2(size);
    for (int i = 1; i <= spec.bins(); ++i) {
      values[i - 1] = std::max(values[i - 1],
                               GaussianLabel(log_size, BinCenter(spec, i), sigma));
    }
  }
  return ScaleHistogram(spec, std::move(values));
}

ScaleHistogram MergeMax(const ScaleHistogram& a, const ScaleHistogram& b) {
  if (!(a.spec() == b.spec())) {
    throw Error(ErrorKind::kShape, "merging histograms with different specs");
  }
  std::vector<double> values(a.size());
  for (int k = 0; k < a.size(); ++k) values[k] = std::max(a[k], b[k]);
  return ScaleHistogram(a.spec(), std::move(values));
}

}  // namespace safd
