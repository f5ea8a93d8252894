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

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace safd {

// Log2-spaced bins over face sizes. Bin i (1-based) covers sizes
// [2^(s0 + (i-1)d), 2^(s0 + i*d)) with d = (sn - s0) / n.
class HistogramSpec {
 public:
  HistogramSpec(double s0, double sn, int n);

  double s0() const { return s0_; }
  double sn() const { return sn_; }
  int bins() const { return n_; }
  double bin_width() const { return (sn_ - s0_) / n_; }

  bool operator==(const HistogramSpec&) const = default;

 private:
  double s0_;
  double sn_;
  int n_;
};

// Per-bin probabilities that a face of that size is present in the image.
class ScaleHistogram {
 public:
  explicit ScaleHistogram(const HistogramSpec& spec);  // all zeros
  ScaleHistogram(const HistogramSpec& spec, std::vector<double> values);

  const HistogramSpec& spec() const { return spec_; }
  std::span<const double> values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  // 0-based access.
  double operator[](int k) const { return values_[k]; }

 private:
  HistogramSpec spec_;
  std::vector<double> values_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Left eye, right eye, nose, left mouth corner, right mouth corner.
struct Landmarks5 {
  std::array<Point2, 5> points;
};

// ox and oy are in units of the derived side; os multiplies std(y).
struct LandmarkBoxOffsets {
  double ox = 0.0;
  double oy = 0.0;
  double os = 2.0;
};

struct SquareBox {
  double cx = 0.0;
  double cy = 0.0;
  double side = 0.0;
};

// Returns (left, right) edge of bin i in log2 pixels; i is 1-based.
std::pair<double, double> BinEdges(const HistogramSpec& spec, int i);
double BinCenter(const HistogramSpec& spec, int i);

SquareBox BoxFromLandmarks(const Landmarks5& lm, const LandmarkBoxOffsets& off);

double GaussianLabel(double face_log2_size, double bin_center, double sigma);

// Element-wise max over one Gaussian per face, sampled at bin centers.
ScaleHistogram GtHistogram(const HistogramSpec& spec,
                           std::span<const double> face_sizes, double sigma);

ScaleHistogram MergeMax(const ScaleHistogram& a, const ScaleHistogram& b);

}  // namespace safd
