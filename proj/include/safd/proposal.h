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

#include <span>
#include <vector>

#include "safd/scale_histogram.h"

namespace safd {

struct ScaleProposal {
  double log2_size = 0.0;
  double confidence = 0.0;
};

// Face sizes a single-scale detector covers. One octave: smax == 2 * smin.
class DetectorRange {
 public:
  DetectorRange(double smin, double smax);

  double smin() const { return smin_; }
  double smax() const { return smax_; }
  // Geometric mean; the midpoint of the range in log scale.
  double target() const;
  bool Contains(double size) const { return size >= smin_ && size <= smax_; }

 private:
  double smin_;
  double smax_;
};

struct ZoomAction {
  double scale_factor = 1.0;
  ScaleProposal source_proposal;
};

struct ProposalParams {
  int smooth_window = 5;  // full span in bins, odd
  int nms_radius = 4;     // peaks must dominate +-nms_radius bins
  double threshold = 0.5;
  int max_count = 4;
};

// Centered moving average with shrinking windows at the edges.
ScaleHistogram Smooth(const ScaleHistogram& h, int window_bins);

// Local maxima over +-window_bins; equal values resolve to the smaller index.
std::vector<ScaleProposal> Nms1d(const ScaleHistogram& h, int window_bins);

std::vector<ScaleProposal> SelectProposals(std::span<const ScaleProposal> peaks,
                                           double threshold, int max_count);

std::vector<ZoomAction> PlanZooms(std::span<const ScaleProposal> proposals,
                                  const DetectorRange& range);

// Smooth -> Nms1d -> SelectProposals -> PlanZooms.
std::vector<ZoomAction> ProposeZooms(const ScaleHistogram& h,
                                     const ProposalParams& params,
                                     const DetectorRange& range);

// Half an octave of bins, rounded to the nearest odd count.
int SmoothingWindowForSpec(const HistogramSpec& spec);

}  // namespace safd
