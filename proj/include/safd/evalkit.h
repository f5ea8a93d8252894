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
#include <string>
#include <vector>

#include "safd/annotation.h"
#include "safd/detector.h"
#include "safd/proposal.h"
#include "safd/scale_histogram.h"

namespace safd {

struct RecallPoint {
  double threshold = 0.0;
  double avg_proposals_per_image = 0.0;
  double recall = 0.0;
};

// True iff some action maps the face into [smin, smax] (closed interval).
bool ScaleRecalled(double face_size, std::span<const ZoomAction> plan,
                   const DetectorRange& range);

struct ImageScaleData {
  ScaleHistogram histogram;
  std::vector<double> face_sizes;
};

struct FaceRecall {
  double size = 0.0;
  bool recalled = false;
};

struct ScaleRecallResult {
  RecallPoint point;
  std::vector<FaceRecall> faces;
  std::size_t total_proposals = 0;
};

ScaleRecallResult EvaluateScaleRecall(std::span<const ImageScaleData> images,
                                      const ProposalParams& params,
                                      const DetectorRange& range);

// One point per threshold; all other proposal parameters come from base.
std::vector<RecallPoint> RecallCurve(std::span<const ImageScaleData> images,
                                     const ProposalParams& base,
                                     const DetectorRange& range,
                                     std::span<const double> thresholds);

// Highest recall among points with at most max_avg proposals per image.
RecallPoint BestRecallWithin(std::span<const RecallPoint> curve, double max_avg);

struct SizeBin {
  double left_log2 = 0.0;
  double right_log2 = 0.0;
};

struct MissRateBin {
  SizeBin bin;
  double miss_rate = 0.0;
  std::size_t population = 0;
};

// Bins are half-open [left, right); bins with no faces are omitted.
std::vector<MissRateBin> MissRateBySize(std::span<const FaceRecall> faces,
                                        std::span<const SizeBin> bins);

// Equal-width log2 bins covering [lo, hi).
std::vector<SizeBin> UniformSizeBins(double lo, double hi, int count);

struct ImageDetections {
  std::vector<Detection> detections;
  std::vector<SquareBox> ground_truth;
  std::vector<Rect> ignore_regions;
};

// Greedy score-descending matching at IoU >= threshold, each ground truth
// matched once, all-points interpolated precision-recall area.
double AveragePrecision(std::span<const Detection> dets, std::span<const SquareBox> gt,
                        double iou_threshold);

// Pooled over images. Unmatched detections centred in an ignore region are
// dropped rather than counted as false positives.
double AveragePrecision(std::span<const ImageDetections> images, double iou_threshold);

std::string RecallCurveCsv(std::span<const RecallPoint> curve);
std::string MissRateCsv(std::span<const MissRateBin> bins);
std::string ApSummaryCsv(double ap, double iou_threshold, std::size_t detections,
                         std::size_t ground_truth);

}  // namespace safd
