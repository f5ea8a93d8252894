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
#include <span>
#include <vector>

#include "safd/annotation.h"
#include "safd/image.h"
#include "safd/network.h"
#include "safd/proposal.h"
#include "safd/synthgen.h"
#include "safd/scale_histogram.h"

namespace safd {

struct Detection {
  SquareBox box;  // original-image pixels
  double score = 0.0;
  double zoom_factor = 1.0;
};

// The single anchor sits at the geometric mean of a one-octave range.
struct AnchorSpec {
  explicit AnchorSpec(const DetectorRange& r, int heatmap_stride = 4)
      : range(r), anchor_side(r.target()), stride(heatmap_stride) {}

  DetectorRange range;
  double anchor_side;
  int stride;
};

struct DetectorTrainParams {
  int iterations = 12000;
  double lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int crop = 96;                 // training window side, pixels
  double in_range_fraction = 0.6;  // windows centred on a face zoomed into range
  double regression_weight = 2.0;
};

struct DetectorConfig {
  DetectorRange range{24.0, 48.0};
  std::vector<int> channels{16, 32, 32, 32, 32};
  double positive_iou = 0.5;
  double negative_iou = 0.3;
  // Faces within this many octaves of either range boundary are neither
  // positive nor negative. Zero gives the plain in-range/out-of-range rule.
  double boundary_ignore_octaves = 0.25;
  double score_threshold = 0.5;
  double nms_iou = 0.3;
  LandmarkBoxOffsets offsets;
  DetectorTrainParams train;
};

double Iou(const SquareBox& a, const SquareBox& b);

// Conv trunk with a 1x1 head of four channels: face logit, dx, dy, dlog2side.
Network<float> BuildDetector(const DetectorConfig& cfg);

enum class CellLabel : std::int8_t { kIgnore = -1, kNegative = 0, kPositive = 1 };

struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<CellLabel> labels;
  // dx/anchor, dy/anchor, log2(side/anchor) for positive cells.
  std::vector<float> targets;
};

// Cell (i, j) holds the anchor centred at ((j + 0.5) * stride, (i + 0.5) * stride).
LabelMap AssignLabels(int heatmap_h, int heatmap_w, std::span<const SquareBox> faces,
                      std::span<const Rect> ignore_regions, const AnchorSpec& anchor,
                      const DetectorConfig& cfg);

struct TrainResult {
  Network<float> net;
  std::vector<float> loss_log;
};

TrainResult TrainDetector(std::span<const Sample> dataset, const DetectorConfig& cfg,
                          std::uint64_t seed);

// Decodes every cell scoring above the threshold, then applies box NMS.
// Boxes are in the coordinates of the given image.
std::vector<Detection> DetectSingleScale(const Network<float>& net, const Image& image,
                                         const AnchorSpec& anchor, double score_threshold,
                                         double nms_iou = 0.3);

// Greedy suppression by descending score; equal scores go to smaller (cy, cx).
std::vector<Detection> BoxNms(std::span<const Detection> dets, double iou_threshold);

// Boxes found at zoom f are divided by f to return to original pixels.
Detection UnmapDetection(const Detection& det, double factor);

std::vector<Detection> DetectWithPlan(const Network<float>& net, const Image& image,
                                      std::span<const ZoomAction> plan,
                                      const AnchorSpec& anchor, double score_threshold,
                                      double nms_iou = 0.3);

}  // namespace safd
