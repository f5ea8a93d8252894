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
#include <numeric>
#include <sstream>

#include "safd/csv.h"

namespace safd {

bool ScaleRecalled(double face_size, std::span<const ZoomAction> plan,
                   const DetectorRange& range) {
  return std::any_of(plan.begin(), plan.end(), [&](const ZoomAction& a) {
    return range.Contains(face_size * a.scale_factor);
  });
}

ScaleRecallResult EvaluateScaleRecall(std::span<const ImageScaleData> images,
                                      const ProposalParams& params,
                                      const DetectorRange& range) {
  ScaleRecallResult result;
  result.point.threshold = params.threshold;
  std::size_t recalled = 0;
  for (const ImageScaleData& img : images) {
    const auto plan = ProposeZooms(img.histogram, params, range);
    result.total_proposals += plan.size();
    for (double size : img.face_sizes) {
      const bool hit = ScaleRecalled(size, plan, range);
      recalled += hit;
      result.faces.push_back({size, hit});
    }
  }
  result.point.recall =
      result.faces.empty() ? 0.0 : static_cast<double>(recalled) / result.faces.size();
  result.point.avg_proposals_per_image =
      images.empty() ? 0.0 : static_cast<double>(result.total_proposals) / images.size();
  return result;
}

std::vector<RecallPoint> RecallCurve(std::span<const ImageScaleData> images,
                                     const ProposalParams& base,
                                     const DetectorRange& range,
                                     std::span<const double> thresholds) {
  std::vector<RecallPoint> curve;
  for (double t : thresholds) {
    ProposalParams p = base;
    p.threshold = t;
    curve.push_back(EvaluateScaleRecall(images, p, range).point);
  }
  return curve;
}

RecallPoint BestRecallWithin(std::span<const RecallPoint> curve, double max_avg) {
  RecallPoint best;
  for (const RecallPoint& p : curve) {
    if (p.avg_proposals_per_image <= max_avg && p.recall > best.recall) best = p;
  }
  return best;
}

std::vector<MissRateBin> MissRateBySize(std::span<const FaceRecall> faces,
                                        std::span<const SizeBin> bins) {
  std::vector<MissRateBin> out;
  for (const SizeBin& b : bins) {
    std::size_t total = 0;
    std::size_t missed = 0;
    for (const FaceRecall& f : faces) {
      const double s = std::log2(f.size);
      if (s >= b.left_log2 && s < b.right_log2) {
        ++total;
        missed += !f.recalled;
      }
    }
    if (total == 0) continue;
    out.push_back({b, static_cast<double>(missed) / total, total});
  }
  return out;
}

std::vector<SizeBin> UniformSizeBins(double lo, double hi, int count) {
  std::vector<SizeBin> bins;
  const double w = (hi - lo) / count;
  for (int i = 0; i < count; ++i) bins.push_back({lo + i * w, lo + (i + 1) * w});
  return bins;
}

namespace {

struct Scored {
  double score;
  bool tp;
};

void MatchImage(std::span<const Detection> dets, std::span<const SquareBox> gt,
                std::span<const Rect> ignores, double iou_threshold,
                std::vector<Scored>& out) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<bool> used(gt.size(), false);
  for (std::size_t idx : order) {
    const Detection& d = dets[idx];
    double best = iou_threshold;
    int match = -1;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (used[g]) continue;
      const double v = Iou(d.box, gt[g]);
      if (v >= best) {
        best = v;
        match = static_cast<int>(g);
      }
    }
    if (match >= 0) {
      used[match] = true;
      out.push_back({d.score, true});
      continue;
    }
    const bool ignored = std::any_of(ignores.begin(), ignores.end(), [&](const Rect& r) {
      return r.Contains(d.box.cx, d.box.cy);
    });
    if (!ignored) out.push_back({d.score, false});
  }
}

double AreaUnderPr(std::vector<Scored> scored, std::size_t total_gt) {
  if (total_gt == 0 || scored.empty()) return 0.0;
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });
  std::vector<double> precision(scored.size());
  std::vector<double> recall(scored.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < scored.size(); ++k) {
    tp += scored[k].tp;
    precision[k] = static_cast<double>(tp) / (k + 1);
    recall[k] = static_cast<double>(tp) / total_gt;
  }
  // Interpolated precision: best precision at any equal-or-higher recall.
  for (std::size_t k = scored.size() - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < scored.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

}  // namespace

double AveragePrecision(std::span<const Detection> dets, std::span<const SquareBox> gt,
                        double iou_threshold) {
  std::vector<Scored> scored;
  MatchImage(dets, gt, {}, iou_threshold, scored);
  return AreaUnderPr(std::move(scored), gt.size());
}

double AveragePrecision(std::span<const ImageDetections> images, double iou_threshold) {
  std::vector<Scored> scored;
  std::size_t total_gt = 0;
  for (const ImageDetections& img : images) {
    MatchImage(img.detections, img.ground_truth, img.ignore_regions, iou_threshold, scored);
    total_gt += img.ground_truth.size();
  }
  return AreaUnderPr(std::move(scored), total_gt);
}

std::string RecallCurveCsv(std::span<const RecallPoint> curve) {
  std::ostringstream os;
  os << "threshold,avg_proposals,recall\n";
  for (const RecallPoint& p : curve) {
    os << FormatDouble(p.threshold) << "," << FormatDouble(p.avg_proposals_per_image) << ","
       << FormatDouble(p.recall) << "\n";
  }
  return os.str();
}

std::string MissRateCsv(std::span<const MissRateBin> bins) {
  std::ostringstream os;
  os << "bin_left_log2,bin_right_log2,miss_rate,population\n";
  for (const MissRateBin& b : bins) {
    os << FormatDouble(b.bin.left_log2) << "," << FormatDouble(b.bin.right_log2) << ","
       << FormatDouble(b.miss_rate) << "," << b.population << "\n";
  }
  return os.str();
}

std::string ApSummaryCsv(double ap, double iou_threshold, std::size_t detections,
                         std::size_t ground_truth) {
  std::ostringstream os;
  os << "average_precision,iou_threshold,detections,ground_truth\n"
     << FormatDouble(ap) << "," << FormatDouble(iou_threshold) << "," << detections << ","
     << ground_truth << "\n";
  return os.str();
}

}  // namespace safd
