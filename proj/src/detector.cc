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

#include "safd/detector.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "safd/error.h"
#include "safd/loss.h"
#include "safd/training.h"

namespace safd {

double Iou(const SquareBox& a, const SquareBox& b) {
  const double ix = std::min(a.cx + a.side / 2, b.cx + b.side / 2) -
                    std::max(a.cx - a.side / 2, b.cx - b.side / 2);
  const double iy = std::min(a.cy + a.side / 2, b.cy + b.side / 2) -
                    std::max(a.cy - a.side / 2, b.cy - b.side / 2);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.side * a.side + b.side * b.side - inter);
}

Network<float> BuildDetector(const DetectorConfig& cfg) {
  if (cfg.channels.size() < 3) {
    throw Error(ErrorKind::kConfig, "detector needs at least three conv stages");
  }
  for (int c : cfg.channels) {
    if (c < 1) throw Error(ErrorKind::kConfig, "detector channel widths must be positive");
  }
  Network<float> net;
  int in = 1;
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    const int k = i == 0 ? 5 : 3;
    net.AddConv(in, cfg.channels[i], k, 1, k / 2).AddRelu();
    if (i < 2) net.AddMaxPool2();
    in = cfg.channels[i];
  }
  net.AddConv(in, 4, 1, 1, 0);
  return net;
}

LabelMap AssignLabels(int heatmap_h, int heatmap_w, std::span<const SquareBox> faces,
                      std::span<const Rect> ignore_regions, const AnchorSpec& anchor,
                      const DetectorConfig& cfg) {
  LabelMap map;
  map.height = heatmap_h;
  map.width = heatmap_w;
  const std::size_t cells = static_cast<std::size_t>(heatmap_h) * heatmap_w;
  map.labels.assign(cells, CellLabel::kNegative);
  map.targets.assign(cells * 3, 0.0f);

  const double lo = std::log2(anchor.range.smin());
  const double hi = std::log2(anchor.range.smax());
  const double b = cfg.boundary_ignore_octaves;
  enum class Band { kPositive, kBoundary, kOutside };
  std::vector<Band> bands;
  for (const SquareBox& f : faces) {
    const double s = std::log2(f.side);
    if (b > 0.0 && (std::abs(s - lo) <= b || std::abs(s - hi) <= b)) {
      bands.push_back(Band::kBoundary);
    } else if (s >= lo && s <= hi) {
      bands.push_back(Band::kPositive);
    } else {
      bands.push_back(Band::kOutside);
    }
  }

  const double a = anchor.anchor_side;
  for (int i = 0; i < heatmap_h; ++i) {
    for (int j = 0; j < heatmap_w; ++j) {
      const std::size_t cell = static_cast<std::size_t>(i) * heatmap_w + j;
      const SquareBox box{(j + 0.5) * anchor.stride, (i + 0.5) * anchor.stride, a};
      double best = 0.0;
      int best_face = -1;
      double boundary_best = 0.0;
      for (std::size_t f = 0; f < faces.size(); ++f) {
        const double v = Iou(box, faces[f]);
        if (bands[f] == Band::kPositive && v > best) {
          best = v;
          best_face = static_cast<int>(f);
        } else if (bands[f] == Band::kBoundary) {
          boundary_best = std::max(boundary_best, v);
        }
      }
      if (best_face >= 0 && best >= cfg.positive_iou) {
        map.labels[cell] = CellLabel::kPositive;
        const SquareBox& g = faces[best_face];
        map.targets[cell * 3 + 0] = static_cast<float>((g.cx - box.cx) / a);
        map.targets[cell * 3 + 1] = static_cast<float>((g.cy - box.cy) / a);
        map.targets[cell * 3 + 2] = static_cast<float>(std::log2(g.side / a));
        continue;
      }
      bool ignore = best >= cfg.negative_iou || boundary_best >= cfg.negative_iou;
      for (const Rect& r : ignore_regions) ignore = ignore || r.Contains(box.cx, box.cy);
      if (ignore) map.labels[cell] = CellLabel::kIgnore;
    }
  }
  return map;
}

namespace {

struct Window {
  Image image;
  std::vector<SquareBox> faces;
  std::vector<Rect> ignores;
};

Window SampleWindow(const Sample& sample, const DetectorConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Image& img = sample.image;
  const auto faces = FaceBoxes(sample.annotation, cfg.offsets);
  const double min_dim = std::min(img.height(), img.width());
  const double f_floor = 16.0 / min_dim;

  double f;
  double focus_x = -1.0;
  double focus_y = -1.0;
  if (!faces.empty() && unit(rng) < cfg.train.in_range_fraction) {
    const SquareBox& face = faces[static_cast<std::size_t>(unit(rng) * faces.size())];
    const double target = std::exp2(
        std::log2(cfg.range.smin()) + unit(rng) * std::log2(cfg.range.smax() / cfg.range.smin()));
    f = std::max(f_floor, target / face.side);
    focus_x = face.cx * f;
    focus_y = face.cy * f;
  } else {
    // Any zoom that could appear in a plan, with margin on both sides.
    f = std::max(f_floor, std::exp2(-2.5 + 5.0 * unit(rng)));
  }
  const int sw = ScaledDim(img.width(), f);
  const int sh = ScaledDim(img.height(), f);
  const int w = std::min(cfg.train.crop, sw);
  const int h = std::min(cfg.train.crop, sh);
  auto place = [&](double focus, int full, int win) {
    double origin = focus >= 0.0 ? focus - win / 2.0 + (unit(rng) - 0.5) * win / 2.0
                                 : unit(rng) * (full - win);
    return std::clamp(static_cast<int>(std::floor(origin)), 0, full - win);
  };
  const int x0 = place(focus_x, sw, w);
  const int y0 = place(focus_y, sh, h);

  Window win;
  win.image = ResizeWindow(img, f, x0, y0, w, h);
  const bool flip = unit(rng) < 0.5;
  for (const SquareBox& b : faces) {
    SquareBox m{b.cx * f - x0, b.cy * f - y0, b.side * f};
    if (flip) m.cx = w - m.cx;
    win.faces.push_back(m);
  }
  for (const Rect& r : sample.annotation.ignore_regions) {
    Rect m{r.x * f - x0, r.y * f - y0, r.w * f, r.h * f};
    if (flip) m.x = w - m.x - m.w;
    win.ignores.push_back(m);
  }
  if (flip) {
    for (int y = 0; y < h; ++y) {
      float* row = &win.image.at(0, y, 0);
      std::reverse(row, row + w);
    }
  }
  return win;
}

}  // namespace

TrainResult TrainDetector(std::span<const Sample> dataset, const DetectorConfig& cfg,
                          std::uint64_t seed) {
  if (dataset.empty()) throw Error(ErrorKind::kConfig, "empty detector training set");
  TrainResult result{BuildDetector(cfg), {}};
  Network<float>& net = result.net;
  net.InitWeights(seed);
  const AnchorSpec anchor(cfg.range, net.TotalStride());
  Sgd<float> opt(static_cast<float>(cfg.train.lr), static_cast<float>(cfg.train.momentum),
                 static_cast<float>(cfg.train.weight_decay));
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  result.loss_log.reserve(cfg.train.iterations);

  for (int it = 0; it < cfg.train.iterations; ++it) {
    opt.set_lr(static_cast<float>(StepLr(cfg.train.lr, it, cfg.train.iterations)));
    const Window win = SampleWindow(dataset[pick(rng)], cfg, rng);
    net.ZeroGrad();
    const Tensor<float> out = net.Forward(win.image);
    const int hh = out.height();
    const int ww = out.width();
    const LabelMap labels = AssignLabels(hh, ww, win.faces, win.ignores, anchor, cfg);

    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    for (CellLabel l : labels.labels) {
      n_pos += l == CellLabel::kPositive;
      n_neg += l == CellLabel::kNegative;
    }
    Tensor<float> grad(out.shape());
    const std::size_t plane = static_cast<std::size_t>(hh) * ww;
    double loss = 0.0;
    for (std::size_t c = 0; c < plane; ++c) {
      const CellLabel l = labels.labels[c];
      if (l == CellLabel::kIgnore) continue;
      const float logit = out[c];
      const float target = l == CellLabel::kPositive ? 1.0f : 0.0f;
      const float norm = static_cast<float>(l == CellLabel::kPositive ? n_pos : n_neg);
      loss += SigmoidCe(logit, target) / norm;
      grad[c] = (Sigmoid(logit) - target) / norm;
      if (l != CellLabel::kPositive) continue;
      const float w = static_cast<float>(cfg.train.regression_weight) / n_pos;
      for (int k = 0; k < 3; ++k) {
        float d = 0.0f;
        loss += w * SmoothL1(out[(k + 1) * plane + c] - labels.targets[c * 3 + k], &d);
        grad[(k + 1) * plane + c] = w * d;
      }
    }
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::kNumeric, "detector loss is not finite at iteration " +
                                           std::to_string(it));
    }
    net.Backward(grad);
    opt.Step(net);
    result.loss_log.push_back(static_cast<float>(loss));
  }
  return result;
}

std::vector<Detection> DetectSingleScale(const Network<float>& net, const Image& image,
                                         const AnchorSpec& anchor, double score_threshold,
                                         double nms_iou) {
  const Tensor<float> out = net.Infer(image);
  const std::size_t plane = static_cast<std::size_t>(out.height()) * out.width();
  const double a = anchor.anchor_side;
  std::vector<Detection> dets;
  for (int i = 0; i < out.height(); ++i) {
    for (int j = 0; j < out.width(); ++j) {
      const std::size_t c = static_cast<std::size_t>(i) * out.width() + j;
      const double score = Sigmoid(static_cast<double>(out[c]));
      if (!(score > score_threshold)) continue;
      Detection d;
      d.box.cx = (j + 0.5) * anchor.stride + out[plane + c] * a;
      d.box.cy = (i + 0.5) * anchor.stride + out[2 * plane + c] * a;
      d.box.side = a * std::exp2(static_cast<double>(out[3 * plane + c]));
      d.score = score;
      dets.push_back(d);
    }
  }
  return BoxNms(dets, nms_iou);
}

std::vector<Detection> BoxNms(std::span<const Detection> dets, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const Detection& a = dets[x];
    const Detection& b = dets[y];
    if (a.score != b.score) return a.score > b.score;
    if (a.box.cy != b.box.cy) return a.box.cy < b.box.cy;
    if (a.box.cx != b.box.cx) return a.box.cx < b.box.cx;
    return x < y;
  });
  std::vector<Detection> kept;
  for (std::size_t idx : order) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (Iou(k.box, dets[idx].box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(dets[idx]);
  }
  return kept;
}

Detection UnmapDetection(const Detection& det, double factor) {
  Detection d = det;
  d.box.cx /= factor;
  d.box.cy /= factor;
  d.box.side /= factor;
  d.zoom_factor = factor;
  return d;
}

std::vector<Detection> DetectWithPlan(const Network<float>& net, const Image& image,
                                      std::span<const ZoomAction> plan,
                                      const AnchorSpec& anchor, double score_threshold,
                                      double nms_iou) {
  std::vector<Detection> all;
  for (const ZoomAction& action : plan) {
    const Image zoomed = ResizeBilinear(image, action.scale_factor);
    for (const Detection& d :
         DetectSingleScale(net, zoomed, anchor, score_threshold, nms_iou)) {
      all.push_back(UnmapDetection(d, action.scale_factor));
    }
  }
  return BoxNms(all, nms_iou);
}

}  // namespace safd
