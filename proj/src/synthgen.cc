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

#include "safd/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "safd/detector.h"
#include "safd/error.h"

namespace safd {
namespace {

constexpr double kGlyphYs[5] = {kEyeDy, kEyeDy, kNoseDy, kMouthDy, kMouthDy};

double Lerp(double a, double b, double t) { return a + (b - a) * t; }

// Blends value into the image with the given coverage in [0, 1].
void Blend(Image& img, int x, int y, double value, double coverage) {
  if (coverage <= 0.0 || x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  float& px = img.at(0, y, x);
  px = static_cast<float>(Lerp(px, value, coverage));
}

// Value noise: bilinear interpolation of a random lattice.
void FillBackground(Image& img, const BackgroundParams& bg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double base = Lerp(bg.base_min, bg.base_max, unit(rng));
  const int cell = std::max(1, bg.blob_cell);
  const int gw = img.width() / cell + 2;
  const int gh = img.height() / cell + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (double& v : lattice) v = unit(rng) * 2.0 - 1.0;
  for (int y = 0; y < img.height(); ++y) {
    const double fy = static_cast<double>(y) / cell;
    const int y0 = static_cast<int>(fy);
    const double ty = fy - y0;
    for (int x = 0; x < img.width(); ++x) {
      const double fx = static_cast<double>(x) / cell;
      const int x0 = static_cast<int>(fx);
      const double tx = fx - x0;
      auto l = [&](int yy, int xx) { return lattice[static_cast<std::size_t>(yy) * gw + xx]; };
      const double top = Lerp(l(y0, x0), l(y0, x0 + 1), tx);
      const double bot = Lerp(l(y0 + 1, x0), l(y0 + 1, x0 + 1), tx);
      const double blob = Lerp(top, bot, ty) * bg.blob_amplitude;
      const double grain = (unit(rng) * 2.0 - 1.0) * bg.grain_amplitude;
      img.at(0, y, x) = static_cast<float>(std::clamp(base + blob + grain, 0.0, 1.0));
    }
  }
}

// 4x4 supersampled coverage of a shape given by an inside() predicate over
// the pixel square [x, x+1) x [y, y+1).
template <typename Inside>
void Paint(Image& img, double x0, double y0, double x1, double y1, double value,
           Inside inside) {
  const int px0 = std::max(0, static_cast<int>(std::floor(x0)));
  const int py0 = std::max(0, static_cast<int>(std::floor(y0)));
  const int px1 = std::min(img.width() - 1, static_cast<int>(std::ceil(x1)));
  const int py1 = std::min(img.height() - 1, static_cast<int>(std::ceil(y1)));
  for (int y = py0; y <= py1; ++y) {
    for (int x = px0; x <= px1; ++x) {
      int hits = 0;
      for (int sy = 0; sy < 4; ++sy) {
        for (int sx = 0; sx < 4; ++sx) {
          hits += inside(x + (sx + 0.5) / 4.0, y + (sy + 0.5) / 4.0);
        }
      }
      Blend(img, x, y, value, hits / 16.0);
    }
  }
}

void PaintDisc(Image& img, double cx, double cy, double r, double value) {
  Paint(img, cx - r, cy - r, cx + r, cy + r, value, [&](double x, double y) {
    return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
  });
}

void PaintRect(Image& img, double x0, double y0, double x1, double y1, double value) {
  Paint(img, x0, y0, x1, y1, value, [&](double x, double y) {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  });
}

void PaintGlyph(Image& img, const FaceGlyph& g) {
  std::mt19937_64 rng(g.appearance_seed);
  std::uniform_real_distribution<double> skin(0.72, 0.95);
  std::uniform_real_distribution<double> dark(0.03, 0.22);
  const double s = g.side;
  const double feature = dark(rng);
  PaintDisc(img, g.cx, g.cy, s / 2.0, skin(rng));
  PaintDisc(img, g.cx - kEyeDx * s, g.cy + kEyeDy * s, s / 12.0, feature);
  PaintDisc(img, g.cx + kEyeDx * s, g.cy + kEyeDy * s, s / 12.0, feature);
  PaintDisc(img, g.cx, g.cy + kNoseDy * s, s / 24.0, 0.5 * (feature + 0.6));
  PaintRect(img, g.cx - kMouthDx * s, g.cy + kMouthDy * s - s / 24.0,
            g.cx + kMouthDx * s, g.cy + kMouthDy * s + s / 24.0, feature);
}

void PaintDistractors(Image& img, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    const double size = std::exp2(Lerp(2.5, 6.5, unit(rng)));
    const double cx = unit(rng) * img.width();
    const double cy = unit(rng) * img.height();
    const double value = Lerp(0.05, 0.95, unit(rng));
    if (unit(rng) < 0.5) {
      PaintDisc(img, cx, cy, size / 2.0, value);
    } else {
      const double aspect = std::exp2(Lerp(-1.5, 1.5, unit(rng)));
      const double w = size * std::sqrt(aspect);
      const double h = size / std::sqrt(aspect);
      PaintRect(img, cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2, value);
    }
  }
}

// Stand-in for hard-to-annotate content: a cluster of small blobs.
void PaintIgnoreContent(Image& img, const Rect& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int blobs = 6 + static_cast<int>(unit(rng) * 10);
  for (int k = 0; k < blobs; ++k) {
    const double rad = Lerp(1.5, 4.0, unit(rng));
    PaintDisc(img, r.x + unit(rng) * r.w, r.y + unit(rng) * r.h, rad, Lerp(0.1, 0.9, unit(rng)));
  }
}

SquareBox GlyphBox(const FaceGlyph& g) { return {g.cx, g.cy, g.side}; }

bool Truncated(const FaceGlyph& g, int w, int h) {
  const double r = g.side / 2.0;
  return g.cx - r < 0 || g.cy - r < 0 || g.cx + r > w || g.cy + r > h;
}

}  // namespace

LandmarkBoxOffsets GlyphLandmarkOffsets() {
  double mean = 0.0;
  for (double y : kGlyphYs) mean += y;
  mean /= 5.0;
  double var = 0.0;
  for (double y : kGlyphYs) var += (y - mean) * (y - mean);
  const double sd = std::sqrt(var / 5.0);
  return {0.0, -mean, 1.0 / sd};
}

Landmarks5 GlyphLandmarks(const FaceGlyph& g) {
  const double s = g.side;
  Landmarks5 lm;
  lm.points[0] = {g.cx - kEyeDx * s, g.cy + kEyeDy * s};
  lm.points[1] = {g.cx + kEyeDx * s, g.cy + kEyeDy * s};
  lm.points[2] = {g.cx, g.cy + kNoseDy * s};
  lm.points[3] = {g.cx - kMouthDx * s, g.cy + kMouthDy * s};
  lm.points[4] = {g.cx + kMouthDx * s, g.cy + kMouthDy * s};
  return lm;
}

RenderedScene RenderScene(const SceneSpec& spec) {
  if (spec.width < 1 || spec.height < 1) {
    throw Error(ErrorKind::kParameter, "scene dimensions must be positive");
  }
  for (std::size_t i = 0; i < spec.glyphs.size(); ++i) {
    if (!(spec.glyphs[i].side > 0.0)) {
      throw Error(ErrorKind::kParameter, "glyph side must be positive");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (Iou(GlyphBox(spec.glyphs[i]), GlyphBox(spec.glyphs[j])) > 0.3) {
        throw Error(ErrorKind::kParameter, "glyphs overlap beyond IoU 0.3");
      }
    }
  }
  std::mt19937_64 rng(spec.seed);
  RenderedScene out;
  out.image = Image({1, spec.height, spec.width});
  FillBackground(out.image, spec.background, rng);
  PaintDistractors(out.image, spec.background.distractors, rng);
  for (const Rect& r : spec.ignore_regions) PaintIgnoreContent(out.image, r, rng);
  for (const FaceGlyph& g : spec.glyphs) {
    PaintGlyph(out.image, g);
    out.annotation.faces.push_back(
        {GlyphLandmarks(g), Truncated(g, spec.width, spec.height)});
  }
  out.annotation.ignore_regions = spec.ignore_regions;
  QuantizeTo8Bit(out.image);
  return out;
}

std::vector<SceneSpec> SampleScenes(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.faces_min < 0 || cfg.faces_max < cfg.faces_min ||
      !(cfg.log2_size_min <= cfg.log2_size_max)) {
    throw Error(ErrorKind::kConfig, "invalid synthetic size or count bounds");
  }
  if (std::exp2(cfg.log2_size_max) > std::min(cfg.width, cfg.height)) {
    throw Error(ErrorKind::kConfig, "largest glyph does not fit in the image");
  }
  std::vector<SceneSpec> scenes;
  scenes.reserve(std::max(0, cfg.count));
  std::mt19937_64 master(seed);
  for (int i = 0; i < cfg.count; ++i) {
    std::mt19937_64 rng(master());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SceneSpec spec;
    spec.width = cfg.width;
    spec.height = cfg.height;
    spec.background = cfg.background;
    spec.seed = rng();
    std::uniform_int_distribution<int> nfaces(cfg.faces_min, cfg.faces_max);
    std::uniform_int_distribution<int> nignore(0, std::max(0, cfg.ignore_max));
    const int ignores = cfg.ignore_max > 0 ? nignore(rng) : 0;
    for (int k = 0; k < ignores; ++k) {
      const double w = Lerp(16.0, 48.0, unit(rng));
      const double h = Lerp(16.0, 48.0, unit(rng));
      spec.ignore_regions.push_back(
          {std::floor(unit(rng) * (cfg.width - w)), std::floor(unit(rng) * (cfg.height - h)),
           std::round(w), std::round(h)});
    }
    const int faces = nfaces(rng);
    for (int k = 0; k < faces; ++k) {
      // The size is drawn once so rejection does not skew the size
      // distribution; only the position is resampled. A face that cannot be
      // placed is dropped.
      const double side = std::exp2(Lerp(cfg.log2_size_min, cfg.log2_size_max, unit(rng)));
      for (int attempt = 0; attempt < 100; ++attempt) {
        FaceGlyph g;
        g.side = side;
        g.cx = g.side / 2 + unit(rng) * (cfg.width - g.side);
        g.cy = g.side / 2 + unit(rng) * (cfg.height - g.side);
        g.appearance_seed = rng();
        bool ok = true;
        for (const FaceGlyph& other : spec.glyphs) {
          ok = ok && Iou(GlyphBox(g), GlyphBox(other)) <= 0.3;
        }
        for (const Rect& r : spec.ignore_regions) {
          const double half = g.side / 2;
          const bool disjoint = g.cx + half <= r.x || g.cx - half >= r.x + r.w ||
                                g.cy + half <= r.y || g.cy - half >= r.y + r.h;
          ok = ok && disjoint;
        }
        if (ok) {
          spec.glyphs.push_back(g);
          break;
        }
      }
    }
    scenes.push_back(std::move(spec));
  }
  return scenes;
}

Dataset SampleDataset(const SynthConfig& cfg, std::uint64_t seed) {
  const auto scenes = SampleScenes(cfg, seed);
  const int n = static_cast<int>(scenes.size());
  const int n_test = static_cast<int>(std::lround(n * std::clamp(cfg.test_fraction, 0.0, 1.0)));
  Dataset ds;
  for (int i = 0; i < n; ++i) {
    RenderedScene r = RenderScene(scenes[i]);
    char name[32];
    std::snprintf(name, sizeof(name), "img_%06d.pgm", i);
    r.annotation.image_path = name;
    auto& bucket = i < n - n_test ? ds.train : ds.test;
    bucket.push_back({std::move(r.image), std::move(r.annotation)});
  }
  return ds;
}

}  // namespace safd
