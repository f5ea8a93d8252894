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
#include <vector>

#include "safd/annotation.h"
#include "safd/image.h"

namespace safd {

struct FaceGlyph {
  double cx = 0.0;
  double cy = 0.0;
  double side = 0.0;
  std::uint64_t appearance_seed = 0;
};

struct BackgroundParams {
  double base_min = 0.25;
  double base_max = 0.65;
  double blob_amplitude = 0.15;  // low-frequency value noise
  int blob_cell = 24;            // value-noise lattice spacing, pixels
  double grain_amplitude = 0.04;  // per-pixel noise
  int distractors = 3;            // non-face rectangles and discs
};

struct SceneSpec {
  int width = 192;
  int height = 192;
  std::vector<FaceGlyph> glyphs;
  std::vector<Rect> ignore_regions;
  BackgroundParams background;
  std::uint64_t seed = 0;
};

struct RenderedScene {
  Image image;
  AnnotationRecord annotation;
};

// Glyph landmark layout, in units of the glyph side relative to its center.
inline constexpr double kEyeDx = 1.0 / 5.0;
inline constexpr double kEyeDy = -1.0 / 8.0;
inline constexpr double kNoseDy = 1.0 / 16.0;
inline constexpr double kMouthDx = 1.0 / 6.0;
inline constexpr double kMouthDy = 1.0 / 4.0;

// Offsets under which BoxFromLandmarks recovers the glyph box exactly.
LandmarkBoxOffsets GlyphLandmarkOffsets();

Landmarks5 GlyphLandmarks(const FaceGlyph& glyph);

// Faces whose boxes overlap with IoU > 0.3 are rejected with a parameter error.
RenderedScene RenderScene(const SceneSpec& spec);

struct SynthConfig {
  int width = 192;
  int height = 192;
  int count = 100;
  int faces_min = 0;
  int faces_max = 3;
  double log2_size_min = 3.0;
  double log2_size_max = 7.0;
  int ignore_max = 1;
  BackgroundParams background;
  double test_fraction = 0.0;
};

struct Sample {
  Image image;
  AnnotationRecord annotation;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

// Scene layouts only; RenderScene turns each into a sample.
std::vector<SceneSpec> SampleScenes(const SynthConfig& cfg, std::uint64_t seed);

// Renders cfg.count scenes; the last round(count * test_fraction) go to test.
Dataset SampleDataset(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace safd
