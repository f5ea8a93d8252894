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
#include <string>
#include <vector>

#include "safd/cost_model.h"
#include "safd/detector.h"
#include "safd/proposal.h"
#include "safd/spn.h"
#include "safd/synthgen.h"

namespace safd {

// Everything a CLI run can be configured with. Sections of the INI file map
// to the nested structs; every key has a default and unknown keys are errors.
struct RunConfig {
  struct Histogram {
    double s0 = 2.0;
    double sn = 8.0;
    int bins = 60;
    double sigma = 0.4;
  } histogram;

  LandmarkBoxOffsets landmarks = GlyphLandmarkOffsets();

  SynthConfig synth;

  struct Spn {
    int input_long_side = 192;
    std::vector<int> channels{8, 16, 32, 32};
    SpnTrainParams train;
  } spn;

  struct Detector {
    double smin = 24.0;
    double smax = 48.0;
    std::vector<int> channels{16, 32, 32, 32, 32};
    double positive_iou = 0.5;
    double negative_iou = 0.3;
    double boundary_ignore_octaves = 0.25;
    double score_threshold = 0.5;
    double nms_iou = 0.3;
    DetectorTrainParams train;
  } detector;

  ProposalParams proposal;

  struct Cost {
    int spn_long_side = 448;
    int pyramid_base_long_side = 1414;
    int pyramid_levels = 6;
    int single_shot_long_side = 1414;
    int multi_anchor_count = 6;
    // Optional layer-spec files; empty means derive from the built networks.
    std::string spn_layers;
    std::string detector_layers;
    std::string multi_anchor_layers;
  } cost;

  struct Evaluate {
    double sweep_start = 0.05;
    double sweep_stop = 0.95;
    double sweep_step = 0.05;
    double miss_bin_min_log2 = 3.0;
    double miss_bin_max_log2 = 7.0;
    int miss_bins = 8;
    double ap_iou = 0.5;
    double ap_score_floor = 0.05;
  } evaluate;

  struct Seeds {
    std::uint64_t synth = 7;
    std::uint64_t spn = 1;
    std::uint64_t detector = 1;
  } seeds;
};

// Reads an INI file over the defaults and validates the result.
RunConfig LoadConfig(const std::string& path);

// Cross-field checks; throws a config error naming the offending key.
void ValidateConfig(const RunConfig& cfg);

// INI text with every key; LoadConfig of this text reproduces cfg exactly.
std::string ConfigToIni(const RunConfig& cfg);
RunConfig ParseConfigIni(const std::string& text);

SpnConfig ToSpnConfig(const RunConfig& cfg);
DetectorConfig ToDetectorConfig(const RunConfig& cfg);
// Layer chains come from the optional layer files, else from the toy networks.
// The multi-anchor chain defaults to the detector with four outputs per anchor.
StrategyInputs ToStrategyInputs(const RunConfig& cfg);
std::vector<double> SweepThresholds(const RunConfig& cfg);

}  // namespace safd
