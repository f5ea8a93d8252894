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

#include "safd/config.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "safd/csv.h"
#include "safd/error.h"

namespace safd {
namespace {

namespace pt = boost::property_tree;

std::string Key(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

template <typename T>
T ParseNumber(const std::string& text, const std::string& where) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::kConfig, where + ": cannot parse '" + text + "'");
  }
  return v;
}

bool ParseBool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorKind::kConfig, where + ": expected true or false, got '" + text + "'");
}

std::vector<int> ParseIntList(const std::string& text, const std::string& where) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) {
      throw Error(ErrorKind::kConfig, where + ": empty list entry");
    }
    out.push_back(ParseNumber<int>(item.substr(b, e - b + 1), where));
  }
  return out;
}

std::string IntList(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

// One builder per value kind; each field is addressed through an accessor.
template <typename Access>
Field Real(const char* section, const char* key, Access access) {
  return {section, key,
          [access](const RunConfig& c) {
            return FormatDouble(access(c));
          },
          [access](RunConfig& c, const std::string& v, const std::string& where) {
            access(c) = ParseNumber<double>(v, where);
          }};
}

template <typename Access>
Field Int(const char* section, const char* key, Access access) {
  return {section, key,
          [access](const RunConfig& c) {
            return std::to_string(access(c));
          },
          [access](RunConfig& c, const std::string& v, const std::string& where) {
            using T = std::remove_cvref_t<decltype(access(c))>;
            access(c) = ParseNumber<T>(v, where);
          }};
}

template <typename Access>
Field Bool(const char* section, const char* key, Access access) {
  return {section, key,
          [access](const RunConfig& c) {
            return std::string(access(c) ? "true" : "false");
          },
          [access](RunConfig& c, const std::string& v, const std::string& where) {
            access(c) = ParseBool(v, where);
          }};
}

template <typename Access>
Field IntVec(const char* section, const char* key, Access access) {
  return {section, key,
          [access](const RunConfig& c) { return IntList(access(c)); },
          [access](RunConfig& c, const std::string& v, const std::string& where) {
            access(c) = ParseIntList(v, where);
          }};
}

template <typename Access>
Field Text(const char* section, const char* key, Access access) {
  return {section, key,
          [access](const RunConfig& c) { return access(c); },
          [access](RunConfig& c, const std::string& v, const std::string&) { access(c) = v; }};
}

#define SAFD_AT(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      Real("histogram", "s0", SAFD_AT(histogram.s0)),
      Real("histogram", "sn", SAFD_AT(histogram.sn)),
      Int("histogram", "bins", SAFD_AT(histogram.bins)),
      Real("histogram", "sigma", SAFD_AT(histogram.sigma)),

      Real("landmarks", "ox", SAFD_AT(landmarks.ox)),
      Real("landmarks", "oy", SAFD_AT(landmarks.oy)),
      Real("landmarks", "os", SAFD_AT(landmarks.os)),

      Int("synth", "width", SAFD_AT(synth.width)),
      Int("synth", "height", SAFD_AT(synth.height)),
      Int("synth", "count", SAFD_AT(synth.count)),
      Int("synth", "faces_min", SAFD_AT(synth.faces_min)),
      Int("synth", "faces_max", SAFD_AT(synth.faces_max)),
      Real("synth", "log2_size_min", SAFD_AT(synth.log2_size_min)),
      Real("synth", "log2_size_max", SAFD_AT(synth.log2_size_max)),
      Int("synth", "ignore_max", SAFD_AT(synth.ignore_max)),
      Real("synth", "test_fraction", SAFD_AT(synth.test_fraction)),
      Real("synth", "background_min", SAFD_AT(synth.background.base_min)),
      Real("synth", "background_max", SAFD_AT(synth.background.base_max)),
      Real("synth", "blob_amplitude", SAFD_AT(synth.background.blob_amplitude)),
      Int("synth", "blob_cell", SAFD_AT(synth.background.blob_cell)),
      Real("synth", "grain_amplitude", SAFD_AT(synth.background.grain_amplitude)),
      Int("synth", "distractors", SAFD_AT(synth.background.distractors)),

      Int("spn", "input_long_side", SAFD_AT(spn.input_long_side)),
      IntVec("spn", "channels", SAFD_AT(spn.channels)),
      Int("spn", "iterations", SAFD_AT(spn.train.iterations)),
      Real("spn", "lr", SAFD_AT(spn.train.lr)),
      Real("spn", "momentum", SAFD_AT(spn.train.momentum)),
      Real("spn", "weight_decay", SAFD_AT(spn.train.weight_decay)),
      Bool("spn", "flip", SAFD_AT(spn.train.flip)),

      Real("detector", "smin", SAFD_AT(detector.smin)),
      Real("detector", "smax", SAFD_AT(detector.smax)),
      IntVec("detector", "channels", SAFD_AT(detector.channels)),
      Real("detector", "positive_iou", SAFD_AT(detector.positive_iou)),
      Real("detector", "negative_iou", SAFD_AT(detector.negative_iou)),
      Real("detector", "boundary_ignore_octaves", SAFD_AT(detector.boundary_ignore_octaves)),
      Real("detector", "score_threshold", SAFD_AT(detector.score_threshold)),
      Real("detector", "nms_iou", SAFD_AT(detector.nms_iou)),
      Int("detector", "iterations", SAFD_AT(detector.train.iterations)),
      Real("detector", "lr", SAFD_AT(detector.train.lr)),
      Real("detector", "momentum", SAFD_AT(detector.train.momentum)),
      Real("detector", "weight_decay", SAFD_AT(detector.train.weight_decay)),
      Int("detector", "crop", SAFD_AT(detector.train.crop)),
      Real("detector", "in_range_fraction", SAFD_AT(detector.train.in_range_fraction)),
      Real("detector", "regression_weight", SAFD_AT(detector.train.regression_weight)),

      Int("proposal", "smooth_window", SAFD_AT(proposal.smooth_window)),
      Int("proposal", "nms_radius", SAFD_AT(proposal.nms_radius)),
      Real("proposal", "threshold", SAFD_AT(proposal.threshold)),
      Int("proposal", "max_count", SAFD_AT(proposal.max_count)),

      Int("cost", "spn_long_side", SAFD_AT(cost.spn_long_side)),
      Int("cost", "pyramid_base_long_side", SAFD_AT(cost.pyramid_base_long_side)),
      Int("cost", "pyramid_levels", SAFD_AT(cost.pyramid_levels)),
      Int("cost", "single_shot_long_side", SAFD_AT(cost.single_shot_long_side)),
      Int("cost", "multi_anchor_count", SAFD_AT(cost.multi_anchor_count)),
      Text("cost", "spn_layers", SAFD_AT(cost.spn_layers)),
      Text("cost", "detector_layers", SAFD_AT(cost.detector_layers)),
      Text("cost", "multi_anchor_layers", SAFD_AT(cost.multi_anchor_layers)),

      Real("evaluate", "sweep_start", SAFD_AT(evaluate.sweep_start)),
      Real("evaluate", "sweep_stop", SAFD_AT(evaluate.sweep_stop)),
      Real("evaluate", "sweep_step", SAFD_AT(evaluate.sweep_step)),
      Real("evaluate", "miss_bin_min_log2", SAFD_AT(evaluate.miss_bin_min_log2)),
      Real("evaluate", "miss_bin_max_log2", SAFD_AT(evaluate.miss_bin_max_log2)),
      Int("evaluate", "miss_bins", SAFD_AT(evaluate.miss_bins)),
      Real("evaluate", "ap_iou", SAFD_AT(evaluate.ap_iou)),
      Real("evaluate", "ap_score_floor", SAFD_AT(evaluate.ap_score_floor)),

      Int("seeds", "synth", SAFD_AT(seeds.synth)),
      Int("seeds", "spn", SAFD_AT(seeds.spn)),
      Int("seeds", "detector", SAFD_AT(seeds.detector)),
  };
  return fields;
}

#undef SAFD_AT

void Require(bool ok, const char* section, const char* key, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kConfig, Key(section, key) + " " + what);
}

bool InUnit(double v) { return v >= 0.0 && v <= 1.0; }

RunConfig FromTree(const pt::ptree& tree) {
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorKind::kConfig, "key '" + section + "' is outside any section");
    }
    for (const auto& [key, value] : body) {
      const Field* field = nullptr;
      for (const Field& f : Fields()) {
        if (section == f.section && key == f.key) field = &f;
      }
      if (!field) throw Error(ErrorKind::kConfig, "unknown key " + Key(section, key));
      field->set(cfg, value.data(), Key(section, key));
    }
  }
  ValidateConfig(cfg);
  return cfg;
}

}  // namespace

void ValidateConfig(const RunConfig& c) {
  Require(c.histogram.sn > c.histogram.s0, "histogram", "sn", "must exceed s0");
  Require(c.histogram.bins >= 1, "histogram", "bins", "must be positive");
  Require(c.histogram.sigma > 0.0, "histogram", "sigma", "must be positive");
  Require(c.landmarks.os > 0.0, "landmarks", "os", "must be positive");

  Require(c.synth.width >= 16 && c.synth.height >= 16, "synth", "width",
          "image sides must be at least 16");
  Require(c.synth.count >= 0, "synth", "count", "must not be negative");
  Require(c.synth.faces_min >= 0 && c.synth.faces_max >= c.synth.faces_min, "synth",
          "faces_max", "must be at least faces_min");
  Require(c.synth.log2_size_max >= c.synth.log2_size_min, "synth", "log2_size_max",
          "must be at least log2_size_min");
  Require(std::exp2(c.synth.log2_size_max) <= std::min(c.synth.width, c.synth.height),
          "synth", "log2_size_max", "faces must fit inside the image");
  Require(InUnit(c.synth.test_fraction), "synth", "test_fraction", "must lie in [0,1]");
  Require(c.synth.ignore_max >= 0, "synth", "ignore_max", "must not be negative");

  Require(c.spn.input_long_side >= 16, "spn", "input_long_side", "must be at least 16");
  Require(c.spn.channels.size() >= 2, "spn", "channels", "needs at least two stages");
  Require(c.spn.train.iterations >= 0, "spn", "iterations", "must not be negative");
  Require(c.spn.train.lr > 0.0, "spn", "lr", "must be positive");

  Require(c.detector.smin > 0.0 && std::abs(c.detector.smax - 2.0 * c.detector.smin) <=
                                       1e-9 * c.detector.smax,
          "detector", "smax", "must equal 2 * smin (one octave)");
  Require(c.detector.channels.size() >= 3, "detector", "channels",
          "needs at least three stages");
  Require(InUnit(c.detector.positive_iou), "detector", "positive_iou", "must lie in [0,1]");
  Require(InUnit(c.detector.negative_iou) && c.detector.negative_iou <= c.detector.positive_iou,
          "detector", "negative_iou", "must lie in [0, positive_iou]");
  Require(c.detector.boundary_ignore_octaves >= 0.0 && c.detector.boundary_ignore_octaves < 0.5,
          "detector", "boundary_ignore_octaves", "must lie in [0, 0.5)");
  Require(InUnit(c.detector.score_threshold), "detector", "score_threshold",
          "must lie in [0,1]");
  Require(InUnit(c.detector.nms_iou), "detector", "nms_iou", "must lie in [0,1]");
  Require(c.detector.train.iterations >= 0, "detector", "iterations", "must not be negative");
  Require(c.detector.train.lr > 0.0, "detector", "lr", "must be positive");
  Require(c.detector.train.crop >= 16, "detector", "crop", "must be at least 16");
  Require(InUnit(c.detector.train.in_range_fraction), "detector", "in_range_fraction",
          "must lie in [0,1]");

  Require(c.proposal.smooth_window >= 1 && c.proposal.smooth_window % 2 == 1 &&
              c.proposal.smooth_window <= c.histogram.bins,
          "proposal", "smooth_window", "must be odd and at most the bin count");
  Require(c.proposal.nms_radius >= 1, "proposal", "nms_radius", "must be positive");
  Require(InUnit(c.proposal.threshold), "proposal", "threshold", "must lie in [0,1]");

  Require(c.cost.spn_long_side >= 16, "cost", "spn_long_side", "must be at least 16");
  Require(c.cost.pyramid_levels >= 1, "cost", "pyramid_levels", "must be positive");
  Require(c.cost.multi_anchor_count >= 1, "cost", "multi_anchor_count", "must be positive");

  Require(c.evaluate.sweep_step > 0.0 && c.evaluate.sweep_stop >= c.evaluate.sweep_start &&
              InUnit(c.evaluate.sweep_start) && InUnit(c.evaluate.sweep_stop),
          "evaluate", "sweep_step", "sweep must be a non-empty range inside [0,1]");
  Require(c.evaluate.miss_bins >= 1 &&
              c.evaluate.miss_bin_max_log2 > c.evaluate.miss_bin_min_log2,
          "evaluate", "miss_bins", "size bins must be a non-empty range");
  Require(InUnit(c.evaluate.ap_iou), "evaluate", "ap_iou", "must lie in [0,1]");
  Require(InUnit(c.evaluate.ap_score_floor), "evaluate", "ap_score_floor", "must lie in [0,1]");
}

RunConfig ParseConfigIni(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::kConfig, e.message() + " at line " + std::to_string(e.line()));
  }
  return FromTree(tree);
}

RunConfig LoadConfig(const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    if (e.line() == 0) throw Error(ErrorKind::kIo, "cannot read config " + path);
    throw Error(ErrorKind::kConfig,
                path + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  return FromTree(tree);
}

std::string ConfigToIni(const RunConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const Field& f : Fields()) {
    if (section != f.section) {
      if (!section.empty()) os << "\n";
      section = f.section;
      os << "[" << section << "]\n";
    }
    os << f.key << " = " << f.get(cfg) << "\n";
  }
  return os.str();
}

SpnConfig ToSpnConfig(const RunConfig& cfg) {
  SpnConfig s;
  s.spec = HistogramSpec(cfg.histogram.s0, cfg.histogram.sn, cfg.histogram.bins);
  s.input_long_side = cfg.spn.input_long_side;
  s.channels = cfg.spn.channels;
  s.sigma = cfg.histogram.sigma;
  s.offsets = cfg.landmarks;
  s.train = cfg.spn.train;
  return s;
}

DetectorConfig ToDetectorConfig(const RunConfig& cfg) {
  DetectorConfig d;
  d.range = DetectorRange(cfg.detector.smin, cfg.detector.smax);
  d.channels = cfg.detector.channels;
  d.positive_iou = cfg.detector.positive_iou;
  d.negative_iou = cfg.detector.negative_iou;
  d.boundary_ignore_octaves = cfg.detector.boundary_ignore_octaves;
  d.score_threshold = cfg.detector.score_threshold;
  d.nms_iou = cfg.detector.nms_iou;
  d.offsets = cfg.landmarks;
  d.train = cfg.detector.train;
  return d;
}

StrategyInputs ToStrategyInputs(const RunConfig& cfg) {
  StrategyInputs in;
  const auto& c = cfg.cost;
  in.spn = c.spn_layers.empty() ? LayersFromNetwork(BuildSpn(ToSpnConfig(cfg)))
                                : ReadLayerSpecs(c.spn_layers);
  in.detector = c.detector_layers.empty()
                    ? LayersFromNetwork(BuildDetector(ToDetectorConfig(cfg)))
                    : ReadLayerSpecs(c.detector_layers);
  in.multi_anchor_detector = c.multi_anchor_layers.empty()
                                 ? WithHeadChannels(in.detector, 4 * c.multi_anchor_count)
                                 : ReadLayerSpecs(c.multi_anchor_layers);
  in.spn_long_side = c.spn_long_side;
  in.pyramid_base_long_side = c.pyramid_base_long_side;
  in.pyramid_levels = c.pyramid_levels;
  in.single_shot_long_side = c.single_shot_long_side;
  return in;
}

std::vector<double> SweepThresholds(const RunConfig& cfg) {
  std::vector<double> out;
  const auto& e = cfg.evaluate;
  const int n = static_cast<int>(std::floor((e.sweep_stop - e.sweep_start) / e.sweep_step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(e.sweep_start + i * e.sweep_step);
  return out;
}

}  // namespace safd
