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

#include "safd/cost_model.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "safd/csv.h"
#include "safd/error.h"
#include "safd/image.h"

namespace safd {

std::uint64_t LayerFlops(const ConvLayerSpec& s, int in_h, int in_w) {
  if (s.in_channels < 1 || s.out_channels < 1 || s.kernel_h < 1 || s.kernel_w < 1 ||
      s.stride < 1 || s.pad < 0 || in_h < 1 || in_w < 1) {
    throw Error(ErrorKind::kDimension, "invalid layer spec or input dims");
  }
  if (s.kernel_h > in_h + 2 * s.pad || s.kernel_w > in_w + 2 * s.pad) {
    throw Error(ErrorKind::kDimension, "kernel larger than padded input");
  }
  const std::uint64_t out_h = (in_h + 2 * s.pad - s.kernel_h) / s.stride + 1;
  const std::uint64_t out_w = (in_w + 2 * s.pad - s.kernel_w) / s.stride + 1;
  return static_cast<std::uint64_t>(s.out_channels) * s.kernel_h * s.kernel_w *
         s.in_channels * out_h * out_w;
}

CostReport NetworkFlops(std::span<const CostLayer> layers, int in_h, int in_w) {
  CostReport report;
  int h = in_h;
  int w = in_w;
  int channels = -1;
  for (const CostLayer& l : layers) {
    LayerCost row;
    row.name = l.name;
    if (l.kind == CostLayer::Kind::kPool) {
      h /= 2;
      w /= 2;
      if (h < 1 || w < 1) {
        throw Error(ErrorKind::kDimension, "pool '" + l.name + "' reduces input to zero");
      }
    } else {
      if (channels >= 0 && l.conv.in_channels != channels) {
        throw Error(ErrorKind::kDimension, "layer '" + l.name + "' expects " +
                                               std::to_string(l.conv.in_channels) +
                                               " channels, chain provides " +
                                               std::to_string(channels));
      }
      row.flops = LayerFlops(l.conv, h, w);
      h = (h + 2 * l.conv.pad - l.conv.kernel_h) / l.conv.stride + 1;
      w = (w + 2 * l.conv.pad - l.conv.kernel_w) / l.conv.stride + 1;
      channels = l.conv.out_channels;
    }
    row.out_h = h;
    row.out_w = w;
    report.total_flops += row.flops;
    report.layers.push_back(row);
  }
  return report;
}

std::vector<CostLayer> ParseLayerSpecs(const std::string& text) {
  std::vector<CostLayer> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    CostLayer layer;
    auto bad = [&] {
      return Error(ErrorKind::kConfig, "layer spec line " + std::to_string(lineno) +
                                           " is malformed");
    };
    if (kind == "pool") {
      layer.kind = CostLayer::Kind::kPool;
      if (!(ls >> layer.name)) layer.name = "pool";
    } else if (kind == "conv") {
      std::string kernel;
      ConvLayerSpec& c = layer.conv;
      if (!(ls >> layer.name >> c.in_channels >> c.out_channels >> kernel >> c.stride >> c.pad)) {
        throw bad();
      }
      try {
        if (const auto x = kernel.find('x'); x != std::string::npos) {
          c.kernel_h = std::stoi(kernel.substr(0, x));
          c.kernel_w = std::stoi(kernel.substr(x + 1));
        } else {
          c.kernel_h = c.kernel_w = std::stoi(kernel);
        }
      } catch (const std::exception&) {
        throw bad();
      }
      if (c.in_channels < 1 || c.out_channels < 1 || c.kernel_h < 1 || c.kernel_w < 1 ||
          c.stride < 1 || c.pad < 0) {
        throw bad();
      }
    } else {
      throw bad();
    }
    out.push_back(layer);
  }
  return out;
}

std::vector<CostLayer> ReadLayerSpecs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ParseLayerSpecs(ss.str());
}

std::vector<CostLayer> LayersFromNetwork(const Network<float>& net) {
  std::vector<CostLayer> out;
  int conv = 0;
  int pool = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& l = net.layer(i);
    if (l.kind() == LayerKind::kConv) {
      const auto& g = l.geometry();
      out.push_back({CostLayer::Kind::kConv,
                     {g.in_channels, g.out_channels, g.kernel, g.kernel, g.stride, g.pad},
                     "conv" + std::to_string(++conv)});
    } else if (l.kind() == LayerKind::kMaxPool2) {
      CostLayer p;
      p.kind = CostLayer::Kind::kPool;
      p.name = "pool" + std::to_string(++pool);
      out.push_back(p);
    }
  }
  return out;
}

std::vector<int> PyramidLongSides(int base, int levels) {
  std::vector<int> sides;
  for (int k = 0; k < levels; ++k) sides.push_back(ScaledDim(base, std::exp2(-k)));
  return sides;
}

std::pair<int, int> DimsForLongSide(int h, int w, int long_side) {
  const double f = static_cast<double>(long_side) / std::max(h, w);
  if (h >= w) return {long_side, ScaledDim(w, f)};
  return {ScaledDim(h, f), long_side};
}

std::string StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kScaleAware: return "scale-aware";
    case Strategy::kMultiScaleTesting: return "multi-scale-testing";
    case Strategy::kSingleShot: return "single-shot";
  }
  return "unknown";
}

StrategyCost StrategyCostFor(Strategy strategy, const StrategyInputs& in) {
  if (in.image_h < 1 || in.image_w < 1) {
    throw Error(ErrorKind::kDimension, "image dims must be positive");
  }
  StrategyCost cost;
  cost.strategy = StrategyName(strategy);
  switch (strategy) {
    case Strategy::kScaleAware: {
      if (!in.plan) {
        throw Error(ErrorKind::kParameter, "scale-aware cost needs a zoom plan");
      }
      const auto [sh, sw] = DimsForLongSide(in.image_h, in.image_w, in.spn_long_side);
      cost.spn_flops = NetworkFlops(in.spn, sh, sw).total_flops;
      for (const ZoomAction& a : *in.plan) {
        cost.detector_flops += NetworkFlops(in.detector, ScaledDim(in.image_h, a.scale_factor),
                                            ScaledDim(in.image_w, a.scale_factor))
                                   .total_flops;
      }
      break;
    }
    case Strategy::kMultiScaleTesting:
      for (int side : PyramidLongSides(in.pyramid_base_long_side, in.pyramid_levels)) {
        const auto [h, w] = DimsForLongSide(in.image_h, in.image_w, side);
        cost.detector_flops += NetworkFlops(in.detector, h, w).total_flops;
      }
      break;
    case Strategy::kSingleShot: {
      const auto [h, w] = DimsForLongSide(in.image_h, in.image_w, in.single_shot_long_side);
      cost.detector_flops = NetworkFlops(in.multi_anchor_detector, h, w).total_flops;
      break;
    }
  }
  return cost;
}

std::vector<StrategyCost> MeanStrategyCosts(std::span<const ImageCostInput> images,
                                            const StrategyInputs& base) {
  const Strategy all[] = {Strategy::kScaleAware, Strategy::kMultiScaleTesting,
                          Strategy::kSingleShot};
  std::vector<StrategyCost> out;
  for (Strategy s : all) {
    long double spn = 0.0L;
    long double det = 0.0L;
    for (const ImageCostInput& img : images) {
      StrategyInputs in = base;
      in.image_h = img.image_h;
      in.image_w = img.image_w;
      in.plan = img.plan;
      const StrategyCost c = StrategyCostFor(s, in);
      spn += c.spn_flops;
      det += c.detector_flops;
    }
    const long double n = images.empty() ? 1.0L : static_cast<long double>(images.size());
    out.push_back({StrategyName(s), static_cast<std::uint64_t>(std::llround(spn / n)),
                   static_cast<std::uint64_t>(std::llround(det / n))});
  }
  return out;
}

std::vector<CostLayer> WithHeadChannels(std::vector<CostLayer> layers, int out_channels) {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->kind == CostLayer::Kind::kConv) {
      it->conv.out_channels = out_channels;
      return layers;
    }
  }
  throw Error(ErrorKind::kConfig, "layer chain has no convolution");
}

std::string CostReportCsv(const CostReport& report) {
  std::ostringstream os;
  if (!report.layers.empty()) {
    os << "row,name,out_h,out_w,mflops\n";
    for (const LayerCost& l : report.layers) {
      os << "layer," << l.name << "," << l.out_h << "," << l.out_w << ","
         << FormatDouble(l.flops / 1e6) << "\n";
    }
    os << "total,network,,," << FormatDouble(report.total_mflops()) << "\n";
  }
  if (!report.strategies.empty()) {
    if (!report.layers.empty()) os << "\n";
    os << "strategy,spn_mflops,detector_mflops,total_mflops\n";
    for (const StrategyCost& s : report.strategies) {
      os << s.strategy << "," << FormatDouble(s.spn_flops / 1e6) << ","
         << FormatDouble(s.detector_flops / 1e6) << "," << FormatDouble(s.total() / 1e6) << "\n";
    }
  }
  return os.str();
}

}  // namespace safd
