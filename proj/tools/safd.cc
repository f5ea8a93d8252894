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

// Command-line front end for the scale-aware face detection pipeline.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "safd/annotation.h"
#include "safd/config.h"
#include "safd/cost_model.h"
#include "safd/csv.h"
#include "safd/detector.h"
#include "safd/error.h"
#include "safd/evalkit.h"
#include "safd/network.h"
#include "safd/proposal.h"
#include "safd/spn.h"
#include "safd/synthgen.h"

namespace fs = std::filesystem;

namespace safd {
namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<double> threshold;
  std::optional<int> max_proposals;
  bool print_config = false;

  std::string manifest;
  std::string image;
  std::string spn_model;
  std::string det_model;
  std::optional<int> count;
  std::optional<int> iterations;
  bool heatmaps = false;
  std::string layers;
  int input_h = 224;
  int input_w = 224;
};

RunConfig Configure(const Options& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : LoadConfig(o.config_path);
  if (o.threshold) cfg.proposal.threshold = *o.threshold;
  if (o.max_proposals) cfg.proposal.max_count = *o.max_proposals;
  ValidateConfig(cfg);
  return cfg;
}

fs::path OutDir(const Options& o) {
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
  return dir;
}

std::string TrainingLogCsv(const std::vector<float>& loss) {
  std::ostringstream os;
  os << "iteration,loss\n";
  for (std::size_t i = 0; i < loss.size(); ++i) {
    os << i << "," << FormatDouble(loss[i]) << "\n";
  }
  return os.str();
}

struct LoadedSample {
  std::string id;
  Image image;
  AnnotationRecord annotation;
};

// Images named in a manifest resolve relative to the manifest's directory.
std::vector<LoadedSample> LoadManifest(const std::string& path) {
  const fs::path base = fs::path(path).parent_path();
  std::vector<LoadedSample> out;
  for (AnnotationRecord& r : ReadManifest(path)) {
    const fs::path img = fs::path(r.image_path).is_absolute() ? fs::path(r.image_path)
                                                              : base / r.image_path;
    out.push_back({r.image_path, ReadImage(img), std::move(r)});
  }
  return out;
}

std::vector<LoadedSample> LoadInputs(const Options& o) {
  if (!o.manifest.empty()) return LoadManifest(o.manifest);
  if (!o.image.empty()) {
    AnnotationRecord r;
    r.image_path = o.image;
    return {{fs::path(o.image).filename().string(), ReadImage(o.image), r}};
  }
  throw Error(ErrorKind::kInput, "either --manifest or --image is required");
}

std::vector<Sample> AsSamples(std::vector<LoadedSample> loaded) {
  std::vector<Sample> out;
  for (LoadedSample& s : loaded) out.push_back({std::move(s.image), std::move(s.annotation)});
  return out;
}

std::string Stem(const std::string& id) { return fs::path(id).stem().string(); }

void SynthGen(const Options& o) {
  RunConfig cfg = Configure(o);
  if (o.count) cfg.synth.count = *o.count;
  ValidateConfig(cfg);
  const fs::path dir = OutDir(o);
  fs::create_directories(dir / "images");
  Dataset ds = SampleDataset(cfg.synth, o.seed.value_or(cfg.seeds.synth));
  auto write = [&](std::vector<Sample>& samples, const std::string& name) {
    std::vector<AnnotationRecord> records;
    for (Sample& s : samples) {
      s.annotation.image_path = "images/" + s.annotation.image_path;
      WritePgm(s.image, dir / s.annotation.image_path);
      records.push_back(s.annotation);
    }
    WriteManifest(records, (dir / name).string());
  };
  write(ds.train, "manifest.jsonl");
  if (cfg.synth.test_fraction > 0.0) write(ds.test, "test_manifest.jsonl");
}

void TrainSpnCommand(const Options& o) {
  RunConfig cfg = Configure(o);
  if (o.iterations) cfg.spn.train.iterations = *o.iterations;
  if (o.manifest.empty()) throw Error(ErrorKind::kInput, "--manifest is required");
  const auto samples = AsSamples(LoadManifest(o.manifest));
  const fs::path dir = OutDir(o);
  const SpnTrainResult r = TrainSpn(ToSpnConfig(cfg), samples, o.seed.value_or(cfg.seeds.spn));
  SaveModel(r.net, dir / "spn.model");
  WriteTextFile((dir / "spn_train_log.csv").string(), TrainingLogCsv(r.log.loss));
}

void TrainDetCommand(const Options& o) {
  RunConfig cfg = Configure(o);
  if (o.iterations) cfg.detector.train.iterations = *o.iterations;
  if (o.manifest.empty()) throw Error(ErrorKind::kInput, "--manifest is required");
  const auto samples = AsSamples(LoadManifest(o.manifest));
  const fs::path dir = OutDir(o);
  const TrainResult r =
      TrainDetector(samples, ToDetectorConfig(cfg), o.seed.value_or(cfg.seeds.detector));
  SaveModel(r.net, dir / "detector.model");
  WriteTextFile((dir / "detector_train_log.csv").string(), TrainingLogCsv(r.loss_log));
}

Network<float> RequireModel(const std::string& path, const char* flag) {
  if (path.empty()) throw Error(ErrorKind::kInput, std::string(flag) + " is required");
  return LoadModel(path);
}

std::string ProposalCsv(const std::vector<ZoomAction>& plan) {
  std::ostringstream os;
  os << "proposal_rank,log2_size,size_px,confidence,zoom_factor\n";
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const ScaleProposal& p = plan[i].source_proposal;
    os << i + 1 << "," << FormatDouble(p.log2_size) << "," << FormatDouble(std::exp2(p.log2_size))
       << "," << FormatDouble(p.confidence) << "," << FormatDouble(plan[i].scale_factor) << "\n";
  }
  return os.str();
}

std::string HeatmapCsv(const Tensor<float>& t) {
  std::ostringstream os;
  os << "channel,y,x,value\n";
  for (int c = 0; c < t.channels(); ++c) {
    for (int y = 0; y < t.height(); ++y) {
      for (int x = 0; x < t.width(); ++x) {
        os << c << "," << y << "," << x << "," << FormatDouble(t.at(c, y, x)) << "\n";
      }
    }
  }
  return os.str();
}

ProposalParams PlanParams(const RunConfig& cfg) { return cfg.proposal; }

void Propose(const Options& o) {
  const RunConfig cfg = Configure(o);
  const Network<float> spn = RequireModel(o.spn_model, "--spn-model");
  const SpnConfig scfg = ToSpnConfig(cfg);
  const DetectorRange range(cfg.detector.smin, cfg.detector.smax);
  const fs::path dir = OutDir(o);
  for (const LoadedSample& s : LoadInputs(o)) {
    const SpnOutput out = InferHistogram(spn, s.image, scfg);
    const auto plan = ProposeZooms(out.histogram, PlanParams(cfg), range);
    const std::string stem = Stem(s.id);
    WriteHistogramCsv(out.histogram, (dir / (stem + "_histogram.csv")).string());
    WriteTextFile((dir / (stem + "_proposals.csv")).string(), ProposalCsv(plan));
    if (o.heatmaps) {
      WriteTextFile((dir / (stem + "_heatmap.csv")).string(), HeatmapCsv(out.heatmap.responses));
      for (int c = 0; c < out.heatmap.responses.channels(); ++c) {
        char name[64];
        std::snprintf(name, sizeof(name), "_heatmap_%02d.pgm", c + 1);
        WriteChannelPgm(out.heatmap.responses, c, dir / (stem + name));
      }
    }
  }
}

struct Pipeline {
  RunConfig cfg;
  SpnConfig spn_cfg;
  DetectorConfig det_cfg;
  Network<float> spn;
  Network<float> det;
};

Pipeline LoadPipeline(const Options& o) {
  Pipeline p{Configure(o), {}, {}, RequireModel(o.spn_model, "--spn-model"),
             RequireModel(o.det_model, "--det-model")};
  p.spn_cfg = ToSpnConfig(p.cfg);
  p.det_cfg = ToDetectorConfig(p.cfg);
  return p;
}

std::vector<ZoomAction> PlanFor(const Pipeline& p, const Image& image) {
  const ScaleHistogram h = InferHistogram(p.spn, image, p.spn_cfg).histogram;
  return ProposeZooms(h, PlanParams(p.cfg), p.det_cfg.range);
}

void Detect(const Options& o) {
  const Pipeline p = LoadPipeline(o);
  const AnchorSpec anchor(p.det_cfg.range, p.det.TotalStride());
  const fs::path dir = OutDir(o);
  std::ostringstream os;
  os << "image_id,cx,cy,side,score,zoom_factor\n";
  for (const LoadedSample& s : LoadInputs(o)) {
    const auto dets = DetectWithPlan(p.det, s.image, PlanFor(p, s.image), anchor,
                                     p.det_cfg.score_threshold, p.det_cfg.nms_iou);
    for (const Detection& d : dets) {
      os << s.id << "," << FormatDouble(d.box.cx) << "," << FormatDouble(d.box.cy) << ","
         << FormatDouble(d.box.side) << "," << FormatDouble(d.score) << ","
         << FormatDouble(d.zoom_factor) << "\n";
    }
  }
  WriteTextFile((dir / "detections.csv").string(), os.str());
}

void Evaluate(const Options& o) {
  const Pipeline p = LoadPipeline(o);
  if (o.manifest.empty()) throw Error(ErrorKind::kInput, "--manifest is required");
  const auto samples = LoadManifest(o.manifest);
  const fs::path dir = OutDir(o);
  const AnchorSpec anchor(p.det_cfg.range, p.det.TotalStride());

  std::vector<ImageScaleData> scale_data;
  std::vector<ImageDetections> det_data;
  std::size_t total_dets = 0;
  std::size_t total_gt = 0;
  for (const LoadedSample& s : samples) {
    const ScaleHistogram h = InferHistogram(p.spn, s.image, p.spn_cfg).histogram;
    scale_data.push_back({h, FaceSizes(s.annotation, p.cfg.landmarks)});
    const auto plan = ProposeZooms(h, PlanParams(p.cfg), p.det_cfg.range);
    ImageDetections img{DetectWithPlan(p.det, s.image, plan, anchor,
                                       p.cfg.evaluate.ap_score_floor, p.det_cfg.nms_iou),
                        FaceBoxes(s.annotation, p.cfg.landmarks), s.annotation.ignore_regions};
    total_dets += img.detections.size();
    total_gt += img.ground_truth.size();
    det_data.push_back(std::move(img));
  }
  const auto curve =
      RecallCurve(scale_data, PlanParams(p.cfg), p.det_cfg.range, SweepThresholds(p.cfg));
  WriteTextFile((dir / "recall_curve.csv").string(), RecallCurveCsv(curve));
  const auto at_threshold = EvaluateScaleRecall(scale_data, PlanParams(p.cfg), p.det_cfg.range);
  const auto& e = p.cfg.evaluate;
  const auto bins = UniformSizeBins(e.miss_bin_min_log2, e.miss_bin_max_log2, e.miss_bins);
  WriteTextFile((dir / "miss_rate.csv").string(),
                MissRateCsv(MissRateBySize(at_threshold.faces, bins)));
  const double ap = AveragePrecision(det_data, e.ap_iou);
  WriteTextFile((dir / "ap_summary.csv").string(),
                ApSummaryCsv(ap, e.ap_iou, total_dets, total_gt));
}

void CostReportCommand(const Options& o) {
  const fs::path dir = OutDir(o);
  if (!o.layers.empty()) {
    const CostReport r = NetworkFlops(ReadLayerSpecs(o.layers), o.input_h, o.input_w);
    WriteTextFile((dir / "cost_report.csv").string(), CostReportCsv(r));
    return;
  }
  if (o.manifest.empty()) throw Error(ErrorKind::kInput, "--manifest or --layers is required");
  const RunConfig cfg = Configure(o);
  const Network<float> spn = RequireModel(o.spn_model, "--spn-model");
  const SpnConfig scfg = ToSpnConfig(cfg);
  const DetectorRange range(cfg.detector.smin, cfg.detector.smax);
  std::vector<ImageCostInput> images;
  for (const LoadedSample& s : LoadManifest(o.manifest)) {
    const ScaleHistogram h = InferHistogram(spn, s.image, scfg).histogram;
    images.push_back({s.image.height(), s.image.width(), ProposeZooms(h, PlanParams(cfg), range)});
  }
  CostReport report;
  const StrategyInputs in = ToStrategyInputs(cfg);
  report.strategies = MeanStrategyCosts(images, in);
  WriteTextFile((dir / "cost_report.csv").string(), CostReportCsv(report));
}

void GradCheckCommand(const Options& o) {
  std::mt19937_64 rng(o.seed.value_or(1));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> p(0.0, 1.0);
  Network<double> net;
  net.AddConv(1, 4, 3, 1, 1).AddRelu().AddMaxPool2().AddConv(4, 6, 3, 1, 1).AddRelu()
      .AddConv(6, 5, 1).AddGlobalMaxPool();
  net.InitWeights(o.seed.value_or(1));
  Tensor<double> x({1, 12, 12});
  for (double& v : x.values()) v = u(rng);
  std::vector<double> target(5);
  for (double& t : target) t = p(rng);
  const double err = GradCheck(net, x, target, 1e-4);
  std::cout << "max_relative_error," << FormatDouble(err) << "\n";
  if (!(err < 1e-5)) throw Error(ErrorKind::kNumeric, "gradient check failed");
}

int Run(int argc, char** argv) {
  Options o;
  CLI::App app{"Scale-aware face detection toolkit"};
  app.require_subcommand(0, 1);
  app.add_option("--config", o.config_path, "INI configuration file");
  app.add_flag("--print-config", o.print_config, "Print the effective configuration and exit");

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "INI configuration file");
    cmd->add_option("--seed", o.seed, "Override the seed used by this command");
    cmd->add_option("--out-dir", o.out_dir, "Output directory");
    cmd->add_option("--threshold", o.threshold, "Scale proposal threshold");
    cmd->add_option("--max-proposals", o.max_proposals, "Maximum zooms per image");
  };

  auto* synth = app.add_subcommand("synth-gen", "Render a synthetic dataset");
  common(synth);
  synth->add_option("--count", o.count, "Number of images");

  auto* train_spn = app.add_subcommand("train-spn", "Train the scale proposal network");
  common(train_spn);
  train_spn->add_option("--manifest", o.manifest, "Training manifest")->required();
  train_spn->add_option("--iterations", o.iterations, "Override iteration count");

  auto* train_det = app.add_subcommand("train-det", "Train the single-scale detector");
  common(train_det);
  train_det->add_option("--manifest", o.manifest, "Training manifest")->required();
  train_det->add_option("--iterations", o.iterations, "Override iteration count");

  auto* propose = app.add_subcommand("propose", "Predict scale histograms and zoom plans");
  common(propose);
  propose->add_option("--spn-model", o.spn_model, "SPN model file")->required();
  propose->add_option("--manifest", o.manifest, "Input manifest");
  propose->add_option("--image", o.image, "Single input image");
  propose->add_flag("--heatmaps", o.heatmaps, "Also export heatmaps");

  auto* detect = app.add_subcommand("detect", "Run the full scale-aware detector");
  common(detect);
  detect->add_option("--spn-model", o.spn_model, "SPN model file")->required();
  detect->add_option("--det-model", o.det_model, "Detector model file")->required();
  detect->add_option("--manifest", o.manifest, "Input manifest");
  detect->add_option("--image", o.image, "Single input image");

  auto* evaluate = app.add_subcommand("evaluate", "Scale recall, miss rate and AP");
  common(evaluate);
  evaluate->add_option("--spn-model", o.spn_model, "SPN model file")->required();
  evaluate->add_option("--det-model", o.det_model, "Detector model file")->required();
  evaluate->add_option("--manifest", o.manifest, "Annotated manifest")->required();

  auto* cost = app.add_subcommand("cost-report", "FLOPs per layer or per strategy");
  common(cost);
  cost->add_option("--layers", o.layers, "Layer spec file for a per-layer report");
  cost->add_option("--input-height", o.input_h, "Input height for --layers");
  cost->add_option("--input-width", o.input_w, "Input width for --layers");
  cost->add_option("--spn-model", o.spn_model, "SPN model file");
  cost->add_option("--manifest", o.manifest, "Images to average strategy costs over");

  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of backprop");
  common(grad);

  CLI11_PARSE(app, argc, argv);

  if (o.print_config) {
    std::cout << ConfigToIni(Configure(o));
    return 0;
  }
  if (*synth) SynthGen(o);
  else if (*train_spn) TrainSpnCommand(o);
  else if (*train_det) TrainDetCommand(o);
  else if (*propose) Propose(o);
  else if (*detect) Detect(o);
  else if (*evaluate) Evaluate(o);
  else if (*cost) CostReportCommand(o);
  else if (*grad) GradCheckCommand(o);
  else std::cout << app.help();
  return 0;
}

}  // namespace
}  // namespace safd

int main(int argc, char** argv) {
  try {
    return safd::Run(argc, argv);
  } catch (const safd::Error& e) {
    std::cerr << "error[" << safd::ErrorKindName(e.kind()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
}
