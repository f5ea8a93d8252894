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

#include "safd/annotation.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "safd/csv.h"
#include "safd/error.h"

namespace safd {

std::vector<double> FaceSizes(const AnnotationRecord& record,
                              const LandmarkBoxOffsets& offsets) {
  std::vector<double> sizes;
  sizes.reserve(record.faces.size());
  for (const auto& f : record.faces) {
    sizes.push_back(BoxFromLandmarks(f.landmarks, offsets).side);
  }
  return sizes;
}

std::vector<SquareBox> FaceBoxes(const AnnotationRecord& record,
                                 const LandmarkBoxOffsets& offsets) {
  std::vector<SquareBox> boxes;
  boxes.reserve(record.faces.size());
  for (const auto& f : record.faces) {
    boxes.push_back(BoxFromLandmarks(f.landmarks, offsets));
  }
  return boxes;
}

std::string ManifestLine(const AnnotationRecord& record) {
  nlohmann::json j;
  j["image"] = record.image_path;
  j["faces"] = nlohmann::json::array();
  for (const auto& f : record.faces) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : f.landmarks.points) pts.push_back({p.x, p.y});
    j["faces"].push_back({{"landmarks", pts}, {"truncated", f.truncated}});
  }
  j["ignore"] = nlohmann::json::array();
  for (const auto& r : record.ignore_regions) {
    j["ignore"].push_back({r.x, r.y, r.w, r.h});
  }
  return j.dump();
}

AnnotationRecord ParseManifestLine(const std::string& line) {
  AnnotationRecord rec;
  try {
    const auto j = nlohmann::json::parse(line);
    rec.image_path = j.at("image").get<std::string>();
    for (const auto& f : j.at("faces")) {
      FaceAnnotation fa;
      const auto& pts = f.at("landmarks");
      if (pts.size() != 5) {
        throw Error(ErrorKind::kAnnotation, "face needs exactly five landmarks");
      }
      for (std::size_t k = 0; k < 5; ++k) {
        fa.landmarks.points[k] = {pts[k].at(0).get<double>(), pts[k].at(1).get<double>()};
      }
      fa.truncated = f.value("truncated", false);
      rec.faces.push_back(fa);
    }
    if (j.contains("ignore")) {
      for (const auto& r : j.at("ignore")) {
        rec.ignore_regions.push_back({r.at(0).get<double>(), r.at(1).get<double>(),
                                      r.at(2).get<double>(), r.at(3).get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kAnnotation, std::string("bad manifest line: ") + e.what());
  }
  return rec;
}

std::vector<AnnotationRecord> ReadManifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::vector<AnnotationRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(ParseManifestLine(line));
  }
  return out;
}

void WriteManifest(const std::vector<AnnotationRecord>& records,
                   const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path);
  for (const auto& r : records) os << ManifestLine(r) << "\n";
}

std::string HistogramCsv(const ScaleHistogram& h) {
  std::ostringstream os;
  os << "bin_index,left_edge_log2,right_edge_log2,value\n";
  for (int i = 1; i <= h.size(); ++i) {
    const auto [l, r] = BinEdges(h.spec(), i);
    os << i << "," << FormatDouble(l) << "," << FormatDouble(r) << ","
       << FormatDouble(h[i - 1]) << "\n";
  }
  return os.str();
}

void WriteHistogramCsv(const ScaleHistogram& h, const std::string& path) {
  WriteTextFile(path, HistogramCsv(h));
}

}  // namespace safd
