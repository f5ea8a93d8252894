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

#include "safd/scale_histogram.h"

namespace safd {

struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool Contains(double px, double py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
};

struct FaceAnnotation {
  Landmarks5 landmarks;
  bool truncated = false;
};

// One line of the dataset manifest.
struct AnnotationRecord {
  std::string image_path;
  std::vector<FaceAnnotation> faces;
  std::vector<Rect> ignore_regions;
};

// Side lengths of the landmark-derived square boxes.
std::vector<double> FaceSizes(const AnnotationRecord& record,
                              const LandmarkBoxOffsets& offsets);
std::vector<SquareBox> FaceBoxes(const AnnotationRecord& record,
                                 const LandmarkBoxOffsets& offsets);

// JSON-lines manifest: {"image": ..., "faces": [{"landmarks": [[x,y] x5],
// "truncated": bool}], "ignore": [[x,y,w,h], ...]} per line.
std::string ManifestLine(const AnnotationRecord& record);
AnnotationRecord ParseManifestLine(const std::string& line);
std::vector<AnnotationRecord> ReadManifest(const std::string& path);
void WriteManifest(const std::vector<AnnotationRecord>& records, const std::string& path);

// CSV: bin_index,left_edge_log2,right_edge_log2,value
std::string HistogramCsv(const ScaleHistogram& h);
void WriteHistogramCsv(const ScaleHistogram& h, const std::string& path);

}  // namespace safd
