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

#include "safd/error.h"

namespace safd {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRange: return "range";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kDegenerateAnnotation: return "degenerate-annotation";
    case ErrorKind::kAnnotation: return "annotation";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kState: return "state";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace safd
