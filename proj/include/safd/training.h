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

namespace safd {

// Base rate for the first 70% of iterations, then 0.1x, then 0.01x after 90%.
inline double StepLr(double base, int iteration, int total) {
  if (iteration >= total * 9 / 10) return base * 0.01;
  if (iteration >= total * 7 / 10) return base * 0.1;
  return base;
}

}  // namespace safd
