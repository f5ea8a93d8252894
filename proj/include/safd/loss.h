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

#include <span>
#include <vector>

namespace safd {

template <typename T>
struct LossAndGrad {
  T loss = T(0);
  std::vector<T> grad;
};

// Mean sigmoid cross entropy over N outputs, in the log-sum-exp stable form
// max(x,0) - x*p + log(1 + exp(-|x|)). Gradient is (sigmoid(x) - p) / N.
template <typename T>
LossAndGrad<T> SigmoidCeLoss(std::span<const T> logits, std::span<const T> targets);

// Single-term variant used by per-location heads.
template <typename T>
T SigmoidCe(T logit, T target);

template <typename T>
T Sigmoid(T x);

// Huber with unit transition; returns value, writes derivative to *grad.
template <typename T>
T SmoothL1(T diff, T* grad);

}  // namespace safd
