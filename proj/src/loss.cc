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

#include "safd/loss.h"

#include <algorithm>
#include <cmath>

#include "safd/error.h"

namespace safd {

template <typename T>
T Sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
T SigmoidCe(T logit, T target) {
  return std::max(logit, T(0)) - logit * target +
         std::log1p(std::exp(-std::abs(logit)));
}

template <typename T>
LossAndGrad<T> SigmoidCeLoss(std::span<const T> logits,
                             std::span<const T> targets) {
  if (logits.size() != targets.size() || logits.empty()) {
    throw Error(ErrorKind::kShape, "loss: logits and targets differ in length");
  }
  const T n = static_cast<T>(logits.size());
  LossAndGrad<T> out;
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const T p = targets[i];
    if (!(p >= T(0) && p <= T(1))) {
      throw Error(ErrorKind::kRange, "loss target outside [0,1]");
    }
    out.loss += SigmoidCe(logits[i], p);
    out.grad[i] = (Sigmoid(logits[i]) - p) / n;
  }
  out.loss /= n;
  if (!std::isfinite(out.loss)) {
    throw Error(ErrorKind::kNumeric, "loss is not finite");
  }
  return out;
}

template <typename T>
T SmoothL1(T diff, T* grad) {
  const T a = std::abs(diff);
  if (a < T(1)) {
    *grad = diff;
    return T(0.5) * diff * diff;
  }
  *grad = diff > T(0) ? T(1) : T(-1);
  return a - T(0.5);
}

template float Sigmoid<float>(float);
template double Sigmoid<double>(double);
template float SigmoidCe<float>(float, float);
template double SigmoidCe<double>(double, double);
template LossAndGrad<float> SigmoidCeLoss<float>(std::span<const float>,
                                                 std::span<const float>);
template LossAndGrad<double> SigmoidCeLoss<double>(std::span<const double>,
                                                   std::span<const double>);
template float SmoothL1<float>(float, float*);
template double SmoothL1<double>(double, double*);

}  // namespace safd
