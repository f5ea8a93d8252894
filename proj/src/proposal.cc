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

#include "safd/proposal.h"

#include <algorithm>
#include <cmath>

#include "safd/error.h"

namespace safd {

DetectorRange::DetectorRange(double smin, double smax)
    : smin_(smin), smax_(smax) {
  if (!(smin > 0.0) || std::abs(smax - 2.0 * smin) > 1e-9 * smax) {
    throw Error(ErrorKind::kParameter,
                "detector range must be one octave (smax == 2 * smin)");
  }
}

double DetectorRange::target() const { return std::sqrt(smin_ * smax_); }

ScaleHistogram Smooth(const ScaleHistogram& h, int window_bins) {
  const int n = h.size();
  if (window_bins < 1 || window_bins % 2 == 0 || window_bins > n) {
    throw Error(ErrorKind::kParameter,
                "smoothing window must be odd and at most the bin count");
  }
  const int half = window_bins / 2;
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    const int lo = std::max(0, k - half);
    const int hi = std::min(n - 1, k + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += h[j];
    // Clamp guards the [0,1] invariant against round-off in the mean.
    out[k] = std::clamp(sum / (hi - lo + 1), 0.0, 1.0);
  }
  return ScaleHistogram(h.spec(), std::move(out));
}

std::vector<ScaleProposal> Nms1d(const ScaleHistogram& h, int window_bins) {
  if (window_bins < 1) {
    throw Error(ErrorKind::kParameter, "NMS window must be positive");
  }
  const int n = h.size();
  std::vector<ScaleProposal> peaks;
  for (int k = 0; k < n; ++k) {
    const double v = h[k];
    if (!(v > 0.0)) continue;
    bool keep = true;
    for (int j = std::max(0, k - window_bins);
         keep && j <= std::min(n - 1, k + window_bins); ++j) {
      if (j < k) keep = v > h[j];
      if (j > k) keep = v >= h[j];
    }
    if (keep) peaks.push_back({BinCenter(h.spec(), k + 1), v});
  }
  return peaks;
}

std::vector<ScaleProposal> SelectProposals(std::span<const ScaleProposal> peaks,
                                           double threshold, int max_count) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::kParameter, "threshold must lie in [0,1]");
  }
  std::vector<ScaleProposal> kept;
  for (const ScaleProposal& p : peaks) {
    if (p.confidence > threshold) kept.push_back(p);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const ScaleProposal& a, const ScaleProposal& b) {
                     return a.confidence > b.confidence;
                   });
  if (max_count >= 0 && static_cast<int>(kept.size()) > max_count) {
    kept.resize(max_count);
  }
  return kept;
}

std::vector<ZoomAction> PlanZooms(std::span<const ScaleProposal> proposals,
                                  const DetectorRange& range) {
  std::vector<ZoomAction> plan;
  plan.reserve(proposals.size());
  for (const ScaleProposal& p : proposals) {
    plan.push_back({range.target() / std::exp2(p.log2_size), p});
  }
  std::stable_sort(plan.begin(), plan.end(),
                   [](const ZoomAction& a, const ZoomAction& b) {
                     return a.source_proposal.confidence >
                            b.source_proposal.confidence;
                   });
  return plan;
}

std::vector<ZoomAction> ProposeZooms(const ScaleHistogram& h,
                                     const ProposalParams& params,
                                     const DetectorRange& range) {
  const ScaleHistogram smoothed = Smooth(h, params.smooth_window);
  const auto peaks = Nms1d(smoothed, params.nms_radius);
  const auto selected =
      SelectProposals(peaks, params.threshold, params.max_count);
  return PlanZooms(selected, range);
}

int SmoothingWindowForSpec(const HistogramSpec& spec) {
  const double bins = 0.5 / spec.bin_width();
  // Nearest odd integer: 2 * round((x - 1) / 2) + 1.
  const int odd = 2 * static_cast<int>(std::lround((bins - 1.0) / 2.0)) + 1;
  return std::clamp(odd, 1, spec.bins() % 2 == 1 ? spec.bins() : spec.bins() - 1);
}

}  // namespace safd
