/* Copyright 2026 The gqa Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "gqa/posthoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gqa/error.hpp"

namespace gqa {

AttentionTrace::AttentionTrace(std::vector<double> scores, FrameGrid grid)
    : scores_(std::move(scores)), grid_(grid) {
  if (scores_.size() != grid_.n_frames()) {
    throw ShapeMismatch("attention trace length does not match frame grid");
  }
  double sum = 0.0;
  for (double s : scores_) {
    if (!std::isfinite(s) || s < 0.0) {
      throw ValidationError("attention scores must be finite and >= 0");
    }
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("attention trace must sum to 1");
  }
}

std::vector<double> smooth_scores(std::span<const double> scores,
                                  std::size_t window) {
  if (window == 0 || window % 2 == 0) {
    throw ConfigError("smoothing window must be a positive odd count");
  }
  const std::size_t n = scores.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += scores[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

namespace {

// True when the spread of [lo, hi] is only rounding noise, e.g. after
// averaging equal scores over windows of different sizes.
bool is_flat(double lo, double hi) {
  const double scale = std::max(std::abs(lo), std::abs(hi));
  return !(hi - lo > 64.0 * std::numeric_limits<double>::epsilon() * scale);
}

}  // namespace

std::vector<double> minmax_normalize(std::span<const double> scores) {
  std::vector<double> out(scores.size(), 0.0);
  if (scores.empty()) return out;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (is_flat(*lo, *hi)) return out;
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = (scores[i] - *lo) / range;
  }
  return out;
}

double dynamic_threshold(std::span<const double> scores,
                         std::size_t smooth_window) {
  const auto norm = minmax_normalize(smooth_scores(scores, smooth_window));
  if (norm.empty()) return 0.0;
  return std::accumulate(norm.begin(), norm.end(), 0.0) /
         static_cast<double>(norm.size());
}

double dynamic_threshold(const AttentionTrace& trace,
                         std::size_t smooth_window) {
  return dynamic_threshold(trace.scores(), smooth_window);
}

PosthocWindow extract_window(std::span<const double> scores,
                             const FrameGrid& grid,
                             const PosthocOptions& options) {
  if (scores.size() != grid.n_frames()) {
    throw ShapeMismatch("attention trace length does not match frame grid");
  }
  if (!(options.dist_cap_s >= 0.0)) {
    throw ConfigError("distance cap must be non-negative");
  }
  const auto smoothed = smooth_scores(scores, options.smooth_window);
  const auto [lo, hi] = std::minmax_element(smoothed.begin(), smoothed.end());
  if (is_flat(*lo, *hi)) {
    return PosthocWindow{grid.bin(0), 0, 0, 0, true};
  }
  const auto norm = minmax_normalize(smoothed);
  const double threshold =
      std::accumulate(norm.begin(), norm.end(), 0.0) /
      static_cast<double>(norm.size());
  // max_element returns the first maximum, i.e. the lowest index on ties.
  const auto pivot = static_cast<std::size_t>(
      std::max_element(norm.begin(), norm.end()) - norm.begin());
  const double t_pivot = grid.time(pivot);
  // Frame centers are computed in floating point; a tolerance far below any
  // bin width keeps frames exactly at the cap from being dropped by rounding.
  constexpr double kTimeTolerance = 1e-9;
  auto admits = [&](std::size_t j) {
    return norm[j] >= threshold &&
           std::abs(grid.time(j) - t_pivot) <=
               options.dist_cap_s + kTimeTolerance;
  };
  std::size_t first = pivot, last = pivot;
  while (first > 0 && admits(first - 1)) --first;
  while (last + 1 < norm.size() && admits(last + 1)) ++last;
  return PosthocWindow{grid.bins(first, last), pivot, first, last, false};
}

PosthocWindow extract_window(const AttentionTrace& trace,
                             const PosthocOptions& options) {
  return extract_window(trace.scores(), trace.grid(), options);
}

}  // namespace gqa
