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

#ifndef GQA_POSTHOC_HPP_
#define GQA_POSTHOC_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "gqa/gaussian.hpp"

namespace gqa {

// Per-frame attention distribution: non-negative, sums to one.
class AttentionTrace {
 public:
  AttentionTrace(std::vector<double> scores, FrameGrid grid);

  std::span<const double> scores() const { return scores_; }
  const FrameGrid& grid() const { return grid_; }

 private:
  std::vector<double> scores_;
  FrameGrid grid_;
};

struct PosthocOptions {
  std::size_t smooth_window = 3;  // odd
  double dist_cap_s = 10.0;
};

struct PosthocWindow {
  TemporalSegment window;
  std::size_t pivot = 0;
  std::size_t first = 0;  // first included frame
  std::size_t last = 0;   // last included frame
  // Set when every smoothed score is equal; the window is then frame 0's bin.
  bool degenerate = false;
};

// Centered moving average; windows are truncated at the sequence edges.
std::vector<double> smooth_scores(std::span<const double> scores,
                                  std::size_t window);

// Min-max normalization to [0, 1]; all zeros when the input is constant.
std::vector<double> minmax_normalize(std::span<const double> scores);

// Mean of the smoothed, min-max normalized scores.
double dynamic_threshold(std::span<const double> scores,
                         std::size_t smooth_window = 3);
double dynamic_threshold(const AttentionTrace& trace,
                         std::size_t smooth_window = 3);

// Grows a window around the frame of maximal (smoothed, normalized)
// attention. A neighbour joins while its score is at least the dynamic
// threshold and its center lies within dist_cap_s of the pivot center. The
// window spans the bin edges of the outermost included frames.
//
// The raw-score overload accepts any finite values; the result only depends
// on them up to positive affine rescaling.
PosthocWindow extract_window(std::span<const double> scores,
                             const FrameGrid& grid,
                             const PosthocOptions& options = {});
PosthocWindow extract_window(const AttentionTrace& trace,
                             const PosthocOptions& options = {});

}  // namespace gqa

#endif  // GQA_POSTHOC_HPP_
