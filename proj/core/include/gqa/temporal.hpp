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

#ifndef GQA_TEMPORAL_HPP_
#define GQA_TEMPORAL_HPP_

#include <compare>
#include <ostream>

namespace gqa {

// Length of a video in seconds. Always strictly positive.
class VideoExtent {
 public:
  explicit VideoExtent(double duration);

  double duration() const { return duration_; }
  bool operator==(const VideoExtent&) const = default;

 private:
  double duration_;
};

// Closed interval [start, end] in seconds with 0 <= start < end < inf.
// Zero-length and inverted segments are rejected at construction.
class TemporalSegment {
 public:
  TemporalSegment(double start, double end);

  double start() const { return start_; }
  double end() const { return end_; }
  double length() const { return end_ - start_; }
  double center() const { return 0.5 * (start_ + end_); }

  bool contains(double t) const { return start_ <= t && t <= end_; }
  bool contains(const TemporalSegment& other) const {
    return start_ <= other.start_ && other.end_ <= end_;
  }

  bool operator==(const TemporalSegment&) const = default;

 private:
  double start_;
  double end_;
};

std::ostream& operator<<(std::ostream& os, const TemporalSegment& seg);

// Overlap length in seconds; zero when disjoint or touching.
double intersect_len(const TemporalSegment& a, const TemporalSegment& b);

double union_len(const TemporalSegment& a, const TemporalSegment& b);

// Intersection over prediction: the fraction of `pred` covered by `gt`.
double iop(const TemporalSegment& pred, const TemporalSegment& gt);

// Intersection over union.
double iou(const TemporalSegment& pred, const TemporalSegment& gt);

// Clips a raw interval [start, end] to [0, d]. Throws EmptyAfterClamp when
// nothing of positive length remains.
TemporalSegment clamp_to_video(double start, double end,
                               const VideoExtent& extent);

}  // namespace gqa

#endif  // GQA_TEMPORAL_HPP_
