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

#include "gqa/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gqa/error.hpp"

namespace gqa {

VideoExtent::VideoExtent(double duration) : duration_(duration) {
  if (!std::isfinite(duration) || duration <= 0.0) {
    std::ostringstream os;
    os << "video duration must be finite and > 0, got " << duration;
    throw InvalidSegment(os.str());
  }
}

TemporalSegment::TemporalSegment(double start, double end)
    : start_(start), end_(end) {
  if (!std::isfinite(start) || !std::isfinite(end) || start < 0.0 ||
      !(start < end)) {
    std::ostringstream os;
    os << "invalid segment [" << start << ", " << end
       << "]: need finite 0 <= start < end";
    throw InvalidSegment(os.str());
  }
}

std::ostream& operator<<(std::ostream& os, const TemporalSegment& seg) {
  return os << '[' << seg.start() << ", " << seg.end() << ']';
}

double intersect_len(const TemporalSegment& a, const TemporalSegment& b) {
  return std::max(0.0, std::min(a.end(), b.end()) -
                           std::max(a.start(), b.start()));
}

double union_len(const TemporalSegment& a, const TemporalSegment& b) {
  // Overlapping or touching segments: the hull is the union. Computing it
  // from the endpoints keeps whole-video unions exactly equal to d.
  if (a.start() <= b.end() && b.start() <= a.end()) {
    return std::max(a.end(), b.end()) - std::min(a.start(), b.start());
  }
  return a.length() + b.length();
}

double iop(const TemporalSegment& pred, const TemporalSegment& gt) {
  return std::clamp(intersect_len(pred, gt) / pred.length(), 0.0, 1.0);
}

double iou(const TemporalSegment& pred, const TemporalSegment& gt) {
  return std::clamp(intersect_len(pred, gt) / union_len(pred, gt), 0.0, 1.0);
}

TemporalSegment clamp_to_video(double start, double end,
                               const VideoExtent& extent) {
  const double lo = std::max(0.0, start);
  const double hi = std::min(extent.duration(), end);
  if (!(lo < hi)) {
    std::ostringstream os;
    os << "interval [" << start << ", " << end
       << "] is empty after clamping to [0, " << extent.duration() << "]";
    throw EmptyAfterClamp(os.str());
  }
  return TemporalSegment(lo, hi);
}

}  // namespace gqa
