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

#include "gqa/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gqa {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 220.0;
constexpr double kLeft = 40.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kPlot = 140.0;  // plot height

}  // namespace

std::string timeline_svg(const Episode& episode,
                         const GroundedPrediction& grounded) {
  const double d = episode.extent.duration();
  const double span = kWidth - kLeft - kRight;
  const double base = kTop + kPlot;
  auto x_of = [&](double t) { return kLeft + span * t / d; };
  auto y_of = [&](double v) { return base - kPlot * v; };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"13\">"
     << episode.question_id << " (" << episode.video_id << "), answer "
     << grounded.prediction.answer_index << " / correct " << episode.correct
     << "</text>\n";

  if (episode.gt_moment) {
    const auto& m = *episode.gt_moment;
    os << "<rect x=\"" << x_of(m.start()) << "\" y=\"" << kTop
       << "\" width=\"" << x_of(m.end()) - x_of(m.start()) << "\" height=\""
       << kPlot << "\" fill=\"#b7e1b0\"/>\n";
  }

  const FrameGrid grid = episode.grid();
  const double peak = std::max(grounded.trace.maxCoeff(), 1e-12);
  for (std::size_t i = 0; i < grid.n_frames(); ++i) {
    const TemporalSegment bin = grid.bin(i);
    const double h = kPlot * grounded.trace[static_cast<Eigen::Index>(i)] / peak;
    os << "<rect x=\"" << x_of(bin.start()) + 1 << "\" y=\"" << base - h
       << "\" width=\"" << std::max(0.0, x_of(bin.end()) - x_of(bin.start()) - 2)
       << "\" height=\"" << h << "\" fill=\"#8fb3de\" fill-opacity=\"0.7\"/>\n";
  }

  // Mask curve sampled densely so narrow masks still look smooth.
  constexpr int kSamples = 200;
  os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" "
        "points=\"";
  for (int s = 0; s <= kSamples; ++s) {
    const double x = static_cast<double>(s) / kSamples;
    const double z = (x - grounded.mask.mu()) / grounded.mask.sigma();
    os << x_of(x * d) << ',' << y_of(std::exp(-0.5 * z * z)) << ' ';
  }
  os << "\"/>\n";

  const auto& w = grounded.prediction.window;
  const double wy = base + 14.0;
  os << "<line x1=\"" << kLeft << "\" y1=\"" << base << "\" x2=\""
     << kLeft + span << "\" y2=\"" << base << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << x_of(w.start()) << "\" y1=\"" << wy << "\" x2=\""
     << x_of(w.end()) << "\" y2=\"" << wy
     << "\" stroke=\"#d62728\" stroke-width=\"4\"/>\n"
     << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 10
     << "\" font-size=\"11\">0 s</text>\n"
     << "<text x=\"" << kLeft + span - 30 << "\" y=\"" << kHeight - 10
     << "\" font-size=\"11\">" << d << " s</text>\n"
     << "<text x=\"" << kLeft + 80 << "\" y=\"" << kHeight - 10
     << "\" font-size=\"11\">red: mask and window; blue: attention; "
        "green: planted moment</text>\n"
     << "</svg>\n";
  return os.str();
}

}  // namespace gqa
