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

#ifndef GQA_METRICS_HPP_
#define GQA_METRICS_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gqa/temporal.hpp"

namespace gqa {

// Ground truth for one question. A question may be grounded on several
// disjoint segments of the same video.
struct GroundingLabel {
  std::string question_id;
  std::string video_id;
  VideoExtent extent;
  std::vector<TemporalSegment> segments;
  int answer_index = 0;

  // Throws ValidationError when segments are empty or leave [0, duration].
  void validate() const;
};

// Labels keyed by question id. Ordered so that iteration is deterministic.
using LabelSet = std::map<std::string, GroundingLabel>;

struct Prediction {
  std::string question_id;
  int answer_index = 0;
  TemporalSegment window;
};

enum class Overlap { kIoP, kIoU };

// Thresholds every report carries.
inline constexpr double kThresholdLow = 0.3;
inline constexpr double kThresholdHigh = 0.5;
// A correct answer counts as grounded when its best IoP reaches this value.
inline constexpr double kGroundedIoP = 0.5;

// All rates are percentages in [0, 100], unrounded.
struct MetricReport {
  double acc_qa = 0.0;
  double acc_gqa = 0.0;
  double m_iop = 0.0;
  std::map<double, double> iop_at;
  double m_iou = 0.0;
  std::map<double, double> iou_at;
  std::size_t n_questions = 0;
  std::size_t n_missing = 0;
  std::vector<std::string> warnings;
};

struct EvalOptions {
  // Additional thresholds reported next to 0.3 and 0.5.
  std::vector<double> extended_thresholds;
};

// Max over the label's segments of IoP or IoU against `pred`.
double best_overlap(const TemporalSegment& pred, const GroundingLabel& label,
                    Overlap kind);

// Scores predictions against labels. Labelled questions without a
// prediction count as wrong with zero overlap and produce a warning.
// Throws UnknownQuestionId and DuplicatePrediction.
MetricReport evaluate(std::span<const Prediction> preds,
                      const LabelSet& labels, const EvalOptions& options = {});

// Fixed answer id with the whole video as the window.
std::vector<Prediction> random_baseline(const LabelSet& labels, int answer_id);

// One decimal, ties away from zero (values here are non-negative).
double round_percent(double value);

// Column order: Acc@QA, Acc@GQA, mIoP, IoP@0.3, IoP@0.5, mIoU, IoU@0.3,
// IoU@0.5. Extended thresholds follow IoP@0.5 and IoU@0.5 within their
// groups.
std::string report_csv(const MetricReport& report);
std::string report_json(const MetricReport& report);

}  // namespace gqa

#endif  // GQA_METRICS_HPP_
