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

#ifndef GQA_ANNOTATIONS_HPP_
#define GQA_ANNOTATIONS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include "gqa/metrics.hpp"

namespace gqa {

// Which third of [0, d] holds a segment's midpoint.
enum class SegmentPosition { kLeft = 0, kMiddle = 1, kRight = 2 };

struct DatasetStats {
  std::size_t n_videos = 0;
  std::size_t n_questions = 0;
  std::size_t n_segments = 0;
  double mean_seg_dur = 0.0;  // seconds, over all segments
  double mean_vid_dur = 0.0;  // seconds, over distinct videos
  double mean_ratio = 0.0;    // per-segment length / duration, averaged
  // Fractions of segments in the left, middle and right thirds.
  std::map<SegmentPosition, double> position_hist;
  // Number of segments per question -> fraction of questions.
  std::map<std::size_t, double> segs_per_qa_hist;
  // Number of questions per distinct segment -> fraction of segments.
  std::map<std::size_t, double> qas_per_seg_hist;
};

// Two segments of one video are the same moment when their IoU exceeds this.
inline constexpr double kSameSegmentIoU = 0.5;

// Parses "s:e;s:e;..." into segments. Throws ParseError.
std::vector<TemporalSegment> parse_segment_list(const std::string& cell);
std::string format_segment_list(const std::vector<TemporalSegment>& segs);

// Reads a label file. ".json" files use the JSON schema, anything else is
// read as CSV with the header
//   question_id,video_id,duration_s,answer_index,segments
// Throws ParseError or ValidationError; CSV errors carry the line number.
LabelSet load_labels(const std::filesystem::path& path);
LabelSet parse_labels_csv(const std::string& text);
LabelSet parse_labels_json(const std::string& text);

void save_labels_csv(const LabelSet& labels, const std::filesystem::path& path);
void save_labels_json(const LabelSet& labels,
                      const std::filesystem::path& path);
std::string labels_to_csv(const LabelSet& labels);

SegmentPosition segment_position(const TemporalSegment& seg,
                                 const VideoExtent& extent);

// Throws EmptyDataset for an empty label set.
DatasetStats compute_stats(const LabelSet& labels);

std::string stats_json(const DatasetStats& stats);

// Bar charts of segment duration and segment/video ratio plus three pies
// (position, segments per QA, QAs per segment).
std::string stats_svg(const LabelSet& labels, const DatasetStats& stats);

}  // namespace gqa

#endif  // GQA_ANNOTATIONS_HPP_
