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

#ifndef GQA_EPISODE_HPP_
#define GQA_EPISODE_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gqa/gaussian.hpp"
#include "gqa/temporal.hpp"

namespace gqa {

// One question about one video, with precomputed features.
struct Episode {
  std::string question_id;
  std::string video_id;
  Eigen::MatrixXd frames;    // n_frames x d_v
  Eigen::VectorXd question;  // d_t
  Eigen::MatrixXd answers;   // A x d_t
  int correct = 0;
  // Negatives for the question-grounding term; A - 1 of them when used.
  std::vector<Eigen::VectorXd> neg_questions;
  // Rephrasings of `question` that may stand in for it during training.
  std::vector<Eigen::VectorXd> pos_variants;
  std::optional<TemporalSegment> gt_moment;
  VideoExtent extent{1.0};
  // Descriptive questions are never used as negatives.
  bool descriptive = false;
  // Produced by the synthetic generator; gt_moment is then exact.
  bool synthetic = false;

  std::size_t n_frames() const {
    return static_cast<std::size_t>(frames.rows());
  }
  std::size_t n_answers() const {
    return static_cast<std::size_t>(answers.rows());
  }
  FrameGrid grid() const { return FrameGrid(n_frames(), extent); }

  // Throws ShapeMismatch or ValidationError.
  void validate() const;
};

}  // namespace gqa

#endif  // GQA_EPISODE_HPP_
