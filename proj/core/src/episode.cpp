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

#include "gqa/episode.hpp"

#include "gqa/error.hpp"

namespace gqa {

void Episode::validate() const {
  if (frames.rows() < 2) throw ShapeMismatch("episode needs >= 2 frames");
  if (answers.rows() < 2) throw ShapeMismatch("episode needs >= 2 answers");
  if (answers.cols() != question.size()) {
    throw ShapeMismatch("answer and question feature widths differ");
  }
  if (correct < 0 || correct >= answers.rows()) {
    throw ValidationError("correct answer index out of range");
  }
  for (const auto& q : neg_questions) {
    if (q.size() != question.size()) {
      throw ShapeMismatch("negative question width differs from question");
    }
  }
  for (const auto& q : pos_variants) {
    if (q.size() != question.size()) {
      throw ShapeMismatch("positive variant width differs from question");
    }
  }
  if (gt_moment && gt_moment->end() > extent.duration()) {
    throw ValidationError("ground-truth moment exceeds the video");
  }
  if (!frames.allFinite() || !question.allFinite() || !answers.allFinite()) {
    throw ValidationError("episode features must be finite");
  }
}

}  // namespace gqa
