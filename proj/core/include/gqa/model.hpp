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

#ifndef GQA_MODEL_HPP_
#define GQA_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gqa/episode.hpp"
#include "gqa/gaussian.hpp"

namespace gqa {

struct ModelConfig {
  std::size_t d_video = 32;
  std::size_t d_text = 32;
  std::size_t width = 64;
  std::size_t k_masks = 1;
  double temperature = 0.07;
  // Initial normalized spread of every mask.
  double init_sigma = 0.3;
};

// Dual-style encoder weights. Every tensor is a dense matrix so optimizers
// and checkpoints can treat them uniformly through for_each().
struct ModelParams {
  Eigen::MatrixXd video_proj;     // d_v x h
  Eigen::MatrixXd video_bias;     // 1 x h
  Eigen::MatrixXd attn_query;     // h x h
  Eigen::MatrixXd attn_key;       // h x h
  Eigen::MatrixXd attn_value;     // h x h
  Eigen::MatrixXd pool_query;     // h x 1
  Eigen::MatrixXd head_frame;     // h x h
  Eigen::MatrixXd head_question;  // d_t x h
  Eigen::MatrixXd head_mu;        // (h + 1) x K
  Eigen::MatrixXd head_sigma;     // (h + 1) x K
  Eigen::MatrixXd head_bias;      // 2 x K: row 0 mu, row 1 sigma
  Eigen::MatrixXd text_proj;      // d_t x h, questions
  Eigen::MatrixXd answer_proj;    // d_t x h, candidate answers
  // Fixed scoring temperature; not optimized.
  double temperature = 0.07;

  static ModelParams init(const ModelConfig& config, std::uint64_t seed);
  ModelParams zeros_like() const;

  std::size_t width() const {
    return static_cast<std::size_t>(attn_query.rows());
  }
  std::size_t k_masks() const {
    return static_cast<std::size_t>(head_mu.cols());
  }
  std::size_t n_scalars() const;
  bool all_finite() const;

  template <class F>
  void for_each(F&& f) {
    f("video_proj", video_proj);
    f("video_bias", video_bias);
    f("attn_query", attn_query);
    f("attn_key", attn_key);
    f("attn_value", attn_value);
    f("pool_query", pool_query);
    f("head_frame", head_frame);
    f("head_question", head_question);
    f("head_mu", head_mu);
    f("head_sigma", head_sigma);
    f("head_bias", head_bias);
    f("text_proj", text_proj);
    f("answer_proj", answer_proj);
  }
  template <class F>
  void for_each(F&& f) const {
    const_cast<ModelParams*>(this)->for_each(
        [&](const char* name, Eigen::MatrixXd& m) {
          f(name, static_cast<const Eigen::MatrixXd&>(m));
        });
  }
};

// Names of tensors that only the answer-scoring path reads.
inline constexpr const char* kAnswerOnlyParams[] = {"answer_proj"};

struct EncodedVideo {
  Eigen::RowVectorXd pooled;  // attention-pooled video vector, 1 x h
  Eigen::VectorXd trace;      // pooling distribution over frames
  Eigen::VectorXd weights;    // mask weights applied (all ones if unmasked)
};

// One temporal self-attention layer, Gaussian-weighted when a mask is
// given, followed by attention pooling against a learned query.
EncodedVideo encode_video(const ModelParams& params, const Episode& episode,
                          const std::optional<GaussianMask>& mask);

// All K masks the head emits for this question/video pair.
std::vector<GaussianMask> predict_gaussians(const ModelParams& params,
                                            const Episode& episode);
// The single mask (K = 1), or the first of K.
GaussianMask predict_gaussian(const ModelParams& params,
                              const Episode& episode);

// cosine(pooled video + projected question, projected answer) / temperature.
// With no mask the video stream is unmasked.
Eigen::VectorXd score_answers(const ModelParams& params,
                              const Episode& episode,
                              const std::optional<GaussianMask>& mask);

// Index of the maximum; the lowest index wins ties.
std::size_t argmax(const Eigen::VectorXd& scores);

struct LossWeights {
  double qa = 1.0;         // answer cross-entropy
  double grounding = 0.0;  // question-grounding cross-entropy
};

struct LossBreakdown {
  double total = 0.0;
  double qa = 0.0;
  double grounding = 0.0;
};

// Loss with the head's own mask(s) applied. When `grad` is non-null the
// gradient of `total` is added into it. Throws NegativeCountMismatch when
// the grounding term is active and the episode lacks A - 1 negatives.
LossBreakdown compute_loss(const ModelParams& params, const Episode& episode,
                           const LossWeights& weights,
                           ModelParams* grad = nullptr);

// Answer cross-entropy under the predicted mask.
double ng_loss(const ModelParams& params, const Episode& episode);
// ng_loss + alpha * cross-entropy of the positive question against the
// negatives, scored on the masked video vector.
double ngplus_loss(const ModelParams& params, const Episode& episode,
                   double alpha);

struct ModelOutput {
  std::vector<GaussianMask> masks;
  std::size_t dominant = 0;   // mask with the largest weight mass
  Eigen::VectorXd weights;    // combined mask weights
  Eigen::VectorXd trace;      // attention-pooling distribution
  Eigen::VectorXd scores;     // answer scores under the mask
  std::size_t answer = 0;     // argmax of scores
};

// Full forward pass with the predicted mask(s).
ModelOutput infer(const ModelParams& params, const Episode& episode);

// Overlap of the two windows, or the attention window when they are
// disjoint.
TemporalSegment fuse_windows(const TemporalSegment& gauss_win,
                             const TemporalSegment& attn_win);

}  // namespace gqa

#endif  // GQA_MODEL_HPP_
