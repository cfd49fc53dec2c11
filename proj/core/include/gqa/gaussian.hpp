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

#ifndef GQA_GAUSSIAN_HPP_
#define GQA_GAUSSIAN_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gqa/temporal.hpp"

namespace gqa {

// Lower bound on the normalized spread. Keeps the 1/sigma^3 terms of the
// gradient bounded.
inline constexpr double kSigmaMin = 0.01;

double logistic(double z);

// Temporal mask N(mu, sigma^2) on normalized time [0, 1].
class GaussianMask {
 public:
  GaussianMask(double mu, double sigma);

  // mu = logistic(z_mu), sigma = kSigmaMin + (1 - kSigmaMin) logistic(z_sigma).
  // Throws NumericalError for NaN logits.
  static GaussianMask from_logits(double z_mu, double z_sigma);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

  // d mu / d z_mu and d sigma / d z_sigma at this mask's logits.
  double dmu_dlogit() const { return mu_ * (1.0 - mu_); }
  double dsigma_dlogit() const {
    const double s = (sigma_ - kSigmaMin) / (1.0 - kSigmaMin);
    return (1.0 - kSigmaMin) * s * (1.0 - s);
  }

 private:
  double mu_;
  double sigma_;
};

// Uniformly sampled frames. Frame i covers the bin [i d/n, (i+1) d/n] and is
// stamped at the bin center.
class FrameGrid {
 public:
  FrameGrid(std::size_t n_frames, VideoExtent extent);

  std::size_t n_frames() const { return n_frames_; }
  const VideoExtent& extent() const { return extent_; }
  double bin_width() const {
    return extent_.duration() / static_cast<double>(n_frames_);
  }
  // Normalized center (i + 0.5) / n.
  double position(std::size_t i) const {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(n_frames_);
  }
  double time(std::size_t i) const { return position(i) * extent_.duration(); }
  TemporalSegment bin(std::size_t i) const;
  // Span of bins first..last inclusive.
  TemporalSegment bins(std::size_t first, std::size_t last) const;

 private:
  std::size_t n_frames_;
  VideoExtent extent_;
};

std::vector<double> frame_times(const FrameGrid& grid);

// G_i = exp(-((x_i - mu) / sigma)^2 / 2), peak value 1.
Eigen::VectorXd mask_weights(const GaussianMask& mask, const FrameGrid& grid);

struct MaskGradient {
  double d_mu = 0.0;
  double d_sigma = 0.0;
};

// Chain rule from dL/dG_i to (dL/dmu, dL/dsigma). Throws ShapeMismatch.
MaskGradient mask_gradients(const GaussianMask& mask, const FrameGrid& grid,
                            std::span<const double> upstream);

// ((mu - gamma sigma) d, (mu + gamma sigma) d) clipped to [0, d].
TemporalSegment confidence_interval(const GaussianMask& mask,
                                    const VideoExtent& extent, double gamma);

struct AttentionOutput {
  Eigen::MatrixXd probs;   // row-wise softmax(Q K^T / sqrt(d_k)), n x n
  Eigen::MatrixXd output;  // (probs * diag(G)) V, n x d_v
};

// Self-attention whose post-softmax weights are scaled per key position by
// the mask weights. Rows are not renormalized afterwards.
AttentionOutput gaussian_weighted_attention(const Eigen::MatrixXd& q,
                                            const Eigen::MatrixXd& k,
                                            const Eigen::MatrixXd& v,
                                            const Eigen::VectorXd& weights);

struct MultiMaskWeights {
  Eigen::VectorXd weights;   // elementwise max over masks
  std::size_t dominant = 0;  // mask with the largest weight sum
};

// Throws EmptyMaskList.
MultiMaskWeights multi_mask_weights(std::span<const GaussianMask> masks,
                                    const FrameGrid& grid);

// Row-wise numerically stable softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace gqa

#endif  // GQA_GAUSSIAN_HPP_
