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

#include "gqa/gaussian.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "gqa/error.hpp"

namespace gqa {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

GaussianMask::GaussianMask(double mu, double sigma) : mu_(mu), sigma_(sigma) {
  if (!(mu >= 0.0 && mu <= 1.0) || !(sigma >= kSigmaMin && sigma <= 1.0)) {
    std::ostringstream os;
    os << "gaussian mask out of range: mu=" << mu << " sigma=" << sigma;
    throw ConfigError(os.str());
  }
}

GaussianMask GaussianMask::from_logits(double z_mu, double z_sigma) {
  if (std::isnan(z_mu) || std::isnan(z_sigma)) {
    throw NumericalError("gaussian mask logits are NaN");
  }
  return GaussianMask(logistic(z_mu),
                      kSigmaMin + (1.0 - kSigmaMin) * logistic(z_sigma));
}

FrameGrid::FrameGrid(std::size_t n_frames, VideoExtent extent)
    : n_frames_(n_frames), extent_(extent) {
  if (n_frames < 2) throw ConfigError("a frame grid needs at least 2 frames");
}

TemporalSegment FrameGrid::bin(std::size_t i) const { return bins(i, i); }

TemporalSegment FrameGrid::bins(std::size_t first, std::size_t last) const {
  const double w = bin_width();
  const double end = last + 1 == n_frames_
                         ? extent_.duration()
                         : static_cast<double>(last + 1) * w;
  return TemporalSegment(static_cast<double>(first) * w, end);
}

std::vector<double> frame_times(const FrameGrid& grid) {
  std::vector<double> t(grid.n_frames());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = grid.time(i);
  return t;
}

Eigen::VectorXd mask_weights(const GaussianMask& mask, const FrameGrid& grid) {
  Eigen::VectorXd g(grid.n_frames());
  for (std::size_t i = 0; i < grid.n_frames(); ++i) {
    const double z = (grid.position(i) - mask.mu()) / mask.sigma();
    g[static_cast<Eigen::Index>(i)] = std::exp(-0.5 * z * z);
  }
  return g;
}

MaskGradient mask_gradients(const GaussianMask& mask, const FrameGrid& grid,
                            std::span<const double> upstream) {
  if (upstream.size() != grid.n_frames()) {
    throw ShapeMismatch("upstream gradient length does not match frames");
  }
  const Eigen::VectorXd g = mask_weights(mask, grid);
  const double s = mask.sigma();
  MaskGradient out;
  for (std::size_t i = 0; i < grid.n_frames(); ++i) {
    const double dx = grid.position(i) - mask.mu();
    const double gi = g[static_cast<Eigen::Index>(i)] * upstream[i];
    out.d_mu += gi * dx / (s * s);
    out.d_sigma += gi * dx * dx / (s * s * s);
  }
  return out;
}

TemporalSegment confidence_interval(const GaussianMask& mask,
                                    const VideoExtent& extent, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("confidence interval gamma must be > 0");
  }
  const double d = extent.duration();
  // mu in [0,1] with a positive half-width always overlaps [0, d].
  return clamp_to_video((mask.mu() - gamma * mask.sigma()) * d,
                        (mask.mu() + gamma * mask.sigma()) * d, extent);
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

AttentionOutput gaussian_weighted_attention(const Eigen::MatrixXd& q,
                                            const Eigen::MatrixXd& k,
                                            const Eigen::MatrixXd& v,
                                            const Eigen::VectorXd& weights) {
  if (q.rows() != k.rows() || q.rows() != v.rows() || q.cols() != k.cols() ||
      weights.size() != q.rows()) {
    throw ShapeMismatch("attention inputs disagree on sequence length or d_k");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  AttentionOutput out;
  out.probs = softmax_rows(scale * q * k.transpose());
  out.output = (out.probs * weights.asDiagonal()) * v;
  return out;
}

MultiMaskWeights multi_mask_weights(std::span<const GaussianMask> masks,
                                    const FrameGrid& grid) {
  if (masks.empty()) throw EmptyMaskList("at least one mask is required");
  MultiMaskWeights out;
  double best_mass = -1.0;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    Eigen::VectorXd g = mask_weights(masks[k], grid);
    if (k == 0) {
      out.weights = g;
    } else {
      out.weights = out.weights.cwiseMax(g);
    }
    if (g.sum() > best_mass) {
      best_mass = g.sum();
      out.dominant = k;
    }
  }
  return out;
}

}  // namespace gqa
