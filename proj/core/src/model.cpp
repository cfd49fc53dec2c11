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

#include "gqa/model.hpp"

#include <cmath>
#include <random>

#include "gqa/error.hpp"

namespace gqa {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

constexpr double kNormEps = 1e-12;

double logit(double p) { return std::log(p / (1.0 - p)); }

MatrixXd gaussian_matrix(Index rows, Index cols, double stddev,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

// Smoothed norm so the cosine stays differentiable at the origin.
double soft_norm(const RowVectorXd& v) {
  return std::sqrt(v.squaredNorm() + kNormEps);
}

// Scores each row of `cands` by cosine with `anchor`; returns scores / tau.
VectorXd cosine_scores(const RowVectorXd& anchor, const MatrixXd& cands,
                       double tau) {
  const double na = soft_norm(anchor);
  VectorXd s(cands.rows());
  for (Index a = 0; a < cands.rows(); ++a) {
    s[a] = anchor.dot(cands.row(a)) / (na * soft_norm(cands.row(a))) / tau;
  }
  return s;
}

// Backward of cosine_scores. Adds into d_anchor and d_cands.
void cosine_scores_backward(const RowVectorXd& anchor, const MatrixXd& cands,
                            double tau, const VectorXd& d_scores,
                            RowVectorXd& d_anchor, MatrixXd& d_cands) {
  const double na = soft_norm(anchor);
  for (Index a = 0; a < cands.rows(); ++a) {
    const double ne = soft_norm(cands.row(a));
    const double dot = anchor.dot(cands.row(a));
    const double g = d_scores[a] / tau;
    d_anchor += g * (cands.row(a) / (na * ne) - dot * anchor / (na * na * na * ne));
    d_cands.row(a) +=
        g * (anchor / (na * ne) - dot * cands.row(a) / (na * ne * ne * ne));
  }
}

double cross_entropy(const VectorXd& scores, std::size_t target,
                     VectorXd* d_scores) {
  const VectorXd p = softmax(scores);
  const double m = scores.maxCoeff();
  const double lse = m + std::log((scores.array() - m).exp().sum());
  if (d_scores) {
    *d_scores = p;
    (*d_scores)[static_cast<Index>(target)] -= 1.0;
  }
  return lse - scores[static_cast<Index>(target)];
}

// Backward of p = softmax(a).
VectorXd softmax_backward(const VectorXd& p, const VectorXd& dp) {
  return p.cwiseProduct((dp.array() - p.dot(dp)).matrix());
}

struct Tape {
  // inputs
  const ModelParams* params = nullptr;
  const Episode* ep = nullptr;
  std::size_t n = 0;
  double inv_sqrt_h = 0.0;
  MatrixXd x;  // n x h
  // head
  MatrixXd head_keys;   // n x h
  RowVectorXd head_q;   // 1 x h
  VectorXd relevance;   // n
  VectorXd pos_logit;   // n
  RowVectorXd head_in;  // 1 x (h + 1)
  std::vector<GaussianMask> masks;
  std::vector<int> mask_owner;  // per frame: mask providing the max
  bool masked = false;
  VectorXd g;  // n
  // attention
  MatrixXd aq, ak, av;  // n x h
  MatrixXd probs;       // n x n
  MatrixXd h_out;       // n x h
  VectorXd pool_logits, trace;
  RowVectorXd pooled;
};

void encode_features(Tape& t) {
  const ModelParams& p = *t.params;
  t.n = t.ep->n_frames();
  if (static_cast<Index>(t.ep->frames.cols()) != p.video_proj.rows() ||
      t.ep->question.size() != p.text_proj.rows()) {
    throw ShapeMismatch("episode feature widths do not match the model");
  }
  t.inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(p.width()));
  t.x = t.ep->frames * p.video_proj;
  t.x.rowwise() += p.video_bias.row(0);
}

void run_head(Tape& t) {
  const ModelParams& p = *t.params;
  const FrameGrid grid = t.ep->grid();
  t.head_keys = t.x * p.head_frame;
  t.head_q = t.ep->question.transpose() * p.head_question;
  t.relevance = softmax(t.inv_sqrt_h * (t.head_keys * t.head_q.transpose()));
  t.pos_logit.resize(static_cast<Index>(t.n));
  for (std::size_t i = 0; i < t.n; ++i) {
    t.pos_logit[static_cast<Index>(i)] = logit(grid.position(i));
  }
  const Index h = static_cast<Index>(p.width());
  t.head_in.resize(h + 1);
  t.head_in.head(h) = t.relevance.transpose() * t.x;
  t.head_in[h] = t.relevance.dot(t.pos_logit);

  const std::size_t k_masks = p.k_masks();
  t.masks.clear();
  for (std::size_t k = 0; k < k_masks; ++k) {
    const Index kk = static_cast<Index>(k);
    const double z_mu = t.head_in.dot(p.head_mu.col(kk)) + p.head_bias(0, kk);
    const double z_sigma =
        t.head_in.dot(p.head_sigma.col(kk)) + p.head_bias(1, kk);
    t.masks.push_back(GaussianMask::from_logits(z_mu, z_sigma));
  }
}

void set_mask_weights(Tape& t) {
  const FrameGrid grid = t.ep->grid();
  t.mask_owner.assign(t.n, 0);
  t.g = mask_weights(t.masks[0], grid);
  for (std::size_t k = 1; k < t.masks.size(); ++k) {
    const VectorXd gk = mask_weights(t.masks[k], grid);
    for (std::size_t i = 0; i < t.n; ++i) {
      const Index ii = static_cast<Index>(i);
      if (gk[ii] > t.g[ii]) {
        t.g[ii] = gk[ii];
        t.mask_owner[i] = static_cast<int>(k);
      }
    }
  }
}

void run_attention(Tape& t) {
  const ModelParams& p = *t.params;
  t.aq = t.x * p.attn_query;
  t.ak = t.x * p.attn_key;
  t.av = t.x * p.attn_value;
  AttentionOutput att = gaussian_weighted_attention(t.aq, t.ak, t.av, t.g);
  t.probs = std::move(att.probs);
  t.h_out = std::move(att.output);
  t.pool_logits = t.h_out * p.pool_query.col(0);
  t.trace = softmax(t.pool_logits);
  t.pooled = t.trace.transpose() * t.h_out;
}

// Forward with the head's masks (`use_head`), a fixed mask, or no mask.
Tape forward(const ModelParams& params, const Episode& ep, bool use_head,
             const std::optional<GaussianMask>& fixed) {
  Tape t;
  t.params = &params;
  t.ep = &ep;
  encode_features(t);
  if (use_head) {
    run_head(t);
    set_mask_weights(t);
    t.masked = true;
  } else if (fixed) {
    t.masks = {*fixed};
    set_mask_weights(t);
  } else {
    t.g = VectorXd::Ones(static_cast<Index>(t.n));
  }
  run_attention(t);
  return t;
}

// Propagates d(pooled) back through attention, the mask and the head.
void backward_video(const Tape& t, const RowVectorXd& d_pooled,
                    ModelParams& grad) {
  const ModelParams& p = *t.params;
  const Index n = static_cast<Index>(t.n);

  // pooled = trace^T H, trace = softmax(H w)
  MatrixXd d_h = t.trace * d_pooled;
  const VectorXd d_trace = t.h_out * d_pooled.transpose();
  const VectorXd d_logits = softmax_backward(t.trace, d_trace);
  d_h += d_logits * p.pool_query.col(0).transpose();
  grad.pool_query.col(0) += t.h_out.transpose() * d_logits;

  // H = (P diag(G)) V
  const MatrixXd pg = t.probs * t.g.asDiagonal();
  const MatrixXd d_av = pg.transpose() * d_h;
  const MatrixXd d_pg = d_h * t.av.transpose();
  const MatrixXd d_probs = d_pg * t.g.asDiagonal();
  const VectorXd d_g = (d_pg.cwiseProduct(t.probs)).colwise().sum().transpose();

  MatrixXd d_scores(n, n);
  for (Index r = 0; r < n; ++r) {
    const double dot = t.probs.row(r).dot(d_probs.row(r));
    d_scores.row(r) =
        t.probs.row(r).cwiseProduct((d_probs.row(r).array() - dot).matrix());
  }
  d_scores *= t.inv_sqrt_h;
  const MatrixXd d_aq = d_scores * t.ak;
  const MatrixXd d_ak = d_scores.transpose() * t.aq;

  MatrixXd d_x = d_aq * p.attn_query.transpose() +
                 d_ak * p.attn_key.transpose() +
                 d_av * p.attn_value.transpose();
  grad.attn_query += t.x.transpose() * d_aq;
  grad.attn_key += t.x.transpose() * d_ak;
  grad.attn_value += t.x.transpose() * d_av;

  if (t.masked) {
    const FrameGrid grid = t.ep->grid();
    const Index h = static_cast<Index>(p.width());
    RowVectorXd d_head_in = RowVectorXd::Zero(h + 1);
    for (std::size_t k = 0; k < t.masks.size(); ++k) {
      std::vector<double> upstream(t.n, 0.0);
      for (std::size_t i = 0; i < t.n; ++i) {
        if (t.mask_owner[i] == static_cast<int>(k)) {
          upstream[i] = d_g[static_cast<Index>(i)];
        }
      }
      const MaskGradient mg = mask_gradients(t.masks[k], grid, upstream);
      const double dz_mu = mg.d_mu * t.masks[k].dmu_dlogit();
      const double dz_sigma = mg.d_sigma * t.masks[k].dsigma_dlogit();
      const Index kk = static_cast<Index>(k);
      grad.head_mu.col(kk) += dz_mu * t.head_in.transpose();
      grad.head_sigma.col(kk) += dz_sigma * t.head_in.transpose();
      grad.head_bias(0, kk) += dz_mu;
      grad.head_bias(1, kk) += dz_sigma;
      d_head_in += dz_mu * p.head_mu.col(kk).transpose() +
                   dz_sigma * p.head_sigma.col(kk).transpose();
    }
    // head_in = [r^T X, r . pos_logit]
    const VectorXd d_rel = t.x * d_head_in.head(h).transpose() +
                           d_head_in[h] * t.pos_logit;
    d_x += t.relevance * d_head_in.head(h);
    const VectorXd d_c = t.inv_sqrt_h * softmax_backward(t.relevance, d_rel);
    const MatrixXd d_keys = d_c * t.head_q;
    const RowVectorXd d_hq = d_c.transpose() * t.head_keys;
    d_x += d_keys * p.head_frame.transpose();
    grad.head_frame += t.x.transpose() * d_keys;
    grad.head_question += t.ep->question * d_hq;
  }

  grad.video_proj += t.ep->frames.transpose() * d_x;
  grad.video_bias.row(0) += d_x.colwise().sum();
}

std::size_t check_negatives(const Episode& ep) {
  if (ep.neg_questions.size() + 1 != ep.n_answers()) {
    throw NegativeCountMismatch(
        "question-grounding term needs A - 1 = " +
        std::to_string(ep.n_answers() - 1) + " negative questions, got " +
        std::to_string(ep.neg_questions.size()));
  }
  return ep.neg_questions.size() + 1;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& c, std::uint64_t seed) {
  if (c.width == 0 || c.d_video == 0 || c.d_text == 0 || c.k_masks == 0) {
    throw ConfigError("model dimensions and mask count must be positive");
  }
  if (!(c.temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (!(c.init_sigma > kSigmaMin && c.init_sigma < 1.0)) {
    throw ConfigError("init_sigma must lie in (sigma_min, 1)");
  }
  std::mt19937_64 rng(seed);
  const Index dv = static_cast<Index>(c.d_video);
  const Index dt = static_cast<Index>(c.d_text);
  const Index h = static_cast<Index>(c.width);
  const Index k = static_cast<Index>(c.k_masks);
  ModelParams p;
  p.video_proj = gaussian_matrix(dv, h, 1.0 / std::sqrt(double(dv)), rng);
  p.video_bias = MatrixXd::Zero(1, h);
  p.attn_query = gaussian_matrix(h, h, 1.0 / std::sqrt(double(h)), rng);
  p.attn_key = gaussian_matrix(h, h, 1.0 / std::sqrt(double(h)), rng);
  p.attn_value = gaussian_matrix(h, h, 1.0 / std::sqrt(double(h)), rng);
  p.pool_query = gaussian_matrix(h, 1, 0.1 / std::sqrt(double(h)), rng);
  p.head_frame = gaussian_matrix(h, h, 1.0 / std::sqrt(double(h)), rng);
  p.head_question = gaussian_matrix(dt, h, 1.0 / std::sqrt(double(dt)), rng);
  // The mean starts at the relevance-weighted frame position: the last input
  // row carries the weighted position logit.
  p.head_mu = MatrixXd::Zero(h + 1, k);
  p.head_mu.row(h).setOnes();
  p.head_sigma = MatrixXd::Zero(h + 1, k);
  p.head_bias = MatrixXd::Zero(2, k);
  const double s0 = (c.init_sigma - kSigmaMin) / (1.0 - kSigmaMin);
  for (Index j = 0; j < k; ++j) {
    p.head_bias(0, j) =
        k == 1 ? 0.0 : logit((static_cast<double>(j) + 0.5) / double(k));
    p.head_bias(1, j) = logit(s0);
  }
  p.text_proj = gaussian_matrix(dt, h, 1.0 / std::sqrt(double(dt)), rng);
  p.answer_proj = gaussian_matrix(dt, h, 1.0 / std::sqrt(double(dt)), rng);
  p.temperature = c.temperature;
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.for_each([](const char*, MatrixXd& m) { m.setZero(); });
  return z;
}

std::size_t ModelParams::n_scalars() const {
  std::size_t n = 0;
  for_each([&](const char*, const MatrixXd& m) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

bool ModelParams::all_finite() const {
  bool ok = std::isfinite(temperature) && temperature > 0.0;
  for_each([&](const char*, const MatrixXd& m) { ok = ok && m.allFinite(); });
  return ok;
}

EncodedVideo encode_video(const ModelParams& params, const Episode& episode,
                          const std::optional<GaussianMask>& mask) {
  Tape t = forward(params, episode, false, mask);
  return EncodedVideo{t.pooled, t.trace, t.g};
}

std::vector<GaussianMask> predict_gaussians(const ModelParams& params,
                                            const Episode& episode) {
  Tape t;
  t.params = &params;
  t.ep = &episode;
  encode_features(t);
  run_head(t);
  return t.masks;
}

GaussianMask predict_gaussian(const ModelParams& params,
                              const Episode& episode) {
  return predict_gaussians(params, episode).front();
}

Eigen::VectorXd score_answers(const ModelParams& params,
                              const Episode& episode,
                              const std::optional<GaussianMask>& mask) {
  const Tape t = forward(params, episode, false, mask);
  const RowVectorXd fused =
      t.pooled + episode.question.transpose() * params.text_proj;
  return cosine_scores(fused, episode.answers * params.answer_proj,
                       params.temperature);
}

std::size_t argmax(const Eigen::VectorXd& scores) {
  Index best = 0;
  for (Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

LossBreakdown compute_loss(const ModelParams& params, const Episode& episode,
                           const LossWeights& weights, ModelParams* grad) {
  if (weights.grounding != 0.0) check_negatives(episode);
  const Tape t = forward(params, episode, true, std::nullopt);
  const double tau = params.temperature;
  LossBreakdown out;
  RowVectorXd d_pooled = RowVectorXd::Zero(t.pooled.size());

  if (weights.qa != 0.0) {
    const RowVectorXd q_emb = episode.question.transpose() * params.text_proj;
    const RowVectorXd fused = t.pooled + q_emb;
    const MatrixXd ans = episode.answers * params.answer_proj;
    const VectorXd scores = cosine_scores(fused, ans, tau);
    VectorXd d_scores;
    out.qa = cross_entropy(scores, static_cast<std::size_t>(episode.correct),
                           grad ? &d_scores : nullptr);
    if (grad) {
      d_scores *= weights.qa;
      RowVectorXd d_fused = RowVectorXd::Zero(fused.size());
      MatrixXd d_ans = MatrixXd::Zero(ans.rows(), ans.cols());
      cosine_scores_backward(fused, ans, tau, d_scores, d_fused, d_ans);
      d_pooled += d_fused;
      grad->text_proj += episode.question * d_fused;
      grad->answer_proj += episode.answers.transpose() * d_ans;
    }
  }

  if (weights.grounding != 0.0) {
    const std::size_t m = check_negatives(episode);
    MatrixXd qs(static_cast<Index>(m), episode.question.size());
    qs.row(0) = episode.question.transpose();
    for (std::size_t j = 1; j < m; ++j) {
      qs.row(static_cast<Index>(j)) = episode.neg_questions[j - 1].transpose();
    }
    const MatrixXd q_emb = qs * params.text_proj;
    const VectorXd scores = cosine_scores(t.pooled, q_emb, tau);
    VectorXd d_scores;
    out.grounding = cross_entropy(scores, 0, grad ? &d_scores : nullptr);
    if (grad) {
      d_scores *= weights.grounding;
      MatrixXd d_q = MatrixXd::Zero(q_emb.rows(), q_emb.cols());
      cosine_scores_backward(t.pooled, q_emb, tau, d_scores, d_pooled, d_q);
      grad->text_proj += qs.transpose() * d_q;
    }
  }

  out.total = weights.qa * out.qa + weights.grounding * out.grounding;
  if (grad) backward_video(t, d_pooled, *grad);
  return out;
}

double ng_loss(const ModelParams& params, const Episode& episode) {
  return compute_loss(params, episode, LossWeights{1.0, 0.0}).total;
}

double ngplus_loss(const ModelParams& params, const Episode& episode,
                   double alpha) {
  check_negatives(episode);
  return compute_loss(params, episode, LossWeights{1.0, alpha}).total;
}

ModelOutput infer(const ModelParams& params, const Episode& episode) {
  const Tape t = forward(params, episode, true, std::nullopt);
  ModelOutput out;
  out.masks = t.masks;
  const FrameGrid grid = episode.grid();
  double best = -1.0;
  for (std::size_t k = 0; k < t.masks.size(); ++k) {
    const double mass = mask_weights(t.masks[k], grid).sum();
    if (mass > best) {
      best = mass;
      out.dominant = k;
    }
  }
  out.weights = t.g;
  out.trace = t.trace;
  const RowVectorXd fused =
      t.pooled + episode.question.transpose() * params.text_proj;
  out.scores = cosine_scores(fused, episode.answers * params.answer_proj,
                             params.temperature);
  out.answer = argmax(out.scores);
  return out;
}

TemporalSegment fuse_windows(const TemporalSegment& gauss_win,
                             const TemporalSegment& attn_win) {
  const double lo = std::max(gauss_win.start(), attn_win.start());
  const double hi = std::min(gauss_win.end(), attn_win.end());
  if (lo < hi) return TemporalSegment(lo, hi);
  return attn_win;
}

}  // namespace gqa
