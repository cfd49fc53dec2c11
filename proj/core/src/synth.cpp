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

#include "gqa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <random>

#include "gqa/error.hpp"
#include "gqa/model.hpp"

namespace gqa {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

VectorXd gaussian_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

VectorXd unit_vector(Index n, std::mt19937_64& rng) {
  VectorXd v = gaussian_vector(n, rng);
  return v / v.norm();
}

// Random orthonormal-column map from text space into video space.
MatrixXd text_to_video(Index d_text, Index d_video, std::mt19937_64& rng) {
  MatrixXd g(std::max(d_text, d_video), std::min(d_text, d_video));
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Index c = 0; c < g.cols(); ++c) {
    for (Index r = 0; r < g.rows(); ++r) g(r, c) = dist(rng);
  }
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ() *
                     MatrixXd::Identity(g.rows(), g.cols());
  return d_text >= d_video ? MatrixXd(q) : MatrixXd(q.transpose());
}

struct QuestionDraft {
  VectorXd question;
  MatrixXd answers;
  int correct = 0;
  std::vector<VectorXd> variants;
  bool descriptive = false;
};

}  // namespace

void SynthConfig::validate() const {
  if (n_episodes == 0) throw ConfigError("n_episodes must be positive");
  if (n_frames < 2) throw ConfigError("n_frames must be >= 2");
  if (d_video == 0 || d_text == 0) throw ConfigError("feature widths must be > 0");
  if (n_answers < 2) throw ConfigError("need at least 2 candidate answers");
  if (!(moment_ratio > 0.0 && moment_ratio < 1.0)) {
    throw ConfigError("moment_ratio must lie in (0, 1)");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (!(signal > 0.0) || !(distractor_strength >= 0.0)) {
    throw ConfigError("signal must be > 0 and distractor_strength >= 0");
  }
  if (!(shortcut_rate >= 0.0 && shortcut_rate <= 1.0)) {
    throw ConfigError("shortcut_rate must lie in [0, 1]");
  }
  if (group_size == 0) throw ConfigError("group_size must be positive");
  if (!(min_duration > 0.0 && max_duration >= min_duration)) {
    throw ConfigError("durations must satisfy 0 < min <= max");
  }
  if (!(rephrase_rate >= 0.0 && rephrase_rate <= 1.0) ||
      !(descriptive_rate >= 0.0 && descriptive_rate <= 1.0)) {
    throw ConfigError("rates must lie in [0, 1]");
  }
}

std::vector<Episode> generate(const SynthConfig& c) {
  c.validate();
  const Index dv = static_cast<Index>(c.d_video);
  const Index dt = static_cast<Index>(c.d_text);
  const Index n_ans = static_cast<Index>(c.n_answers);

  std::mt19937_64 global(derive_seed(c.seed, 0, 0));
  const MatrixXd to_video = text_to_video(dt, dv, global);  // dt x dv

  // Text side first: cross-video negatives need every question.
  std::vector<QuestionDraft> drafts(c.n_episodes);
  for (std::size_t e = 0; e < c.n_episodes; ++e) {
    std::mt19937_64 rng(derive_seed(c.seed, 1, e));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    QuestionDraft& d = drafts[e];
    d.answers.resize(n_ans, dt);
    for (Index a = 0; a < n_ans; ++a) {
      d.answers.row(a) = unit_vector(dt, rng).transpose();
    }
    d.correct = static_cast<int>(
        std::uniform_int_distribution<Index>(0, n_ans - 1)(rng));
    VectorXd q = unit_vector(dt, rng);
    if (u01(rng) < c.shortcut_rate) {
      q += d.answers.row(d.correct).transpose();
      q /= q.norm();
    }
    d.question = q;
    if (u01(rng) < c.rephrase_rate && c.max_variants > 0) {
      const auto k = std::uniform_int_distribution<std::size_t>(
          1, c.max_variants)(rng);
      for (std::size_t j = 0; j < k; ++j) {
        VectorXd v = q + 0.3 * unit_vector(dt, rng);
        d.variants.push_back(v / v.norm());
      }
    }
    d.descriptive = u01(rng) < c.descriptive_rate;
  }

  std::vector<Episode> out;
  out.reserve(c.n_episodes);
  const std::size_t n_groups =
      (c.n_episodes + c.group_size - 1) / c.group_size;
  for (std::size_t gidx = 0; gidx < n_groups; ++gidx) {
    std::mt19937_64 grng(derive_seed(c.seed, 2, gidx));
    const VectorXd background = unit_vector(dv, grng);
    const double duration = std::uniform_real_distribution<double>(
        c.min_duration, c.max_duration)(grng);
    const std::size_t first = gidx * c.group_size;
    const std::size_t last = std::min(c.n_episodes, first + c.group_size);

    for (std::size_t e = first; e < last; ++e) {
      std::mt19937_64 rng(derive_seed(c.seed, 3, e));
      const QuestionDraft& d = drafts[e];
      Episode ep;
      ep.question_id = "q" + std::to_string(e);
      ep.video_id = "v" + std::to_string(gidx);
      ep.extent = VideoExtent(duration);
      ep.question = d.question;
      ep.answers = d.answers;
      ep.correct = d.correct;
      ep.pos_variants = d.variants;
      ep.descriptive = d.descriptive;
      ep.synthetic = true;

      const double len = c.moment_ratio * duration;
      const double start =
          std::uniform_real_distribution<double>(0.0, duration - len)(rng);
      ep.gt_moment = TemporalSegment(start, start + len);

      const VectorXd inside_text =
          (d.question + d.answers.row(d.correct).transpose()).normalized();
      const VectorXd inside = c.signal * (to_video.transpose() * inside_text);
      std::uniform_int_distribution<Index> wrong(0, n_ans - 2);
      const FrameGrid grid(c.n_frames, ep.extent);
      ep.frames.resize(static_cast<Index>(c.n_frames), dv);
      const double noise_scale = c.noise_std / std::sqrt(double(dv));
      for (std::size_t i = 0; i < c.n_frames; ++i) {
        VectorXd f = background + noise_scale * gaussian_vector(dv, rng);
        if (ep.gt_moment->contains(grid.time(i))) {
          f += inside;
        } else {
          Index a = wrong(rng);
          if (a >= d.correct) ++a;
          f += c.distractor_strength * c.signal *
               (to_video.transpose() * d.answers.row(a).transpose());
        }
        ep.frames.row(static_cast<Index>(i)) = f.normalized().transpose();
      }

      // Hard negatives from siblings first, then other videos.
      for (std::size_t s = first; s < last && ep.neg_questions.size() + 1 <
                                                   c.n_answers; ++s) {
        if (s != e) ep.neg_questions.push_back(drafts[s].question);
      }
      std::uniform_int_distribution<std::size_t> pick(0, c.n_episodes - 1);
      std::size_t guard = 0;
      while (ep.neg_questions.size() + 1 < c.n_answers &&
             guard++ < 100 * c.n_answers) {
        const std::size_t o = pick(rng);
        if (o >= first && o < last) continue;
        ep.neg_questions.push_back(drafts[o].question);
      }
      out.push_back(std::move(ep));
    }
  }
  return out;
}

TemporalSegment oracle_grounding(const Episode& episode) {
  if (!episode.synthetic || !episode.gt_moment) {
    throw NotSynthetic("episode " + episode.question_id +
                       " has no planted moment");
  }
  return *episode.gt_moment;
}

LabelSet oracle_labels(std::span<const Episode> episodes) {
  LabelSet labels;
  for (const auto& ep : episodes) {
    GroundingLabel l{ep.question_id, ep.video_id, ep.extent,
                     {oracle_grounding(ep)}, ep.correct};
    labels.emplace(ep.question_id, std::move(l));
  }
  return labels;
}

Episode restrict_frames(const Episode& episode, bool inside) {
  const TemporalSegment moment = oracle_grounding(episode);
  const FrameGrid grid = episode.grid();
  std::vector<Index> keep;
  for (std::size_t i = 0; i < grid.n_frames(); ++i) {
    if (moment.contains(grid.time(i)) == inside) {
      keep.push_back(static_cast<Index>(i));
    }
  }
  if (keep.empty()) {
    if (!inside) return episode;
    // Moment narrower than a bin: use the frame nearest its center.
    const auto i = static_cast<Index>(std::min<double>(
        double(grid.n_frames() - 1),
        std::floor(moment.center() / grid.bin_width())));
    keep.push_back(i);
  }
  Episode out = episode;
  const std::size_t n = grid.n_frames();
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = static_cast<std::size_t>(
        (static_cast<double>(i) + 0.5) * double(keep.size()) / double(n));
    out.frames.row(static_cast<Index>(i)) =
        episode.frames.row(keep[std::min(src, keep.size() - 1)]);
  }
  return out;
}

BlindScorer::BlindScorer(std::size_t d_text)
    : weights_(MatrixXd::Zero(static_cast<Index>(d_text),
                              static_cast<Index>(d_text))) {}

void BlindScorer::fit(std::span<const Episode> episodes,
                      std::size_t iterations, double lr) {
  if (episodes.empty()) throw EmptyDataset("no episodes to fit");
  const double inv_n = 1.0 / static_cast<double>(episodes.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    MatrixXd grad = MatrixXd::Zero(weights_.rows(), weights_.cols());
    for (const auto& ep : episodes) {
      const VectorXd scores = ep.answers * (weights_.transpose() * ep.question);
      VectorXd d = softmax(scores);
      d[ep.correct] -= 1.0;
      // d score_a / dW = q a^T
      grad += ep.question * (d.transpose() * ep.answers);
    }
    weights_ -= lr * inv_n * grad;
  }
}

std::size_t BlindScorer::predict(const Episode& episode) const {
  return argmax(episode.answers * (weights_.transpose() * episode.question));
}

double BlindScorer::accuracy(std::span<const Episode> episodes) const {
  if (episodes.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& ep : episodes) {
    hit += predict(ep) == static_cast<std::size_t>(ep.correct);
  }
  return static_cast<double>(hit) / static_cast<double>(episodes.size());
}

EpisodeSplit split_episodes(std::vector<Episode> episodes, double val_fraction,
                            double test_fraction) {
  if (!(val_fraction > 0.0 && test_fraction > 0.0 &&
        val_fraction + test_fraction < 1.0)) {
    throw ConfigError("split fractions must be > 0 and sum to less than 1");
  }
  std::vector<std::string> order;
  std::map<std::string, std::size_t> rank;
  for (const auto& ep : episodes) {
    if (rank.emplace(ep.video_id, order.size()).second) {
      order.push_back(ep.video_id);
    }
  }
  const auto n_videos = static_cast<double>(order.size());
  const auto n_test = static_cast<std::size_t>(std::llround(n_videos * test_fraction));
  const auto n_val = static_cast<std::size_t>(std::llround(n_videos * val_fraction));
  if (n_test == 0 || n_val == 0 || n_test + n_val >= order.size()) {
    throw ConfigError("too few videos (" + std::to_string(order.size()) +
                      ") for the requested split");
  }
  const std::size_t val_begin = order.size() - n_test - n_val;
  const std::size_t test_begin = order.size() - n_test;
  EpisodeSplit split;
  for (auto& ep : episodes) {
    const std::size_t r = rank.at(ep.video_id);
    auto& part = r >= test_begin ? split.test
                 : r >= val_begin ? split.val
                                  : split.train;
    part.push_back(std::move(ep));
  }
  return split;
}

DiagnosticSplit split_diagnostic(std::span<const Episode> episodes,
                                 const AnswerFn& blind,
                                 const AnswerFn& with_frames) {
  DiagnosticSplit split;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& ep = episodes[i];
    const auto right = static_cast<std::size_t>(ep.correct);
    if (blind(ep) == right) continue;
    split.vqa.push_back(i);
    if (with_frames(restrict_frames(ep, false)) != right &&
        with_frames(restrict_frames(ep, true)) == right) {
      split.gdqa.push_back(i);
    }
  }
  return split;
}

}  // namespace gqa
