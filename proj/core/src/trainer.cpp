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

#include "gqa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gqa/error.hpp"

namespace gqa {

using Eigen::MatrixXd;

Objective parse_objective(const std::string& s) {
  if (s == "NG" || s == "ng") return Objective::kNG;
  if (s == "NG+" || s == "ng+" || s == "ngplus") return Objective::kNGPlus;
  throw ConfigError("unknown objective '" + s + "' (expected NG or NG+)");
}

std::string to_string(Objective o) {
  return o == Objective::kNG ? "NG" : "NG+";
}

WindowSource parse_window_source(const std::string& s) {
  if (s == "gaussian") return WindowSource::kGaussian;
  if (s == "attention") return WindowSource::kAttention;
  if (s == "fused") return WindowSource::kFused;
  throw ConfigError("unknown window source '" + s +
                    "' (expected gaussian, attention or fused)");
}

std::string to_string(WindowSource w) {
  switch (w) {
    case WindowSource::kGaussian:
      return "gaussian";
    case WindowSource::kAttention:
      return "attention";
    case WindowSource::kFused:
      return "fused";
  }
  return "?";
}

void TrainSchedule::validate() const {
  if (stages != 1 && stages != 2) throw ConfigError("stages must be 1 or 2");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be >= 0");
  if (batch == 0) throw ConfigError("batch must be positive");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(p_same_video >= 0.0 && p_same_video <= 1.0) ||
      !(p_pos_swap >= 0.0 && p_pos_swap <= 1.0)) {
    throw ConfigError("sampling probabilities must lie in [0, 1]");
  }
  if (patience == 0) throw ConfigError("patience must be positive");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
}

Adam::Adam(const ModelParams& like, double lr)
    : lr_(lr), m_(like.zeros_like()), v_(like.zeros_like()) {}

void Adam::step(ModelParams& params, const ModelParams& grad) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  std::vector<const MatrixXd*> g;
  grad.for_each([&](const char*, const MatrixXd& m) { g.push_back(&m); });
  std::vector<MatrixXd*> m1, m2;
  m_.for_each([&](const char*, MatrixXd& m) { m1.push_back(&m); });
  v_.for_each([&](const char*, MatrixXd& m) { m2.push_back(&m); });
  std::size_t i = 0;
  params.for_each([&](const char*, MatrixXd& p) {
    MatrixXd& m = *m1[i];
    MatrixXd& v = *m2[i];
    const MatrixXd& gi = *g[i];
    m = kBeta1 * m + (1.0 - kBeta1) * gi;
    v = kBeta2 * v + (1.0 - kBeta2) * gi.cwiseAbs2();
    p.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
    ++i;
  });
}

NegativePool::NegativePool(std::span<const Episode> episodes) {
  for (const auto& ep : episodes) {
    if (!video_index_.contains(ep.video_id)) {
      video_index_[ep.video_id] = videos_.size();
      videos_.push_back(ep.video_id);
      by_video_[ep.video_id];
    }
    if (ep.descriptive) continue;
    Entry e{ep.question_id, ep.question};
    by_video_[ep.video_id].push_back(e);
    all_.push_back(std::move(e));
    all_video_.push_back(video_index_[ep.video_id]);
  }
}

const std::vector<NegativePool::Entry>& NegativePool::same_video(
    const std::string& video_id) const {
  static const std::vector<Entry> kEmpty;
  auto it = by_video_.find(video_id);
  return it == by_video_.end() ? kEmpty : it->second;
}

std::size_t NegativePool::video_index(const std::string& video_id) const {
  auto it = video_index_.find(video_id);
  return it == video_index_.end() ? videos_.size() : it->second;
}

NegativeDraw sample_negatives(const NegativePool& pool, const Episode& episode,
                              std::size_t count, double p_same_video,
                              std::mt19937_64& rng) {
  std::vector<std::size_t> same;  // indices into pool.all()
  std::vector<std::size_t> cross;
  const std::size_t own_video = pool.video_index(episode.video_id);
  for (std::size_t i = 0; i < pool.all().size(); ++i) {
    if (pool.entry_video(i) == own_video) {
      if (pool.all()[i].question_id != episode.question_id) same.push_back(i);
    } else {
      cross.push_back(i);
    }
  }
  NegativeDraw draw;
  std::bernoulli_distribution coin(p_same_video);
  auto take = [&](std::vector<std::size_t>& from) {
    std::uniform_int_distribution<std::size_t> pick(0, from.size() - 1);
    const std::size_t j = pick(rng);
    draw.questions.push_back(pool.all()[from[j]].question);
    from[j] = from.back();
    from.pop_back();
  };
  for (std::size_t k = 0; k < count; ++k) {
    if (coin(rng)) {
      if (!same.empty()) {
        take(same);
        ++draw.n_same_video;
        continue;
      }
      draw.insufficient_pool = true;
    }
    if (cross.empty()) {
      throw ConfigError("negative pool too small: need " +
                        std::to_string(count) + " cross-video questions");
    }
    take(cross);
  }
  return draw;
}

namespace {

LabelSet labels_from_episodes(std::span<const Episode> episodes) {
  LabelSet labels;
  for (const auto& ep : episodes) {
    if (!ep.gt_moment) {
      throw ValidationError("episode " + ep.question_id +
                            " has no ground-truth moment");
    }
    labels.emplace(ep.question_id,
                   GroundingLabel{ep.question_id, ep.video_id, ep.extent,
                                  {*ep.gt_moment}, ep.correct});
  }
  return labels;
}

// Acc@GQA decides; mIoP and then Acc@QA break ties, so a run whose grounded
// accuracy is still flat at zero is not stopped while grounding improves.
bool better(const MetricReport& a, const MetricReport& b) {
  if (a.acc_gqa != b.acc_gqa) return a.acc_gqa > b.acc_gqa;
  if (a.m_iop != b.m_iop) return a.m_iop > b.m_iop;
  return a.acc_qa > b.acc_qa;
}

// compute_loss, with numerical failures inside the forward pass reported
// as a non-finite loss on this episode.
LossBreakdown guarded_loss(const ModelParams& params, const Episode& episode,
                           const LossWeights& weights, ModelParams& grad,
                           std::size_t epoch) {
  try {
    return compute_loss(params, episode, weights, &grad);
  } catch (const NumericalError& e) {
    throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(epoch) +
                        " on episode " + episode.question_id + ": " +
                        e.what());
  }
}

}  // namespace

GroundedPrediction predict_grounded(const ModelParams& params,
                                    const Episode& episode, double gamma,
                                    WindowSource source,
                                    const PosthocOptions& posthoc) {
  const ModelOutput out = infer(params, episode);
  const GaussianMask mask = out.masks[out.dominant];
  const TemporalSegment gauss =
      confidence_interval(mask, episode.extent, gamma);
  const PosthocWindow attn =
      extract_window(std::span<const double>(out.trace.data(),
                                             static_cast<std::size_t>(
                                                 out.trace.size())),
                     episode.grid(), posthoc);
  const TemporalSegment fused = fuse_windows(gauss, attn.window);
  const TemporalSegment& chosen = source == WindowSource::kGaussian ? gauss
                                  : source == WindowSource::kAttention
                                      ? attn.window
                                      : fused;
  return GroundedPrediction{
      Prediction{episode.question_id, static_cast<int>(out.answer), chosen},
      mask,
      gauss,
      attn.window,
      fused,
      out.weights,
      out.trace,
      attn.degenerate};
}

std::vector<GroundedPrediction> predict_all(const ModelParams& params,
                                            std::span<const Episode> episodes,
                                            double gamma, WindowSource source,
                                            const PosthocOptions& posthoc) {
  std::vector<GroundedPrediction> out;
  out.reserve(episodes.size());
  for (const auto& ep : episodes) {
    out.push_back(predict_grounded(params, ep, gamma, source, posthoc));
  }
  return out;
}

MetricReport evaluate_model(const ModelParams& params,
                            std::span<const Episode> episodes, double gamma,
                            WindowSource source) {
  std::vector<Prediction> preds;
  preds.reserve(episodes.size());
  for (const auto& ep : episodes) {
    preds.push_back(predict_grounded(params, ep, gamma, source).prediction);
  }
  return evaluate(preds, labels_from_episodes(episodes));
}

TrainResult train(ModelParams params, std::span<const Episode> train_set,
                  std::span<const Episode> val_set,
                  const TrainSchedule& schedule) {
  schedule.validate();
  if (train_set.empty()) throw EmptyDataset("training set is empty");
  for (const auto& ep : train_set) ep.validate();

  const bool plus = schedule.objective == Objective::kNGPlus;
  const std::size_t n_stages = plus ? schedule.stages : 1;
  std::mt19937_64 rng(schedule.seed);
  const NegativePool pool(train_set);

  TrainResult result;
  result.params = params;
  // Draws whose same-video pool ran out, reported once at the end.
  std::size_t n_short_draws = 0;
  std::set<std::string> short_videos;
  Adam adam(params, schedule.lr);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  std::size_t epoch = 0;
  for (std::size_t stage = 1; stage <= n_stages; ++stage) {
    const bool final_stage = stage == n_stages;
    const bool grounding_only = plus && n_stages == 2 && stage == 1;
    const std::size_t stage_epochs =
        final_stage ? schedule.epochs : schedule.stage1_epochs;
    LossWeights weights{1.0, 0.0};
    if (grounding_only) {
      weights = LossWeights{0.0, 1.0};
    } else if (plus) {
      weights = LossWeights{1.0, schedule.alpha};
    }

    MetricReport best_val;
    bool have_best = false;
    std::size_t since_best = 0;

    for (std::size_t e = 0; e < stage_epochs; ++e) {
      ++epoch;
      std::shuffle(order.begin(), order.end(), rng);
      double loss_sum = 0.0;
      for (std::size_t b0 = 0; b0 < order.size(); b0 += schedule.batch) {
        const std::size_t b1 = std::min(order.size(), b0 + schedule.batch);
        ModelParams grad = params.zeros_like();
        double batch_loss = 0.0;
        for (std::size_t bi = b0; bi < b1; ++bi) {
          const Episode& src = train_set[order[bi]];
          LossBreakdown lb;
          if (weights.grounding != 0.0) {
            Episode eff = src;
            if (!src.pos_variants.empty() &&
                std::bernoulli_distribution(schedule.p_pos_swap)(rng)) {
              std::uniform_int_distribution<std::size_t> pick(
                  0, src.pos_variants.size() - 1);
              eff.question = src.pos_variants[pick(rng)];
            }
            NegativeDraw draw =
                sample_negatives(pool, src, src.n_answers() - 1,
                                 schedule.p_same_video, rng);
            if (draw.insufficient_pool) {
              ++n_short_draws;
              short_videos.insert(src.video_id);
            }
            eff.neg_questions = std::move(draw.questions);
            lb = guarded_loss(params, eff, weights, grad, epoch);
          } else {
            lb = guarded_loss(params, src, weights, grad, epoch);
          }
          if (!std::isfinite(lb.total)) {
            std::ostringstream os;
            os << "non-finite loss at epoch " << epoch << " on episode "
               << src.question_id << " (qa=" << lb.qa
               << ", grounding=" << lb.grounding << ")";
            throw NonFiniteLoss(os.str());
          }
          batch_loss += lb.total;
        }
        const double scale = 1.0 / static_cast<double>(b1 - b0);
        grad.for_each([&](const char*, MatrixXd& m) { m *= scale; });
        if (!grad.all_finite()) {
          throw NonFiniteLoss("non-finite gradient at epoch " +
                              std::to_string(epoch));
        }
        adam.step(params, grad);
        loss_sum += batch_loss;
      }

      EpochRecord rec;
      rec.epoch = epoch;
      rec.stage = static_cast<int>(stage);
      rec.loss = loss_sum / static_cast<double>(order.size());
      if (!val_set.empty()) {
        rec.val = evaluate_model(params, val_set, schedule.gamma,
                                 schedule.window);
      }
      result.history.push_back(rec);

      if (!final_stage) continue;
      if (val_set.empty()) {
        result.params = params;
        result.best_epoch = epoch;
        continue;
      }
      if (!have_best || better(rec.val, best_val)) {
        best_val = rec.val;
        have_best = true;
        since_best = 0;
        result.params = params;
        result.best_epoch = epoch;
      } else if (++since_best >= schedule.patience) {
        break;
      }
    }
  }
  if (n_short_draws > 0) {
    result.warnings.push_back(
        std::to_string(n_short_draws) + " negative draws across " +
        std::to_string(short_videos.size()) +
        " videos ran out of same-video questions and used cross-video ones");
  }
  return result;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os << "epoch,loss,acc_qa,m_iop,m_iou,stage,acc_gqa\n";
  os.precision(10);
  for (const auto& r : history) {
    os << r.epoch << ',' << r.loss << ',' << r.val.acc_qa << ','
       << r.val.m_iop << ',' << r.val.m_iou << ',' << r.stage << ','
       << r.val.acc_gqa << '\n';
  }
  return os.str();
}

}  // namespace gqa
