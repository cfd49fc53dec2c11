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

#ifndef GQA_TRAINER_HPP_
#define GQA_TRAINER_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gqa/episode.hpp"
#include "gqa/metrics.hpp"
#include "gqa/model.hpp"
#include "gqa/posthoc.hpp"

namespace gqa {

enum class Objective { kNG, kNGPlus };

// Which window a grounded prediction reports.
enum class WindowSource { kGaussian, kAttention, kFused };

Objective parse_objective(const std::string& s);
std::string to_string(Objective o);
WindowSource parse_window_source(const std::string& s);
std::string to_string(WindowSource w);

struct TrainSchedule {
  Objective objective = Objective::kNG;
  // NG+ only: 2 pretrains on the grounding term for stage1_epochs, then
  // trains the joint objective.
  std::size_t stages = 2;
  std::size_t stage1_epochs = 3;
  std::size_t epochs = 30;
  double lr = 3e-3;
  std::size_t batch = 64;
  double alpha = 1.0;
  double p_same_video = 0.3;
  double p_pos_swap = 0.3;
  std::size_t patience = 5;
  std::uint64_t seed = 7;
  // Validation grounding.
  double gamma = 1.0;
  WindowSource window = WindowSource::kGaussian;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based, counted across stages
  int stage = 1;
  double loss = 0.0;      // mean training loss
  MetricReport val;       // empty when there is no validation split
};

struct TrainResult {
  ModelParams params;  // best-validation parameters
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  std::vector<std::string> warnings;
};

// Adam with bias correction, (beta1, beta2, eps) = (0.9, 0.999, 1e-8).
class Adam {
 public:
  Adam(const ModelParams& like, double lr);
  void step(ModelParams& params, const ModelParams& grad);

 private:
  double lr_;
  std::size_t t_ = 0;
  ModelParams m_;
  ModelParams v_;
};

// Questions of the training set grouped by video.
class NegativePool {
 public:
  explicit NegativePool(std::span<const Episode> episodes);

  struct Entry {
    std::string question_id;
    Eigen::VectorXd question;
  };
  const std::vector<Entry>& same_video(const std::string& video_id) const;
  const std::vector<std::string>& videos() const { return videos_; }
  const std::vector<Entry>& all() const { return all_; }
  std::size_t video_index(const std::string& video_id) const;
  std::size_t entry_video(std::size_t i) const { return all_video_[i]; }

 private:
  std::map<std::string, std::vector<Entry>> by_video_;
  std::vector<Entry> all_;
  std::vector<std::size_t> all_video_;  // video index for each entry of all_
  std::vector<std::string> videos_;
  std::map<std::string, std::size_t> video_index_;
};

struct NegativeDraw {
  std::vector<Eigen::VectorXd> questions;
  std::size_t n_same_video = 0;
  // Set when the same-video pool ran out and cross-video questions were used
  // instead.
  bool insufficient_pool = false;
};

// Draws `count` distinct negatives for `episode`. Each comes from the same
// video with probability p_same_video, otherwise from another video.
// Descriptive questions never appear in the pool. Throws ConfigError if even
// the cross-video pool cannot supply `count` questions.
NegativeDraw sample_negatives(const NegativePool& pool, const Episode& episode,
                              std::size_t count, double p_same_video,
                              std::mt19937_64& rng);

TrainResult train(ModelParams params, std::span<const Episode> train_set,
                  std::span<const Episode> val_set,
                  const TrainSchedule& schedule);

struct GroundedPrediction {
  Prediction prediction;
  GaussianMask mask;
  TemporalSegment gauss_window;
  TemporalSegment attn_window;
  TemporalSegment fused_window;
  Eigen::VectorXd mask_weights;
  Eigen::VectorXd trace;
  bool degenerate_trace = false;
};

GroundedPrediction predict_grounded(const ModelParams& params,
                                    const Episode& episode, double gamma,
                                    WindowSource source,
                                    const PosthocOptions& posthoc = {});

std::vector<GroundedPrediction> predict_all(
    const ModelParams& params, std::span<const Episode> episodes, double gamma,
    WindowSource source, const PosthocOptions& posthoc = {});

// Scores predictions against the planted moments.
MetricReport evaluate_model(const ModelParams& params,
                            std::span<const Episode> episodes, double gamma,
                            WindowSource source);

// CSV with columns epoch,loss,acc_qa,m_iop,m_iou,stage,acc_gqa. Rates are
// percentages.
std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace gqa

#endif  // GQA_TRAINER_HPP_
