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

#ifndef GQA_SYNTH_HPP_
#define GQA_SYNTH_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gqa/episode.hpp"
#include "gqa/metrics.hpp"

namespace gqa {

struct SynthConfig {
  std::size_t n_episodes = 2000;
  std::size_t n_frames = 32;
  std::size_t d_video = 32;
  std::size_t d_text = 32;
  std::size_t n_answers = 5;
  double moment_ratio = 0.2;
  double noise_std = 0.5;
  // Probability that the question vector alone reveals the answer.
  double shortcut_rate = 0.0;
  std::uint64_t seed = 7;
  // Episodes per synthetic video; siblings share the frame background and
  // supply each other's hard negative questions.
  std::size_t group_size = 4;
  double min_duration = 30.0;
  double max_duration = 50.0;
  double signal = 1.0;
  // Strength of the distractor answer carried by frames outside the moment,
  // relative to `signal`. Each outside frame draws its own wrong answer.
  double distractor_strength = 0.5;
  // Fraction of questions that get rephrased variants, and the cap on them.
  double rephrase_rate = 0.1;
  std::size_t max_variants = 5;
  double descriptive_rate = 0.0;

  // Throws ConfigError.
  void validate() const;
};

// Planted-moment episodes. Frames whose center falls inside the moment
// carry the question and the correct answer; each remaining frame carries a
// randomly drawn wrong answer. Pure function of the config.
std::vector<Episode> generate(const SynthConfig& config);

// The planted moment. Throws NotSynthetic for other episodes.
TemporalSegment oracle_grounding(const Episode& episode);

// Labels whose single segment is the planted moment.
LabelSet oracle_labels(std::span<const Episode> episodes);

// Resamples the frame sequence from only the frames inside (PosQA) or only
// the frames outside (NegQA) the planted moment, keeping n_frames.
Episode restrict_frames(const Episode& episode, bool inside);

// Question-only answer scorer: score_a = q^T W a. Stands in for BlindQA.
class BlindScorer {
 public:
  explicit BlindScorer(std::size_t d_text);

  // Full-batch gradient descent on answer cross-entropy.
  void fit(std::span<const Episode> episodes, std::size_t iterations = 300,
           double lr = 0.5);
  std::size_t predict(const Episode& episode) const;
  double accuracy(std::span<const Episode> episodes) const;

 private:
  Eigen::MatrixXd weights_;
};

struct EpisodeSplit {
  std::vector<Episode> train;
  std::vector<Episode> val;
  std::vector<Episode> test;
};

// Held-out split by video: every sibling of a video lands in the same part.
// Videos keep their first-appearance order; the last ones form the test part
// and the ones before them the validation part. Throws ConfigError when a
// part would be empty.
EpisodeSplit split_episodes(std::vector<Episode> episodes, double val_fraction,
                            double test_fraction);

using AnswerFn = std::function<std::size_t(const Episode&)>;

struct DiagnosticSplit {
  std::vector<std::size_t> vqa;   // blind scorer is wrong
  std::vector<std::size_t> gdqa;  // also wrong on NegQA, right on PosQA
};

DiagnosticSplit split_diagnostic(std::span<const Episode> episodes,
                                 const AnswerFn& blind,
                                 const AnswerFn& with_frames);

}  // namespace gqa

#endif  // GQA_SYNTH_HPP_
