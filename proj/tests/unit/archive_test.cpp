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

#include "gqa/archive.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "gqa/error.hpp"
#include "gqa/synth.hpp"
#include "oracles.hpp"

namespace gqa {
namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("gqa_archive_test_" + std::to_string(::testing::UnitTest::GetInstance()
                                                      ->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

ModelParams sample_params(std::size_t k = 2) {
  ModelConfig c;
  c.d_video = 5;
  c.d_text = 3;
  c.width = 4;
  c.k_masks = k;
  c.temperature = 0.05;
  ModelParams p = ModelParams::init(c, 4);
  p.video_proj(0, 0) = 1.0 / 3.0;  // not exactly representable in decimal
  p.head_bias(1, 0) = -1e-300;
  return p;
}

void expect_same_params(const ModelParams& a, const ModelParams& b) {
  EXPECT_EQ(a.temperature, b.temperature);
  std::vector<std::pair<std::string, MatrixXd>> ta;
  a.for_each([&](const char* n, const MatrixXd& m) { ta.emplace_back(n, m); });
  std::size_t i = 0;
  b.for_each([&](const char* n, const MatrixXd& m) {
    EXPECT_EQ(ta[i].first, n);
    EXPECT_EQ(ta[i].second.rows(), m.rows()) << n;
    EXPECT_EQ(ta[i].second.cols(), m.cols()) << n;
    EXPECT_TRUE(ta[i].second == m) << n;
    ++i;
  });
}

TEST(CheckpointTest, RoundTripsExactly) {
  const ModelParams p = sample_params();
  expect_same_params(p, parse_checkpoint(checkpoint_json(p)));
  TempDir dir;
  save_checkpoint(p, dir / "ckpt.json");
  expect_same_params(p, load_checkpoint(dir / "ckpt.json"));
}

TEST(CheckpointTest, OutputIsDeterministic) {
  EXPECT_EQ(checkpoint_json(sample_params()), checkpoint_json(sample_params()));
}

TEST(CheckpointTest, RejectsBadInput) {
  EXPECT_THROW(parse_checkpoint("{"), ParseError);
  EXPECT_THROW(parse_checkpoint("{\"format\": \"other\"}"), ParseError);
  std::string text = checkpoint_json(sample_params());
  const auto v = text.find("\"version\"");
  ASSERT_NE(v, std::string::npos);
  std::string bumped = text;
  bumped.replace(bumped.find('1', v), 1, "9");
  EXPECT_THROW(parse_checkpoint(bumped), ParseError);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.json"), ParseError);
}

TEST(CheckpointTest, RejectsMissingTensor) {
  std::string text = checkpoint_json(sample_params());
  const auto pos = text.find("\"answer_proj\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 13, "\"renamed_xyz\"");
  EXPECT_THROW(parse_checkpoint(text), ParseError);
}

TEST(EpisodeArchiveTest, RoundTripsGeneratedEpisodes) {
  SynthConfig c;
  c.n_episodes = 12;
  c.rephrase_rate = 0.5;
  c.descriptive_rate = 0.3;
  auto eps = generate(c);
  eps.push_back(oracle::random_episode(7, 5, 4, 3, 2, true));  // no moment
  TempDir dir;
  save_episodes(eps, dir / "e.gqa");
  const auto back = load_episodes(dir / "e.gqa");
  ASSERT_EQ(back.size(), eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const Episode& a = eps[i];
    const Episode& b = back[i];
    EXPECT_EQ(a.question_id, b.question_id);
    EXPECT_EQ(a.video_id, b.video_id);
    EXPECT_TRUE(a.frames == b.frames);
    EXPECT_TRUE(a.question == b.question);
    EXPECT_TRUE(a.answers == b.answers);
    EXPECT_EQ(a.correct, b.correct);
    EXPECT_EQ(a.extent.duration(), b.extent.duration());
    EXPECT_EQ(a.descriptive, b.descriptive);
    EXPECT_EQ(a.synthetic, b.synthetic);
    ASSERT_EQ(a.gt_moment.has_value(), b.gt_moment.has_value());
    if (a.gt_moment) {
      EXPECT_EQ(a.gt_moment->start(), b.gt_moment->start());
      EXPECT_EQ(a.gt_moment->end(), b.gt_moment->end());
    }
    ASSERT_EQ(a.neg_questions.size(), b.neg_questions.size());
    for (std::size_t k = 0; k < a.neg_questions.size(); ++k) {
      EXPECT_TRUE(a.neg_questions[k] == b.neg_questions[k]);
    }
    ASSERT_EQ(a.pos_variants.size(), b.pos_variants.size());
    for (std::size_t k = 0; k < a.pos_variants.size(); ++k) {
      EXPECT_TRUE(a.pos_variants[k] == b.pos_variants[k]);
    }
  }
}

TEST(EpisodeArchiveTest, RejectsForeignAndTruncatedFiles) {
  TempDir dir;
  {
    std::ofstream(dir / "junk.gqa") << "not an archive at all";
  }
  EXPECT_THROW(load_episodes(dir / "junk.gqa"), ParseError);

  SynthConfig c;
  c.n_episodes = 3;
  save_episodes(generate(c), dir / "full.gqa");
  const auto size = fs::file_size(dir / "full.gqa");
  fs::copy_file(dir / "full.gqa", dir / "cut.gqa");
  fs::resize_file(dir / "cut.gqa", size / 2);
  EXPECT_THROW(load_episodes(dir / "cut.gqa"), ParseError);
  EXPECT_THROW(load_episodes(dir / "missing.gqa"), ParseError);
}

TEST(PredictionFileTest, RoundTripsAndSortsById) {
  const std::vector<Prediction> preds{
      {"q2", 1, TemporalSegment(0.1, 2.5)},
      {"q10", 0, TemporalSegment(3.0, 3.5)},
      {"q1", 4, TemporalSegment(1.0 / 3.0, 7.0)},
  };
  const std::string text = predictions_json(preds);
  EXPECT_LT(text.find("\"q1\""), text.find("\"q10\""));
  EXPECT_LT(text.find("\"q10\""), text.find("\"q2\""));
  const auto back = parse_predictions(text);
  ASSERT_EQ(back.size(), 3u);
  for (const auto& p : preds) {
    const auto it = std::find_if(back.begin(), back.end(), [&](auto& b) {
      return b.question_id == p.question_id;
    });
    ASSERT_NE(it, back.end());
    EXPECT_EQ(it->answer_index, p.answer_index);
    EXPECT_EQ(it->window.start(), p.window.start());
    EXPECT_EQ(it->window.end(), p.window.end());
  }
}

TEST(PredictionFileTest, ReportsMalformedInput) {
  try {
    parse_predictions("{\"q1\": [");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("at byte"), std::string::npos);
  }
  EXPECT_THROW(parse_predictions("[1, 2]"), ParseError);
  EXPECT_THROW(parse_predictions(R"({"q1": {"answer": 1, "start": 0}})"),
               ParseError);
  EXPECT_THROW(
      parse_predictions(R"({"q1": {"answer": 1, "start": 5, "end": 2}})"),
      ValidationError);
  EXPECT_THROW(
      parse_predictions(R"({"q1": {"answer": "a", "start": 0, "end": 2}})"),
      ParseError);
}

}  // namespace
}  // namespace gqa
