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

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "gqa/archive.hpp"
#include "gqa/metrics.hpp"

namespace gqa::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gqa");
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("gqa_cli_test_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return path(name);
  }
  static std::string read(const std::string& p) { return read_text_file(p); }

  fs::path dir_;
};

constexpr const char* kLabels =
    "question_id,video_id,duration_s,answer_index,segments\n"
    "q1,v1,30,2,3:9\n"
    "q2,v1,30,0,10:12;20:25\n"
    "q3,v2,45.5,1,0:45.5\n";

// Same answers, and each window equal to the first segment.
constexpr const char* kPerfect = R"({
  "q1": {"answer": 2, "start": 3, "end": 9},
  "q2": {"answer": 0, "start": 10, "end": 12},
  "q3": {"answer": 1, "start": 0, "end": 45.5}
})";

TEST_F(CliTest, HelpExitsZero) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("eval"), std::string::npos);
  EXPECT_NE(r.out.find("train-synth"), std::string::npos);
  const auto sub = invoke({"eval", "--help"});
  EXPECT_EQ(sub.code, kExitOk);
  EXPECT_NE(sub.out.find("--pred"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kExitInput);
  EXPECT_EQ(invoke({"bogus"}).code, kExitInput);
  EXPECT_EQ(invoke({"eval", "--labels", "x.csv"}).code, kExitInput);
  EXPECT_EQ(invoke({"predict", "--checkpoint", "a", "--episodes", "b",
                    "--gamma", "-1"})
                .code,
            kExitInput);
}

TEST_F(CliTest, LabelsAsPredictionsScoreOneHundred) {
  const auto labels = write("labels.csv", kLabels);
  const auto pred = write("pred.json", kPerfect);
  const auto r = invoke({"eval", "--pred", pred, "--labels", labels,
                         "--out-dir", path("out"), "--name", "perfect"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out,
            "Acc@QA,Acc@GQA,mIoP,IoP@0.3,IoP@0.5,mIoU,IoU@0.3,IoU@0.5\n"
            "100.0,100.0,100.0,100.0,100.0,100.0,100.0,100.0\n");
  EXPECT_EQ(read(path("out/perfect.csv")), r.out);
  EXPECT_TRUE(fs::exists(path("out/perfect.json")));
}

TEST_F(CliTest, EvalOutputIsByteStable) {
  const auto labels = write("labels.csv", kLabels);
  const auto pred = write("pred.json", R"({
    "q1": {"answer": 2, "start": 0, "end": 5},
    "q2": {"answer": 1, "start": 11, "end": 21},
    "q3": {"answer": 1, "start": 10, "end": 40}
  })");
  const auto a = invoke({"eval", "--pred", pred, "--labels", labels,
                         "--out-dir", path("a")});
  const auto b = invoke({"eval", "--pred", pred, "--labels", labels,
                         "--out-dir", path("b")});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(read(path("a/report.json")), read(path("b/report.json")));
  EXPECT_EQ(read(path("a/report.csv")), read(path("b/report.csv")));
}

TEST_F(CliTest, ExtraThresholdsExtendTheReport) {
  const auto labels = write("labels.csv", kLabels);
  const auto pred = write("pred.json", kPerfect);
  const auto r = invoke({"eval", "--pred", pred, "--labels", labels,
                         "--out-dir", path("out"), "--extra-threshold", "0.7"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("IoP@0.7"), std::string::npos);
  EXPECT_NE(r.out.find("IoU@0.7"), std::string::npos);
  EXPECT_EQ(invoke({"eval", "--pred", pred, "--labels", labels,
                    "--extra-threshold", "1.5"})
                .code,
            kExitInput);
}

TEST_F(CliTest, MalformedPredictionJsonExitsTwoWithOffset) {
  const auto labels = write("labels.csv", kLabels);
  const auto pred = write("pred.json", "{\"q1\": {\"answer\": 2,, }}");
  const auto r = invoke({"eval", "--pred", pred, "--labels", labels,
                         "--out-dir", path("out")});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_TRUE(std::regex_search(r.err, std::regex("at byte [0-9]+")))
      << r.err;
}

TEST_F(CliTest, UnknownQuestionAndMissingFilesExitTwo) {
  const auto labels = write("labels.csv", kLabels);
  const auto pred = write(
      "pred.json", R"({"q9": {"answer": 0, "start": 0, "end": 1}})");
  EXPECT_EQ(invoke({"eval", "--pred", pred, "--labels", labels,
                    "--out-dir", path("out")})
                .code,
            kExitInput);
  EXPECT_EQ(invoke({"eval", "--pred", path("none.json"), "--labels", labels,
                    "--out-dir", path("out")})
                .code,
            kExitInput);
}

TEST_F(CliTest, StatsOnOneLabel) {
  const auto labels = write(
      "one.csv",
      "question_id,video_id,duration_s,answer_index,segments\n"
      "q1,v1,40,0,10:18\n");
  const auto r = invoke({"stats", "--labels", labels, "--out-dir",
                         path("stats")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("\"n_videos\": 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"n_questions\": 1"), std::string::npos);
  EXPECT_NE(r.out.find("\"n_segments\": 1"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("stats/stats.svg")));
  EXPECT_EQ(read(path("stats/stats.json")), r.out);
}

TEST_F(CliTest, StatsOnEmptyFileExitsTwo) {
  const auto empty = write(
      "empty.csv", "question_id,video_id,duration_s,answer_index,segments\n");
  const auto r = invoke({"stats", "--labels", empty, "--out-dir",
                         path("stats")});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, RandomBaselineUsesWholeVideos) {
  const auto labels = write("labels.csv", kLabels);
  const auto out = path("random.json");
  ASSERT_EQ(invoke({"random-baseline", "--labels", labels, "--answer-id", "1",
                    "--out", out})
                .code,
            kExitOk);
  const auto preds = load_predictions(out);
  ASSERT_EQ(preds.size(), 3u);
  for (const auto& p : preds) {
    EXPECT_EQ(p.answer_index, 1);
    EXPECT_EQ(p.window.start(), 0.0);
  }
}

TEST_F(CliTest, DataDirectoryResolvesRelativeInputs) {
  write("labels.csv", kLabels);
  write("pred.json", kPerfect);
  ::setenv(kDataDirEnv, dir_.c_str(), 1);
  const auto r = invoke({"eval", "--pred", "pred.json", "--labels",
                         "labels.csv", "--out-dir", path("out")});
  ::unsetenv(kDataDirEnv);
  EXPECT_EQ(r.code, kExitOk) << r.err;
}

TEST_F(CliTest, SyntheticRunThenPredictWithNarrowerGamma) {
  const auto run_dir = path("run");
  const auto t = invoke({"train-synth", "--episodes", "120", "--epochs", "2",
                         "--seed", "3", "--out-dir", run_dir, "--timelines",
                         "2"});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  for (const char* f : {"config.txt", "checkpoint.json", "history.csv",
                        "predictions.json", "labels.json", "report.json",
                        "report.csv"}) {
    EXPECT_TRUE(fs::exists(fs::path(run_dir) / f)) << f;
  }
  EXPECT_EQ(std::distance(fs::directory_iterator(fs::path(run_dir) / "timelines"),
                          fs::directory_iterator{}),
            2);
  EXPECT_NE(t.out.find("mean window width"), std::string::npos);

  // The run's predictions evaluate cleanly against its own labels.
  const auto e = invoke({"eval", "--pred", run_dir + "/predictions.json",
                         "--labels", run_dir + "/labels.json", "--out-dir",
                         path("eval")});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  EXPECT_EQ(e.out, read(run_dir + "/report.csv"));

  ASSERT_EQ(invoke({"gen-synth", "--episodes", "40", "--seed", "9", "--out",
                    path("eps.gqa")})
                .code,
            kExitOk);
  auto predict = [&](const std::string& gamma, const std::string& out) {
    return invoke({"predict", "--checkpoint", run_dir + "/checkpoint.json",
                   "--episodes", path("eps.gqa"), "--gamma", gamma, "--out",
                   path(out)});
  };
  const auto wide = predict("1.0", "wide.json");
  const auto narrow = predict("0.8", "narrow.json");
  ASSERT_EQ(wide.code, kExitOk) << wide.err;
  ASSERT_EQ(narrow.code, kExitOk) << narrow.err;
  auto width = [](const std::string& text) {
    std::smatch m;
    EXPECT_TRUE(std::regex_search(text, m,
                                  std::regex("mean window width ([0-9.]+)")));
    return std::stod(m[1]);
  };
  EXPECT_LT(width(narrow.out), width(wide.out));
}

TEST_F(CliTest, SyntheticRunsAreDeterministicGivenSeed) {
  auto once = [&](const std::string& d) {
    const auto r = invoke({"train-synth", "--episodes", "80", "--epochs", "1",
                           "--seed", "5", "--out-dir", path(d),
                           "--timelines", "0"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
  };
  once("a");
  once("b");
  for (const char* f : {"checkpoint.json", "history.csv", "predictions.json",
                        "report.json"}) {
    EXPECT_EQ(read(path(std::string("a/") + f)),
              read(path(std::string("b/") + f)))
        << f;
  }
}

TEST_F(CliTest, BadConfigFileExitsTwo) {
  const auto cfg = write("run.cfg", "epochs = 3\nnot_a_key = 1\n");
  const auto r = invoke({"train-synth", "--config", cfg, "--out-dir",
                         path("run")});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, NonFiniteCheckpointIsRejected) {
  ASSERT_EQ(invoke({"gen-synth", "--episodes", "4", "--out", path("e.gqa")})
                .code,
            kExitOk);
  const auto ckpt = write("bad.json", "{\"format\": \"gqa-checkpoint\"}");
  EXPECT_EQ(invoke({"predict", "--checkpoint", ckpt, "--episodes",
                    path("e.gqa"), "--out", path("p.json")})
                .code,
            kExitInput);
}

}  // namespace
}  // namespace gqa::cli
