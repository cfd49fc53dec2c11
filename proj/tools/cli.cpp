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

#include <chrono>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "gqa/annotations.hpp"
#include "gqa/archive.hpp"
#include "gqa/config.hpp"
#include "gqa/error.hpp"
#include "gqa/metrics.hpp"
#include "gqa/synth.hpp"
#include "gqa/timeline.hpp"
#include "gqa/trainer.hpp"

namespace gqa::cli {
namespace {

namespace fs = std::filesystem;

// Relative input paths that do not exist under the working directory are
// looked up under $GQA_DATA_DIR.
fs::path resolve_input(const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || fs::exists(p)) return p;
  if (const char* dir = std::getenv(kDataDirEnv); dir != nullptr && *dir) {
    fs::path candidate = fs::path(dir) / p;
    if (fs::exists(candidate)) return candidate;
  }
  return p;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ValidationError("cannot create directory " + dir.string() + ": " +
                          ec.message());
  }
}

void print_warnings(const std::vector<std::string>& warnings,
                    std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

struct EvalArgs {
  std::string pred;
  std::string labels;
  std::string out_dir = ".";
  std::string name = "report";
  std::vector<double> extra_thresholds;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const LabelSet labels = load_labels(resolve_input(a.labels));
  const std::vector<Prediction> preds =
      load_predictions(resolve_input(a.pred));
  const MetricReport report =
      evaluate(preds, labels, EvalOptions{a.extra_thresholds});
  print_warnings(report.warnings, err);
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  write_text_file(dir / (a.name + ".json"), report_json(report));
  write_text_file(dir / (a.name + ".csv"), report_csv(report));
  out << report_csv(report);
  return kExitOk;
}

struct StatsArgs {
  std::string labels;
  std::string out_dir = ".";
  std::string name = "stats";
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  const LabelSet labels = load_labels(resolve_input(a.labels));
  const DatasetStats stats = compute_stats(labels);
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  const std::string json = stats_json(stats);
  write_text_file(dir / (a.name + ".json"), json);
  write_text_file(dir / (a.name + ".svg"), stats_svg(labels, stats));
  out << json;
  return kExitOk;
}

struct BaselineArgs {
  std::string labels;
  int answer_id = 0;
  std::string out = "random_predictions.json";
};

int cmd_random_baseline(const BaselineArgs& a, std::ostream& out) {
  const LabelSet labels = load_labels(resolve_input(a.labels));
  const auto preds = random_baseline(labels, a.answer_id);
  save_predictions(preds, a.out);
  out << "wrote " << preds.size() << " predictions to " << a.out << '\n';
  return kExitOk;
}

// Options shared by the synthetic commands; unset values keep the config's.
struct SynthOverrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> frames;
  std::optional<std::size_t> episodes;
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::optional<std::size_t> k_masks;
  std::optional<std::size_t> epochs;
  std::optional<std::string> objective;
  std::optional<std::string> window;

  RunConfig resolve() const {
    RunConfig c =
        config.empty() ? RunConfig{} : load_run_config(resolve_input(config));
    if (seed) c.set_seed(*seed);
    if (frames) c.synth.n_frames = *frames;
    if (episodes) c.synth.n_episodes = *episodes;
    if (gamma) c.schedule.gamma = *gamma;
    if (alpha) c.schedule.alpha = *alpha;
    if (k_masks) c.model.k_masks = *k_masks;
    if (epochs) c.schedule.epochs = *epochs;
    if (objective) c.schedule.objective = parse_objective(*objective);
    if (window) c.schedule.window = parse_window_source(*window);
    c.model.d_video = c.synth.d_video;
    c.model.d_text = c.synth.d_text;
    c.validate();
    return c;
  }
};

void add_synth_options(CLI::App& app, SynthOverrides& o, bool training) {
  app.add_option("--config", o.config, "key = value run configuration file");
  app.add_option("--seed", o.seed, "seed for generation, init and training");
  app.add_option("--frames", o.frames, "frames sampled per video (32)");
  app.add_option("--episodes", o.episodes, "number of synthetic episodes");
  if (!training) return;
  app.add_option("--gamma", o.gamma, "confidence-interval multiplier (1.0)")
      ->check(CLI::PositiveNumber);
  app.add_option("--alpha", o.alpha, "grounding-term weight for NG+ (1.0)");
  app.add_option("--k-masks", o.k_masks, "number of Gaussian masks (1)");
  app.add_option("--epochs", o.epochs, "maximum training epochs");
  app.add_option("--objective", o.objective, "NG or NG+");
  app.add_option("--window", o.window, "gaussian, attention or fused");
}

struct GenArgs {
  SynthOverrides synth;
  std::string out = "episodes.gqa";
  std::string labels_out;
};

int cmd_gen_synth(const GenArgs& a, std::ostream& out) {
  const RunConfig c = a.synth.resolve();
  const auto episodes = generate(c.synth);
  save_episodes(episodes, a.out);
  if (!a.labels_out.empty()) {
    save_labels_json(oracle_labels(episodes), a.labels_out);
  }
  out << "wrote " << episodes.size() << " episodes to " << a.out << '\n';
  return kExitOk;
}

std::string question_file_name(const std::string& id) {
  std::string s = id;
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' &&
        ch != '_') {
      ch = '_';
    }
  }
  return s + ".svg";
}

double mean_width(const std::vector<GroundedPrediction>& preds) {
  double sum = 0.0;
  for (const auto& g : preds) sum += g.prediction.window.length();
  return preds.empty() ? 0.0 : sum / static_cast<double>(preds.size());
}

struct TrainArgs {
  SynthOverrides synth;
  std::string out_dir = "run";
  std::size_t timelines = 8;
};

int cmd_train_synth(const TrainArgs& a, std::ostream& out,
                    std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig c = a.synth.resolve();
  EpisodeSplit split = split_episodes(generate(c.synth), c.val_fraction,
                                      c.test_fraction);
  const TrainResult result =
      train(ModelParams::init(c.model, c.init_seed), split.train, split.val,
            c.schedule);
  print_warnings(result.warnings, err);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  write_text_file(dir / "config.txt", run_config_text(c));
  save_checkpoint(result.params, dir / "checkpoint.json");
  write_text_file(dir / "history.csv", history_csv(result.history));

  const auto grounded = predict_all(result.params, split.test,
                                    c.schedule.gamma, c.schedule.window);
  std::vector<Prediction> preds;
  preds.reserve(grounded.size());
  for (const auto& g : grounded) preds.push_back(g.prediction);
  save_predictions(preds, dir / "predictions.json");
  const LabelSet labels = oracle_labels(split.test);
  save_labels_json(labels, dir / "labels.json");
  const MetricReport report = evaluate(preds, labels);
  write_text_file(dir / "report.json", report_json(report));
  write_text_file(dir / "report.csv", report_csv(report));

  const std::size_t n_tl = std::min(a.timelines, split.test.size());
  if (n_tl > 0) {
    const fs::path tl_dir = dir / "timelines";
    ensure_dir(tl_dir);
    for (std::size_t i = 0; i < n_tl; ++i) {
      write_text_file(tl_dir / question_file_name(split.test[i].question_id),
                      timeline_svg(split.test[i], grounded[i]));
    }
  }

  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  out << "objective " << to_string(c.schedule.objective) << ", window "
      << to_string(c.schedule.window) << ", gamma " << c.schedule.gamma
      << '\n'
      << "episodes train/val/test " << split.train.size() << '/'
      << split.val.size() << '/' << split.test.size() << ", best epoch "
      << result.best_epoch << " of " << result.history.size() << '\n'
      << "mean window width " << std::fixed << std::setprecision(3)
      << mean_width(grounded) << " s\n"
      << std::defaultfloat << report_csv(report) << "elapsed "
      << std::setprecision(1) << std::fixed << secs << " s\n"
      << std::defaultfloat;
  return kExitOk;
}

struct PredictArgs {
  std::string checkpoint;
  std::string episodes;
  double gamma = 1.0;
  std::string window = "gaussian";
  std::string out = "predictions.json";
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const ModelParams params = load_checkpoint(resolve_input(a.checkpoint));
  const auto episodes = load_episodes(resolve_input(a.episodes));
  const auto grounded = predict_all(params, episodes, a.gamma,
                                    parse_window_source(a.window));
  std::vector<Prediction> preds;
  preds.reserve(grounded.size());
  for (const auto& g : grounded) preds.push_back(g.prediction);
  save_predictions(preds, a.out);
  out << "wrote " << preds.size() << " predictions to " << a.out
      << ", mean window width " << std::fixed << std::setprecision(3)
      << mean_width(grounded) << " s\n"
      << std::defaultfloat;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Grounded video question answering toolkit"};
  app.require_subcommand(1);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score predictions against labels");
  eval->add_option("--pred", eval_args.pred, "prediction JSON")->required();
  eval->add_option("--labels", eval_args.labels, "label CSV or JSON")
      ->required();
  eval->add_option("--out-dir", eval_args.out_dir, "report directory");
  eval->add_option("--name", eval_args.name, "report file stem");
  eval->add_option("--extra-threshold", eval_args.extra_thresholds,
                   "report IoP/IoU rates at additional thresholds")
      ->check(CLI::Range(0.0, 1.0));

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "dataset statistics and charts");
  stats->add_option("--labels", stats_args.labels, "label CSV or JSON")
      ->required();
  stats->add_option("--out-dir", stats_args.out_dir, "output directory");
  stats->add_option("--name", stats_args.name, "output file stem");

  BaselineArgs base_args;
  auto* base = app.add_subcommand(
      "random-baseline", "fixed answer id with whole-video windows");
  base->add_option("--labels", base_args.labels, "label CSV or JSON")
      ->required();
  base->add_option("--answer-id", base_args.answer_id, "answer to always pick")
      ->check(CLI::NonNegativeNumber);
  base->add_option("--out", base_args.out, "prediction JSON to write");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen-synth", "write a synthetic episode archive");
  add_synth_options(*gen, gen_args.synth, false);
  gen->add_option("--out", gen_args.out, "episode archive to write");
  gen->add_option("--labels-out", gen_args.labels_out,
                  "also write the planted moments as label JSON");

  TrainArgs train_args;
  auto* trn = app.add_subcommand("train-synth",
                                 "generate, train, predict and evaluate");
  add_synth_options(*trn, train_args.synth, true);
  trn->add_option("--out-dir", train_args.out_dir, "run directory");
  trn->add_option("--timelines", train_args.timelines,
                  "timeline SVGs to draw for test questions");

  PredictArgs pred_args;
  auto* pred = app.add_subcommand("predict",
                                  "grounded predictions from a checkpoint");
  pred->add_option("--checkpoint", pred_args.checkpoint, "checkpoint JSON")
      ->required();
  pred->add_option("--episodes", pred_args.episodes, "episode archive")
      ->required();
  pred->add_option("--gamma", pred_args.gamma, "confidence-interval multiplier")
      ->check(CLI::PositiveNumber);
  pred->add_option("--window", pred_args.window,
                   "gaussian, attention or fused");
  pred->add_option("--out", pred_args.out, "prediction JSON to write");

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();  // program name
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*eval) return cmd_eval(eval_args, out, err);
    if (*stats) return cmd_stats(stats_args, out);
    if (*base) return cmd_random_baseline(base_args, out);
    if (*gen) return cmd_gen_synth(gen_args, out);
    if (*trn) return cmd_train_synth(train_args, out, err);
    if (*pred) return cmd_predict(pred_args, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace gqa::cli
