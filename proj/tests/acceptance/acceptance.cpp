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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
// Criteria 2 and 3 compare against the released grounded-QA test labels when
// GQA_REFERENCE_LABELS names a label file. Without it, criterion 2 checks its
// label-independent substitute property and criterion 3 fails, because it
// has no substitute.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gqa/annotations.hpp"
#include "gqa/config.hpp"
#include "gqa/metrics.hpp"
#include "gqa/model.hpp"
#include "gqa/posthoc.hpp"
#include "gqa/synth.hpp"
#include "gqa/temporal.hpp"
#include "gqa/trainer.hpp"
#include "oracles.hpp"
#include "published_rows.hpp"

namespace {

using namespace gqa;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

bool within(double value, double target, double tol) {
  return std::abs(value - target) <= tol + 1e-12;
}

// Acc@GQA can only count questions that are both answered and grounded.
bool report_invariant_holds(double acc_qa, double acc_gqa, double iop_05) {
  return acc_gqa <= std::min(acc_qa, iop_05) + 1e-9;
}

bool report_invariant_holds(const MetricReport& r) {
  return report_invariant_holds(r.acc_qa, r.acc_gqa, r.iop_at.at(0.5));
}

// Every report produced while the criteria run, for the invariant check.
std::vector<MetricReport>& collected_reports() {
  static std::vector<MetricReport> reports;
  return reports;
}

MetricReport evaluate_collected(std::span<const Prediction> preds,
                                const LabelSet& labels) {
  MetricReport r = evaluate(preds, labels);
  collected_reports().push_back(r);
  return r;
}

const char* reference_labels_path() {
  const char* p = std::getenv("GQA_REFERENCE_LABELS");
  return p != nullptr && *p != '\0' ? p : nullptr;
}

// ---- 1 --------------------------------------------------------------------

Outcome metric_oracle_equivalence() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> ms(0, 120000);
  std::vector<std::pair<oracle::MsSegment, oracle::MsSegment>> pairs;
  for (int i = 0; i < 1000; ++i) {
    auto draw = [&] {
      std::int64_t a = ms(rng), b = ms(rng);
      while (a == b) b = ms(rng);
      return oracle::MsSegment{std::min(a, b), std::max(a, b)};
    };
    pairs.emplace_back(draw(), draw());
  }
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& [p, g] : pairs) {
    const TemporalSegment sp(double(p.start_ms) / 1000.0, double(p.end_ms) / 1000.0);
    const TemporalSegment sg(double(g.start_ms) / 1000.0, double(g.end_ms) / 1000.0);
    worst = std::max(worst, std::abs(iop(sp, sg) - oracle::grid_iop(p, g)));
    worst = std::max(worst, std::abs(iou(sp, sg) - oracle::grid_iou(p, g)));
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "1000 pairs, max |closed-form - 1 ms grid| = " << std::scientific
     << std::setprecision(2) << worst << ", " << std::fixed
     << std::setprecision(4) << secs << " s (both sides timed)";
  return {worst <= 1e-6 && secs < 1.0, os.str()};
}

// ---- 2 --------------------------------------------------------------------

Outcome random_baseline_reproduction() {
  // Substitute property: on any label set, whole-video windows give IoP ==
  // IoU exactly, since the prediction is the union.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dur(5.0, 200.0), u(0.0, 1.0);
  std::size_t violations = 0;
  for (int set = 0; set < 50; ++set) {
    LabelSet labels;
    for (int q = 0; q < 40; ++q) {
      const double d = dur(rng);
      GroundingLabel l{"q" + std::to_string(q), "v" + std::to_string(q / 3),
                       VideoExtent(d), {}, q % 5};
      const int n_seg = 1 + q % 3;
      for (int s = 0; s < n_seg; ++s) {
        const double a = u(rng) * (d - 1.0);
        l.segments.emplace_back(a, a + 0.5 + u(rng) * (d - a - 0.5));
      }
      labels.emplace(l.question_id, l);
    }
    const auto r = evaluate_collected(random_baseline(labels, 0), labels);
    violations += r.m_iop != r.m_iou;
    violations += r.iop_at.at(0.3) != r.iou_at.at(0.3);
    violations += r.iop_at.at(0.5) != r.iou_at.at(0.5);
  }
  std::string detail = "substitute: whole-video mIoP == mIoU on 50 label sets, " +
                       std::to_string(violations) + " violations";
  bool pass = violations == 0;

  if (const char* path = reference_labels_path()) {
    const LabelSet labels = load_labels(path);
    const auto r = evaluate_collected(random_baseline(labels, 0), labels);
    const auto& row = fixtures::kPublishedRows[1];
    const bool match =
        within(round_percent(r.m_iop), row.m_iop, 0.2) &&
        within(round_percent(r.m_iou), row.m_iou, 0.2) &&
        within(round_percent(r.iop_at.at(0.3)), row.iop_03, 0.2) &&
        within(round_percent(r.iou_at.at(0.3)), row.iou_03, 0.2) &&
        within(round_percent(r.iop_at.at(0.5)), row.iop_05, 0.2) &&
        within(round_percent(r.iou_at.at(0.5)), row.iou_05, 0.2) &&
        within(round_percent(r.acc_gqa), row.acc_gqa, 0.3) &&
        r.m_iop == r.m_iou;
    pass = pass && match;
    detail += "; reference labels: mIoP " + fmt(r.m_iop, 1) + " mIoU " +
              fmt(r.m_iou, 1) + " IoP@0.3 " + fmt(r.iop_at.at(0.3), 1) +
              " IoP@0.5 " + fmt(r.iop_at.at(0.5), 1) + " Acc@GQA " +
              fmt(r.acc_gqa, 1);
  } else {
    detail += " (reference labels not provided; GQA_REFERENCE_LABELS unset)";
  }
  return {pass, detail};
}

// ---- 3 --------------------------------------------------------------------

Outcome dataset_stats_reproduction() {
  const char* path = reference_labels_path();
  if (path == nullptr) {
    return {false,
            "not evaluable: needs the released test labels "
            "(GQA_REFERENCE_LABELS unset); no substitute exists"};
  }
  const DatasetStats s = compute_stats(load_labels(path));
  const bool pass = within(s.mean_seg_dur, 6.7, 0.1) &&
                    within(s.mean_vid_dur, 39.5, 0.1) &&
                    within(s.mean_ratio, 0.20, 0.01) && s.n_videos == 990 &&
                    s.n_questions == 5553 && s.n_segments == 6600;
  return {pass, "segment " + fmt(s.mean_seg_dur, 2) + " s, video " +
                    fmt(s.mean_vid_dur, 2) + " s, ratio " +
                    fmt(s.mean_ratio, 3) + ", counts (" +
                    std::to_string(s.n_videos) + ", " +
                    std::to_string(s.n_questions) + ", " +
                    std::to_string(s.n_segments) + ")"};
}

// ---- 4 --------------------------------------------------------------------

ModelParams jittered(ModelParams p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.3);
  p.for_each([&](const char*, Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += nd(rng);
  });
  return p;
}

double worst_tensor_error(const ModelParams& analytic,
                          const ModelParams& numeric, std::string* where) {
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> a;
  analytic.for_each(
      [&](const char* n, const Eigen::MatrixXd& m) { a.emplace_back(n, &m); });
  double worst = 0.0;
  std::size_t i = 0;
  numeric.for_each([&](const char*, const Eigen::MatrixXd& m) {
    const double e = oracle::relative_error(*a[i].second, m);
    if (e > worst) {
      worst = e;
      *where = a[i].first;
    }
    ++i;
  });
  return worst;
}

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where = "-";
  constexpr double kAlpha = 0.7;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    ModelConfig c;
    c.d_video = 5;
    c.d_text = 4;
    c.width = 6;
    const ModelParams p = jittered(ModelParams::init(c, s), 500 + s);
    const Episode ep = oracle::random_episode(7, 5, 4, 4, s, true);

    ModelParams g_ng = p.zeros_like();
    compute_loss(p, ep, LossWeights{1.0, 0.0}, &g_ng);
    const ModelParams n_ng = oracle::numeric_gradient(
        p, [&](const ModelParams& q) { return ng_loss(q, ep); });
    std::string w;
    double e = worst_tensor_error(g_ng, n_ng, &w);
    if (e > worst) worst = e, where = "NG " + w;

    ModelParams g_plus = p.zeros_like();
    compute_loss(p, ep, LossWeights{1.0, kAlpha}, &g_plus);
    const ModelParams n_plus = oracle::numeric_gradient(
        p, [&](const ModelParams& q) { return ngplus_loss(q, ep, kAlpha); });
    e = worst_tensor_error(g_plus, n_plus, &w);
    if (e > worst) worst = e, where = "NG+ " + w;
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "5 instances, every tensor, worst relative error "
     << std::scientific << std::setprecision(2) << worst << " (" << where
     << "), " << std::fixed << std::setprecision(2) << secs << " s";
  return {worst <= 1e-4 && secs < 10.0, os.str()};
}

// ---- 6 --------------------------------------------------------------------

struct SyntheticRun {
  MetricReport ng_test;
  MetricReport random_test;
  double ng_gdqa_gqa = 0.0;
  double plus_gdqa_gqa = 0.0;
  std::size_t n_test = 0;
  std::size_t n_vqa = 0;
  std::size_t n_gdqa = 0;
  std::size_t mask_centered = 0;
  double seconds = 0.0;
};

std::vector<Prediction> predictions_for(const ModelParams& params,
                                        std::span<const Episode> episodes,
                                        const TrainSchedule& schedule) {
  std::vector<Prediction> out;
  for (const auto& g :
       predict_all(params, episodes, schedule.gamma, schedule.window)) {
    out.push_back(g.prediction);
  }
  return out;
}

SyntheticRun synthetic_run() {
  const auto t0 = Clock::now();
  RunConfig ng;
  ng.set_seed(7);
  RunConfig plus = ng;
  plus.schedule.objective = Objective::kNGPlus;

  const EpisodeSplit split = split_episodes(generate(ng.synth),
                                            ng.val_fraction, ng.test_fraction);
  const TrainResult r_ng = train(ModelParams::init(ng.model, ng.init_seed),
                                 split.train, split.val, ng.schedule);
  const TrainResult r_plus =
      train(ModelParams::init(plus.model, plus.init_seed), split.train,
            split.val, plus.schedule);

  SyntheticRun run;
  run.n_test = split.test.size();
  const LabelSet labels = oracle_labels(split.test);
  run.ng_test = evaluate_collected(
      predictions_for(r_ng.params, split.test, ng.schedule), labels);
  run.random_test = evaluate_collected(random_baseline(labels, 0), labels);
  const auto plus_preds =
      predictions_for(r_plus.params, split.test, plus.schedule);
  evaluate_collected(plus_preds, labels);

  for (const auto& ep : split.test) {
    const double d = ep.extent.duration();
    const double mu = predict_gaussian(r_ng.params, ep).mu();
    run.mask_centered += std::abs(mu * d - ep.gt_moment->center()) < 0.15 * d;
  }

  // Diagnostic subsets: a question-only scorer fit on the training split,
  // and the NG model as the frames scorer.
  BlindScorer blind(ng.synth.d_text);
  blind.fit(split.train);
  const DiagnosticSplit diag = split_diagnostic(
      split.test, [&](const Episode& e) { return blind.predict(e); },
      [&](const Episode& e) { return infer(r_ng.params, e).answer; });
  run.n_vqa = diag.vqa.size();
  run.n_gdqa = diag.gdqa.size();
  if (!diag.gdqa.empty()) {
    std::vector<Episode> subset;
    for (std::size_t i : diag.gdqa) subset.push_back(split.test[i]);
    const LabelSet sub_labels = oracle_labels(subset);
    run.ng_gdqa_gqa =
        evaluate_collected(predictions_for(r_ng.params, subset, ng.schedule),
                           sub_labels)
            .acc_gqa;
    run.plus_gdqa_gqa = evaluate_collected(
                            predictions_for(r_plus.params, subset,
                                            plus.schedule),
                            sub_labels)
                            .acc_gqa;
  }
  run.seconds = seconds_since(t0);
  return run;
}

Outcome grounding_recovery(const SyntheticRun& run) {
  const double miou = run.ng_test.m_iou / 100.0;
  const double miop = run.ng_test.m_iop / 100.0;
  const double rand_miou = run.random_test.m_iou / 100.0;
  const bool pass = miou >= 0.45 && miop >= 0.60 &&
                    within(rand_miou, 0.20, 0.02) && run.n_gdqa > 0 &&
                    run.plus_gdqa_gqa >= run.ng_gdqa_gqa &&
                    run.seconds < 300.0;
  return {pass,
          "NG test mIoU " + fmt(miou) + " mIoP " + fmt(miop) +
              " on " + std::to_string(run.n_test) +
              " held-out episodes; random-window mIoU " + fmt(rand_miou) +
              "; GDQA " + std::to_string(run.n_gdqa) + " of " +
              std::to_string(run.n_vqa) + " VQA questions, Acc@GQA NG+ " +
              fmt(run.plus_gdqa_gqa, 1) + " vs NG " +
              fmt(run.ng_gdqa_gqa, 1) + "; mask centre within 0.15 d on " +
              std::to_string(run.mask_centered) + "/" +
              std::to_string(run.n_test) + "; " + fmt(run.seconds, 1) + " s"};
}

// ---- 5 --------------------------------------------------------------------

Outcome report_invariants() {
  // Random prediction/label sets, on top of every report produced above.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int set = 0; set < 500; ++set) {
    LabelSet labels;
    std::vector<Prediction> preds;
    for (int q = 0; q < 20; ++q) {
      const double d = 10.0 + 50.0 * u(rng);
      GroundingLabel l{"q" + std::to_string(q), "v", VideoExtent(d), {}, q % 4};
      const double a = u(rng) * 0.8 * d;
      l.segments.emplace_back(a, a + (0.05 + 0.15 * u(rng)) * d);
      labels.emplace(l.question_id, l);
      if (u(rng) < 0.1) continue;  // missing prediction
      const double s = u(rng) * 0.8 * d;
      preds.push_back(Prediction{l.question_id,
                                 u(rng) < 0.5 ? l.answer_index : 3 - q % 4,
                                 TemporalSegment(s, s + (0.02 + 0.2 * u(rng)) * d)});
    }
    evaluate_collected(preds, labels);
  }
  std::size_t bad_reports = 0;
  for (const auto& r : collected_reports()) {
    bad_reports += !report_invariant_holds(r);
  }
  std::size_t bad_rows = 0;
  for (const auto& row : fixtures::kPublishedRows) {
    bad_rows += !report_invariant_holds(row.acc_qa, row.acc_gqa, row.iop_05);
  }
  return {bad_reports == 0 && bad_rows == 0,
          std::to_string(collected_reports().size()) + " reports, " +
              std::to_string(bad_reports) + " violations; " +
              std::to_string(fixtures::kPublishedRows.size()) +
              " published rows, " + std::to_string(bad_rows) + " violations"};
}

// ---- 7 --------------------------------------------------------------------

Outcome posthoc_properties() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0), dur(5.0, 120.0),
      scale(0.01, 100.0), shift(-10.0, 10.0);
  std::uniform_int_distribution<int> frames(4, 64);
  const PosthocOptions options;
  std::size_t pivot_bad = 0, cap_bad = 0, affine_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(frames(rng));
    const FrameGrid grid(n, VideoExtent(dur(rng)));
    std::vector<double> raw(n);
    const double sharp = 1.0 + 4.0 * u(rng);
    for (double& x : raw) x = std::pow(u(rng), sharp);
    double sum = 0.0;
    for (double x : raw) sum += x;
    for (double& x : raw) x /= sum;

    const PosthocWindow w = extract_window(AttentionTrace(raw, grid), options);
    const double t_pivot = grid.time(w.pivot);
    pivot_bad += !w.window.contains(t_pivot);
    const double reach = std::max(t_pivot - w.window.start(),
                                  w.window.end() - t_pivot);
    cap_bad += reach > options.dist_cap_s + grid.bin_width() + 1e-9;

    const double a = scale(rng), b = shift(rng);
    std::vector<double> moved(raw);
    for (double& x : moved) x = a * x + b;
    const PosthocWindow w2 = extract_window(moved, grid, options);
    affine_bad += !(w2.window == w.window) || w2.pivot != w.pivot;
  }
  const std::size_t total = pivot_bad + cap_bad + affine_bad;
  return {total == 0, "1000 traces: pivot outside " +
                          std::to_string(pivot_bad) + ", cap exceeded " +
                          std::to_string(cap_bad) + ", affine changes " +
                          std::to_string(affine_bad)};
}

// ---- 8 --------------------------------------------------------------------

Outcome fusion_containment() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  auto draw = [&] {
    double a = u(rng), b = u(rng);
    while (a == b) b = u(rng);
    return TemporalSegment(std::min(a, b), std::max(a, b));
  };
  std::size_t bad = 0;
  std::size_t overlapping = 0;
  for (int i = 0; i < 1000; ++i) {
    const TemporalSegment g = draw(), a = draw();
    const TemporalSegment f = fuse_windows(g, a);
    bad += !(f.start() >= a.start() && f.end() <= a.end());
    overlapping += intersect_len(g, a) > 0.0;
  }
  return {bad == 0, "1000 pairs (" + std::to_string(overlapping) +
                        " overlapping), " + std::to_string(bad) +
                        " outside the attention window"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  SyntheticRun run;
  bool run_done = false;
  auto synthetic = [&]() -> const SyntheticRun& {
    if (!run_done) {
      run = synthetic_run();
      run_done = true;
    }
    return run;
  };
  // Criterion 5 runs last so it sees every report the others produced.
  const std::vector<Criterion> order = {
      {1, "metric-oracle equivalence", metric_oracle_equivalence},
      {2, "random-baseline reproduction", random_baseline_reproduction},
      {3, "dataset-stats reproduction", dataset_stats_reproduction},
      {4, "gradient fidelity", gradient_fidelity},
      {6, "synthetic grounding recovery",
       [&] { return grounding_recovery(synthetic()); }},
      {7, "post-hoc window properties", posthoc_properties},
      {8, "fusion containment", fusion_containment},
      {5, "report invariants", report_invariants},
  };

  std::vector<std::pair<int, std::string>> lines;
  bool all_pass = true;
  for (const auto& c : order) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    lines.emplace_back(c.id, std::string(o.pass ? "PASS" : "FAIL") + " " +
                                 std::to_string(c.id) + " " + c.name + ": " +
                                 o.detail);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::cout << line << '\n';
  return all_pass ? 0 : 1;
}
