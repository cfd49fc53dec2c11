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

#include "gqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "gqa/error.hpp"

namespace gqa {

void GroundingLabel::validate() const {
  if (segments.empty()) {
    throw ValidationError("question " + question_id + " has no segments");
  }
  if (answer_index < 0) {
    throw ValidationError("question " + question_id +
                          " has a negative answer index");
  }
  for (const auto& seg : segments) {
    if (seg.end() > extent.duration()) {
      std::ostringstream os;
      os << "question " << question_id << ": segment " << seg
         << " exceeds video duration " << extent.duration();
      throw ValidationError(os.str());
    }
  }
}

double best_overlap(const TemporalSegment& pred, const GroundingLabel& label,
                    Overlap kind) {
  double best = 0.0;
  for (const auto& seg : label.segments) {
    best = std::max(best, kind == Overlap::kIoP ? iop(pred, seg)
                                                : iou(pred, seg));
  }
  return best;
}

namespace {

std::vector<double> thresholds_for(const EvalOptions& options) {
  std::set<double> all = {kThresholdLow, kThresholdHigh};
  for (double t : options.extended_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw ConfigError("overlap threshold must lie in (0, 1]");
    }
    all.insert(t);
  }
  return {all.begin(), all.end()};
}

std::string fmt_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", round_percent(v));
  return buf;
}

std::string fmt_threshold(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

}  // namespace

MetricReport evaluate(std::span<const Prediction> preds,
                      const LabelSet& labels, const EvalOptions& options) {
  const auto thresholds = thresholds_for(options);

  std::unordered_map<std::string, const Prediction*> by_id;
  by_id.reserve(preds.size());
  for (const auto& p : preds) {
    if (!labels.contains(p.question_id)) {
      throw UnknownQuestionId("prediction for unknown question id '" +
                              p.question_id + "'");
    }
    if (!by_id.emplace(p.question_id, &p).second) {
      throw DuplicatePrediction("more than one prediction for question '" +
                                p.question_id + "'");
    }
  }

  MetricReport report;
  std::size_t correct = 0, grounded = 0;
  double sum_iop = 0.0, sum_iou = 0.0;
  std::map<double, std::size_t> iop_hits, iou_hits;
  std::vector<std::string> missing;

  for (const auto& [qid, label] : labels) {
    auto it = by_id.find(qid);
    if (it == by_id.end()) {
      missing.push_back(qid);
      continue;
    }
    const Prediction& p = *it->second;
    const double best_iop = best_overlap(p.window, label, Overlap::kIoP);
    const double best_iou = best_overlap(p.window, label, Overlap::kIoU);
    const bool right = p.answer_index == label.answer_index;
    correct += right;
    grounded += right && best_iop >= kGroundedIoP;
    sum_iop += best_iop;
    sum_iou += best_iou;
    for (double t : thresholds) {
      iop_hits[t] += best_iop >= t;
      iou_hits[t] += best_iou >= t;
    }
  }

  const std::size_t n = labels.size();
  report.n_questions = n;
  report.n_missing = missing.size();
  const double scale = n > 0 ? 100.0 / static_cast<double>(n) : 0.0;
  report.acc_qa = scale * static_cast<double>(correct);
  report.acc_gqa = scale * static_cast<double>(grounded);
  report.m_iop = scale * sum_iop;
  report.m_iou = scale * sum_iou;
  for (double t : thresholds) {
    report.iop_at[t] = scale * static_cast<double>(iop_hits[t]);
    report.iou_at[t] = scale * static_cast<double>(iou_hits[t]);
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << missing.size() << " labelled question(s) have no prediction and"
       << " were scored as wrong with zero overlap (first: " << missing.front()
       << ")";
    report.warnings.push_back(os.str());
  }
  if (n == 0) report.warnings.push_back("label set is empty");
  return report;
}

std::vector<Prediction> random_baseline(const LabelSet& labels,
                                        int answer_id) {
  if (answer_id < 0) throw ConfigError("answer id must be non-negative");
  std::vector<Prediction> out;
  out.reserve(labels.size());
  for (const auto& [qid, label] : labels) {
    out.push_back(Prediction{qid, answer_id,
                             TemporalSegment(0.0, label.extent.duration())});
  }
  return out;
}

double round_percent(double value) {
  // The small bias absorbs binary representation error such as
  // 20.05 -> 20.049999...
  return std::floor(value * 10.0 + 0.5 + 1e-9) / 10.0;
}

std::string report_csv(const MetricReport& r) {
  std::ostringstream head, row;
  head << "Acc@QA,Acc@GQA,mIoP";
  row << fmt_percent(r.acc_qa) << ',' << fmt_percent(r.acc_gqa) << ','
      << fmt_percent(r.m_iop);
  // Table order: both IoP thresholds, then mIoU, then both IoU thresholds.
  std::vector<double> ordered;
  ordered.push_back(kThresholdLow);
  ordered.push_back(kThresholdHigh);
  for (const auto& [t, _] : r.iop_at) {
    if (t != kThresholdLow && t != kThresholdHigh) ordered.push_back(t);
  }
  for (double t : ordered) {
    head << ",IoP@" << fmt_threshold(t);
    row << ',' << fmt_percent(r.iop_at.at(t));
  }
  head << ",mIoU";
  row << ',' << fmt_percent(r.m_iou);
  for (double t : ordered) {
    head << ",IoU@" << fmt_threshold(t);
    row << ',' << fmt_percent(r.iou_at.at(t));
  }
  return head.str() + "\n" + row.str() + "\n";
}

std::string report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  auto pct = [](double v) { return round_percent(v); };
  j["Acc@QA"] = pct(r.acc_qa);
  j["Acc@GQA"] = pct(r.acc_gqa);
  j["mIoP"] = pct(r.m_iop);
  for (const auto& [t, v] : r.iop_at) j["IoP@" + fmt_threshold(t)] = pct(v);
  j["mIoU"] = pct(r.m_iou);
  for (const auto& [t, v] : r.iou_at) j["IoU@" + fmt_threshold(t)] = pct(v);
  j["n_questions"] = r.n_questions;
  j["n_missing"] = r.n_missing;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

}  // namespace gqa
