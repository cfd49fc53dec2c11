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

#include "gqa/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "gqa/error.hpp"
#include "json.hpp"

namespace gqa {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view s, const char* what) {
  const std::string t = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ParseError(std::string("cannot parse ") + what + " from '" + t +
                     "'");
  }
  return v;
}

long parse_int(std::string_view s, const char* what) {
  const std::string t = trim(s);
  long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ParseError(std::string("cannot parse ") + what + " from '" + t +
                     "'");
  }
  return v;
}

// Splits one CSV record. Fields may be wrapped in double quotes; a doubled
// quote inside a quoted field is a literal quote.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field");
  out.push_back(trim(cur));
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void insert_label(LabelSet& set, GroundingLabel label, long line) {
  try {
    label.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), line);
  }
  auto qid = label.question_id;
  if (!set.emplace(qid, std::move(label)).second) {
    throw ValidationError("duplicate question id '" + qid + "'", line);
  }
}

}  // namespace

std::vector<TemporalSegment> parse_segment_list(const std::string& cell) {
  std::vector<TemporalSegment> segs;
  std::stringstream ss(cell);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (trim(item).empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ParseError("segment '" + trim(item) + "' is not of the form s:e");
    }
    const double s = parse_double(std::string_view(item).substr(0, colon),
                                  "segment start");
    const double e = parse_double(std::string_view(item).substr(colon + 1),
                                  "segment end");
    try {
      segs.emplace_back(s, e);
    } catch (const InvalidSegment& err) {
      throw ValidationError(err.what());
    }
  }
  return segs;
}

std::string format_segment_list(const std::vector<TemporalSegment>& segs) {
  std::string out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out += ';';
    out += num(segs[i].start()) + ':' + num(segs[i].end());
  }
  return out;
}

LabelSet parse_labels_csv(const std::string& text) {
  static const std::vector<std::string> kHeader = {
      "question_id", "video_id", "duration_s", "answer_index", "segments"};
  LabelSet set;
  std::stringstream ss(text);
  std::string line;
  long lineno = 0;
  bool seen_header = false;
  while (std::getline(ss, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv(line);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!seen_header) {
      if (fields != kHeader) {
        throw ParseError(
            "line " + std::to_string(lineno) +
            ": expected header question_id,video_id,duration_s,answer_index,"
            "segments");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != kHeader.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(kHeader.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    try {
      const double dur = parse_double(fields[2], "duration_s");
      std::optional<VideoExtent> extent;
      try {
        extent.emplace(dur);
      } catch (const InvalidSegment& e) {
        throw ValidationError(e.what());
      }
      GroundingLabel label{fields[0], fields[1], *extent,
                           parse_segment_list(fields[4]),
                           static_cast<int>(parse_int(fields[3],
                                                      "answer_index"))};
      insert_label(set, std::move(label), lineno);
    } catch (const ValidationError& e) {
      if (e.line() >= 0) throw;
      throw ValidationError(e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return set;
}

LabelSet parse_labels_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
  if (!doc.is_array()) throw ParseError("label JSON must be an array");
  LabelSet set;
  long index = 0;
  for (const auto& row : doc) {
    try {
      std::vector<TemporalSegment> segs;
      for (const auto& pair : row.at("segments")) {
        if (!pair.is_array() || pair.size() != 2) {
          throw ParseError("segments must be [start, end] pairs");
        }
        try {
          segs.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        } catch (const InvalidSegment& e) {
          throw ValidationError(e.what());
        }
      }
      std::optional<VideoExtent> extent;
      try {
        extent.emplace(row.at("duration_s").get<double>());
      } catch (const InvalidSegment& e) {
        throw ValidationError(e.what());
      }
      GroundingLabel label{row.at("question_id").get<std::string>(),
                           row.at("video_id").get<std::string>(), *extent,
                           std::move(segs),
                           row.at("answer_index").get<int>()};
      insert_label(set, std::move(label), -1);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("entry " + std::to_string(index) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("entry " + std::to_string(index) + ": " +
                            e.what());
    }
    ++index;
  }
  return set;
}

LabelSet load_labels(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (path.extension() == ".json") return parse_labels_json(text);
  return parse_labels_csv(text);
}

std::string labels_to_csv(const LabelSet& labels) {
  std::ostringstream os;
  os << "question_id,video_id,duration_s,answer_index,segments\n";
  for (const auto& [qid, l] : labels) {
    os << qid << ',' << l.video_id << ',' << num(l.extent.duration()) << ','
       << l.answer_index << ',' << format_segment_list(l.segments) << '\n';
  }
  return os.str();
}

void save_labels_csv(const LabelSet& labels,
                     const std::filesystem::path& path) {
  write_file(path, labels_to_csv(labels));
}

void save_labels_json(const LabelSet& labels,
                      const std::filesystem::path& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [qid, l] : labels) {
    nlohmann::ordered_json row;
    row["question_id"] = qid;
    row["video_id"] = l.video_id;
    row["duration_s"] = l.extent.duration();
    row["answer_index"] = l.answer_index;
    row["segments"] = nlohmann::ordered_json::array();
    for (const auto& s : l.segments) {
      row["segments"].push_back({s.start(), s.end()});
    }
    arr.push_back(std::move(row));
  }
  write_file(path, arr.dump(1) + "\n");
}

SegmentPosition segment_position(const TemporalSegment& seg,
                                 const VideoExtent& extent) {
  const double third = extent.duration() / 3.0;
  const double mid = seg.center();
  if (mid < third) return SegmentPosition::kLeft;
  if (mid < 2.0 * third) return SegmentPosition::kMiddle;
  return SegmentPosition::kRight;
}

DatasetStats compute_stats(const LabelSet& labels) {
  if (labels.empty()) throw EmptyDataset("label set is empty");

  DatasetStats st;
  st.n_questions = labels.size();

  std::map<std::string, double> video_dur;
  // Distinct moments per video, each with the set of questions using it.
  struct Moment {
    TemporalSegment seg;
    std::set<std::string> questions;
  };
  std::map<std::string, std::vector<Moment>> moments;

  double sum_seg = 0.0, sum_ratio = 0.0;
  std::map<SegmentPosition, std::size_t> pos_count;
  std::map<std::size_t, std::size_t> per_qa;

  for (const auto& [qid, l] : labels) {
    video_dur.emplace(l.video_id, l.extent.duration());
    per_qa[l.segments.size()]++;
    auto& vm = moments[l.video_id];
    for (const auto& seg : l.segments) {
      ++st.n_segments;
      sum_seg += seg.length();
      sum_ratio += seg.length() / l.extent.duration();
      pos_count[segment_position(seg, l.extent)]++;
      auto match = std::find_if(vm.begin(), vm.end(), [&](const Moment& m) {
        return iou(m.seg, seg) > kSameSegmentIoU;
      });
      if (match == vm.end()) {
        vm.push_back(Moment{seg, {qid}});
      } else {
        match->questions.insert(qid);
      }
    }
  }

  st.n_videos = video_dur.size();
  const double nseg = static_cast<double>(st.n_segments);
  st.mean_seg_dur = sum_seg / nseg;
  st.mean_ratio = sum_ratio / nseg;
  double sum_vid = 0.0;
  for (const auto& [_, d] : video_dur) sum_vid += d;
  st.mean_vid_dur = sum_vid / static_cast<double>(st.n_videos);

  for (auto p : {SegmentPosition::kLeft, SegmentPosition::kMiddle,
                 SegmentPosition::kRight}) {
    st.position_hist[p] = static_cast<double>(pos_count[p]) / nseg;
  }
  for (const auto& [k, c] : per_qa) {
    st.segs_per_qa_hist[k] =
        static_cast<double>(c) / static_cast<double>(st.n_questions);
  }
  std::map<std::size_t, std::size_t> per_seg;
  std::size_t n_moments = 0;
  for (const auto& [_, vm] : moments) {
    for (const auto& m : vm) {
      per_seg[m.questions.size()]++;
      ++n_moments;
    }
  }
  for (const auto& [k, c] : per_seg) {
    st.qas_per_seg_hist[k] =
        static_cast<double>(c) / static_cast<double>(n_moments);
  }
  return st;
}

std::string stats_json(const DatasetStats& st) {
  nlohmann::ordered_json j;
  j["n_videos"] = st.n_videos;
  j["n_questions"] = st.n_questions;
  j["n_segments"] = st.n_segments;
  j["mean_seg_dur"] = st.mean_seg_dur;
  j["mean_vid_dur"] = st.mean_vid_dur;
  j["mean_ratio"] = st.mean_ratio;
  j["position_hist"] = {
      {"left", st.position_hist.at(SegmentPosition::kLeft)},
      {"middle", st.position_hist.at(SegmentPosition::kMiddle)},
      {"right", st.position_hist.at(SegmentPosition::kRight)}};
  nlohmann::ordered_json spq, qps;
  for (const auto& [k, v] : st.segs_per_qa_hist) spq[std::to_string(k)] = v;
  for (const auto& [k, v] : st.qas_per_seg_hist) qps[std::to_string(k)] = v;
  j["segs_per_qa_hist"] = spq;
  j["qas_per_seg_hist"] = qps;
  return j.dump(2) + "\n";
}

namespace {

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                          "#59a14f", "#edc948", "#b07aa1"};

void bar_chart(std::ostringstream& os, double x0, double y0,
               const std::string& title, const std::vector<std::string>& names,
               const std::vector<double>& values) {
  const double w = 380, h = 220;
  const double vmax =
      std::max(1e-12, *std::max_element(values.begin(), values.end()));
  os << "<g transform=\"translate(" << x0 << ',' << y0 << ")\">\n";
  os << "<text x=\"" << w / 2 << "\" y=\"16\" text-anchor=\"middle\" "
     << "font-size=\"14\">" << title << "</text>\n";
  const double bw = (w - 40) / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double bh = (h - 60) * values[i] / vmax;
    const double x = 30 + bw * static_cast<double>(i);
    os << "<rect x=\"" << x + 1 << "\" y=\"" << h - 30 - bh << "\" width=\""
       << bw - 2 << "\" height=\"" << bh << "\" fill=\"" << kPalette[0]
       << "\"/>\n";
    os << "<text x=\"" << x + bw / 2 << "\" y=\"" << h - 14
       << "\" text-anchor=\"middle\" font-size=\"9\">" << names[i]
       << "</text>\n";
  }
  os << "<line x1=\"30\" y1=\"" << h - 30 << "\" x2=\"" << w - 10
     << "\" y2=\"" << h - 30 << "\" stroke=\"black\"/>\n</g>\n";
}

void pie_chart(std::ostringstream& os, double cx, double cy,
               const std::string& title,
               const std::vector<std::pair<std::string, double>>& parts) {
  const double r = 70;
  os << "<g>\n<text x=\"" << cx << "\" y=\"" << cy - r - 12
     << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  double angle = -std::numbers::pi / 2;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double frac = parts[i].second;
    const char* color = kPalette[i % std::size(kPalette)];
    if (frac >= 1.0 - 1e-12) {
      os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r
         << "\" fill=\"" << color << "\"/>\n";
    } else if (frac > 0.0) {
      const double a1 = angle + 2 * std::numbers::pi * frac;
      os << "<path d=\"M " << cx << ' ' << cy << " L "
         << cx + r * std::cos(angle) << ' ' << cy + r * std::sin(angle)
         << " A " << r << ' ' << r << " 0 " << (frac > 0.5 ? 1 : 0) << " 1 "
         << cx + r * std::cos(a1) << ' ' << cy + r * std::sin(a1)
         << " Z\" fill=\"" << color << "\"/>\n";
      angle = a1;
    }
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%.1f%%", 100.0 * frac);
    os << "<text x=\"" << cx + r + 14 << "\" y=\""
       << cy - r + 14 + 14 * static_cast<double>(i)
       << "\" font-size=\"10\" fill=\"" << color << "\">" << parts[i].first
       << ": " << pct << "</text>\n";
  }
  os << "</g>\n";
}

}  // namespace

std::string stats_svg(const LabelSet& labels, const DatasetStats& st) {
  std::vector<double> dur_bins(7, 0.0), ratio_bins(10, 0.0);
  for (const auto& [_, l] : labels) {
    for (const auto& s : l.segments) {
      const auto di = std::min<std::size_t>(
          6, static_cast<std::size_t>(s.length() / 5.0));
      dur_bins[di] += 1;
      const auto ri = std::min<std::size_t>(
          9, static_cast<std::size_t>(10.0 * s.length() /
                                      l.extent.duration()));
      ratio_bins[ri] += 1;
    }
  }
  for (auto& b : dur_bins) b /= static_cast<double>(st.n_segments);
  for (auto& b : ratio_bins) b /= static_cast<double>(st.n_segments);

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
        "height=\"460\" font-family=\"sans-serif\">\n"
     << "<rect width=\"800\" height=\"460\" fill=\"white\"/>\n";
  bar_chart(os, 10, 0, "Segment duration (s)",
            {"0-5", "5-10", "10-15", "15-20", "20-25", "25-30", "30+"},
            dur_bins);
  bar_chart(os, 410, 0, "Segment / video ratio",
            {".0", ".1", ".2", ".3", ".4", ".5", ".6", ".7", ".8", ".9"},
            ratio_bins);
  pie_chart(os, 110, 340, "Position",
            {{"left", st.position_hist.at(SegmentPosition::kLeft)},
             {"middle", st.position_hist.at(SegmentPosition::kMiddle)},
             {"right", st.position_hist.at(SegmentPosition::kRight)}});
  std::vector<std::pair<std::string, double>> spq, qps;
  for (const auto& [k, v] : st.segs_per_qa_hist) {
    spq.emplace_back(std::to_string(k) + " seg", v);
  }
  for (const auto& [k, v] : st.qas_per_seg_hist) {
    qps.emplace_back(std::to_string(k) + " QA", v);
  }
  pie_chart(os, 370, 340, "Segments per QA", spq);
  pie_chart(os, 630, 340, "QAs per segment", qps);
  os << "</svg>\n";
  return os.str();
}

}  // namespace gqa
