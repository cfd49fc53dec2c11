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

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "gqa/error.hpp"
#include "json.hpp"

namespace gqa {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "episode archives assume a little-endian host");

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
  if (!out) throw ParseError("write failed for " + path.string());
}

std::string checkpoint_json(const ModelParams& params) {
  json j;
  j["format"] = "gqa-checkpoint";
  j["version"] = kCheckpointVersion;
  j["temperature"] = params.temperature;
  json tensors = json::object();
  params.for_each([&](const char* name, const MatrixXd& m) {
    json t;
    t["shape"] = {m.rows(), m.cols()};
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    t["data"] = std::move(data);
    tensors[name] = std::move(t);
  });
  j["tensors"] = std::move(tensors);
  return j.dump() + "\n";
}

ModelParams parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed checkpoint JSON at byte " +
                     std::to_string(e.byte));
  }
  try {
    if (j.at("format") != "gqa-checkpoint") {
      throw ParseError("not a gqa checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ParseError("unsupported checkpoint version " +
                       j.at("version").dump());
    }
    ModelParams p;
    p.temperature = j.at("temperature").get<double>();
    const json& tensors = j.at("tensors");
    p.for_each([&](const char* name, MatrixXd& m) {
      const json& t = tensors.at(name);
      const auto rows = t.at("shape").at(0).get<Index>();
      const auto cols = t.at("shape").at(1).get<Index>();
      const auto data = t.at("data").get<std::vector<double>>();
      if (rows < 0 || cols < 0 ||
          static_cast<std::size_t>(rows * cols) != data.size()) {
        throw ParseError(std::string("tensor ") + name +
                         " data does not match its shape");
      }
      m.resize(rows, cols);
      for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
          m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
        }
      }
    });
    if (!p.all_finite()) throw ParseError("checkpoint has non-finite values");
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ModelParams& params,
                     const std::filesystem::path& path) {
  write_text_file(path, checkpoint_json(params));
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path));
}

namespace {

constexpr char kEpisodeMagic[8] = {'G', 'Q', 'A', 'E', 'P', 'I', 'S', '\0'};

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  template <class T>
  void pod(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void matrix(const MatrixXd& m) {
    pod(static_cast<std::uint32_t>(m.rows()));
    pod(static_cast<std::uint32_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) pod(m(r, c));
    }
  }
  void vector(const VectorXd& v) {
    pod(static_cast<std::uint32_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) pod(v[i]);
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  template <class T>
  T pod() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is_) throw ParseError("episode archive is truncated");
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    std::string s(n, '\0');
    is_.read(s.data(), n);
    if (!is_) throw ParseError("episode archive is truncated");
    return s;
  }
  MatrixXd matrix() {
    const auto rows = pod<std::uint32_t>();
    const auto cols = pod<std::uint32_t>();
    MatrixXd m(rows, cols);
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = pod<double>();
    }
    return m;
  }
  VectorXd vector() {
    const auto n = pod<std::uint32_t>();
    VectorXd v(n);
    for (Index i = 0; i < v.size(); ++i) v[i] = pod<double>();
    return v;
  }

 private:
  std::istream& is_;
};

}  // namespace

void save_episodes(std::span<const Episode> episodes,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out.write(kEpisodeMagic, sizeof(kEpisodeMagic));
  Writer w(out);
  w.pod(kEpisodeArchiveVersion);
  w.pod(static_cast<std::uint64_t>(episodes.size()));
  for (const auto& ep : episodes) {
    w.str(ep.question_id);
    w.str(ep.video_id);
    w.pod(ep.extent.duration());
    const std::uint8_t flags = (ep.synthetic ? 1 : 0) |
                               (ep.descriptive ? 2 : 0) |
                               (ep.gt_moment ? 4 : 0);
    w.pod(flags);
    if (ep.gt_moment) {
      w.pod(ep.gt_moment->start());
      w.pod(ep.gt_moment->end());
    }
    w.pod(static_cast<std::int32_t>(ep.correct));
    w.matrix(ep.frames);
    w.vector(ep.question);
    w.matrix(ep.answers);
    w.pod(static_cast<std::uint32_t>(ep.neg_questions.size()));
    for (const auto& q : ep.neg_questions) w.vector(q);
    w.pod(static_cast<std::uint32_t>(ep.pos_variants.size()));
    for (const auto& q : ep.pos_variants) w.vector(q);
  }
  if (!out) throw ParseError("write failed for " + path.string());
}

std::vector<Episode> load_episodes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  char magic[sizeof(kEpisodeMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kEpisodeMagic, sizeof(magic)) != 0) {
    throw ParseError(path.string() + " is not an episode archive");
  }
  Reader r(in);
  const auto version = r.pod<std::uint32_t>();
  if (version != kEpisodeArchiveVersion) {
    throw ParseError("unsupported episode archive version " +
                     std::to_string(version));
  }
  const auto count = r.pod<std::uint64_t>();
  std::vector<Episode> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    Episode ep;
    ep.question_id = r.str();
    ep.video_id = r.str();
    try {
      ep.extent = VideoExtent(r.pod<double>());
      const auto flags = r.pod<std::uint8_t>();
      ep.synthetic = flags & 1;
      ep.descriptive = flags & 2;
      if (flags & 4) {
        const double s = r.pod<double>();
        const double e = r.pod<double>();
        ep.gt_moment = TemporalSegment(s, e);
      }
    } catch (const InvalidSegment& e) {
      throw ParseError(std::string("episode archive: ") + e.what());
    }
    ep.correct = r.pod<std::int32_t>();
    ep.frames = r.matrix();
    ep.question = r.vector();
    ep.answers = r.matrix();
    const auto n_neg = r.pod<std::uint32_t>();
    for (std::uint32_t k = 0; k < n_neg; ++k) {
      ep.neg_questions.push_back(r.vector());
    }
    const auto n_pos = r.pod<std::uint32_t>();
    for (std::uint32_t k = 0; k < n_pos; ++k) {
      ep.pos_variants.push_back(r.vector());
    }
    out.push_back(std::move(ep));
  }
  return out;
}

std::string predictions_json(std::span<const Prediction> preds) {
  std::map<std::string, const Prediction*> sorted;
  for (const auto& p : preds) sorted[p.question_id] = &p;
  json j = json::object();
  for (const auto& [qid, p] : sorted) {
    j[qid] = {{"answer", p->answer_index},
              {"start", p->window.start()},
              {"end", p->window.end()}};
  }
  return j.dump(1) + "\n";
}

std::vector<Prediction> parse_predictions(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed prediction JSON at byte " +
                     std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ParseError("prediction file must be a JSON object keyed by "
                     "question id");
  }
  std::vector<Prediction> out;
  out.reserve(j.size());
  for (const auto& [qid, v] : j.items()) {
    try {
      const int answer = v.at("answer").get<int>();
      const double start = v.at("start").get<double>();
      const double end = v.at("end").get<double>();
      try {
        out.push_back(Prediction{qid, answer, TemporalSegment(start, end)});
      } catch (const InvalidSegment& e) {
        throw ValidationError("prediction " + qid + ": " + e.what());
      }
    } catch (const json::exception& e) {
      throw ParseError("prediction " + qid + ": " + e.what());
    }
  }
  return out;
}

void save_predictions(std::span<const Prediction> preds,
                      const std::filesystem::path& path) {
  write_text_file(path, predictions_json(preds));
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path));
}

}  // namespace gqa
