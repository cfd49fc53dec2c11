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

#include "gqa/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "gqa/archive.hpp"
#include "gqa/error.hpp"

namespace gqa {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_number(const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("bad numeric value '" + v + "'");
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
#define GQA_SIZE(key, expr) \
  {key, [](RunConfig& c, const std::string& v) { expr = parse_number<std::size_t>(v); }}
#define GQA_REAL(key, expr) \
  {key, [](RunConfig& c, const std::string& v) { expr = parse_number<double>(v); }}
  static const std::map<std::string, Setter> kSetters = {
      {"seed",
       [](RunConfig& c, const std::string& v) {
         c.set_seed(parse_number<std::uint64_t>(v));
       }},
      GQA_SIZE("n_episodes", c.synth.n_episodes),
      GQA_SIZE("n_frames", c.synth.n_frames),
      GQA_SIZE("d_video", c.synth.d_video),
      GQA_SIZE("d_text", c.synth.d_text),
      GQA_SIZE("n_answers", c.synth.n_answers),
      GQA_REAL("moment_ratio", c.synth.moment_ratio),
      GQA_REAL("noise_std", c.synth.noise_std),
      GQA_REAL("shortcut_rate", c.synth.shortcut_rate),
      GQA_SIZE("group_size", c.synth.group_size),
      GQA_REAL("min_duration", c.synth.min_duration),
      GQA_REAL("max_duration", c.synth.max_duration),
      GQA_REAL("signal", c.synth.signal),
      GQA_REAL("distractor_strength", c.synth.distractor_strength),
      GQA_REAL("rephrase_rate", c.synth.rephrase_rate),
      GQA_SIZE("max_variants", c.synth.max_variants),
      GQA_REAL("descriptive_rate", c.synth.descriptive_rate),
      GQA_SIZE("width", c.model.width),
      GQA_SIZE("k_masks", c.model.k_masks),
      GQA_REAL("temperature", c.model.temperature),
      GQA_REAL("init_sigma", c.model.init_sigma),
      {"objective",
       [](RunConfig& c, const std::string& v) {
         c.schedule.objective = parse_objective(v);
       }},
      GQA_SIZE("stages", c.schedule.stages),
      GQA_SIZE("stage1_epochs", c.schedule.stage1_epochs),
      GQA_SIZE("epochs", c.schedule.epochs),
      GQA_REAL("lr", c.schedule.lr),
      GQA_SIZE("batch", c.schedule.batch),
      GQA_REAL("alpha", c.schedule.alpha),
      GQA_REAL("p_same_video", c.schedule.p_same_video),
      GQA_REAL("p_pos_swap", c.schedule.p_pos_swap),
      GQA_SIZE("patience", c.schedule.patience),
      GQA_REAL("gamma", c.schedule.gamma),
      {"window",
       [](RunConfig& c, const std::string& v) {
         c.schedule.window = parse_window_source(v);
       }},
      GQA_REAL("val_fraction", c.val_fraction),
      GQA_REAL("test_fraction", c.test_fraction),
  };
#undef GQA_SIZE
#undef GQA_REAL
  return kSetters;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t seed) {
  synth.seed = seed;
  init_seed = seed + 1;
  schedule.seed = seed + 2;
}

void RunConfig::validate() const {
  synth.validate();
  schedule.validate();
  if (!(val_fraction > 0.0 && test_fraction > 0.0 &&
        val_fraction + test_fraction < 1.0)) {
    throw ConfigError("val_fraction and test_fraction must be > 0 and sum "
                      "to less than 1");
  }
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
    try {
      it->second(c, value);
      c.model.d_video = c.synth.d_video;
      c.model.d_text = c.synth.d_text;
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return parse_run_config(read_text_file(path));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

std::string run_config_text(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "seed = " << c.synth.seed << '\n'
     << "n_episodes = " << c.synth.n_episodes << '\n'
     << "n_frames = " << c.synth.n_frames << '\n'
     << "d_video = " << c.synth.d_video << '\n'
     << "d_text = " << c.synth.d_text << '\n'
     << "n_answers = " << c.synth.n_answers << '\n'
     << "moment_ratio = " << c.synth.moment_ratio << '\n'
     << "noise_std = " << c.synth.noise_std << '\n'
     << "shortcut_rate = " << c.synth.shortcut_rate << '\n'
     << "group_size = " << c.synth.group_size << '\n'
     << "min_duration = " << c.synth.min_duration << '\n'
     << "max_duration = " << c.synth.max_duration << '\n'
     << "signal = " << c.synth.signal << '\n'
     << "distractor_strength = " << c.synth.distractor_strength << '\n'
     << "rephrase_rate = " << c.synth.rephrase_rate << '\n'
     << "max_variants = " << c.synth.max_variants << '\n'
     << "descriptive_rate = " << c.synth.descriptive_rate << '\n'
     << "width = " << c.model.width << '\n'
     << "k_masks = " << c.model.k_masks << '\n'
     << "temperature = " << c.model.temperature << '\n'
     << "init_sigma = " << c.model.init_sigma << '\n'
     << "objective = " << to_string(c.schedule.objective) << '\n'
     << "stages = " << c.schedule.stages << '\n'
     << "stage1_epochs = " << c.schedule.stage1_epochs << '\n'
     << "epochs = " << c.schedule.epochs << '\n'
     << "lr = " << c.schedule.lr << '\n'
     << "batch = " << c.schedule.batch << '\n'
     << "alpha = " << c.schedule.alpha << '\n'
     << "p_same_video = " << c.schedule.p_same_video << '\n'
     << "p_pos_swap = " << c.schedule.p_pos_swap << '\n'
     << "patience = " << c.schedule.patience << '\n'
     << "gamma = " << c.schedule.gamma << '\n'
     << "window = " << to_string(c.schedule.window) << '\n'
     << "val_fraction = " << c.val_fraction << '\n'
     << "test_fraction = " << c.test_fraction << '\n';
  return os.str();
}

}  // namespace gqa
