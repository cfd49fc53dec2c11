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

#ifndef GQA_CONFIG_HPP_
#define GQA_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "gqa/model.hpp"
#include "gqa/synth.hpp"
#include "gqa/trainer.hpp"

namespace gqa {

// Everything an end-to-end synthetic run needs.
struct RunConfig {
  SynthConfig synth;
  ModelConfig model;
  TrainSchedule schedule;
  double val_fraction = 0.1;
  double test_fraction = 0.1;

  // Seeds the generator, the parameter init and the trainer from one value.
  void set_seed(std::uint64_t seed);
  std::uint64_t init_seed = 8;

  void validate() const;
};

// Human-readable "key = value" lines; '#' starts a comment. Unknown keys
// and malformed values throw ConfigError naming the line.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_text(const RunConfig& config);

}  // namespace gqa

#endif  // GQA_CONFIG_HPP_
