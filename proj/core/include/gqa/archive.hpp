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

#ifndef GQA_ARCHIVE_HPP_
#define GQA_ARCHIVE_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gqa/episode.hpp"
#include "gqa/metrics.hpp"
#include "gqa/model.hpp"

namespace gqa {

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::uint32_t kEpisodeArchiveVersion = 1;

// JSON tensor archive:
//   {"format": "gqa-checkpoint", "version": 1, "temperature": t,
//    "tensors": {"<name>": {"shape": [rows, cols], "data": [...]}, ...}}
// Data is row-major.
std::string checkpoint_json(const ModelParams& params);
ModelParams parse_checkpoint(const std::string& text);
void save_checkpoint(const ModelParams& params,
                     const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

// Binary episode archive, little-endian: the magic "GQAEPIS\0", a u32
// version, a u64 episode count, then each episode's fields in declaration
// order. Matrices are stored as u32 rows, u32 cols and row-major f64 data.
void save_episodes(std::span<const Episode> episodes,
                   const std::filesystem::path& path);
std::vector<Episode> load_episodes(const std::filesystem::path& path);

// {"<question_id>": {"answer": int, "start": float, "end": float}, ...}
std::string predictions_json(std::span<const Prediction> preds);
// Throws ParseError (with the byte offset for malformed JSON) or
// ValidationError for invalid windows.
std::vector<Prediction> parse_predictions(const std::string& text);
void save_predictions(std::span<const Prediction> preds,
                      const std::filesystem::path& path);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace gqa

#endif  // GQA_ARCHIVE_HPP_
