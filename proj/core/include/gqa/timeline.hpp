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

#ifndef GQA_TIMELINE_HPP_
#define GQA_TIMELINE_HPP_

#include <string>

#include "gqa/episode.hpp"
#include "gqa/trainer.hpp"

namespace gqa {

// One question's timeline as SVG: the Gaussian mask curve, the pooling
// attention trace as bars, the planted moment (when known) as a shaded band
// and the reported window as a bracket under the axis.
std::string timeline_svg(const Episode& episode,
                         const GroundedPrediction& grounded);

}  // namespace gqa

#endif  // GQA_TIMELINE_HPP_
