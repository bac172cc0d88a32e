// Copyright 2026 The insa-codec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Procedural test clips: drifting sinusoidal gratings plus a moving disc.

#ifndef INSA_SYNTHETIC_HPP_
#define INSA_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include "insa/tensor.hpp"

namespace insa {

// Frames are (1, 3, height, width) with values in [0, 1].
std::vector<Tensor> synthetic_clip(int frames, int height, int width, std::uint64_t seed);

}  // namespace insa

#endif  // INSA_SYNTHETIC_HPP_
