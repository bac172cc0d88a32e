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

// Scale-space warping: a frame is blurred into a small stack of levels and
// sampled trilinearly at per-pixel (x + dx, y + dy, scale) coordinates.

#ifndef INSA_WARP_HPP_
#define INSA_WARP_HPP_

#include <vector>

#include "insa/tensor.hpp"

namespace insa {

inline constexpr int kBlurLevels = 5;

// Blur width of level l: 0 for l == 0, 2^(l-1) otherwise.
double blur_sigma(int level);

// Normalized Gaussian taps for offsets -r..r with r = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian blur with reflect padding ("d c b | a b c d | c b a").
// Differentiable with respect to `frame`.
Tensor gaussian_blur(const Tensor& frame, double sigma);

struct BlurVolume {
  std::vector<Tensor> levels;
  std::vector<double> sigmas;
};

BlurVolume blur_stack(const Tensor& frame, int levels = kBlurLevels);

// `field` has three channels: dx and dy in pixels and a continuous scale
// coordinate in [0, L - 1]. Spatial samples clamp to the border; the scale
// is clamped to the stack.
Tensor scale_space_warp(const Tensor& frame, const Tensor& field, int levels = kBlurLevels);

// Samples an existing volume; exposed for tests.
Tensor trilinear_sample(const BlurVolume& volume, const Tensor& field);

}  // namespace insa

#endif  // INSA_WARP_HPP_
