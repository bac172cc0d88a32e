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

#include "insa/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "insa/random.hpp"

namespace insa {

std::vector<Tensor> synthetic_clip(int frames, int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  struct Grating {
    double kx, ky, phase, amp[3];
  };
  std::vector<Grating> gratings(3);
  for (auto& g : gratings) {
    const double freq = rng.uniform(0.05, 0.35);
    const double angle = rng.uniform(0.0, 6.283185307179586);
    g.kx = freq * std::cos(angle);
    g.ky = freq * std::sin(angle);
    g.phase = rng.uniform(0.0, 6.283185307179586);
    for (double& a : g.amp) a = rng.uniform(-0.12, 0.12);
  }
  double base[3];
  for (double& b : base) b = rng.uniform(0.3, 0.7);
  const double vx = rng.uniform(-2.0, 2.0), vy = rng.uniform(-1.5, 1.5);
  double cx = rng.uniform(0.2, 0.8) * width, cy = rng.uniform(0.2, 0.8) * height;
  const double dvx = rng.uniform(-3.0, 3.0), dvy = rng.uniform(-3.0, 3.0);
  const double radius = rng.uniform(0.1, 0.25) * std::min(width, height);
  double disc[3];
  for (double& d : disc) d = rng.uniform(0.0, 1.0);

  std::vector<Tensor> clip;
  for (int f = 0; f < frames; ++f) {
    std::vector<float> v(3 * static_cast<std::size_t>(height) * width);
    const double ox = vx * f, oy = vy * f;
    const double px = cx + dvx * f, py = cy + dvy * f;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double r = std::hypot(x - px, y - py);
        // Soft edge over about one pixel.
        const double inside = std::clamp(radius - r + 0.5, 0.0, 1.0);
        for (int c = 0; c < 3; ++c) {
          double val = base[c];
          for (const auto& g : gratings) {
            val += g.amp[c] * std::sin(g.kx * (x - ox) + g.ky * (y - oy) + g.phase);
          }
          val = (1.0 - inside) * val + inside * disc[c];
          v[(static_cast<std::size_t>(c) * height + y) * width + x] =
              static_cast<float>(std::clamp(val, 0.0, 1.0));
        }
      }
    }
    clip.emplace_back(Shape{1, 3, height, width}, std::move(v));
  }
  return clip;
}

}  // namespace insa
