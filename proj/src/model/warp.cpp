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

#include "insa/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace insa {
namespace {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// One separable pass along rows (horizontal) or columns (vertical).
// Accumulates in double in a fixed tap order.
void blur_pass(const float* in, float* out, int h, int w, const std::vector<double>& taps,
               bool horizontal) {
  const int r = static_cast<int>(taps.size() / 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) {
        const float v = horizontal ? in[y * w + reflect_index(x + j, w)]
                                   : in[reflect_index(y + j, h) * w + x];
        acc += taps[j + r] * v;
      }
      out[y * w + x] = static_cast<float>(acc);
    }
  }
}

// Transpose of blur_pass: scatters each output gradient back to its taps.
void blur_pass_adjoint(const float* g, double* gin, int h, int w, const std::vector<double>& taps,
                       bool horizontal) {
  const int r = static_cast<int>(taps.size() / 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gv = g[y * w + x];
      for (int j = -r; j <= r; ++j) {
        const int idx = horizontal ? y * w + reflect_index(x + j, w) : reflect_index(y + j, h) * w + x;
        gin[idx] += taps[j + r] * gv;
      }
    }
  }
}

}  // namespace

double blur_sigma(int level) { return level == 0 ? 0.0 : std::ldexp(1.0, level - 1); }

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * r + 1);
  double total = 0.0;
  for (int j = -r; j <= r; ++j) {
    taps[j + r] = std::exp(-0.5 * j * j / (sigma * sigma));
    total += taps[j + r];
  }
  for (double& t : taps) t /= total;
  return taps;
}

Tensor gaussian_blur(const Tensor& frame, double sigma) {
  const Shape s = frame.shape();
  const auto taps = gaussian_kernel(sigma);
  const std::size_t plane = s.plane();
  std::vector<float> tmp(plane);
  std::vector<float> out(s.numel());
  auto in = frame.data();
  for (std::size_t p = 0; p < static_cast<std::size_t>(s.n) * s.c; ++p) {
    blur_pass(in.data() + p * plane, tmp.data(), s.h, s.w, taps, true);
    blur_pass(tmp.data(), out.data() + p * plane, s.h, s.w, taps, false);
  }
  return make_result(s, std::move(out), {frame}, [frame, taps, s](const detail::Node& self) {
    const std::size_t plane = s.plane();
    std::vector<double> mid(plane);
    std::vector<float> midf(plane);
    std::vector<double> gin(plane);
    std::vector<float> result(s.numel());
    for (std::size_t p = 0; p < static_cast<std::size_t>(s.n) * s.c; ++p) {
      std::fill(mid.begin(), mid.end(), 0.0);
      blur_pass_adjoint(self.grad.data() + p * plane, mid.data(), s.h, s.w, taps, false);
      for (std::size_t i = 0; i < plane; ++i) midf[i] = static_cast<float>(mid[i]);
      std::fill(gin.begin(), gin.end(), 0.0);
      blur_pass_adjoint(midf.data(), gin.data(), s.h, s.w, taps, true);
      for (std::size_t i = 0; i < plane; ++i) result[p * plane + i] = static_cast<float>(gin[i]);
    }
    accumulate_grad(frame, result);
  });
}

BlurVolume blur_stack(const Tensor& frame, int levels) {
  if (levels < 2) throw std::invalid_argument("blur stack needs at least 2 levels");
  BlurVolume v;
  for (int l = 0; l < levels; ++l) {
    v.sigmas.push_back(blur_sigma(l));
    v.levels.push_back(l == 0 ? frame : gaussian_blur(frame, v.sigmas.back()));
  }
  return v;
}

Tensor trilinear_sample(const BlurVolume& volume, const Tensor& field) {
  const int levels = static_cast<int>(volume.levels.size());
  const Shape s = volume.levels.at(0).shape();
  const Shape fs = field.shape();
  if (fs.c != 3) {
    throw std::invalid_argument("warp field needs 3 channels (dx, dy, scale), got c=" +
                                std::to_string(fs.c));
  }
  if (fs.n != s.n || fs.h != s.h || fs.w != s.w) {
    throw std::invalid_argument("warp field " + fs.str() + " does not match frame " + s.str());
  }
  const std::size_t plane = s.plane();
  const float smax = static_cast<float>(levels - 1);

  // Per-pixel corner indices and weights, shared by forward and backward.
  struct Tap {
    std::uint32_t x0, x1, y0, y1;
    int s0;
    float fx, fy, fs;
    bool scale_inside;
  };
  std::vector<Tap> taps(static_cast<std::size_t>(s.n) * plane);
  auto f = field.data();
  for (int n = 0; n < s.n; ++n) {
    const float* dx = f.data() + (static_cast<std::size_t>(n) * 3 + 0) * plane;
    const float* dy = f.data() + (static_cast<std::size_t>(n) * 3 + 1) * plane;
    const float* sc = f.data() + (static_cast<std::size_t>(n) * 3 + 2) * plane;
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * s.w + x;
        Tap& t = taps[n * plane + p];
        const float px = static_cast<float>(x) + dx[p];
        const float py = static_cast<float>(y) + dy[p];
        const float fx0 = std::floor(px), fy0 = std::floor(py);
        t.fx = px - fx0;
        t.fy = py - fy0;
        auto clampi = [](float v, int hi) {
          return static_cast<std::uint32_t>(std::clamp(v, 0.0f, static_cast<float>(hi)));
        };
        t.x0 = clampi(fx0, s.w - 1);
        t.x1 = clampi(fx0 + 1.0f, s.w - 1);
        t.y0 = clampi(fy0, s.h - 1);
        t.y1 = clampi(fy0 + 1.0f, s.h - 1);
        const float sv = sc[p];
        t.scale_inside = sv >= 0.0f && sv <= smax;
        const float sclamped = std::clamp(sv, 0.0f, smax);
        t.s0 = std::min(static_cast<int>(std::floor(sclamped)), levels - 2);
        t.fs = sclamped - static_cast<float>(t.s0);
      }
    }
  }

  std::vector<float> out(s.numel());
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        const Tap& t = taps[n * plane + p];
        auto bilinear = [&](int level) {
          const float* v = volume.levels[level].data().data() + base;
          const float top = (1.0f - t.fx) * v[t.y0 * s.w + t.x0] + t.fx * v[t.y0 * s.w + t.x1];
          const float bot = (1.0f - t.fx) * v[t.y1 * s.w + t.x0] + t.fx * v[t.y1 * s.w + t.x1];
          return (1.0f - t.fy) * top + t.fy * bot;
        };
        out[base + p] = (1.0f - t.fs) * bilinear(t.s0) + t.fs * bilinear(t.s0 + 1);
      }
    }
  }

  std::vector<Tensor> inputs(volume.levels.begin(), volume.levels.end());
  inputs.push_back(field);
  return make_result(s, std::move(out), inputs,
                     [inputs, taps = std::move(taps), s, levels](const detail::Node& self) {
    const std::size_t plane = s.plane();
    const Tensor& field = inputs.back();
    std::vector<std::vector<float>> glevel(levels);
    for (int l = 0; l < levels; ++l) {
      if (inputs[l].requires_grad()) glevel[l].assign(s.numel(), 0.0f);
    }
    std::vector<float> gfield(field.requires_grad() ? field.numel() : 0, 0.0f);
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * plane;
        for (std::size_t p = 0; p < plane; ++p) {
          const Tap& t = taps[n * plane + p];
          const float g = self.grad[base + p];
          const std::size_t i00 = t.y0 * s.w + t.x0, i01 = t.y0 * s.w + t.x1;
          const std::size_t i10 = t.y1 * s.w + t.x0, i11 = t.y1 * s.w + t.x1;
          float dfx = 0.0f, dfy = 0.0f, bil[2] = {0.0f, 0.0f};
          for (int k = 0; k < 2; ++k) {
            const int l = t.s0 + k;
            const float ws = k == 0 ? 1.0f - t.fs : t.fs;
            const float* v = inputs[l].data().data() + base;
            const float top = (1.0f - t.fx) * v[i00] + t.fx * v[i01];
            const float bot = (1.0f - t.fx) * v[i10] + t.fx * v[i11];
            bil[k] = (1.0f - t.fy) * top + t.fy * bot;
            dfx += ws * ((1.0f - t.fy) * (v[i01] - v[i00]) + t.fy * (v[i11] - v[i10]));
            dfy += ws * (bot - top);
            if (!glevel[l].empty()) {
              float* gl = glevel[l].data() + base;
              const float gw = g * ws;
              gl[i00] += gw * (1.0f - t.fy) * (1.0f - t.fx);
              gl[i01] += gw * (1.0f - t.fy) * t.fx;
              gl[i10] += gw * t.fy * (1.0f - t.fx);
              gl[i11] += gw * t.fy * t.fx;
            }
          }
          if (!gfield.empty()) {
            float* gf = gfield.data() + static_cast<std::size_t>(n) * 3 * plane;
            gf[p] += g * dfx;
            gf[plane + p] += g * dfy;
            if (t.scale_inside) gf[2 * plane + p] += g * (bil[1] - bil[0]);
          }
        }
      }
    }
    for (int l = 0; l < levels; ++l) {
      if (!glevel[l].empty()) accumulate_grad(inputs[l], glevel[l]);
    }
    if (!gfield.empty()) accumulate_grad(field, gfield);
  });
}

Tensor scale_space_warp(const Tensor& frame, const Tensor& field, int levels) {
  if (field.shape().c != 3) {
    throw std::invalid_argument("warp field needs 3 channels (dx, dy, scale), got c=" +
                                std::to_string(field.shape().c));
  }
  return trilinear_sample(blur_stack(frame, levels), field);
}

}  // namespace insa
