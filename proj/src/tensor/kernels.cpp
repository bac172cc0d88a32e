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

#include "kernels.hpp"

namespace insa::kernels {

void gemm_acc(int m, int n, int k, const float* a, const float* b, float* c) {
  int i = 0;
  for (; i + 4 <= m; i += 4) {
    float* c0 = c + static_cast<std::size_t>(i) * n;
    float* c1 = c0 + n;
    float* c2 = c1 + n;
    float* c3 = c2 + n;
    const float* a0 = a + static_cast<std::size_t>(i) * k;
    const float* a1 = a0 + k;
    const float* a2 = a1 + k;
    const float* a3 = a2 + k;
    for (int p = 0; p < k; ++p) {
      const float v0 = a0[p], v1 = a1[p], v2 = a2[p], v3 = a3[p];
      const float* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) {
        const float bj = brow[j];
        c0[j] += v0 * bj;
        c1[j] += v1 * bj;
        c2[j] += v2 * bj;
        c3[j] += v3 * bj;
      }
    }
  }
  for (; i < m; ++i) {
    float* crow = c + static_cast<std::size_t>(i) * n;
    const float* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const float v = arow[p];
      const float* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += v * brow[j];
    }
  }
}

void transpose(int rows, int cols, const float* src, float* dst) {
  for (int r = 0; r < rows; ++r) {
    for (int col = 0; col < cols; ++col) {
      dst[static_cast<std::size_t>(col) * rows + r] = src[static_cast<std::size_t>(r) * cols + col];
    }
  }
}

void im2col(const float* image, const ConvGeometry& g, float* col) {
  const std::size_t out_plane = g.col_cols();
  for (int ch = 0; ch < g.channels; ++ch) {
    const float* src = image + static_cast<std::size_t>(ch) * g.height * g.width;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        float* dst = col + ((static_cast<std::size_t>(ch) * g.kernel + ky) * g.kernel + kx) * out_plane;
        for (int oy = 0; oy < g.out_height; ++oy) {
          const int iy = oy * g.stride - g.padding + ky;
          float* drow = dst + static_cast<std::size_t>(oy) * g.out_width;
          if (iy < 0 || iy >= g.height) {
            for (int ox = 0; ox < g.out_width; ++ox) drow[ox] = 0.0f;
            continue;
          }
          const float* srow = src + static_cast<std::size_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_width; ++ox) {
            const int ix = ox * g.stride - g.padding + kx;
            drow[ox] = (ix >= 0 && ix < g.width) ? srow[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const float* col, const ConvGeometry& g, float* image) {
  const std::size_t out_plane = g.col_cols();
  for (int ch = 0; ch < g.channels; ++ch) {
    float* dst = image + static_cast<std::size_t>(ch) * g.height * g.width;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const float* src = col + ((static_cast<std::size_t>(ch) * g.kernel + ky) * g.kernel + kx) * out_plane;
        for (int oy = 0; oy < g.out_height; ++oy) {
          const int iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.height) continue;
          const float* srow = src + static_cast<std::size_t>(oy) * g.out_width;
          float* drow = dst + static_cast<std::size_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_width; ++ox) {
            const int ix = ox * g.stride - g.padding + kx;
            if (ix >= 0 && ix < g.width) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

}  // namespace insa::kernels
