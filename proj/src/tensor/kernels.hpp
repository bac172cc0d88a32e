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

#ifndef INSA_SRC_TENSOR_KERNELS_HPP_
#define INSA_SRC_TENSOR_KERNELS_HPP_

#include <cstddef>

namespace insa::kernels {

// C[m x n] += A[m x k] * B[k x n], all row-major. Each output element is
// accumulated in ascending k, independent of blocking and vector width.
void gemm_acc(int m, int n, int k, const float* a, const float* b, float* c);

// dst[cols x rows] = transpose(src[rows x cols]).
void transpose(int rows, int cols, const float* src, float* dst);

struct ConvGeometry {
  int channels;
  int height;
  int width;
  int kernel;
  int stride;
  int padding;
  int out_height;
  int out_width;

  std::size_t col_rows() const {
    return static_cast<std::size_t>(channels) * kernel * kernel;
  }
  std::size_t col_cols() const {
    return static_cast<std::size_t>(out_height) * out_width;
  }
};

// col[(ch, ky, kx), (oy, ox)] = image[ch, oy*s - p + ky, ox*s - p + kx], zero
// outside the image.
void im2col(const float* image, const ConvGeometry& g, float* col);

// Adjoint of im2col: scatters and adds col back into image.
void col2im(const float* col, const ConvGeometry& g, float* image);

}  // namespace insa::kernels

#endif  // INSA_SRC_TENSOR_KERNELS_HPP_
