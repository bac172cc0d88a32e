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

#ifndef INSA_OPS_HPP_
#define INSA_OPS_HPP_

#include <cstdint>

#include "insa/tensor.hpp"

namespace insa {

// weight: (c_out, c_in, k, k); bias: (1, c_out, 1, 1) or undefined.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding);

// weight: (c_in, c_out, k, k). Output side is
// (h - 1) * stride - 2 * padding + k + output_padding.
Tensor conv_transpose2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride, int padding, int output_padding = 0);

// Elementwise arithmetic. Binary ops accept equal shapes or a single-element
// operand on either side.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor square(const Tensor& x);
Tensor clamp_min(const Tensor& x, float floor);
Tensor scale(const Tensor& x, float factor);
Tensor add_scalar(const Tensor& x, float offset);
Tensor sigmoid(const Tensor& x);

// Round half away from zero forward, identity backward.
Tensor ste_round(const Tensor& x);

// x + u with u ~ U[-1/2, 1/2) drawn from a counter-based generator keyed by
// (seed, stream, element index). Identity backward.
Tensor add_uniform_noise(const Tensor& x, std::uint64_t seed, std::uint64_t stream = 0);

// The raw generator behind add_uniform_noise, exposed for tests.
float uniform_noise_sample(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor slice_channels(const Tensor& x, int first, int count);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor mse(const Tensor& a, const Tensor& b);

// Negative log-likelihood in nats of integer bins [v - 1/2, v + 1/2) under a
// Gaussian N(mu, sigma). All three tensors share one shape; sigma > 0.
Tensor gaussian_bin_nll(const Tensor& values, const Tensor& mu, const Tensor& sigma);

// Same under a per-channel logistic with location `loc` and log-scale
// `log_scale`, both shaped (1, c, 1, 1).
Tensor logistic_bin_nll(const Tensor& values, const Tensor& loc, const Tensor& log_scale);

// Smallest probability a bin is allowed to carry in the NLL ops.
inline constexpr double kLikelihoodFloor = 1e-9;

}  // namespace insa

#endif  // INSA_OPS_HPP_
