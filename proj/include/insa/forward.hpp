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

// Frame-level forward passes of the codec. The same synthesis functions
// serve the encoder's eval-mode reconstruction and the decoder, so both
// sides produce identical floats from identical symbols.

#ifndef INSA_FORWARD_HPP_
#define INSA_FORWARD_HPP_

#include <cstdint>
#include <vector>

#include "insa/model.hpp"
#include "insa/tensor.hpp"

namespace insa {

enum class Mode { kTrain, kEval };

struct HyperParams {
  Tensor mu;
  Tensor sigma;  // already clamped to kSigmaFloor
};

struct AeOutput {
  Tensor y;       // continuous latent
  Tensor z;       // continuous hyperlatent
  Tensor y_hat;   // eval: rounded latent; train: noisy latent used for rate
  Tensor z_hat;   // same convention for the hyperlatent
  HyperParams hyper;
  Tensor recon;
  Tensor rate_y_nats;  // scalar
  Tensor rate_z_nats;  // scalar
  double rate_bits = 0.0;  // eval mode only, accumulated in double
};

struct FrameOutput {
  FrameKind kind = FrameKind::kI;
  Tensor recon;
  Tensor warped;               // P-frames only
  std::vector<AeOutput> parts;  // I: {iframe}; P: {flow, residual}
  Tensor rate_nats;            // scalar, sum over parts
  double rate_bits = 0.0;      // eval mode only
};

Tensor run_layers(const std::vector<ConvLayer>& layers, const Tensor& x, bool relu_after_last);

HyperParams hyper_synthesize(const HyperpriorAE& ae, const Tensor& z_hat);
Tensor synthesize(const HyperpriorAE& ae, const Tensor& y_hat);

AeOutput run_autoencoder(const HyperpriorAE& ae, const Tensor& x, Mode mode, std::uint64_t seed,
                         std::uint64_t stream);

// Flow decoder output (dx, dy, raw scale) to a warp field.
Tensor flow_field(const Tensor& decoded);
// Warped prediction of the current frame from decoded flow latents.
Tensor motion_compensate(const SsfModel& model, const Tensor& prev_recon, const Tensor& flow_y_hat);

FrameOutput iframe_forward(const SsfModel& model, const Tensor& frame, Mode mode,
                           std::uint64_t seed);
FrameOutput pframe_forward(const SsfModel& model, const Tensor& prev_recon, const Tensor& frame,
                           Mode mode, std::uint64_t seed);

// Exact information content in bits of rounded latents.
double gaussian_latent_bits(const Tensor& y_hat, const Tensor& mu, const Tensor& sigma);
double logistic_latent_bits(const Tensor& z_hat, const Tensor& loc, const Tensor& log_scale);

}  // namespace insa

#endif  // INSA_FORWARD_HPP_
