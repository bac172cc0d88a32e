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

#include "insa/forward.hpp"

#include <algorithm>
#include <cmath>

#include "insa/distributions.hpp"
#include "insa/error.hpp"
#include "insa/ops.hpp"
#include "insa/warp.hpp"

namespace insa {
namespace {

void check_finite(const Tensor& t, const std::string& where) {
  for (float v : t.data()) {
    if (!std::isfinite(v)) throw DomainError("non-finite activation after layer " + where);
  }
}

Tensor round_hard(const Tensor& x) {
  std::vector<float> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::round(in[i]) + 0.0f;  // + 0 folds -0 into +0
  return Tensor(x.shape(), std::move(out));
}

}  // namespace

Tensor run_layers(const std::vector<ConvLayer>& layers, const Tensor& x, bool relu_after_last) {
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i](h);
    if (i + 1 < layers.size() || relu_after_last) h = relu(h);
    check_finite(h, layers[i].name);
  }
  return h;
}

HyperParams hyper_synthesize(const HyperpriorAE& ae, const Tensor& z_hat) {
  HyperParams p;
  p.mu = run_layers(ae.h_mu, z_hat, false);
  p.sigma = clamp_min(run_layers(ae.h_sigma, z_hat, true), kSigmaFloor);
  return p;
}

Tensor synthesize(const HyperpriorAE& ae, const Tensor& y_hat) {
  return run_layers(ae.g_s, y_hat, false);
}

AeOutput run_autoencoder(const HyperpriorAE& ae, const Tensor& x, Mode mode, std::uint64_t seed,
                         std::uint64_t stream) {
  AeOutput out;
  out.y = run_layers(ae.g_a, x, false);
  out.z = run_layers(ae.h_a, out.y, false);
  if (mode == Mode::kTrain) {
    out.z_hat = add_uniform_noise(out.z, seed, 2 * stream + 1);
    out.y_hat = add_uniform_noise(out.y, seed, 2 * stream);
    out.hyper = hyper_synthesize(ae, out.z_hat);
    out.recon = synthesize(ae, ste_round(out.y));
  } else {
    out.z_hat = round_hard(out.z);
    out.y_hat = round_hard(out.y);
    out.hyper = hyper_synthesize(ae, out.z_hat);
    out.recon = synthesize(ae, out.y_hat);
  }
  out.rate_y_nats = gaussian_bin_nll(out.y_hat, out.hyper.mu, out.hyper.sigma);
  out.rate_z_nats = logistic_bin_nll(out.z_hat, ae.prior_loc, ae.prior_log_scale);
  if (mode == Mode::kEval) {
    out.rate_bits = gaussian_latent_bits(out.y_hat, out.hyper.mu, out.hyper.sigma) +
                    logistic_latent_bits(out.z_hat, ae.prior_loc, ae.prior_log_scale);
  }
  return out;
}

Tensor flow_field(const Tensor& decoded) {
  const float scale_range = static_cast<float>(kBlurLevels - 1);
  Tensor scale_channel = scale(sigmoid(slice_channels(decoded, 2, 1)), scale_range);
  return concat_channels(slice_channels(decoded, 0, 2), scale_channel);
}

Tensor motion_compensate(const SsfModel& model, const Tensor& prev_recon, const Tensor& flow_y_hat) {
  return scale_space_warp(prev_recon, flow_field(synthesize(model.flow, flow_y_hat)));
}

FrameOutput iframe_forward(const SsfModel& model, const Tensor& frame, Mode mode,
                           std::uint64_t seed) {
  FrameOutput out;
  out.kind = FrameKind::kI;
  out.parts.push_back(run_autoencoder(model.iframe, frame, mode, seed, 0));
  const AeOutput& ae = out.parts[0];
  out.recon = ae.recon;
  out.rate_nats = add(ae.rate_y_nats, ae.rate_z_nats);
  out.rate_bits = ae.rate_bits;
  return out;
}

FrameOutput pframe_forward(const SsfModel& model, const Tensor& prev_recon, const Tensor& frame,
                           Mode mode, std::uint64_t seed) {
  if (!(prev_recon.shape() == frame.shape())) {
    throw std::invalid_argument("P-frame reference " + prev_recon.shape().str() +
                                " does not match frame " + frame.shape().str());
  }
  FrameOutput out;
  out.kind = FrameKind::kP;
  AeOutput flow = run_autoencoder(model.flow, concat_channels(frame, prev_recon), mode, seed, 0);
  // The warp uses the decoded field, as the receiver will.
  out.warped = scale_space_warp(prev_recon, flow_field(flow.recon));
  AeOutput res = run_autoencoder(model.residual, sub(frame, out.warped), mode, seed, 1);
  out.recon = add(out.warped, res.recon);
  out.rate_nats = add(add(flow.rate_y_nats, flow.rate_z_nats), add(res.rate_y_nats, res.rate_z_nats));
  out.rate_bits = flow.rate_bits + res.rate_bits;
  out.parts.push_back(std::move(flow));
  out.parts.push_back(std::move(res));
  return out;
}

double gaussian_latent_bits(const Tensor& y_hat, const Tensor& mu, const Tensor& sigma) {
  double bits = 0.0;
  auto y = y_hat.data();
  auto m = mu.data();
  auto s = sigma.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = dist::gaussian_bin_mass(y[i], m[i], s[i]);
    bits -= std::log2(std::max(p, kLikelihoodFloor));
  }
  return bits;
}

double logistic_latent_bits(const Tensor& z_hat, const Tensor& loc, const Tensor& log_scale) {
  double bits = 0.0;
  const Shape s = z_hat.shape();
  auto z = z_hat.data();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const double l = loc.data()[c];
      const double sc = std::exp(static_cast<double>(log_scale.data()[c]));
      for (std::size_t i = 0; i < s.plane(); ++i) {
        const double p = dist::logistic_bin_mass(z[(static_cast<std::size_t>(n) * s.c + c) * s.plane() + i], l, sc);
        bits -= std::log2(std::max(p, kLikelihoodFloor));
      }
    }
  }
  return bits;
}

}  // namespace insa
