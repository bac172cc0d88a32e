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

#include "insa/codec.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "insa/distributions.hpp"
#include "insa/entropy.hpp"
#include "insa/error.hpp"
#include "insa/forward.hpp"
#include "insa/ops.hpp"
#include "insa/warp.hpp"

namespace insa {
namespace {

// One-sided standard normal quantile at 1 - 2^-16.
constexpr double kGaussianTailZ = 3.97;
const double kLogisticTailZ = std::log(65535.0);

int clamp_bound(double b) {
  if (!std::isfinite(b)) return kMaxTailBound;
  return static_cast<int>(std::clamp(std::ceil(b), 1.0, static_cast<double>(kMaxTailBound)));
}

std::vector<int> to_symbols(const Tensor& t) {
  std::vector<int> out(t.numel());
  auto d = t.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(std::fabs(d[i]) < 2.0e9f)) throw DomainError("latent value out of coding range");
    out[i] = static_cast<int>(d[i]);
  }
  return out;
}

Tensor from_symbols(std::span<const int> symbols, Shape shape) {
  std::vector<float> v(symbols.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(symbols[i]);
  return Tensor(shape, std::move(v));
}

LatentModel gaussian_model(const Tensor& mu, const Tensor& sigma) {
  auto m = mu.data();
  auto s = sigma.data();
  return [m, s](std::size_t i, int bound, std::span<double> probs) {
    for (int k = -bound; k <= bound; ++k) probs[k + bound] = dist::gaussian_bin_mass(k, m[i], s[i]);
  };
}

LatentModel logistic_model(const Tensor& loc, const Tensor& log_scale, std::size_t plane) {
  std::vector<double> l(loc.data().begin(), loc.data().end());
  std::vector<double> sc;
  for (float v : log_scale.data()) sc.push_back(std::exp(static_cast<double>(v)));
  const std::size_t channels = l.size();
  return [l, sc, plane, channels](std::size_t i, int bound, std::span<double> probs) {
    const std::size_t c = (i / plane) % channels;
    for (int k = -bound; k <= bound; ++k) probs[k + bound] = dist::logistic_bin_mass(k, l[c], sc[c]);
  };
}

std::uint16_t u16_dim(int v, const char* what) {
  if (v < 0 || v > 0xffff) throw std::invalid_argument(std::string(what) + " does not fit in 16 bits");
  return static_cast<std::uint16_t>(v);
}

LatentStream code_hyperlatent(const HyperpriorAE& ae, const Tensor& z_hat) {
  const Shape& s = z_hat.shape();
  LatentStream out;
  out.channels = u16_dim(s.c, "hyperlatent channels");
  out.height = u16_dim(s.h, "hyperlatent height");
  out.width = u16_dim(s.w, "hyperlatent width");
  out.tail_bound = static_cast<std::uint16_t>(logistic_tail_bound(ae.prior_loc, ae.prior_log_scale));
  out.payload = encode_latents_with_escape(to_symbols(z_hat), logistic_model(ae.prior_loc, ae.prior_log_scale, s.plane()),
                                           out.tail_bound);
  return out;
}

LatentStream code_latent(const AeOutput& part) {
  const Shape& s = part.y_hat.shape();
  LatentStream out;
  out.channels = u16_dim(s.c, "latent channels");
  out.height = u16_dim(s.h, "latent height");
  out.width = u16_dim(s.w, "latent width");
  out.tail_bound = static_cast<std::uint16_t>(gaussian_tail_bound(part.hyper.mu, part.hyper.sigma));
  out.payload = encode_latents_with_escape(to_symbols(part.y_hat), gaussian_model(part.hyper.mu, part.hyper.sigma),
                                           out.tail_bound);
  return out;
}

void check_stream_shape(const LatentStream& s, Shape expected, const char* what) {
  if (s.channels != expected.c || s.height != expected.h || s.width != expected.w) {
    throw StreamError(StreamError::Code::kMalformed,
                      std::string(what) + " stream is " + std::to_string(s.channels) + "x" + std::to_string(s.height) +
                          "x" + std::to_string(s.width) + ", model expects " + std::to_string(expected.c) + "x" +
                          std::to_string(expected.h) + "x" + std::to_string(expected.w));
  }
  if (s.tail_bound == 0 || s.tail_bound > kMaxTailBound) {
    throw StreamError(StreamError::Code::kMalformed, std::string(what) + " stream has invalid tail bound " +
                                                         std::to_string(s.tail_bound));
  }
}

// Receiver half of run_autoencoder: decode z, derive the Gaussian
// parameters, decode y, synthesize.
Tensor decode_part(const HyperpriorAE& ae, const LatentStream& ys, const LatentStream& zs, Shape y_shape,
                   Shape z_shape, const char* what) {
  check_stream_shape(zs, z_shape, what);
  check_stream_shape(ys, y_shape, what);
  const auto z_sym = decode_latents_with_escape(
      zs.payload, logistic_model(ae.prior_loc, ae.prior_log_scale, z_shape.plane()), zs.tail_bound, z_shape.numel());
  const Tensor z_hat = from_symbols(z_sym, z_shape);
  const HyperParams hyper = hyper_synthesize(ae, z_hat);
  const auto y_sym = decode_latents_with_escape(ys.payload, gaussian_model(hyper.mu, hyper.sigma), ys.tail_bound,
                                                y_shape.numel());
  return synthesize(ae, from_symbols(y_sym, y_shape));
}

double update_bits(std::span<const int> symbols, const UpdateQuantGrid& grid, const PmfTable& pmf) {
  double bits = 0.0;
  for (int s : symbols) bits += pmf.bits(static_cast<std::size_t>(update_symbol_to_index(s, grid)));
  return bits;
}

}  // namespace

std::string encode_mode_name(EncodeMode mode) {
  switch (mode) {
    case EncodeMode::kInsta:
      return "insta";
    case EncodeMode::kEncoderOnly:
      return "encoder-only";
    case EncodeMode::kGlobal:
      return "global";
  }
  return "?";
}

EncodeMode encode_mode_from_name(const std::string& name) {
  for (EncodeMode m : {EncodeMode::kInsta, EncodeMode::kEncoderOnly, EncodeMode::kGlobal}) {
    if (encode_mode_name(m) == name) return m;
  }
  throw InputError("unknown encode mode '" + name + "' (insta, encoder-only, global)");
}

void EncoderConfig::validate() const {
  if (gop_size < 0 || gop_size > 0xffff) throw InputError("gop size must be in [0, 65535]");
  if (epsilon_exponent < 1 || epsilon_exponent > 52) throw InputError("epsilon exponent must be in [1, 52]");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw InputError("bin width must be positive");
  prior.validate();
}

SpikeSlabPrior canonical_prior(const SpikeSlabPrior& prior) {
  SpikeSlabPrior p;
  p.sigma = static_cast<float>(prior.sigma);
  p.spike = static_cast<float>(prior.spike);
  p.alpha = static_cast<float>(prior.alpha);
  return p;
}

double canonical_bin_width(double bin_width) { return static_cast<float>(bin_width); }

UpdateQuantGrid update_grid_for(const UpdateSection& u) {
  SpikeSlabPrior p;
  p.sigma = u.sigma;
  p.spike = u.spike;
  p.alpha = u.alpha;
  try {
    p.validate();
    if (u.epsilon_exponent < 1 || u.epsilon_exponent > 52) throw std::invalid_argument("epsilon exponent");
    return build_update_grid(p, u.bin_width, std::ldexp(1.0, -u.epsilon_exponent));
  } catch (const std::invalid_argument& e) {
    throw StreamError(StreamError::Code::kMalformed, std::string("invalid update prior in stream: ") + e.what());
  }
}

int gaussian_tail_bound(const Tensor& mu, const Tensor& sigma) {
  double max_mu = 0.0, max_sigma = 0.0;
  for (float v : mu.data()) max_mu = std::max(max_mu, std::fabs(static_cast<double>(v)));
  for (float v : sigma.data()) max_sigma = std::max(max_sigma, static_cast<double>(v));
  return clamp_bound(max_mu + kGaussianTailZ * max_sigma);
}

int logistic_tail_bound(const Tensor& loc, const Tensor& log_scale) {
  double b = 0.0;
  for (std::size_t c = 0; c < loc.numel(); ++c) {
    b = std::max(b, std::fabs(static_cast<double>(loc.data()[c])) +
                        std::exp(static_cast<double>(log_scale.data()[c])) * kLogisticTailZ);
  }
  return clamp_bound(b);
}

EncodeResult encode_clip(const SsfModel& global, const VideoClip& clip, const EncoderConfig& cfg) {
  cfg.validate();
  if (clip.frames.empty()) throw InputError("cannot encode an empty clip");
  const Shape src = clip.frames.front().shape();
  if (src.n != 1 || src.c != 3) throw InputError("frames must be RGB, got " + src.str());
  if (src.w > 0xffff || src.h > 0xffff) throw InputError("frame size exceeds 65535");
  if (clip.frames.size() > 0xffffffffu) throw InputError("too many frames");

  std::vector<Tensor> padded;
  for (const Tensor& f : clip.frames) {
    if (!(f.shape() == src)) throw InputError("frames differ in size: " + f.shape().str() + " vs " + src.str());
    for (float v : f.data()) {
      if (!std::isfinite(v)) throw InputError("frame contains non-finite values");
    }
    padded.push_back(pad_to_multiple(f, ArchConfig::kDownsample));
  }

  FinetuneConfig ft = cfg.finetune;
  ft.eval_gop = cfg.gop_size;
  ft.train_gop = std::min<int>(ft.train_gop, static_cast<int>(padded.size()));

  EncodeResult result;
  Bitstream& bs = result.stream;
  bs.header.preset = preset_for(global.config());
  bs.header.arch = global.config();
  bs.header.width = static_cast<std::uint16_t>(src.w);
  bs.header.height = static_cast<std::uint16_t>(src.h);
  bs.header.frames = static_cast<std::uint32_t>(padded.size());
  bs.header.gop_size = static_cast<std::uint16_t>(cfg.gop_size);
  bs.header.beta = static_cast<float>(ft.beta);

  SsfModel model = global.clone();
  if (cfg.mode == EncodeMode::kEncoderOnly) {
    FinetuneResult r = encoder_only_finetune(padded, global, ft);
    model = std::move(r.model);
    result.report = std::move(r.report);
  } else if (cfg.mode == EncodeMode::kInsta) {
    UpdateSection u;
    u.sigma = static_cast<float>(cfg.prior.sigma);
    u.spike = static_cast<float>(cfg.prior.spike);
    u.alpha = static_cast<float>(cfg.prior.alpha);
    u.bin_width = static_cast<float>(cfg.bin_width);
    u.epsilon_exponent = static_cast<std::uint8_t>(cfg.epsilon_exponent);
    u.parameter_count = static_cast<std::uint32_t>(global.parameter_count(Side::kReceiver));
    const SpikeSlabPrior prior = canonical_prior(cfg.prior);
    const UpdateQuantGrid grid = update_grid_for(u);
    FinetuneResult r = finetune_instance(padded, global, prior, grid, ft);
    const PmfTable pmf = spike_slab_bin_pmf(grid, prior);
    std::vector<int> indices(r.symbols.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = update_symbol_to_index(r.symbols[i], grid);
    u.payload = range_encode(indices, std::span<const PmfTable>(&pmf, 1));
    result.update_bits_estimate = update_bits(r.symbols, grid, pmf);
    bs.update = std::move(u);
    model = std::move(r.model);
    result.update_symbols = std::move(r.symbols);
    result.report = std::move(r.report);
  }

  NoGradGuard no_grad;
  Tensor prev;
  for (const GopEntry& e : gop_plan(static_cast<int>(padded.size()), cfg.gop_size)) {
    const Tensor& frame = padded[static_cast<std::size_t>(e.index)];
    FrameOutput out = e.kind == FrameKind::kI ? iframe_forward(model, frame, Mode::kEval, 0)
                                              : pframe_forward(model, prev, frame, Mode::kEval, 0);
    FrameSection section;
    section.kind = e.kind;
    const HyperpriorAE* aes[2] = {e.kind == FrameKind::kI ? &model.iframe : &model.flow, &model.residual};
    for (std::size_t p = 0; p < out.parts.size(); ++p) {
      section.streams.push_back(code_latent(out.parts[p]));
      section.streams.push_back(code_hyperlatent(*aes[p], out.parts[p].z_hat));
    }
    result.latent_bits_estimate += out.rate_bits;
    result.frame_bits_estimate.push_back(out.rate_bits);
    bs.frames.push_back(std::move(section));
    result.recons.push_back(crop(out.recon, src.w, src.h));
    prev = out.recon;
  }
  result.bytes = write_bitstream(bs);
  return result;
}

DecodeResult decode_stream(const SsfModel& global, std::span<const std::uint8_t> bytes) {
  return decode_stream(global, read_bitstream(bytes));
}

DecodeResult decode_stream(const SsfModel& global, const Bitstream& bs) {
  const BitstreamHeader& h = bs.header;
  if (!(h.arch == global.config())) {
    throw InputError("stream was coded for architecture " + std::string(preset_name(h.preset)) +
                     " with different channel counts than the supplied global weights");
  }
  DecodeResult result;
  result.header = h;
  SsfModel model = global.clone();
  if (bs.update) {
    const auto t0 = std::chrono::steady_clock::now();
    const UpdateSection& u = *bs.update;
    if (u.parameter_count != global.parameter_count(Side::kReceiver)) {
      throw StreamError(StreamError::Code::kMalformed,
                        "update covers " + std::to_string(u.parameter_count) + " parameters, model has " +
                            std::to_string(global.parameter_count(Side::kReceiver)));
    }
    const UpdateQuantGrid grid = update_grid_for(u);
    SpikeSlabPrior prior;
    prior.sigma = u.sigma;
    prior.spike = u.spike;
    prior.alpha = u.alpha;
    const PmfTable pmf = spike_slab_bin_pmf(grid, prior);
    std::vector<int> symbols = range_decode(u.payload, std::span<const PmfTable>(&pmf, 1), u.parameter_count);
    for (int& s : symbols) {
      s = update_index_to_symbol(s, grid);
      if (s != 0) ++result.nonzero_updates;
    }
    model = apply_update(global, symbols, grid);
    result.update_decode_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  const int ph = (h.height + ArchConfig::kDownsample - 1) / ArchConfig::kDownsample * ArchConfig::kDownsample;
  const int pw = (h.width + ArchConfig::kDownsample - 1) / ArchConfig::kDownsample * ArchConfig::kDownsample;
  const ArchConfig& a = h.arch;
  const Shape y_shape{1, a.latent_channels, ph / 16, pw / 16};
  const Shape z_shape{1, a.hyperlatent_channels, ph / 64, pw / 64};

  NoGradGuard no_grad;
  Tensor prev;
  const auto plan = gop_plan(static_cast<int>(h.frames), h.gop_size);
  for (const GopEntry& e : plan) {
    const FrameSection& f = bs.frames[static_cast<std::size_t>(e.index)];
    if (f.kind != e.kind) {
      throw StreamError(StreamError::Code::kMalformed, "frame " + std::to_string(e.index) +
                                                           " kind does not match the GoP structure");
    }
    Tensor recon;
    if (e.kind == FrameKind::kI) {
      recon = decode_part(model.iframe, f.streams[0], f.streams[1], y_shape, z_shape, "I-frame latent");
    } else {
      const Tensor flow = decode_part(model.flow, f.streams[0], f.streams[1], y_shape, z_shape, "flow latent");
      const Tensor warped = scale_space_warp(prev, flow_field(flow));
      recon = add(warped,
                  decode_part(model.residual, f.streams[2], f.streams[3], y_shape, z_shape, "residual latent"));
    }
    result.frames.push_back(crop(recon, h.width, h.height));
    prev = std::move(recon);
  }
  return result;
}

}  // namespace insa
