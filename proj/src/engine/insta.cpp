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

#include "insa/insta.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "insa/error.hpp"
#include "insa/ops.hpp"
#include "insa/optim.hpp"
#include "insa/random.hpp"

namespace insa {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

double pixels_of(const Tensor& frame) {
  return static_cast<double>(frame.shape().h) * frame.shape().w;
}

// Train-mode rd loss over one mini-sequence that starts with an I-frame.
Tensor window_loss(const SsfModel& model, std::span<const Tensor> frames, double beta,
                   std::uint64_t seed) {
  std::vector<Tensor> recons;
  Tensor rate;
  Tensor prev;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::uint64_t s = mix_keys(seed, i);
    FrameOutput out = i == 0 ? iframe_forward(model, frames[i], Mode::kTrain, s)
                             : pframe_forward(model, prev, frames[i], Mode::kTrain, s);
    rate = rate.defined() ? add(rate, out.rate_nats) : out.rate_nats;
    prev = out.recon;
    recons.push_back(out.recon);
  }
  return rd_loss(recons, frames, rate, beta);
}

std::vector<float> flatten(std::span<const Tensor> tensors) {
  std::vector<float> out;
  for (const Tensor& t : tensors) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

std::vector<Tensor> snapshot(std::span<const Tensor> tensors) {
  std::vector<Tensor> out;
  for (const Tensor& t : tensors) out.emplace_back(t.shape(), t.values());
  return out;
}

int window_count(int frames, int gop) { return (frames - gop) / gop + 1; }

FinetuneResult run_finetune(std::span<const Tensor> clip, const SsfModel& global,
                            const SpikeSlabPrior* prior, const UpdateQuantGrid* grid,
                            const FinetuneConfig& cfg) {
  if (cfg.train_gop < 1 || static_cast<int>(clip.size()) < cfg.train_gop) {
    throw std::invalid_argument("finetuning needs at least train_gop = " +
                                std::to_string(cfg.train_gop) + " frames, clip has " +
                                std::to_string(clip.size()));
  }
  if (!(cfg.beta >= 0.0)) throw std::invalid_argument("finetuning needs beta >= 0");
  const bool adapt_receiver = cfg.update_receiver && prior != nullptr && grid != nullptr;
  const double clip_pixels = static_cast<double>(clip.size()) * pixels_of(clip[0]);
  const auto start = std::chrono::steady_clock::now();

  // Receiver base values stay constant; phi and delta are the leaves.
  std::vector<Tensor> theta_d;
  std::vector<Tensor> delta;
  std::vector<Tensor> phi;
  std::vector<NamedParam> trainable;
  for (const auto& p : global.parameters(Side::kReceiver)) {
    theta_d.emplace_back(p.tensor.shape(), p.tensor.values());
    if (adapt_receiver) {
      delta.push_back(Tensor::parameter(p.tensor.shape(), std::vector<float>(p.tensor.numel(), 0.0f)));
      trainable.push_back({"delta." + p.name, delta.back()});
    }
  }
  for (const auto& p : global.parameters(Side::kSender)) {
    phi.push_back(Tensor::parameter(p.tensor.shape(), p.tensor.values()));
    trainable.push_back({p.name, phi.back()});
  }
  OptimizerState opt = make_adam_state(trainable, cfg.lr);

  auto quantized_symbols = [&] {
    return adapt_receiver ? quantize_updates(flatten(delta), *grid) : std::vector<int>{};
  };
  auto eval_model = [&](std::span<const int> symbols) {
    const SsfModel with_phi = global.with_sender(phi);
    return adapt_receiver ? apply_update(with_phi, symbols, *grid) : with_phi;
  };

  FinetuneResult result;
  std::vector<Tensor> best_delta = snapshot(delta);
  std::vector<Tensor> best_phi = snapshot(phi);
  double best_total = std::numeric_limits<double>::infinity();

  auto checkpoint = [&](int step) {
    const std::vector<int> symbols = quantized_symbols();
    const ClipEval ev = evaluate_clip(eval_model(symbols), clip, cfg.eval_gop, cfg.beta);
    Checkpoint cp;
    cp.step = step;
    cp.rd_loss = ev.rd_loss;
    const double r_theta_nats =
        adapt_receiver ? update_rate_nats(flatten(delta), *prior, grid->bin_width) : 0.0;
    cp.r_theta_bits = r_theta_nats / kLn2;
    cp.total_loss = cp.rd_loss + cfg.beta * r_theta_nats / clip_pixels;
    cp.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(cp.total_loss)) throw DomainError("non-finite checkpoint loss");
    result.report.checkpoints.push_back(cp);
    if (cp.total_loss < best_total) {
      best_total = cp.total_loss;
      result.report.best_index = static_cast<int>(result.report.checkpoints.size()) - 1;
      best_delta = snapshot(delta);
      best_phi = snapshot(phi);
    }
  };

  checkpoint(0);
  Rng window_rng(mix_keys(cfg.seed, 0x57696e646f77ull));
  const int windows = window_count(static_cast<int>(clip.size()), cfg.train_gop);
  const Tensor r_theta_scale = Tensor::scalar(static_cast<float>(1.0 / clip_pixels));
  try {
    for (int step = 1; step <= cfg.max_steps; ++step) {
      const int first = static_cast<int>(window_rng.below(windows)) * cfg.train_gop;
      std::vector<Tensor> receiver;
      for (std::size_t i = 0; i < theta_d.size(); ++i) {
        receiver.push_back(adapt_receiver ? add(theta_d[i], quantize_update_ste(delta[i], *grid))
                                          : theta_d[i]);
      }
      const SsfModel view = global.with_receiver(receiver).with_sender(phi);
      Tensor loss = window_loss(view, clip.subspan(first, cfg.train_gop), cfg.beta,
                                mix_keys(cfg.seed, step));
      if (adapt_receiver) {
        loss = insta_loss(loss, mul(update_rate_term(delta, *prior, grid->bin_width), r_theta_scale),
                          cfg.beta);
      }
      if (!std::isfinite(loss.item())) {
        throw DomainError("non-finite training loss at step " + std::to_string(step));
      }
      backward(loss);
      adam_step(trainable, opt);
      if (step % std::max(cfg.checkpoint_every, 1) == 0 || step == cfg.max_steps) checkpoint(step);
    }
  } catch (const DomainError&) {
    result.report.diverged = true;
  }

  result.delta = flatten(best_delta);
  result.symbols = adapt_receiver ? quantize_updates(result.delta, *grid) : std::vector<int>{};
  const SsfModel with_phi = global.with_sender(best_phi);
  result.model = adapt_receiver ? apply_update(with_phi, result.symbols, *grid) : with_phi;
  return result;
}

}  // namespace

Tensor rd_loss(std::span<const Tensor> recons, std::span<const Tensor> targets,
               const Tensor& latent_rate_nats, double beta) {
  if (recons.size() != targets.size() || recons.empty()) {
    throw std::invalid_argument("rd_loss needs matching, non-empty frame lists");
  }
  Tensor distortion;
  for (std::size_t i = 0; i < recons.size(); ++i) {
    const Tensor d = mse(recons[i], targets[i]);
    distortion = distortion.defined() ? add(distortion, d) : d;
  }
  const double frames = static_cast<double>(recons.size());
  distortion = scale(distortion, static_cast<float>(1.0 / frames));
  const double pixels = frames * pixels_of(targets[0]);
  return add(scale(latent_rate_nats, static_cast<float>(beta / pixels)), distortion);
}

Tensor insta_loss(const Tensor& rd, const Tensor& r_theta_per_pixel, double beta) {
  return add(rd, scale(r_theta_per_pixel, static_cast<float>(beta)));
}

Tensor quantize_update_ste(const Tensor& delta, const UpdateQuantGrid& grid) {
  std::vector<float> out(delta.numel());
  auto in = delta.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = dequantize_update(quantize_update(in[i], grid), grid);
  }
  return make_result(delta.shape(), std::move(out), {delta}, [delta](const detail::Node& self) {
    accumulate_grad(delta, self.grad);
  });
}

SsfModel apply_update(const SsfModel& global, std::span<const int> symbols,
                      const UpdateQuantGrid& grid) {
  std::vector<Tensor> receiver;
  std::size_t k = 0;
  for (const auto& p : global.parameters(Side::kReceiver)) {
    if (k + p.tensor.numel() > symbols.size()) {
      throw std::invalid_argument("update has " + std::to_string(symbols.size()) +
                                  " symbols, receiver side needs more");
    }
    std::vector<float> v(p.tensor.numel());
    auto base = p.tensor.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = base[i] + dequantize_update(symbols[k++], grid);
    receiver.emplace_back(p.tensor.shape(), std::move(v));
  }
  if (k != symbols.size()) {
    throw std::invalid_argument("update has " + std::to_string(symbols.size()) + " symbols for " +
                                std::to_string(k) + " receiver parameters");
  }
  return global.with_receiver(receiver);
}

void FinetuneReport::write_csv(std::ostream& out) const {
  out << "step,rd_loss,r_theta_bits,total_loss,seconds\n";
  const auto old = out.precision(17);
  for (const auto& c : checkpoints) {
    out << c.step << ',' << c.rd_loss << ',' << c.r_theta_bits << ',' << c.total_loss << ','
        << c.seconds << '\n';
  }
  out.precision(old);
}

ClipEval evaluate_clip(const SsfModel& model, std::span<const Tensor> clip, int gop_size,
                       double beta) {
  NoGradGuard guard;
  ClipEval ev;
  double distortion = 0.0;
  double bits = 0.0;
  for (const GopEntry& e : gop_plan(static_cast<int>(clip.size()), gop_size)) {
    FrameOutput out =
        e.kind == FrameKind::kI
            ? iframe_forward(model, clip[e.index], Mode::kEval, 0)
            : pframe_forward(model, ev.recons.back(), clip[e.index], Mode::kEval, 0);
    double se = 0.0;
    auto a = out.recon.data();
    auto b = clip[e.index].data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = static_cast<double>(a[i]) - b[i];
      se += d * d;
    }
    distortion += se / static_cast<double>(a.size());
    bits += out.rate_bits;
    ev.recons.push_back(out.recon);
    ev.frames.push_back(std::move(out));
  }
  const double frames = static_cast<double>(clip.size());
  ev.distortion = distortion / frames;
  ev.rate_nats_per_pixel = bits * kLn2 / (frames * pixels_of(clip[0]));
  ev.rd_loss = ev.distortion + beta * ev.rate_nats_per_pixel;
  return ev;
}

double global_insta_loss(const SsfModel& global, std::span<const Tensor> clip,
                         const SpikeSlabPrior& prior, const UpdateQuantGrid& grid,
                         const FinetuneConfig& cfg) {
  const ClipEval ev = evaluate_clip(global, clip, cfg.eval_gop, cfg.beta);
  const std::vector<float> zeros(global.parameter_count(Side::kReceiver), 0.0f);
  const double clip_pixels = static_cast<double>(clip.size()) * pixels_of(clip[0]);
  return ev.rd_loss + cfg.beta * update_rate_nats(zeros, prior, grid.bin_width) / clip_pixels;
}

FinetuneResult finetune_instance(std::span<const Tensor> clip, const SsfModel& global,
                                 const SpikeSlabPrior& prior, const UpdateQuantGrid& grid,
                                 const FinetuneConfig& cfg) {
  return run_finetune(clip, global, &prior, &grid, cfg);
}

FinetuneResult encoder_only_finetune(std::span<const Tensor> clip, const SsfModel& global,
                                     const FinetuneConfig& cfg) {
  FinetuneConfig c = cfg;
  c.update_receiver = false;
  return run_finetune(clip, global, nullptr, nullptr, c);
}

GlobalTrainReport train_global(SsfModel& model, std::span<const std::vector<Tensor>> clips,
                               const GlobalTrainConfig& cfg) {
  if (clips.empty()) throw std::invalid_argument("global training needs at least one clip");
  for (const auto& c : clips) {
    if (static_cast<int>(c.size()) < cfg.train_gop) {
      throw std::invalid_argument("training clip shorter than train_gop");
    }
  }
  auto eval_loss = [&] {
    double total = 0.0;
    for (const auto& c : clips) {
      const auto window = std::span<const Tensor>(c).first(cfg.train_gop);
      total += evaluate_clip(model, window, cfg.train_gop, cfg.beta).rd_loss;
    }
    return total / static_cast<double>(clips.size());
  };
  GlobalTrainReport report;
  report.initial_rd_loss = eval_loss();
  model.set_requires_grad(true);
  auto params = model.parameters();
  OptimizerState opt = make_adam_state(params, cfg.lr);
  Rng rng(mix_keys(cfg.seed, 0x476c6f62616cull));
  for (int step = 1; step <= cfg.steps; ++step) {
    const auto& clip = clips[rng.below(clips.size())];
    const int windows = window_count(static_cast<int>(clip.size()), cfg.train_gop);
    const int first = static_cast<int>(rng.below(windows)) * cfg.train_gop;
    Tensor loss = window_loss(model, std::span<const Tensor>(clip).subspan(first, cfg.train_gop),
                              cfg.beta, mix_keys(cfg.seed, step));
    if (!std::isfinite(loss.item())) {
      throw DomainError("global training diverged at step " + std::to_string(step));
    }
    report.step_losses.push_back(loss.item());
    backward(loss);
    adam_step(params, opt);
  }
  report.final_rd_loss = eval_loss();
  return report;
}

}  // namespace insa
