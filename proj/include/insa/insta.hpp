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

// Instance-adaptive finetuning: loss assembly and the per-clip loop that
// adapts the receiver-side parameters (as a quantized delta) and the
// sender-side parameters to one video.

#ifndef INSA_INSTA_HPP_
#define INSA_INSTA_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "insa/forward.hpp"
#include "insa/model.hpp"
#include "insa/update_prior.hpp"

namespace insa {

// D + beta * R_z. D is the per-pixel MSE averaged over frames; R_z is the
// latent rate in nats per pixel of the mini-sequence.
Tensor rd_loss(std::span<const Tensor> recons, std::span<const Tensor> targets,
               const Tensor& latent_rate_nats, double beta);

// rd + beta * r_theta, with r_theta already expressed per pixel of the
// whole clip (the update is paid once per clip).
Tensor insta_loss(const Tensor& rd, const Tensor& r_theta_per_pixel, double beta);

// Forward value: delta snapped to the update grid (with tail clipping).
// Backward: identity.
Tensor quantize_update_ste(const Tensor& delta, const UpdateQuantGrid& grid);

// Receiver parameters theta_D + symbol * t, in declaration order. Shared by
// the encoder and decoder so both hold identical floats.
SsfModel apply_update(const SsfModel& global, std::span<const int> symbols,
                      const UpdateQuantGrid& grid);

struct FinetuneConfig {
  double beta = 0.0016;
  float lr = 1e-4f;
  int max_steps = 200;
  int checkpoint_every = 20;
  int train_gop = 3;
  int eval_gop = 12;
  std::uint64_t seed = 0;
  bool update_receiver = true;  // false: encoder-only baseline
};

struct Checkpoint {
  int step = 0;
  double rd_loss = 0.0;
  double r_theta_bits = 0.0;
  double total_loss = 0.0;
  double seconds = 0.0;
};

struct FinetuneReport {
  std::vector<Checkpoint> checkpoints;
  int best_index = 0;
  bool diverged = false;

  const Checkpoint& best() const { return checkpoints.at(best_index); }
  void write_csv(std::ostream& out) const;
};

struct FinetuneResult {
  std::vector<float> delta;   // best unquantized receiver delta, flat
  std::vector<int> symbols;   // its quantization
  SsfModel model;             // theta_D + quantized delta, finetuned sender side
  FinetuneReport report;
};

// Eval-mode D + beta * R_z over the whole clip, in double.
struct ClipEval {
  double distortion = 0.0;
  double rate_nats_per_pixel = 0.0;
  double rd_loss = 0.0;
  std::vector<Tensor> recons;
  std::vector<FrameOutput> frames;
};

ClipEval evaluate_clip(const SsfModel& model, std::span<const Tensor> clip, int gop_size,
                       double beta);

// Total loss of the untouched global model: rd + beta * R_theta(delta = 0).
double global_insta_loss(const SsfModel& global, std::span<const Tensor> clip,
                         const SpikeSlabPrior& prior, const UpdateQuantGrid& grid,
                         const FinetuneConfig& cfg);

FinetuneResult finetune_instance(std::span<const Tensor> clip, const SsfModel& global,
                                 const SpikeSlabPrior& prior, const UpdateQuantGrid& grid,
                                 const FinetuneConfig& cfg);

// Same loop with delta frozen at zero and no update rate.
FinetuneResult encoder_only_finetune(std::span<const Tensor> clip, const SsfModel& global,
                                     const FinetuneConfig& cfg);

struct GlobalTrainConfig {
  double beta = 0.0016;
  float lr = 1e-3f;
  int steps = 500;
  int train_gop = 3;
  std::uint64_t seed = 0;
};

struct GlobalTrainReport {
  double initial_rd_loss = 0.0;
  double final_rd_loss = 0.0;
  std::vector<double> step_losses;
};

// Trains all parameters on random GoP-aligned windows drawn from `clips`.
GlobalTrainReport train_global(SsfModel& model, std::span<const std::vector<Tensor>> clips,
                               const GlobalTrainConfig& cfg);

}  // namespace insa

#endif  // INSA_INSTA_HPP_
