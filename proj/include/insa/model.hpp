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

#ifndef INSA_MODEL_HPP_
#define INSA_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "insa/optim.hpp"
#include "insa/tensor.hpp"

namespace insa {

struct ArchConfig {
  int codec_channels = 32;
  int hyper_channels = 32;
  int latent_channels = 48;
  int hyperlatent_channels = 48;

  static constexpr int kCodecDownsample = 16;
  static constexpr int kHyperDownsample = 4;
  static constexpr int kDownsample = kCodecDownsample * kHyperDownsample;

  void validate() const;
  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

// Stored as a byte in stream and weight headers.
enum class ArchPreset : std::uint8_t {
  kCustom = 0,
  kSsfLite = 1,
  kSsf18 = 2,
  kSsf8 = 3,
  kSsf5 = 4,
  kSsf3 = 5,
};

ArchConfig preset_config(ArchPreset preset);
std::string_view preset_name(ArchPreset preset);
std::optional<ArchPreset> preset_from_name(std::string_view name);
// kCustom when the channels match no named preset.
ArchPreset preset_for(const ArchConfig& config);

enum class Side { kSender, kReceiver };

struct ConvLayer {
  std::string name;
  Tensor weight;
  Tensor bias;
  int stride = 1;
  int padding = 0;
  int output_padding = 0;
  bool transposed = false;

  int in_channels() const { return transposed ? weight.shape().n : weight.shape().c; }
  int out_channels() const { return transposed ? weight.shape().c : weight.shape().n; }
  int kernel() const { return weight.shape().h; }
  Tensor operator()(const Tensor& x) const;
};

// One hyperprior autoencoder. g_a and h_a live on the sender side; the
// synthesis and hyper-synthesis stacks and the hyperlatent prior are what
// a receiver needs.
struct HyperpriorAE {
  std::string name;
  std::vector<ConvLayer> g_a;
  std::vector<ConvLayer> h_a;
  std::vector<ConvLayer> h_mu;
  std::vector<ConvLayer> h_sigma;
  std::vector<ConvLayer> g_s;
  Tensor prior_loc;        // (1, hyperlatent, 1, 1)
  Tensor prior_log_scale;  // (1, hyperlatent, 1, 1)
};

inline constexpr float kSigmaFloor = 0.11f;

class SsfModel {
 public:
  SsfModel() = default;
  SsfModel(const ArchConfig& config, std::uint64_t seed);

  const ArchConfig& config() const { return config_; }

  HyperpriorAE iframe;
  HyperpriorAE flow;
  HyperpriorAE residual;

  using Visitor = std::function<void(const std::string& name, Tensor& tensor, Side side)>;
  // Visits every parameter in declaration order.
  void visit(const Visitor& fn);
  void visit(const std::function<void(const std::string&, const Tensor&, Side)>& fn) const;

  std::vector<NamedParam> parameters() const;
  std::vector<NamedParam> parameters(Side side) const;
  std::size_t parameter_count() const;
  std::size_t parameter_count(Side side) const;

  // Independent copy with fresh leaf tensors.
  SsfModel clone() const;
  // Shares sender tensors and substitutes the receiver tensors, in
  // declaration order. Used to run the model with theta_D + delta.
  SsfModel with_receiver(std::span<const Tensor> receiver) const;
  SsfModel with_sender(std::span<const Tensor> sender) const;

  void set_requires_grad(bool on);

 private:
  ArchConfig config_;
};

// Closed-form parameter count from the layer shapes of `config`.
std::size_t expected_parameter_count(const ArchConfig& config, Side side);
std::size_t expected_parameter_count(const ArchConfig& config);

enum class FrameKind : std::uint8_t { kI = 0, kP = 1 };

struct GopEntry {
  int index = 0;
  FrameKind kind = FrameKind::kI;
  int reference = -1;
};

inline constexpr int kInfiniteGop = 0;

// gop_size == kInfiniteGop codes the whole clip as one group.
std::vector<GopEntry> gop_plan(int num_frames, int gop_size);

// Receiver-side multiply-accumulates per pixel, in thousands, for a P-frame
// plus one twelfth of an I-frame. Transposed convolutions are counted at
// their output resolution.
double count_decoder_macs(const ArchConfig& config, int width, int height);

}  // namespace insa

#endif  // INSA_MODEL_HPP_
