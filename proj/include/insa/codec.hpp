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

// Clip-level encoder and decoder. The encoder optionally finetunes to the
// clip, then runs the eval-mode forward and range-codes every rounded
// latent. The decoder repeats the receiver half of that forward from the
// decoded symbols, so both ends produce the same floats.

#ifndef INSA_CODEC_HPP_
#define INSA_CODEC_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "insa/bitstream.hpp"
#include "insa/insta.hpp"
#include "insa/video.hpp"

namespace insa {

enum class EncodeMode { kInsta, kEncoderOnly, kGlobal };

std::string encode_mode_name(EncodeMode mode);
EncodeMode encode_mode_from_name(const std::string& name);

inline constexpr int kMaxTailBound = 1024;

struct EncoderConfig {
  EncodeMode mode = EncodeMode::kInsta;
  int gop_size = 12;  // 0 = single I-frame
  FinetuneConfig finetune;
  SpikeSlabPrior prior;
  double bin_width = 0.001;
  int epsilon_exponent = 8;  // epsilon = 2^-exponent

  void validate() const;
};

// Prior and bin width as the decoder sees them after the f32 round trip.
SpikeSlabPrior canonical_prior(const SpikeSlabPrior& prior);
double canonical_bin_width(double bin_width);
UpdateQuantGrid update_grid_for(const UpdateSection& section);

struct EncodeResult {
  Bitstream stream;
  std::vector<std::uint8_t> bytes;
  std::vector<Tensor> recons;          // cropped to the source size
  std::optional<FinetuneReport> report;
  std::vector<int> update_symbols;     // empty unless mode is kInsta
  double latent_bits_estimate = 0.0;   // sum of eval-mode information content
  std::vector<double> frame_bits_estimate;
  double update_bits_estimate = 0.0;   // information content of the update symbols
};

EncodeResult encode_clip(const SsfModel& global, const VideoClip& clip, const EncoderConfig& cfg);

struct DecodeResult {
  BitstreamHeader header;
  std::vector<Tensor> frames;  // cropped
  std::size_t nonzero_updates = 0;
  double update_decode_seconds = 0.0;  // time to decode and apply the update
};

DecodeResult decode_stream(const SsfModel& global, std::span<const std::uint8_t> bytes);
DecodeResult decode_stream(const SsfModel& global, const Bitstream& stream);

// Tail bounds as chosen by the encoder.
int gaussian_tail_bound(const Tensor& mu, const Tensor& sigma);
int logistic_tail_bound(const Tensor& loc, const Tensor& log_scale);

}  // namespace insa

#endif  // INSA_CODEC_HPP_
