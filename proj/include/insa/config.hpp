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

#ifndef INSA_CONFIG_HPP_
#define INSA_CONFIG_HPP_

#include <iosfwd>
#include <map>
#include <string>

#include "insa/codec.hpp"
#include "insa/model.hpp"

namespace insa {

// Settings read from a plain key=value file. Blank lines and lines
// starting with '#' are ignored; unknown keys are errors.
//
//   preset              ssf-lite        architecture for train-global
//   beta                0.0016          rate weight
//   gop_size            12              0 or "inf" for a single I-frame
//   train_gop           3               frames per finetuning window
//   max_steps           200             finetuning steps
//   checkpoint_every    20
//   lr                  1e-4            finetuning learning rate
//   seed                0
//   t                   0.001           update bin width
//   sigma               0.05            slab standard deviation
//   s                   t / 6           spike standard deviation
//   alpha               100             spike-to-slab weight ratio
//   epsilon             2^-8            tail mass outside the update grid
//   temporal_subsample  1               keep every k-th frame
//   global_steps        500             train-global steps
//   global_lr           1e-3            train-global learning rate
struct RunConfig {
  ArchPreset preset = ArchPreset::kSsfLite;
  double beta = 0.0016;
  int gop_size = 12;
  int train_gop = 3;
  int max_steps = 200;
  int checkpoint_every = 20;
  float lr = 1e-4f;
  std::uint64_t seed = 0;
  double bin_width = 0.001;
  double sigma = 0.05;
  double spike = 0.001 / 6.0;
  double alpha = 100.0;
  int epsilon_exponent = 8;
  int temporal_subsample = 1;
  int global_steps = 500;
  float global_lr = 1e-3f;

  EncoderConfig encoder(EncodeMode mode) const;
  GlobalTrainConfig global_training() const;
  void validate() const;
};

// Applies `key=value` lines on top of the defaults.
RunConfig parse_run_config(std::istream& in, const std::string& source = "config");
RunConfig load_run_config(const std::string& path);
// Applies one setting. Throws InputError for unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// "inf" (or 0) means a single I-frame.
int parse_gop(const std::string& text);
// Accepts "2^-k" or a decimal that is an exact negative power of two.
int parse_epsilon_exponent(const std::string& text);

}  // namespace insa

#endif  // INSA_CONFIG_HPP_
