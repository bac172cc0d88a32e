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

// A small SSF-lite model trained on synthetic clips, built once per test
// binary. Untrained weights put latents far outside the hyperprior, which
// makes rate and finetuning checks meaningless.

#ifndef INSA_TESTS_TRAINED_MODEL_HPP_
#define INSA_TESTS_TRAINED_MODEL_HPP_

#include <vector>

#include "insa/insta.hpp"
#include "insa/model.hpp"
#include "insa/synthetic.hpp"

namespace insa::testing {

inline constexpr double kTestBeta = 0.0016;

inline std::vector<std::vector<Tensor>> training_clips(int count = 6, int frames = 6, int size = 64) {
  std::vector<std::vector<Tensor>> clips;
  for (int i = 0; i < count; ++i) clips.push_back(synthetic_clip(frames, size, size, 100 + static_cast<std::uint64_t>(i)));
  return clips;
}

inline const SsfModel& trained_lite_model(int steps = 200) {
  static const SsfModel model = [steps] {
    SsfModel m(preset_config(ArchPreset::kSsfLite), 7);
    GlobalTrainConfig cfg;
    cfg.beta = kTestBeta;
    cfg.lr = 1e-3f;
    cfg.steps = steps;
    cfg.seed = 11;
    const auto clips = training_clips();
    train_global(m, clips, cfg);
    return m;
  }();
  return model;
}

}  // namespace insa::testing

#endif  // INSA_TESTS_TRAINED_MODEL_HPP_
