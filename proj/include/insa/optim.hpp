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

#ifndef INSA_OPTIM_HPP_
#define INSA_OPTIM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "insa/tensor.hpp"

namespace insa {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

// Adam moments for a fixed list of parameters.
struct OptimizerState {
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
  std::uint64_t step = 0;
  std::vector<std::vector<float>> first_moment;
  std::vector<std::vector<float>> second_moment;
};

OptimizerState make_adam_state(std::span<const NamedParam> params, float learning_rate);

// One bias-corrected Adam update. Every parameter must hold a gradient;
// gradients are cleared afterwards.
void adam_step(std::span<NamedParam> params, OptimizerState& state);

}  // namespace insa

#endif  // INSA_OPTIM_HPP_
