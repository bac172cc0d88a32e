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

#include "insa/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace insa {

OptimizerState make_adam_state(std::span<const NamedParam> params, float learning_rate) {
  OptimizerState state;
  state.learning_rate = learning_rate;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.tensor.numel(), 0.0f);
    state.second_moment.emplace_back(p.tensor.numel(), 0.0f);
  }
  return state;
}

void adam_step(std::span<NamedParam> params, OptimizerState& state) {
  if (params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: optimizer state tracks " +
                                std::to_string(state.first_moment.size()) +
                                " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].tensor.has_grad()) {
      throw std::invalid_argument("adam_step: parameter '" + params[i].name + "' has no gradient");
    }
    if (state.first_moment[i].size() != params[i].tensor.numel()) {
      throw std::invalid_argument("adam_step: moment buffer shape mismatch for '" +
                                  params[i].name + "'");
    }
  }
  ++state.step;
  const float b1 = state.beta1;
  const float b2 = state.beta2;
  const float c1 = static_cast<float>(1.0 - std::pow(static_cast<double>(b1), state.step));
  const float c2 = static_cast<float>(1.0 - std::pow(static_cast<double>(b2), state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i].tensor.data();
    auto grad = params[i].tensor.grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const float g = grad[j];
      m[j] = b1 * m[j] + (1.0f - b1) * g;
      v[j] = b2 * v[j] + (1.0f - b2) * g * g;
      const float m_hat = m[j] / c1;
      const float v_hat = v[j] / c2;
      value[j] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
    params[i].tensor.zero_grad();
  }
}

}  // namespace insa
