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

#include "insa/update_prior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "insa/distributions.hpp"

namespace insa {

void SpikeSlabPrior::validate() const {
  if (!(spike > 0.0) || !(spike < sigma)) {
    throw std::invalid_argument("spike-slab prior needs 0 < spike < sigma (spike=" +
                                std::to_string(spike) + ", sigma=" + std::to_string(sigma) + ")");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("spike-slab prior needs alpha > 0");
}

double spike_slab_density(double delta, const SpikeSlabPrior& prior) {
  const double slab = dist::normal_pdf(delta / prior.sigma) / prior.sigma;
  const double spike = dist::normal_pdf(delta / prior.spike) / prior.spike;
  return (slab + prior.alpha * spike) / (1.0 + prior.alpha);
}

double spike_slab_cdf(double x, const SpikeSlabPrior& prior) {
  return (dist::normal_cdf(x / prior.sigma) + prior.alpha * dist::normal_cdf(x / prior.spike)) /
         (1.0 + prior.alpha);
}

double spike_slab_interval(double lo, double hi, const SpikeSlabPrior& prior) {
  const double slab = dist::normal_interval(lo / prior.sigma, hi / prior.sigma);
  const double spike = dist::normal_interval(lo / prior.spike, hi / prior.spike);
  return (slab + prior.alpha * spike) / (1.0 + prior.alpha);
}

UpdateQuantGrid build_update_grid(const SpikeSlabPrior& prior, double bin_width, double epsilon) {
  prior.validate();
  if (!(bin_width > 0.0)) throw std::invalid_argument("update grid needs bin width > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("update grid needs 0 < epsilon < 1");
  UpdateQuantGrid grid;
  grid.bin_width = bin_width;
  grid.epsilon = epsilon;
  // Symmetric prior: outside mass is twice the upper tail.
  for (int n = 1;; n += 2) {
    const double half = 0.5 * n * bin_width;
    const double outside = 2.0 * spike_slab_interval(half, INFINITY, prior);
    if (1.0 - outside >= 1.0 - epsilon || n >= static_cast<int>(kPmfTotal) - 1) {
      grid.n_bins = n;
      grid.covered_mass = 1.0 - outside;
      return grid;
    }
  }
}

std::vector<double> spike_slab_bin_probabilities(const UpdateQuantGrid& grid,
                                                 const SpikeSlabPrior& prior) {
  const int m = grid.max_symbol();
  const double t = grid.bin_width;
  std::vector<double> probs(grid.n_bins);
  for (int k = -m; k <= m; ++k) {
    const double lo = k == -m ? -INFINITY : (k - 0.5) * t;
    const double hi = k == m ? INFINITY : (k + 0.5) * t;
    probs[k + m] = spike_slab_interval(lo, hi, prior);
  }
  return probs;
}

PmfTable spike_slab_bin_pmf(const UpdateQuantGrid& grid, const SpikeSlabPrior& prior) {
  const auto probs = spike_slab_bin_probabilities(grid, prior);
  return PmfTable::from_probabilities(probs);
}

PmfTable slab_only_bin_pmf(const UpdateQuantGrid& grid, const SpikeSlabPrior& prior) {
  const int m = grid.max_symbol();
  const double t = grid.bin_width;
  std::vector<double> probs(grid.n_bins);
  for (int k = -m; k <= m; ++k) {
    const double lo = k == -m ? -INFINITY : (k - 0.5) * t / prior.sigma;
    const double hi = k == m ? INFINITY : (k + 0.5) * t / prior.sigma;
    probs[k + m] = dist::normal_interval(lo, hi);
  }
  return PmfTable::from_probabilities(probs);
}

int quantize_update(float delta, const UpdateQuantGrid& grid) {
  const float t = static_cast<float>(grid.bin_width);
  const int m = grid.max_symbol();
  const float q = std::round(delta / t);
  if (q >= static_cast<float>(m)) return m;
  if (q <= static_cast<float>(-m)) return -m;
  return static_cast<int>(q);
}

std::vector<int> quantize_updates(std::span<const float> delta, const UpdateQuantGrid& grid) {
  std::vector<int> out(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) out[i] = quantize_update(delta[i], grid);
  return out;
}

float dequantize_update(int symbol, const UpdateQuantGrid& grid) {
  return static_cast<float>(symbol) * static_cast<float>(grid.bin_width);
}

namespace {

// Mass of a standard normal over [u - h/2, u + h/2] by the midpoint
// expansion, exact to ~1e-16 relative while h * max(1, |u|) stays small.
double narrow_normal_bin(double u, double h) {
  const double u2 = u * u, h2 = h * h;
  const double series = 1.0 + h2 / 24.0 * (u2 - 1.0) +
                        h2 * h2 / 1920.0 * (u2 * u2 - 6.0 * u2 + 3.0) +
                        h2 * h2 * h2 / 322560.0 * (u2 * u2 * u2 - 15.0 * u2 * u2 + 45.0 * u2 - 15.0);
  return h * dist::normal_pdf(u) * series;
}

// Mass of N(0, sd^2) over the bin of width t centred at d <= 0.
double component_bin(double d, double t, double sd) {
  const double h = t / sd, u = d / sd;
  if (h * std::max(1.0, std::abs(u)) < 0.1) return narrow_normal_bin(u, h);
  // Far in the tail the component contributes nothing representable.
  if ((-d - 0.5 * t) / sd > 40.0) return 0.0;
  return dist::normal_interval(u - 0.5 * h, u + 0.5 * h);
}

double component_density(double x, double sd) {
  const double z = x / sd;
  return std::abs(z) > 40.0 ? 0.0 : dist::normal_pdf(z) / sd;
}

// -ln P([d - t/2, d + t/2)) and its derivative in d.
double bin_nll(double d, const SpikeSlabPrior& prior, double t, double* slope) {
  // The prior is even; work on the non-positive side for tail accuracy.
  const double c = -std::abs(d);
  const double p = (component_bin(c, t, prior.sigma) + prior.alpha * component_bin(c, t, prior.spike)) /
                   (1.0 + prior.alpha);
  const double mass = std::max(p, 1e-300);
  if (slope != nullptr) {
    auto density = [&](double x) {
      return (component_density(x, prior.sigma) + prior.alpha * component_density(x, prior.spike)) /
             (1.0 + prior.alpha);
    };
    *slope = -(density(d + 0.5 * t) - density(d - 0.5 * t)) / mass;
  }
  return -std::log(mass);
}

}  // namespace

double update_rate_nats(std::span<const float> delta, const SpikeSlabPrior& prior,
                        double bin_width) {
  double total = 0.0;
  for (float d : delta) total += bin_nll(d, prior, bin_width, nullptr);
  return total;
}

Tensor update_rate_term(std::span<const Tensor> deltas, const SpikeSlabPrior& prior,
                        double bin_width) {
  double total = 0.0;
  std::vector<std::vector<float>> slopes(deltas.size());
  std::vector<Tensor> inputs(deltas.begin(), deltas.end());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    auto values = deltas[i].data();
    slopes[i].resize(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
      double slope = 0.0;
      total += bin_nll(values[j], prior, bin_width, &slope);
      slopes[i][j] = static_cast<float>(slope);
    }
  }
  return make_result(Shape{}, {static_cast<float>(total)}, inputs,
                     [inputs, slopes = std::move(slopes)](const detail::Node& self) {
    const float g = self.grad[0];
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!inputs[i].requires_grad()) continue;
      std::vector<float> buf(slopes[i].size());
      for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = g * slopes[i][j];
      accumulate_grad(inputs[i], buf);
    }
  });
}

double gaussian_bin_pmf(double mu, double sigma, int k) {
  return dist::gaussian_bin_mass(static_cast<double>(k), mu, sigma);
}

}  // namespace insa
