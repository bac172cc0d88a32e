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

// Spike-and-slab prior over receiver-side parameter updates, the fixed
// quantization grid for those updates, and discretized Gaussian bins.

#ifndef INSA_UPDATE_PRIOR_HPP_
#define INSA_UPDATE_PRIOR_HPP_

#include <span>
#include <vector>

#include "insa/pmf.hpp"
#include "insa/tensor.hpp"

namespace insa {

// p(d) = (N(d | 0, sigma^2) + alpha N(d | 0, spike^2)) / (1 + alpha)
struct SpikeSlabPrior {
  double sigma = 0.05;
  double spike = 0.001 / 6.0;
  double alpha = 100.0;

  void validate() const;
};

double spike_slab_density(double delta, const SpikeSlabPrior& prior);
double spike_slab_cdf(double x, const SpikeSlabPrior& prior);
// Mass of [lo, hi) under the prior, evaluated on the tail that keeps precision.
double spike_slab_interval(double lo, double hi, const SpikeSlabPrior& prior);

struct UpdateQuantGrid {
  double bin_width = 0.001;
  double epsilon = 1.0 / 256.0;
  int n_bins = 1;              // odd
  double covered_mass = 0.0;   // prior mass inside [-half_width, half_width]

  int max_symbol() const { return (n_bins - 1) / 2; }
  double half_width() const { return 0.5 * n_bins * bin_width; }
};

// Smallest odd bin count whose span holds at least 1 - epsilon of the prior.
UpdateQuantGrid build_update_grid(const SpikeSlabPrior& prior, double bin_width, double epsilon);

// Per-bin prior mass, symbol -max..max; the extreme bins absorb the tails.
std::vector<double> spike_slab_bin_probabilities(const UpdateQuantGrid& grid,
                                                 const SpikeSlabPrior& prior);
PmfTable spike_slab_bin_pmf(const UpdateQuantGrid& grid, const SpikeSlabPrior& prior);

// Zero-mean Gaussian with the slab's width on the same grid; the reference
// code for the sparsity analysis.
PmfTable slab_only_bin_pmf(const UpdateQuantGrid& grid, const SpikeSlabPrior& prior);

int quantize_update(float delta, const UpdateQuantGrid& grid);
std::vector<int> quantize_updates(std::span<const float> delta, const UpdateQuantGrid& grid);
float dequantize_update(int symbol, const UpdateQuantGrid& grid);

// Table index <-> signed symbol.
inline int update_symbol_to_index(int symbol, const UpdateQuantGrid& grid) {
  return symbol + grid.max_symbol();
}
inline int update_index_to_symbol(int index, const UpdateQuantGrid& grid) {
  return index - grid.max_symbol();
}

// R_theta in nats: sum_j -ln P(bin around delta_j), where the bin is the
// width-t interval centred on the unquantized update. This is the
// continuous relaxation of the code length of the quantized update and
// equals it exactly on grid points.
double update_rate_nats(std::span<const float> delta, const SpikeSlabPrior& prior,
                        double bin_width);
Tensor update_rate_term(std::span<const Tensor> deltas, const SpikeSlabPrior& prior,
                        double bin_width);

// Mass of the integer bin k under N(mu, sigma^2).
double gaussian_bin_pmf(double mu, double sigma, int k);

}  // namespace insa

#endif  // INSA_UPDATE_PRIOR_HPP_
