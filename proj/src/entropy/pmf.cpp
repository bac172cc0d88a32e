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

#include "insa/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace insa {

PmfTable PmfTable::from_probabilities(std::span<const double> probs) {
  const std::size_t n = probs.size();
  if (n == 0 || n > kPmfTotal) {
    throw std::invalid_argument("PmfTable: cannot quantize " + std::to_string(n) + " symbols");
  }
  double mass = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("PmfTable: invalid probability");
    mass += p;
  }
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = mass > 0.0 ? probs[i] / mass * kPmfTotal : static_cast<double>(kPmfTotal) / n;
  }
  std::vector<std::uint32_t> freq(n);
  std::vector<double> remainder(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fl = std::floor(scaled[i]);
    freq[i] = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(fl));
    remainder[i] = scaled[i] - freq[i];
    assigned += freq[i];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::int64_t delta = static_cast<std::int64_t>(kPmfTotal) - assigned;
  if (delta > 0) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t j = 0; delta > 0; j = (j + 1) % n, --delta) ++freq[order[j]];
  } else if (delta < 0) {
    // Over-assigned because of the floor at one: take from the entries that
    // were rounded up the most, never below one.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] < remainder[b]; });
    std::size_t j = 0;
    while (delta < 0) {
      if (freq[order[j]] > 1) {
        --freq[order[j]];
        ++delta;
      }
      j = (j + 1) % n;
    }
  }
  return from_frequencies(std::move(freq));
}

PmfTable PmfTable::from_frequencies(std::vector<std::uint32_t> freq) {
  PmfTable t;
  t.cum_.resize(freq.size() + 1);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    if (freq[i] == 0) throw std::invalid_argument("PmfTable: zero frequency at symbol " + std::to_string(i));
    t.cum_[i] = static_cast<std::uint32_t>(acc);
    acc += freq[i];
  }
  if (acc != kPmfTotal) {
    throw std::invalid_argument("PmfTable: frequencies sum to " + std::to_string(acc) +
                                ", expected " + std::to_string(kPmfTotal));
  }
  t.cum_.back() = static_cast<std::uint32_t>(acc);
  t.freq_ = std::move(freq);
  return t;
}

double PmfTable::bits(std::size_t s) const { return -std::log2(probability(s)); }

std::size_t PmfTable::find(std::uint32_t target) const {
  auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  return static_cast<std::size_t>(it - cum_.begin()) - 1;
}

}  // namespace insa
