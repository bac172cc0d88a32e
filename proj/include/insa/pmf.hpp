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

#ifndef INSA_PMF_HPP_
#define INSA_PMF_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace insa {

inline constexpr int kPmfPrecisionBits = 16;
inline constexpr std::uint32_t kPmfTotal = 1u << kPmfPrecisionBits;

// Integer symbol frequencies summing to exactly kPmfTotal, each >= 1.
class PmfTable {
 public:
  PmfTable() = default;

  // Quantizes `probs` (need not be normalized) with floor-at-one and
  // largest-remainder correction. At most kPmfTotal entries.
  static PmfTable from_probabilities(std::span<const double> probs);
  static PmfTable from_frequencies(std::vector<std::uint32_t> freq);

  std::size_t size() const { return freq_.size(); }
  std::uint32_t freq(std::size_t s) const { return freq_[s]; }
  std::uint32_t cum(std::size_t s) const { return cum_[s]; }
  std::uint32_t total() const { return kPmfTotal; }
  double probability(std::size_t s) const { return static_cast<double>(freq_[s]) / kPmfTotal; }
  double bits(std::size_t s) const;

  // Symbol s with cum(s) <= target < cum(s) + freq(s).
  std::size_t find(std::uint32_t target) const;

  friend bool operator==(const PmfTable&, const PmfTable&) = default;

 private:
  std::vector<std::uint32_t> freq_;
  std::vector<std::uint32_t> cum_;  // size() + 1 entries
};

}  // namespace insa

#endif  // INSA_PMF_HPP_
