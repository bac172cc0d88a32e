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

#ifndef INSA_RANDOM_HPP_
#define INSA_RANDOM_HPP_

#include <cstdint>

namespace insa {

// SplitMix64 finalizer. Used as the counter-based hash behind every random
// draw in the codec so results do not depend on the standard library.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) + b);
}

// Sequential generator on top of splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64(state_++); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). Slight modulo bias is irrelevant here.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace insa

#endif  // INSA_RANDOM_HPP_
