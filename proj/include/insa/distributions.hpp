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

// Scalar CDF helpers shared by the training losses and the entropy models.
// Everything is evaluated in double and on whichever tail keeps precision.

#ifndef INSA_DISTRIBUTIONS_HPP_
#define INSA_DISTRIBUTIONS_HPP_

#include <cmath>

namespace insa::dist {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }
inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// P(lo <= X < hi) for X ~ N(0, 1), lo <= hi.
inline double normal_interval(double lo, double hi) {
  if (lo > 0.0) return normal_sf(lo) - normal_sf(hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

inline double logistic_cdf(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logistic_pdf(double x) {
  const double s = logistic_cdf(x);
  return s * (1.0 - s);
}

inline double logistic_interval(double lo, double hi) {
  if (lo > 0.0) return logistic_cdf(-lo) - logistic_cdf(-hi);
  return logistic_cdf(hi) - logistic_cdf(lo);
}

// Mass of the integer bin [k - 1/2, k + 1/2) under N(mu, sigma^2).
inline double gaussian_bin_mass(double k, double mu, double sigma) {
  return normal_interval((k - 0.5 - mu) / sigma, (k + 0.5 - mu) / sigma);
}

// Mass of [k - 1/2, k + 1/2) under a logistic with location/scale.
inline double logistic_bin_mass(double k, double loc, double scale) {
  return logistic_interval((k - 0.5 - loc) / scale, (k + 0.5 - loc) / scale);
}

}  // namespace insa::dist

#endif  // INSA_DISTRIBUTIONS_HPP_
