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

#ifndef INSA_METRICS_HPP_
#define INSA_METRICS_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "insa/bitstream.hpp"
#include "insa/tensor.hpp"
#include "insa/update_prior.hpp"

namespace insa {

// Frame-averaged MSE over all RGB samples, then 10 log10(1 / MSE).
// Returns +infinity for identical clips.
double psnr_rgb(std::span<const Tensor> a, std::span<const Tensor> b);
double mse_rgb(std::span<const Tensor> a, std::span<const Tensor> b);

double bits_per_pixel(double total_bits, std::size_t frames, int width, int height);

struct RdPoint {
  double bpp = 0.0;
  double psnr = 0.0;
};

struct RdCurve {
  std::string label;
  std::vector<RdPoint> points;

  // Sorts by bpp and checks bpp > 0, strictly increasing bpp, finite PSNR.
  void normalize();
};

// Bjontegaard rate difference in percent: natural cubic splines of
// log10(bpp) over PSNR, averaged over the shared PSNR range. Negative means
// `test` needs fewer bits.
double bd_rate(const RdCurve& reference, const RdCurve& test);

// Natural cubic spline through (x_i, y_i) with strictly increasing x.
class NaturalSpline {
 public:
  NaturalSpline(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  // Exact integral over [a, b] within the knot range.
  double integrate(double a, double b) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

 private:
  std::size_t segment(double x) const;
  double antiderivative(std::size_t seg, double dx) const;
  std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
};

struct RateReport {
  double model_update_bits = 0.0;
  double iframe_bits = 0.0;
  double flow_bits = 0.0;
  double residual_bits = 0.0;
  double overhead_bits = 0.0;  // container header and trailing CRC

  double total() const { return model_update_bits + iframe_bits + flow_bits + residual_bits; }
  double fraction(double part) const { return total() > 0.0 ? part / total() : 0.0; }
  double model_update_fraction() const { return fraction(model_update_bits); }
  double iframe_fraction() const { return fraction(iframe_bits); }
  double flow_fraction() const { return fraction(flow_bits); }
  double residual_fraction() const { return fraction(residual_bits); }
};

// Section bits of a parsed or serialized stream. Frame kind bytes count
// towards the I-frame or flow share.
RateReport rate_report(const Bitstream& stream);
RateReport rate_report(std::span<const std::uint8_t> bytes);

struct SparsityReport {
  std::size_t parameters = 0;
  double zero_fraction = 0.0;
  double bits_spike_slab = 0.0;
  double bits_gaussian = 0.0;
  double saving_per_param = 0.0;
};

SparsityReport sparsity_report(std::span<const int> symbols, const SpikeSlabPrior& prior,
                               const UpdateQuantGrid& grid);

// "label,bpp,psnr" with a header row. Points are grouped by label in
// order of first appearance.
std::vector<RdCurve> read_rd_csv(std::istream& in);
std::vector<RdCurve> read_rd_csv_file(const std::string& path);
void write_rd_csv(std::ostream& out, std::span<const RdCurve> curves);

// SVG line chart of PSNR over bpp.
void write_rd_svg(std::ostream& out, std::span<const RdCurve> curves, const std::string& title);
// SVG stacked bars of rate composition, one bar per labelled report.
void write_rate_svg(std::ostream& out, std::span<const std::pair<std::string, RateReport>> reports,
                    const std::string& title);

}  // namespace insa

#endif  // INSA_METRICS_HPP_
