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

#include "insa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "insa/error.hpp"

namespace insa {

double mse_rgb(std::span<const Tensor> a, std::span<const Tensor> b) {
  if (a.size() != b.size()) {
    throw InputError("clips differ in length: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.empty()) throw InputError("PSNR of empty clips");
  double total = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (!(a[f].shape() == b[f].shape())) {
      throw InputError("frame " + std::to_string(f) + " differs in size: " + a[f].shape().str() + " vs " +
                       b[f].shape().str());
    }
    auto x = a[f].data();
    auto y = b[f].data();
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = static_cast<double>(x[i]) - y[i];
      acc += d * d;
    }
    total += acc / static_cast<double>(x.size());
  }
  return total / static_cast<double>(a.size());
}

double psnr_rgb(std::span<const Tensor> a, std::span<const Tensor> b) {
  const double mse = mse_rgb(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double bits_per_pixel(double total_bits, std::size_t frames, int width, int height) {
  if (frames == 0 || width < 1 || height < 1) throw std::invalid_argument("bpp needs frames, width, height >= 1");
  return total_bits / (static_cast<double>(frames) * width * height);
}

void RdCurve::normalize() {
  std::sort(points.begin(), points.end(), [](const RdPoint& p, const RdPoint& q) { return p.bpp < q.bpp; });
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].bpp > 0.0) || !std::isfinite(points[i].bpp)) {
      throw InputError("curve '" + label + "': bpp must be positive and finite");
    }
    if (!std::isfinite(points[i].psnr)) throw InputError("curve '" + label + "': PSNR must be finite");
    if (i > 0 && points[i].bpp == points[i - 1].bpp) {
      throw InputError("curve '" + label + "': duplicate bpp " + std::to_string(points[i].bpp));
    }
  }
}

NaturalSpline::NaturalSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("spline needs at least 2 matching knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline knots must be strictly increasing");
  }
  // Tridiagonal system for interior second derivatives (Thomas algorithm).
  m_.assign(n, 0.0);
  if (n == 2) return;
  std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = x_[i] - x_[i - 1];
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    if (i == 1) break;
  }
}

std::size_t NaturalSpline::segment(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - x_.begin());
  return std::clamp<std::size_t>(k == 0 ? 0 : k - 1, 0, x_.size() - 2);
}

double NaturalSpline::operator()(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

// Integral of segment `seg` from its left knot to left knot + dx.
double NaturalSpline::antiderivative(std::size_t seg, double dx) const {
  const double h = x_[seg + 1] - x_[seg];
  const double y0 = y_[seg], y1 = y_[seg + 1], m0 = m_[seg], m1 = m_[seg + 1];
  // On the segment, S(x0 + t) = y0 + c1 t + c2 t^2 + c3 t^3.
  const double c1 = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
  const double c2 = m0 / 2.0;
  const double c3 = (m1 - m0) / (6.0 * h);
  return dx * (y0 + dx * (c1 / 2.0 + dx * (c2 / 3.0 + dx * c3 / 4.0)));
}

double NaturalSpline::integrate(double a, double b) const {
  if (a > b) return -integrate(b, a);
  double total = 0.0;
  std::size_t i = segment(a);
  double lo = a;
  while (true) {
    const double seg_end = (i + 2 == x_.size()) ? std::max(b, x_[i + 1]) : x_[i + 1];
    const double hi = std::min(b, seg_end);
    total += antiderivative(i, hi - x_[i]) - antiderivative(i, lo - x_[i]);
    if (hi >= b) break;
    lo = hi;
    ++i;
  }
  return total;
}

namespace {

NaturalSpline log_rate_over_psnr(const RdCurve& curve) {
  RdCurve c = curve;
  c.normalize();
  if (c.points.size() < 4) {
    throw InputError("curve '" + c.label + "' has " + std::to_string(c.points.size()) +
                     " points, BD-rate needs at least 4");
  }
  std::sort(c.points.begin(), c.points.end(), [](const RdPoint& p, const RdPoint& q) { return p.psnr < q.psnr; });
  std::vector<double> x, y;
  for (const auto& p : c.points) {
    if (!x.empty() && p.psnr == x.back()) {
      throw InputError("curve '" + c.label + "' repeats PSNR " + std::to_string(p.psnr));
    }
    x.push_back(p.psnr);
    y.push_back(std::log10(p.bpp));
  }
  return NaturalSpline(std::move(x), std::move(y));
}

}  // namespace

double bd_rate(const RdCurve& reference, const RdCurve& test) {
  const NaturalSpline ref = log_rate_over_psnr(reference);
  const NaturalSpline tst = log_rate_over_psnr(test);
  const double lo = std::max(ref.x_min(), tst.x_min());
  const double hi = std::min(ref.x_max(), tst.x_max());
  if (!(hi > lo)) {
    std::ostringstream msg;
    msg << "PSNR ranges do not overlap: '" << reference.label << "' covers [" << ref.x_min() << ", " << ref.x_max()
        << "] dB, '" << test.label << "' covers [" << tst.x_min() << ", " << tst.x_max() << "] dB";
    throw DomainError(msg.str());
  }
  const double mean_diff = (tst.integrate(lo, hi) - ref.integrate(lo, hi)) / (hi - lo);
  return (std::pow(10.0, mean_diff) - 1.0) * 100.0;
}

RateReport rate_report(const Bitstream& stream) {
  const SectionSizes s = section_sizes(stream);
  RateReport r;
  r.model_update_bits = 8.0 * static_cast<double>(s.update);
  r.overhead_bits = 8.0 * static_cast<double>(s.header + s.crc);
  for (std::size_t f = 0; f < stream.frames.size(); ++f) {
    const auto& per = s.streams[f];
    if (stream.frames[f].kind == FrameKind::kI) {
      r.iframe_bits += 8.0 * static_cast<double>(s.frames[f]);
    } else {
      r.flow_bits += 8.0 * static_cast<double>(1 + per[0] + per[1]);
      r.residual_bits += 8.0 * static_cast<double>(per[2] + per[3]);
    }
  }
  return r;
}

RateReport rate_report(std::span<const std::uint8_t> bytes) { return rate_report(read_bitstream(bytes)); }

SparsityReport sparsity_report(std::span<const int> symbols, const SpikeSlabPrior& prior,
                               const UpdateQuantGrid& grid) {
  SparsityReport r;
  r.parameters = symbols.size();
  if (symbols.empty()) return r;
  const PmfTable spike_slab = spike_slab_bin_pmf(grid, prior);
  const PmfTable slab = slab_only_bin_pmf(grid, prior);
  std::size_t zeros = 0;
  for (int s : symbols) {
    if (s < -grid.max_symbol() || s > grid.max_symbol()) {
      throw std::invalid_argument("update symbol " + std::to_string(s) + " outside the grid");
    }
    const auto idx = static_cast<std::size_t>(update_symbol_to_index(s, grid));
    r.bits_spike_slab += spike_slab.bits(idx);
    r.bits_gaussian += slab.bits(idx);
    zeros += s == 0;
  }
  const double m = static_cast<double>(symbols.size());
  r.zero_fraction = static_cast<double>(zeros) / m;
  r.saving_per_param = (r.bits_gaussian - r.bits_spike_slab) / m;
  return r;
}

std::vector<RdCurve> read_rd_csv(std::istream& in) {
  std::string line;
  std::vector<RdCurve> curves;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line_no == 1 && fields.size() == 3 && fields[0] == "label") continue;
    if (fields.size() != 3) {
      throw InputError("RD CSV line " + std::to_string(line_no) + ": expected label,bpp,psnr");
    }
    RdPoint p;
    try {
      std::size_t used = 0;
      p.bpp = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing");
      p.psnr = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InputError("RD CSV line " + std::to_string(line_no) + ": cannot parse numbers in '" + line + "'");
    }
    auto [it, inserted] = index.try_emplace(fields[0], curves.size());
    if (inserted) curves.push_back(RdCurve{fields[0], {}});
    curves[it->second].points.push_back(p);
  }
  if (curves.empty()) throw InputError("RD CSV holds no points");
  return curves;
}

std::vector<RdCurve> read_rd_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_rd_csv(in);
}

void write_rd_csv(std::ostream& out, std::span<const RdCurve> curves) {
  out << "label,bpp,psnr\n";
  const auto old = out.precision(12);
  for (const auto& c : curves) {
    for (const auto& p : c.points) out << c.label << ',' << p.bpp << ',' << p.psnr << '\n';
  }
  out.precision(old);
}

}  // namespace insa
