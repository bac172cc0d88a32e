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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "insa/metrics.hpp"

namespace insa {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(v);
  return t;
}

void open_svg(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
      << "</text>\n";
}

}  // namespace

void write_rd_svg(std::ostream& out, std::span<const RdCurve> curves, const std::string& title) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      x0 = std::min(x0, p.bpp);
      x1 = std::max(x1, p.bpp);
      y0 = std::min(y0, p.psnr);
      y1 = std::max(y1, p.psnr);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0; x1 = 1; y0 = 0; y1 = 1;
  }
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
  x0 -= px; x1 += px; y0 -= py; y1 += py;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return kTop + (y1 - v) / (y1 - y0) * ph; };

  open_svg(out, title);
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(x0, x1)) {
    out << "<line x1=\"" << sx(t) << "\" y1=\"" << kTop << "\" x2=\"" << sx(t) << "\" y2=\"" << kTop + ph
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << sx(t) << "\" y=\"" << kTop + ph + 16
        << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t : ticks(y0, y1)) {
    out << "<line x1=\"" << kLeft << "\" y1=\"" << sy(t) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << sy(t)
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << kLeft - 6 << "\" y=\"" << sy(t) + 4
        << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">bits per pixel</text>\n"
      << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">PSNR (dB)</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* colour = kPalette[i % std::size(kPalette)];
    std::vector<RdPoint> pts = curves[i].points;
    std::sort(pts.begin(), pts.end(), [](const RdPoint& a, const RdPoint& b) { return a.bpp < b.bpp; });
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) out << sx(p.bpp) << ',' << sy(p.psnr) << ' ';
    out << "\"/>\n";
    for (const auto& p : pts) {
      out << "<circle cx=\"" << sx(p.bpp) << "\" cy=\"" << sy(p.psnr) << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    const double ly = kTop + 14 + 18.0 * static_cast<double>(i);
    out << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kWidth - kRight + 32
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n<text x=\""
        << kWidth - kRight + 38 << "\" y=\"" << ly << "\">" << escape_xml(curves[i].label) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_rate_svg(std::ostream& out, std::span<const std::pair<std::string, RateReport>> reports,
                    const std::string& title) {
  static const char* const kParts[] = {"model updates", "I-frame latents", "P-frame flow", "P-frame residual"};
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  open_svg(out, title);
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int pct = 0; pct <= 100; pct += 25) {
    const double y = kTop + ph * (1.0 - pct / 100.0);
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << pct << "%</text>\n";
  }
  const double slot = reports.empty() ? pw : pw / static_cast<double>(reports.size());
  const double bar = std::min(60.0, slot * 0.6);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const RateReport& r = reports[i].second;
    const double fr[4] = {r.model_update_fraction(), r.iframe_fraction(), r.flow_fraction(), r.residual_fraction()};
    const double x = kLeft + slot * (static_cast<double>(i) + 0.5) - bar / 2;
    double top = kTop + ph;
    for (int k = 0; k < 4; ++k) {
      const double h = fr[k] * ph;
      top -= h;
      out << "<rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << bar << "\" height=\"" << h << "\" fill=\""
          << kPalette[k] << "\"><title>" << kParts[k] << ": " << num(100.0 * fr[k]) << "%</title></rect>\n";
    }
    out << "<text x=\"" << x + bar / 2 << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
        << escape_xml(reports[i].first) << "</text>\n";
  }
  for (int k = 0; k < 4; ++k) {
    const double ly = kTop + 14 + 18.0 * k;
    out << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[k] << "\"/>\n<text x=\"" << kWidth - kRight + 30 << "\" y=\"" << ly << "\">" << kParts[k]
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace insa
