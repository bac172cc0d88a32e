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

#include "insa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "insa/distributions.hpp"
#include "insa/random.hpp"
#include "kernels.hpp"

namespace insa {
namespace {

using kernels::ConvGeometry;

[[noreturn]] void shape_error(const std::string& op, const std::string& detail) {
  throw std::invalid_argument(op + ": " + detail);
}

void check_bias(const char* op, const Tensor& bias, int channels) {
  if (bias.defined() && static_cast<int>(bias.numel()) != channels) {
    shape_error(op, "bias has " + std::to_string(bias.numel()) + " elements, expected " +
                        std::to_string(channels) + " (output channels)");
  }
}

void fill_bias(float* out, const Tensor& bias, int channels, std::size_t plane) {
  for (int ch = 0; ch < channels; ++ch) {
    const float v = bias.defined() ? bias.data()[ch] : 0.0f;
    std::fill(out + ch * plane, out + (ch + 1) * plane, v);
  }
}

void bias_grad(const Tensor& bias, std::span<const float> g, int n, int channels,
               std::size_t plane) {
  if (!bias.requires_grad()) return;
  std::vector<float> db(channels, 0.0f);
  for (int ch = 0; ch < channels; ++ch) {
    double acc = 0.0;
    for (int b = 0; b < n; ++b) {
      const float* src = g.data() + (static_cast<std::size_t>(b) * channels + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) acc += src[i];
    }
    db[ch] = static_cast<float>(acc);
  }
  accumulate_grad(bias, db);
}

// Result shape for a binary op; a single-element operand broadcasts.
Shape broadcast_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return a.shape();
  if (b.numel() == 1) return a.shape();
  if (a.numel() == 1) return b.shape();
  shape_error(op, "incompatible shapes " + a.shape().str() + " and " + b.shape().str());
}

// Sum-reduces `g` onto an operand of `numel` elements (1 or g.size()).
std::vector<float> reduce_to(std::span<const float> g, std::size_t numel) {
  if (numel == g.size()) return {g.begin(), g.end()};
  double acc = 0.0;
  for (float v : g) acc += v;
  return {static_cast<float>(acc)};
}

template <typename Fn>
Tensor unary(const Tensor& x, Fn fn, std::function<void(const detail::Node&)> bw) {
  std::vector<float> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(in[i]);
  return make_result(x.shape(), std::move(out), {x}, std::move(bw));
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (ws.h != ws.w) shape_error("conv2d", "kernel must be square, got " + ws.str());
  if (is.c != ws.c) {
    shape_error("conv2d", "input channel dimension is " + std::to_string(is.c) +
                              " but weight expects c_in = " + std::to_string(ws.c));
  }
  if (stride != 1 && stride != 2) shape_error("conv2d", "stride must be 1 or 2");
  if (padding < 0) shape_error("conv2d", "negative padding");
  check_bias("conv2d", bias, ws.n);
  const int k = ws.h;
  const int out_h = (is.h + 2 * padding - k) / stride + 1;
  const int out_w = (is.w + 2 * padding - k) / stride + 1;
  if (is.h + 2 * padding < k || is.w + 2 * padding < k) {
    shape_error("conv2d", "input height/width " + std::to_string(is.h) + "x" +
                              std::to_string(is.w) + " smaller than kernel " + std::to_string(k));
  }
  const ConvGeometry g{is.c, is.h, is.w, k, stride, padding, out_h, out_w};
  const Shape os{is.n, ws.n, out_h, out_w};
  const int kdim = static_cast<int>(g.col_rows());
  const int pdim = static_cast<int>(g.col_cols());

  std::vector<float> out(os.numel());
  std::vector<float> col(g.col_rows() * g.col_cols());
  for (int b = 0; b < is.n; ++b) {
    kernels::im2col(input.data().data() + b * is.c * is.plane(), g, col.data());
    float* ob = out.data() + b * os.c * os.plane();
    fill_bias(ob, bias, os.c, os.plane());
    kernels::gemm_acc(os.c, pdim, kdim, weight.data().data(), col.data(), ob);
  }

  return make_result(os, std::move(out), {input, weight, bias},
                     [input, weight, bias, g, os, kdim, pdim](const detail::Node& self) {
    const Shape& is = input.shape();
    std::span<const float> gout = self.grad;
    std::vector<float> col(g.col_rows() * g.col_cols());
    if (weight.requires_grad()) {
      std::vector<float> col_t(col.size());
      std::vector<float> dw(weight.numel(), 0.0f);
      for (int b = 0; b < is.n; ++b) {
        kernels::im2col(input.data().data() + b * is.c * is.plane(), g, col.data());
        kernels::transpose(kdim, pdim, col.data(), col_t.data());
        kernels::gemm_acc(os.c, kdim, pdim, gout.data() + b * os.c * os.plane(), col_t.data(),
                          dw.data());
      }
      accumulate_grad(weight, dw);
    }
    if (input.requires_grad()) {
      std::vector<float> w_t(weight.numel());
      kernels::transpose(os.c, kdim, weight.data().data(), w_t.data());
      std::vector<float> dx(input.numel(), 0.0f);
      for (int b = 0; b < is.n; ++b) {
        std::fill(col.begin(), col.end(), 0.0f);
        kernels::gemm_acc(kdim, pdim, os.c, w_t.data(), gout.data() + b * os.c * os.plane(),
                          col.data());
        kernels::col2im(col.data(), g, dx.data() + b * is.c * is.plane());
      }
      accumulate_grad(input, dx);
    }
    bias_grad(bias, gout, os.n, os.c, os.plane());
  });
}

Tensor conv_transpose2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride, int padding, int output_padding) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (ws.h != ws.w) shape_error("conv_transpose2d", "kernel must be square, got " + ws.str());
  if (is.c != ws.n) {
    shape_error("conv_transpose2d", "input channel dimension is " + std::to_string(is.c) +
                                        " but weight expects c_in = " + std::to_string(ws.n));
  }
  if (stride != 1 && stride != 2) shape_error("conv_transpose2d", "stride must be 1 or 2");
  if (output_padding < 0 || output_padding >= stride) {
    shape_error("conv_transpose2d", "output_padding must be in [0, stride)");
  }
  check_bias("conv_transpose2d", bias, ws.c);
  const int k = ws.h;
  const int out_h = (is.h - 1) * stride - 2 * padding + k + output_padding;
  const int out_w = (is.w - 1) * stride - 2 * padding + k + output_padding;
  if (out_h < 1 || out_w < 1) shape_error("conv_transpose2d", "empty output");
  // Geometry of the forward convolution this op is the adjoint of.
  const ConvGeometry g{ws.c, out_h, out_w, k, stride, padding, is.h, is.w};
  const Shape os{is.n, ws.c, out_h, out_w};
  const int kdim = static_cast<int>(g.col_rows());
  const int pdim = static_cast<int>(g.col_cols());

  std::vector<float> w_t(weight.numel());
  kernels::transpose(is.c, kdim, weight.data().data(), w_t.data());
  std::vector<float> out(os.numel());
  std::vector<float> col(g.col_rows() * g.col_cols());
  for (int b = 0; b < is.n; ++b) {
    std::fill(col.begin(), col.end(), 0.0f);
    kernels::gemm_acc(kdim, pdim, is.c, w_t.data(), input.data().data() + b * is.c * is.plane(),
                      col.data());
    float* ob = out.data() + b * os.c * os.plane();
    fill_bias(ob, bias, os.c, os.plane());
    kernels::col2im(col.data(), g, ob);
  }

  return make_result(os, std::move(out), {input, weight, bias},
                     [input, weight, bias, g, os, kdim, pdim](const detail::Node& self) {
    const Shape& is = input.shape();
    std::span<const float> gout = self.grad;
    std::vector<float> col(g.col_rows() * g.col_cols());
    std::vector<float> col_t;
    std::vector<float> dw;
    std::vector<float> dx;
    if (weight.requires_grad()) {
      col_t.resize(col.size());
      dw.assign(weight.numel(), 0.0f);
    }
    if (input.requires_grad()) dx.assign(input.numel(), 0.0f);
    for (int b = 0; b < is.n; ++b) {
      kernels::im2col(gout.data() + b * os.c * os.plane(), g, col.data());
      if (input.requires_grad()) {
        kernels::gemm_acc(is.c, pdim, kdim, weight.data().data(), col.data(),
                          dx.data() + b * is.c * is.plane());
      }
      if (weight.requires_grad()) {
        kernels::transpose(kdim, pdim, col.data(), col_t.data());
        kernels::gemm_acc(is.c, kdim, pdim, input.data().data() + b * is.c * is.plane(),
                          col_t.data(), dw.data());
      }
    }
    if (weight.requires_grad()) accumulate_grad(weight, dw);
    if (input.requires_grad()) accumulate_grad(input, dx);
    bias_grad(bias, gout, os.n, os.c, os.plane());
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const Shape s = broadcast_shape("add", a, b);
  std::vector<float> out(s.numel());
  auto av = a.data();
  auto bv = b.data();
  const bool ab = a.numel() == 1, bb = b.numel() == 1;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[ab ? 0 : i] + bv[bb ? 0 : i];
  return make_result(s, std::move(out), {a, b}, [a, b](const detail::Node& self) {
    if (a.requires_grad()) accumulate_grad(a, reduce_to(self.grad, a.numel()));
    if (b.requires_grad()) accumulate_grad(b, reduce_to(self.grad, b.numel()));
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const Shape s = broadcast_shape("sub", a, b);
  std::vector<float> out(s.numel());
  auto av = a.data();
  auto bv = b.data();
  const bool ab = a.numel() == 1, bb = b.numel() == 1;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[ab ? 0 : i] - bv[bb ? 0 : i];
  return make_result(s, std::move(out), {a, b}, [a, b](const detail::Node& self) {
    if (a.requires_grad()) accumulate_grad(a, reduce_to(self.grad, a.numel()));
    if (b.requires_grad()) {
      std::vector<float> neg(self.grad.size());
      for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -self.grad[i];
      accumulate_grad(b, reduce_to(neg, b.numel()));
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Shape s = broadcast_shape("mul", a, b);
  std::vector<float> out(s.numel());
  auto av = a.data();
  auto bv = b.data();
  const bool ab = a.numel() == 1, bb = b.numel() == 1;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[ab ? 0 : i] * bv[bb ? 0 : i];
  return make_result(s, std::move(out), {a, b}, [a, b, ab, bb](const detail::Node& self) {
    auto av = a.data();
    auto bv = b.data();
    const std::size_t n = self.grad.size();
    if (a.requires_grad()) {
      std::vector<float> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = self.grad[i] * bv[bb ? 0 : i];
      accumulate_grad(a, reduce_to(g, a.numel()));
    }
    if (b.requires_grad()) {
      std::vector<float> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = self.grad[i] * av[ab ? 0 : i];
      accumulate_grad(b, reduce_to(g, b.numel()));
    }
  });
}

Tensor relu(const Tensor& x) {
  return unary(x, [](float v) { return v > 0.0f ? v : 0.0f; }, [x](const detail::Node& self) {
    auto xv = x.data();
    std::vector<float> g(self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = xv[i] > 0.0f ? self.grad[i] : 0.0f;
    accumulate_grad(x, g);
  });
}

Tensor square(const Tensor& x) {
  return unary(x, [](float v) { return v * v; }, [x](const detail::Node& self) {
    auto xv = x.data();
    std::vector<float> g(self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0f * xv[i] * self.grad[i];
    accumulate_grad(x, g);
  });
}

Tensor clamp_min(const Tensor& x, float floor) {
  return unary(x, [floor](float v) { return v > floor ? v : floor; },
               [x, floor](const detail::Node& self) {
    auto xv = x.data();
    std::vector<float> g(self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = xv[i] > floor ? self.grad[i] : 0.0f;
    accumulate_grad(x, g);
  });
}

Tensor scale(const Tensor& x, float factor) {
  return unary(x, [factor](float v) { return v * factor; }, [x, factor](const detail::Node& self) {
    std::vector<float> g(self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * factor;
    accumulate_grad(x, g);
  });
}

Tensor add_scalar(const Tensor& x, float offset) {
  return unary(x, [offset](float v) { return v + offset; },
               [x](const detail::Node& self) { accumulate_grad(x, self.grad); });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, [](float v) { return static_cast<float>(dist::logistic_cdf(v)); },
               [x](const detail::Node& self) {
    std::vector<float> g(self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const float s = self.value[i];
      g[i] = self.grad[i] * s * (1.0f - s);
    }
    accumulate_grad(x, g);
  });
}

Tensor ste_round(const Tensor& x) {
  return unary(x, [](float v) { return std::round(v) + 0.0f; },
               [x](const detail::Node& self) { accumulate_grad(x, self.grad); });
}

float uniform_noise_sample(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = mix_keys(mix_keys(seed, stream), index);
  return static_cast<float>(h >> 40) * 0x1.0p-24f - 0.5f;
}

Tensor add_uniform_noise(const Tensor& x, std::uint64_t seed, std::uint64_t stream) {
  std::vector<float> out(x.numel());
  auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = xv[i] + uniform_noise_sample(seed, stream, i);
  }
  return make_result(x.shape(), std::move(out), {x},
                     [x](const detail::Node& self) { accumulate_grad(x, self.grad); });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (as.n != bs.n || as.h != bs.h || as.w != bs.w) {
    shape_error("concat_channels", "cannot join " + as.str() + " and " + bs.str());
  }
  const Shape os{as.n, as.c + bs.c, as.h, as.w};
  const std::size_t plane = as.plane();
  std::vector<float> out(os.numel());
  for (int n = 0; n < as.n; ++n) {
    auto dst = out.begin() + n * os.c * plane;
    auto asrc = a.data().begin() + n * as.c * plane;
    auto bsrc = b.data().begin() + n * bs.c * plane;
    std::copy(asrc, asrc + as.c * plane, dst);
    std::copy(bsrc, bsrc + bs.c * plane, dst + as.c * plane);
  }
  return make_result(os, std::move(out), {a, b}, [a, b, os, plane](const detail::Node& self) {
    const Shape& as = a.shape();
    const Shape& bs = b.shape();
    std::vector<float> ga(a.numel()), gb(b.numel());
    for (int n = 0; n < os.n; ++n) {
      auto src = self.grad.begin() + n * os.c * plane;
      std::copy(src, src + as.c * plane, ga.begin() + n * as.c * plane);
      std::copy(src + as.c * plane, src + os.c * plane, gb.begin() + n * bs.c * plane);
    }
    accumulate_grad(a, ga);
    accumulate_grad(b, gb);
  });
}

Tensor slice_channels(const Tensor& x, int first, int count) {
  const Shape& xs = x.shape();
  if (first < 0 || count < 1 || first + count > xs.c) {
    shape_error("slice_channels", "channels [" + std::to_string(first) + ", " +
                                      std::to_string(first + count) + ") out of range for " +
                                      xs.str());
  }
  const Shape os{xs.n, count, xs.h, xs.w};
  const std::size_t plane = xs.plane();
  std::vector<float> out(os.numel());
  for (int n = 0; n < xs.n; ++n) {
    auto src = x.data().begin() + (n * xs.c + first) * plane;
    std::copy(src, src + count * plane, out.begin() + n * count * plane);
  }
  return make_result(os, std::move(out), {x}, [x, first, count, plane](const detail::Node& self) {
    const Shape& xs = x.shape();
    std::vector<float> g(x.numel(), 0.0f);
    for (int n = 0; n < xs.n; ++n) {
      auto src = self.grad.begin() + n * count * plane;
      std::copy(src, src + count * plane, g.begin() + (n * xs.c + first) * plane);
    }
    accumulate_grad(x, g);
  });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  return make_result(Shape{}, {static_cast<float>(acc)}, {x}, [x](const detail::Node& self) {
    accumulate_grad(x, std::vector<float>(x.numel(), self.grad[0]));
  });
}

Tensor mean(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  const double n = static_cast<double>(x.numel());
  return make_result(Shape{}, {static_cast<float>(acc / n)}, {x},
                     [x, n](const detail::Node& self) {
    accumulate_grad(x, std::vector<float>(x.numel(), static_cast<float>(self.grad[0] / n)));
  });
}

Tensor mse(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) {
    shape_error("mse", "shapes differ: " + a.shape().str() + " vs " + b.shape().str());
  }
  auto av = a.data();
  auto bv = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - bv[i];
    acc += d * d;
  }
  const double n = static_cast<double>(av.size());
  return make_result(Shape{}, {static_cast<float>(acc / n)}, {a, b},
                     [a, b, n](const detail::Node& self) {
    auto av = a.data();
    auto bv = b.data();
    const double scale = 2.0 * self.grad[0] / n;
    std::vector<float> g(av.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = static_cast<float>(scale * (static_cast<double>(av[i]) - bv[i]));
    }
    accumulate_grad(a, g);
    if (b.requires_grad()) {
      for (auto& v : g) v = -v;
      accumulate_grad(b, g);
    }
  });
}

Tensor gaussian_bin_nll(const Tensor& values, const Tensor& mu, const Tensor& sigma) {
  if (!(values.shape() == mu.shape()) || !(values.shape() == sigma.shape())) {
    shape_error("gaussian_bin_nll", "values " + values.shape().str() + ", mu " +
                                        mu.shape().str() + ", sigma " + sigma.shape().str());
  }
  const std::size_t n = values.numel();
  auto v = values.data();
  auto m = mu.data();
  auto s = sigma.data();
  std::vector<float> d_value(n), d_sigma(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sd = s[i];
    const double hi = (static_cast<double>(v[i]) + 0.5 - m[i]) / sd;
    const double lo = (static_cast<double>(v[i]) - 0.5 - m[i]) / sd;
    const double p = dist::normal_interval(lo, hi);
    if (p > kLikelihoodFloor) {
      total -= std::log(p);
      const double phi_hi = dist::normal_pdf(hi);
      const double phi_lo = dist::normal_pdf(lo);
      d_value[i] = static_cast<float>(-(phi_hi - phi_lo) / (sd * p));
      d_sigma[i] = static_cast<float>((phi_hi * hi - phi_lo * lo) / (sd * p));
    } else {
      total -= std::log(kLikelihoodFloor);
      d_value[i] = 0.0f;
      d_sigma[i] = 0.0f;
    }
  }
  return make_result(Shape{}, {static_cast<float>(total)}, {values, mu, sigma},
                     [values, mu, sigma, d_value = std::move(d_value),
                      d_sigma = std::move(d_sigma)](const detail::Node& self) {
    const float g = self.grad[0];
    std::vector<float> buf(d_value.size());
    if (values.requires_grad()) {
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = g * d_value[i];
      accumulate_grad(values, buf);
    }
    if (mu.requires_grad()) {
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = -g * d_value[i];
      accumulate_grad(mu, buf);
    }
    if (sigma.requires_grad()) {
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = g * d_sigma[i];
      accumulate_grad(sigma, buf);
    }
  });
}

Tensor logistic_bin_nll(const Tensor& values, const Tensor& loc, const Tensor& log_scale) {
  const Shape& vs = values.shape();
  if (static_cast<int>(loc.numel()) != vs.c || static_cast<int>(log_scale.numel()) != vs.c) {
    shape_error("logistic_bin_nll", "expected " + std::to_string(vs.c) +
                                        " per-channel parameters, got loc " + loc.shape().str() +
                                        " and log_scale " + log_scale.shape().str());
  }
  const std::size_t plane = vs.plane();
  auto v = values.data();
  std::vector<float> d_value(values.numel()), d_logs(values.numel());
  double total = 0.0;
  for (int b = 0; b < vs.n; ++b) {
    for (int ch = 0; ch < vs.c; ++ch) {
      const double l0 = loc.data()[ch];
      const double sc = std::exp(static_cast<double>(log_scale.data()[ch]));
      for (std::size_t i = 0; i < plane; ++i) {
        const std::size_t idx = (static_cast<std::size_t>(b) * vs.c + ch) * plane + i;
        const double hi = (static_cast<double>(v[idx]) + 0.5 - l0) / sc;
        const double lo = (static_cast<double>(v[idx]) - 0.5 - l0) / sc;
        const double p = dist::logistic_interval(lo, hi);
        if (p > kLikelihoodFloor) {
          total -= std::log(p);
          const double f_hi = dist::logistic_pdf(hi);
          const double f_lo = dist::logistic_pdf(lo);
          d_value[idx] = static_cast<float>(-(f_hi - f_lo) / (sc * p));
          d_logs[idx] = static_cast<float>((f_hi * hi - f_lo * lo) / p);
        } else {
          total -= std::log(kLikelihoodFloor);
          d_value[idx] = 0.0f;
          d_logs[idx] = 0.0f;
        }
      }
    }
  }
  return make_result(Shape{}, {static_cast<float>(total)}, {values, loc, log_scale},
                     [values, loc, log_scale, plane, d_value = std::move(d_value),
                      d_logs = std::move(d_logs)](const detail::Node& self) {
    const float g = self.grad[0];
    const Shape& vs = values.shape();
    if (values.requires_grad()) {
      std::vector<float> buf(d_value.size());
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = g * d_value[i];
      accumulate_grad(values, buf);
    }
    if (loc.requires_grad() || log_scale.requires_grad()) {
      std::vector<float> gl(vs.c, 0.0f), gs(vs.c, 0.0f);
      for (int ch = 0; ch < vs.c; ++ch) {
        double al = 0.0, as = 0.0;
        for (int b = 0; b < vs.n; ++b) {
          const std::size_t base = (static_cast<std::size_t>(b) * vs.c + ch) * plane;
          for (std::size_t i = 0; i < plane; ++i) {
            al -= d_value[base + i];
            as += d_logs[base + i];
          }
        }
        gl[ch] = static_cast<float>(g * al);
        gs[ch] = static_cast<float>(g * as);
      }
      accumulate_grad(loc, gl);
      accumulate_grad(log_scale, gs);
    }
  });
}

}  // namespace insa
