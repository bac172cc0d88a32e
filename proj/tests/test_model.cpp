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

#include <cmath>
#include <set>
#include <string>

#include "doctest.h"
#include "insa/error.hpp"
#include "insa/forward.hpp"
#include "insa/model.hpp"
#include "insa/ops.hpp"
#include "insa/optim.hpp"
#include "insa/warp.hpp"
#include "test_util.hpp"

using namespace insa;
using insa::testing::random_param;
using insa::testing::random_tensor;

namespace {

// Layer-by-layer parameter count written out by hand for one autoencoder.
std::size_t hand_count_ae(int cin, int cout, int c, int h, int l, int z, bool receiver) {
  auto conv = [](std::size_t i, std::size_t o, std::size_t k) { return i * o * k * k + o; };
  const std::size_t g_a = conv(cin, c, 5) + 2 * conv(c, c, 5) + conv(c, l, 5);
  const std::size_t h_a = conv(l, h, 3) + conv(h, h, 5) + conv(h, z, 5);
  const std::size_t h_s = conv(z, h, 5) + conv(h, h, 5) + conv(h, l, 3);
  const std::size_t g_s = conv(l, c, 5) + 2 * conv(c, c, 5) + conv(c, cout, 5);
  return receiver ? 2 * h_s + g_s + 2 * static_cast<std::size_t>(z) : g_a + h_a;
}

std::size_t hand_count(const ArchConfig& a, bool receiver) {
  const int c = a.codec_channels, h = a.hyper_channels, l = a.latent_channels, z = a.hyperlatent_channels;
  return hand_count_ae(3, 3, c, h, l, z, receiver) + hand_count_ae(6, 3, c, h, l, z, receiver) +
         hand_count_ae(3, 3, c, h, l, z, receiver);
}

std::vector<float> values_of(const SsfModel& m) {
  std::vector<float> out;
  for (const auto& p : m.parameters()) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

Tensor smooth_frame(int h, int w, double phase, std::uint64_t seed = 0) {
  std::vector<float> v(3 * static_cast<std::size_t>(h) * w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double u = x - phase;
        v[(c * h + y) * w + x] = static_cast<float>(
            0.5 + 0.3 * std::sin(0.21 * u + 0.7 * c + 0.05 * seed) * std::cos(0.17 * y - 0.3 * c));
      }
  return Tensor(Shape{1, 3, h, w}, std::move(v));
}

// Double-precision reference of the separable reflect-padded blur.
std::vector<double> ref_blur(const std::vector<double>& in, int h, int w, double sigma) {
  if (sigma == 0.0) return in;
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k(2 * r + 1);
  double total = 0.0;
  for (int j = -r; j <= r; ++j) total += k[j + r] = std::exp(-j * j / (2 * sigma * sigma));
  for (auto& v : k) v /= total;
  auto refl = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
  };
  std::vector<double> tmp(in.size()), out(in.size());
  const std::size_t planes = in.size() / (static_cast<std::size_t>(h) * w);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = in.data() + p * h * w;
    double* t = tmp.data() + p * h * w;
    double* o = out.data() + p * h * w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int j = -r; j <= r; ++j) acc += k[j + r] * src[y * w + refl(x + j, w)];
        t[y * w + x] = acc;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int j = -r; j <= r; ++j) acc += k[j + r] * t[refl(y + j, h) * w + x];
        o[y * w + x] = acc;
      }
  }
  return out;
}

// Double-precision reference warp written from the sampling definition.
std::vector<double> ref_warp(const std::vector<double>& frame, const std::vector<double>& field,
                             int c, int h, int w) {
  std::vector<std::vector<double>> levels;
  for (int l = 0; l < kBlurLevels; ++l) levels.push_back(ref_blur(frame, h, w, l == 0 ? 0.0 : std::ldexp(1.0, l - 1)));
  std::vector<double> out(frame.size());
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      const double px = x + field[p], py = y + field[plane + p];
      const double s = std::clamp(field[2 * plane + p], 0.0, kBlurLevels - 1.0);
      const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
      const int s0 = std::min(static_cast<int>(std::floor(s)), kBlurLevels - 2);
      const double fx = px - x0, fy = py - y0, fs = s - s0;
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int ds = 0; ds < 2; ++ds)
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const int xx = std::clamp(x0 + dx, 0, w - 1), yy = std::clamp(y0 + dy, 0, h - 1);
              const double wgt = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy) * (ds ? fs : 1 - fs);
              acc += wgt * levels[s0 + ds][ch * plane + yy * w + xx];
            }
        out[ch * plane + p] = acc;
      }
    }
  return out;
}

std::vector<double> as_double(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST_CASE("model construction") {
  const ArchConfig lite = preset_config(ArchPreset::kSsfLite);
  CHECK(lite == ArchConfig{32, 32, 48, 48});
  SsfModel m(lite, 7);
  CHECK(m.parameter_count(Side::kReceiver) == hand_count(lite, true));
  CHECK(m.parameter_count(Side::kSender) == hand_count(lite, false));
  CHECK(m.parameter_count() == hand_count(lite, true) + hand_count(lite, false));
  CHECK(expected_parameter_count(lite) == m.parameter_count());

  SUBCASE("deterministic initialization") {
    CHECK(values_of(SsfModel(lite, 7)) == values_of(m));
    CHECK(values_of(SsfModel(lite, 8)) != values_of(m));
  }
  SUBCASE("sender and receiver sets partition the parameters") {
    std::set<std::string> all, recv, send;
    for (const auto& p : m.parameters()) CHECK(all.insert(p.name).second);
    for (const auto& p : m.parameters(Side::kReceiver)) recv.insert(p.name);
    for (const auto& p : m.parameters(Side::kSender)) send.insert(p.name);
    for (const auto& n : recv) CHECK(send.count(n) == 0);
    CHECK(recv.size() + send.size() == all.size());
    for (const auto& n : recv) {
      CHECK((n.find(".g_s.") != std::string::npos || n.find(".h_mu.") != std::string::npos ||
             n.find(".h_sigma.") != std::string::npos || n.find(".prior.") != std::string::npos));
    }
    for (const auto& n : send) {
      CHECK((n.find(".g_a.") != std::string::npos || n.find(".h_a.") != std::string::npos));
    }
  }
  SUBCASE("flow decoder emits three channels") {
    CHECK(m.flow.g_s.back().out_channels() == 3);
    CHECK(m.flow.g_a.front().in_channels() == 6);
  }
  SUBCASE("clone is independent") {
    SsfModel c = m.clone();
    c.iframe.g_s[0].weight.data()[0] += 1.0f;
    CHECK(c.iframe.g_s[0].weight.data()[0] != m.iframe.g_s[0].weight.data()[0]);
  }
  SUBCASE("paper-scale decoder size") {
    for (ArchPreset p : {ArchPreset::kSsf18, ArchPreset::kSsf8, ArchPreset::kSsf5, ArchPreset::kSsf3}) {
      CHECK(expected_parameter_count(preset_config(p), Side::kReceiver) == hand_count(preset_config(p), true));
    }
    const double ssf5 = static_cast<double>(expected_parameter_count(preset_config(ArchPreset::kSsf5), Side::kReceiver));
    CHECK(std::abs(ssf5 - 5.0e6) / 5.0e6 < 0.10);
  }
  SUBCASE("preset names") {
    CHECK(preset_from_name("ssf5") == ArchPreset::kSsf5);
    CHECK(!preset_from_name("nope").has_value());
    CHECK(preset_for(ArchConfig{1, 2, 3, 4}) == ArchPreset::kCustom);
    CHECK_THROWS_AS(SsfModel(ArchConfig{0, 2, 3, 4}, 1), std::invalid_argument);
  }
}

TEST_CASE("blur stack") {
  const Tensor f = random_tensor(Shape{1, 3, 64, 64}, 5, 0.0, 1.0);
  const BlurVolume v = blur_stack(f, kBlurLevels);
  REQUIRE(v.levels.size() == 5);
  CHECK(v.sigmas == std::vector<double>{0, 1, 2, 4, 8});
  CHECK(std::equal(v.levels[0].data().begin(), v.levels[0].data().end(), f.data().begin()));
  for (int l = 1; l < 5; ++l) {
    const auto ref = ref_blur(as_double(f), 64, 64, v.sigmas[l]);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ref[i] - v.levels[l].data()[i]));
    CHECK(worst < 1e-6);
  }

  const Tensor constant(Shape{1, 3, 64, 64}, 0.37f);
  for (const Tensor& level : blur_stack(constant).levels) {
    for (float x : level.data()) REQUIRE(std::abs(x - 0.37f) < 1e-6);
  }

  std::vector<float> imp(64 * 64, 0.0f);
  imp[32 * 64 + 30] = 1.0f;
  const Tensor impulse(Shape{1, 1, 64, 64}, imp);
  const Tensor l1 = blur_stack(impulse).levels[1];
  double z = 0.0;
  for (int j = -3; j <= 3; ++j) z += std::exp(-0.5 * j * j);
  double worst = 0.0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const int dy = y - 32, dx = x - 30;
      const double expect = (std::abs(dx) <= 3 && std::abs(dy) <= 3)
                                ? std::exp(-0.5 * (dx * dx + dy * dy)) / (z * z)
                                : 0.0;
      worst = std::max(worst, std::abs(expect - l1.at(0, 0, y, x)));
    }
  CHECK(worst < 1e-6);
  CHECK_THROWS_AS(blur_stack(f, 1), std::invalid_argument);
}

TEST_CASE("blur backward is the adjoint of the blur") {
  Tensor a = random_param(Shape{1, 2, 64, 64}, 9);
  const Tensor b = random_tensor(Shape{1, 2, 64, 64}, 10);
  for (double sigma : {1.0, 4.0, 8.0}) {
    a.zero_grad();
    Tensor out = gaussian_blur(a, sigma);
    backward(sum(mul(out, b)));
    CHECK(testing::inner(out.data(), b.data()) ==
          doctest::Approx(testing::inner(a.data(), a.grad())).epsilon(1e-5));
  }
}

TEST_CASE("scale-space warp") {
  const int h = 64, w = 64;
  const Tensor frame = random_tensor(Shape{1, 3, h, w}, 21, 0.0, 1.0);
  SUBCASE("zero field is the identity") {
    const Tensor field(Shape{1, 3, h, w}, 0.0f);
    const Tensor out = scale_space_warp(frame, field);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.numel(); ++i) worst = std::max(worst, static_cast<double>(std::abs(out.data()[i] - frame.data()[i])));
    CHECK(worst < 1e-6);
  }
  SUBCASE("unit horizontal displacement shifts a ramp") {
    std::vector<float> ramp(3 * h * w);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) ramp[(c * h + y) * w + x] = 0.01f * x + 0.1f * c;
    const Tensor r(Shape{1, 3, h, w}, ramp);
    std::vector<float> fv(3 * h * w, 0.0f);
    std::fill(fv.begin(), fv.begin() + h * w, 1.0f);
    const Tensor out = scale_space_warp(r, Tensor(Shape{1, 3, h, w}, fv));
    double worst = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x + 1 < w; ++x) worst = std::max(worst, static_cast<double>(std::abs(out.at(0, c, y, x) - r.at(0, c, y, x + 1))));
    CHECK(worst < 1e-5);
  }
  SUBCASE("pure scale samples a blur level") {
    std::vector<float> fv(3 * h * w, 0.0f);
    std::fill(fv.begin() + 2 * h * w, fv.end(), 1.0f);
    const Tensor out = scale_space_warp(frame, Tensor(Shape{1, 3, h, w}, fv));
    const Tensor l1 = blur_stack(frame).levels[1];
    double worst = 0.0;
    for (std::size_t i = 0; i < out.numel(); ++i) worst = std::max(worst, static_cast<double>(std::abs(out.data()[i] - l1.data()[i])));
    CHECK(worst < 1e-6);
  }
  SUBCASE("field channel count is checked") {
    try {
      scale_space_warp(frame, Tensor(Shape{1, 2, h, w}));
      FAIL("accepted a 2-channel field");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("3 channels") != std::string::npos);
    }
  }
  SUBCASE("matches a double-precision reference and its gradients") {
    const int hh = 16, ww = 16;
    Tensor f = random_param(Shape{1, 2, hh, ww}, 31, 0.0, 1.0);
    // Keep sample points off the integer lattice so the warp is smooth there.
    std::vector<float> fv(3 * hh * ww);
    Rng rng(32);
    for (int i = 0; i < hh * ww; ++i) {
      fv[i] = static_cast<float>(rng.uniform(-2.4, 2.4));
      fv[hh * ww + i] = static_cast<float>(rng.uniform(-2.4, 2.4));
      fv[2 * hh * ww + i] = static_cast<float>(rng.uniform(0.05, 3.95));
    }
    for (auto& v : fv) {
      const double frac = v - std::floor(v);
      if (frac < 0.05 || frac > 0.95) v += 0.3f;
    }
    Tensor field = Tensor::parameter(Shape{1, 3, hh, ww}, fv);
    const Tensor r = random_tensor(Shape{1, 2, hh, ww}, 33);
    const Tensor out = scale_space_warp(f, field);
    const auto ref = ref_warp(as_double(f), as_double(field), 2, hh, ww);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ref[i] - out.data()[i]));
    CHECK(worst < 1e-5);

    backward(sum(mul(out, r)));
    auto value = [&] {
      const auto o = ref_warp(as_double(f), as_double(field), 2, hh, ww);
      double acc = 0.0;
      for (std::size_t i = 0; i < o.size(); ++i) acc += o[i] * r.data()[i];
      return acc;
    };
    CHECK(testing::finite_difference_check(f, value).worst_relative < 1e-3);
    CHECK(testing::finite_difference_check(field, value, 1e-3, 1).worst_relative < 1e-3);
  }
}

TEST_CASE("GoP plans") {
  auto kinds = [](const std::vector<GopEntry>& plan) {
    std::string s;
    for (const auto& e : plan) s += e.kind == FrameKind::kI ? 'I' : 'P';
    return s;
  };
  CHECK(kinds(gop_plan(5, 2)) == "IPIPI");
  CHECK(kinds(gop_plan(6, 12)) == "IPPPPP");
  CHECK(kinds(gop_plan(7, kInfiniteGop)) == "IPPPPPP");
  CHECK(kinds(gop_plan(1, 3)) == "I");
  for (const auto& e : gop_plan(30, 12)) {
    CHECK(e.reference == (e.kind == FrameKind::kI ? -1 : e.index - 1));
    CHECK((e.kind == FrameKind::kI) == (e.index % 12 == 0));
  }
  CHECK_THROWS_AS(gop_plan(0, 3), std::invalid_argument);
}

TEST_CASE("decoder MAC accounting") {
  const double ssf18 = count_decoder_macs(preset_config(ArchPreset::kSsf18), 1920, 1088);
  const double ssf5 = count_decoder_macs(preset_config(ArchPreset::kSsf5), 1920, 1088);
  CHECK(ssf5 / ssf18 >= 0.2);
  CHECK(ssf5 / ssf18 <= 0.4);
  CHECK(ssf18 >= 313.4 / 2);
  CHECK(ssf18 <= 313.4 * 2);
  ArchConfig a = preset_config(ArchPreset::kSsfLite);
  const double base = count_decoder_macs(a, 64, 64);
  a.codec_channels *= 2;
  CHECK(count_decoder_macs(a, 64, 64) > base);
  // Per-pixel figure does not depend on resolution.
  CHECK(count_decoder_macs(a, 128, 64) == doctest::Approx(count_decoder_macs(a, 64, 64)));
  CHECK_THROWS_AS(count_decoder_macs(a, 100, 64), std::invalid_argument);
}

TEST_CASE("frame forwards") {
  const SsfModel m(preset_config(ArchPreset::kSsfLite), 3);
  const Tensor f0 = smooth_frame(64, 64, 0.0);
  const Tensor f1 = smooth_frame(64, 64, 1.5);
  NoGradGuard guard;
  SUBCASE("eval I-frame is deterministic with nonnegative rate") {
    const FrameOutput a = iframe_forward(m, f0, Mode::kEval, 1);
    const FrameOutput b = iframe_forward(m, f0, Mode::kEval, 2);
    CHECK(a.recon.values() == b.recon.values());
    CHECK(a.parts[0].y_hat.values() == b.parts[0].y_hat.values());
    CHECK(a.rate_bits >= 0.0);
    CHECK(a.parts[0].y_hat.shape() == Shape{1, 48, 4, 4});
    CHECK(a.parts[0].z_hat.shape() == Shape{1, 48, 1, 1});
    for (float v : a.parts[0].y_hat.data()) CHECK(v == std::round(v));
    CHECK(a.rate_nats.item() / std::log(2.0) == doctest::Approx(a.rate_bits).epsilon(1e-4));
  }
  SUBCASE("train mode is seeded") {
    const FrameOutput a = iframe_forward(m, f0, Mode::kTrain, 4);
    const FrameOutput b = iframe_forward(m, f0, Mode::kTrain, 4);
    const FrameOutput c = iframe_forward(m, f0, Mode::kTrain, 5);
    CHECK(a.rate_nats.item() == b.rate_nats.item());
    CHECK(a.rate_nats.item() != c.rate_nats.item());
    CHECK(a.recon.values() == c.recon.values());  // distortion path is rounded, not noisy
  }
  SUBCASE("P-frame rate is the sum of its two autoencoders") {
    const FrameOutput i = iframe_forward(m, f0, Mode::kEval, 0);
    const FrameOutput p = pframe_forward(m, i.recon, f1, Mode::kEval, 0);
    REQUIRE(p.parts.size() == 2);
    CHECK(std::abs(p.rate_bits - (p.parts[0].rate_bits + p.parts[1].rate_bits)) < 1e-9);
    CHECK(p.rate_bits >= 0.0);
  }
  SUBCASE("eval reconstruction depends only on symbols and receiver parameters") {
    const FrameOutput i = iframe_forward(m, f0, Mode::kEval, 0);
    const FrameOutput p = pframe_forward(m, i.recon, f1, Mode::kEval, 0);
    // Scramble the sender side; the synthesis path must not notice.
    SsfModel other = m.clone();
    for (auto& np : other.parameters(Side::kSender)) {
      for (float& v : np.tensor.data()) v = -v;
    }
    const Tensor ri = synthesize(other.iframe, Tensor(i.parts[0].y_hat.shape(), i.parts[0].y_hat.values()));
    CHECK(ri.values() == i.recon.values());
    const Tensor warped = motion_compensate(other, i.recon, p.parts[0].y_hat);
    const Tensor rp = add(warped, synthesize(other.residual, p.parts[1].y_hat));
    CHECK(rp.values() == p.recon.values());
  }
  SUBCASE("mismatched reference is rejected") {
    CHECK_THROWS_AS(pframe_forward(m, Tensor(Shape{1, 3, 64, 128}), f1, Mode::kEval, 0), std::invalid_argument);
  }
}

TEST_CASE("a briefly trained P-frame model beats copying the previous frame") {
  SsfModel m(preset_config(ArchPreset::kSsfLite), 11);
  std::vector<NamedParam> params;
  for (auto& np : m.parameters()) {
    if (np.name.rfind("iframe.", 0) != 0) params.push_back(np);
  }
  OptimizerState opt = make_adam_state(params, 1e-3f);
  const float beta = 1e-4f;
  const double pixels = 64.0 * 64.0;
  for (int step = 0; step < 120; ++step) {
    const double phase = 0.37 * step;
    const Tensor prev = smooth_frame(64, 64, phase, step);
    const Tensor cur = smooth_frame(64, 64, phase + 2.0, step);
    const FrameOutput p = pframe_forward(m, prev, cur, Mode::kTrain, step);
    backward(add(mse(p.recon, cur), scale(p.rate_nats, static_cast<float>(beta / pixels))));
    adam_step(params, opt);
  }
  NoGradGuard guard;
  const Tensor prev = smooth_frame(64, 64, 0.5, 999);
  const Tensor cur = smooth_frame(64, 64, 2.5, 999);
  const FrameOutput p = pframe_forward(m, prev, cur, Mode::kEval, 0);
  const double copy = mse(prev, cur).item();
  CHECK(mse(p.recon, cur).item() < copy);
  // A static scene. A trained residual decoder maps all-zero latents to a
  // small bias pattern rather than exactly zero, so the bound carries a
  // relative slack.
  const FrameOutput still = pframe_forward(m, cur, cur, Mode::kEval, 0);
  CHECK(mse(still.recon, cur).item() <= mse(still.warped, cur).item() * (1.0 + 1e-3));
}
