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

#include "insa/model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "insa/ops.hpp"
#include "insa/random.hpp"

namespace insa {
namespace {

struct PresetRow {
  ArchPreset id;
  std::string_view name;
  ArchConfig config;
};

constexpr std::array<PresetRow, 5> kPresets = {{
    {ArchPreset::kSsfLite, "ssf-lite", {32, 32, 48, 48}},
    {ArchPreset::kSsf18, "ssf18", {128, 192, 192, 192}},
    {ArchPreset::kSsf8, "ssf8", {96, 96, 192, 192}},
    {ArchPreset::kSsf5, "ssf5", {64, 64, 192, 192}},
    {ArchPreset::kSsf3, "ssf3", {48, 48, 128, 192}},
}};

// Layer geometry shared by construction, parameter counting and MAC counting.
struct LayerSpec {
  const char* group;
  int in, out, kernel, stride, padding, output_padding;
  bool transposed;
};

struct AeSpec {
  std::vector<LayerSpec> layers;
};

AeSpec ae_layers(const ArchConfig& a, int in_channels, int out_channels) {
  const int c = a.codec_channels, h = a.hyper_channels;
  const int l = a.latent_channels, z = a.hyperlatent_channels;
  AeSpec s;
  auto down = [&](const char* g, int i, int o) { s.layers.push_back({g, i, o, 5, 2, 2, 0, false}); };
  auto up = [&](const char* g, int i, int o) { s.layers.push_back({g, i, o, 5, 2, 2, 1, true}); };
  down("g_a", in_channels, c);
  down("g_a", c, c);
  down("g_a", c, c);
  down("g_a", c, l);
  s.layers.push_back({"h_a", l, h, 3, 1, 1, 0, false});
  down("h_a", h, h);
  down("h_a", h, z);
  for (const char* g : {"h_mu", "h_sigma"}) {
    up(g, z, h);
    up(g, h, h);
    s.layers.push_back({g, h, l, 3, 1, 1, 0, true});
  }
  up("g_s", l, c);
  up("g_s", c, c);
  up("g_s", c, c);
  up("g_s", c, out_channels);
  return s;
}

bool is_receiver_group(std::string_view g) { return g != "g_a" && g != "h_a"; }

std::size_t layer_params(const LayerSpec& l) {
  return static_cast<std::size_t>(l.in) * l.out * l.kernel * l.kernel + l.out;
}

std::vector<ConvLayer>& group_of(HyperpriorAE& ae, std::string_view g) {
  if (g == "g_a") return ae.g_a;
  if (g == "h_a") return ae.h_a;
  if (g == "h_mu") return ae.h_mu;
  if (g == "h_sigma") return ae.h_sigma;
  return ae.g_s;
}

HyperpriorAE build_ae(const std::string& name, const ArchConfig& a, int in_channels,
                      int out_channels, Rng& rng) {
  HyperpriorAE ae;
  ae.name = name;
  const AeSpec spec = ae_layers(a, in_channels, out_channels);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    auto& group = group_of(ae, l.group);
    const bool last = i + 1 == spec.layers.size() || spec.layers[i + 1].group != std::string_view(l.group);
    double fan_in = static_cast<double>(l.in) * l.kernel * l.kernel;
    if (l.transposed) fan_in /= static_cast<double>(l.stride * l.stride);
    // He-uniform for layers feeding a ReLU, half the variance for outputs.
    const double bound = std::sqrt((last ? 3.0 : 6.0) / fan_in);
    const Shape ws = l.transposed ? Shape{l.in, l.out, l.kernel, l.kernel}
                                  : Shape{l.out, l.in, l.kernel, l.kernel};
    std::vector<float> w(ws.numel());
    for (auto& v : w) v = static_cast<float>(rng.uniform(-bound, bound));
    std::vector<float> b(l.out, 0.0f);
    ConvLayer layer;
    layer.name = name + "." + l.group + "." + std::to_string(group.size());
    layer.stride = l.stride;
    layer.padding = l.padding;
    layer.output_padding = l.output_padding;
    layer.transposed = l.transposed;
    layer.weight = Tensor::parameter(ws, std::move(w));
    layer.bias = Tensor::parameter(Shape{1, l.out, 1, 1}, std::move(b));
    group.push_back(std::move(layer));
  }
  // Start the scale head near sigma = 1.
  std::fill(ae.h_sigma.back().bias.data().begin(), ae.h_sigma.back().bias.data().end(), 1.0f);
  const Shape ps{1, a.hyperlatent_channels, 1, 1};
  ae.prior_loc = Tensor::parameter(ps, std::vector<float>(ps.numel(), 0.0f));
  ae.prior_log_scale = Tensor::parameter(ps, std::vector<float>(ps.numel(), 0.0f));
  return ae;
}

template <typename AE, typename Fn>
void visit_ae(AE& ae, const Fn& fn) {
  auto layers = [&](auto& group, Side side) {
    for (auto& l : group) {
      fn(l.name + ".weight", l.weight, side);
      fn(l.name + ".bias", l.bias, side);
    }
  };
  layers(ae.g_a, Side::kSender);
  layers(ae.h_a, Side::kSender);
  layers(ae.h_mu, Side::kReceiver);
  layers(ae.h_sigma, Side::kReceiver);
  layers(ae.g_s, Side::kReceiver);
  fn(ae.name + ".prior.loc", ae.prior_loc, Side::kReceiver);
  fn(ae.name + ".prior.log_scale", ae.prior_log_scale, Side::kReceiver);
}

std::vector<AeSpec> model_specs(const ArchConfig& a) {
  return {ae_layers(a, 3, 3), ae_layers(a, 6, 3), ae_layers(a, 3, 3)};
}

}  // namespace

void ArchConfig::validate() const {
  if (codec_channels < 1 || hyper_channels < 1 || latent_channels < 1 || hyperlatent_channels < 1) {
    throw std::invalid_argument("architecture channel counts must be >= 1");
  }
}

ArchConfig preset_config(ArchPreset preset) {
  for (const auto& row : kPresets) {
    if (row.id == preset) return row.config;
  }
  throw std::invalid_argument("no channel table for a custom architecture");
}

std::string_view preset_name(ArchPreset preset) {
  for (const auto& row : kPresets) {
    if (row.id == preset) return row.name;
  }
  return "custom";
}

std::optional<ArchPreset> preset_from_name(std::string_view name) {
  for (const auto& row : kPresets) {
    if (row.name == name) return row.id;
  }
  return std::nullopt;
}

ArchPreset preset_for(const ArchConfig& config) {
  for (const auto& row : kPresets) {
    if (row.config == config) return row.id;
  }
  return ArchPreset::kCustom;
}

Tensor ConvLayer::operator()(const Tensor& x) const {
  return transposed ? conv_transpose2d(x, weight, bias, stride, padding, output_padding)
                    : conv2d(x, weight, bias, stride, padding);
}

SsfModel::SsfModel(const ArchConfig& config, std::uint64_t seed) : config_(config) {
  config.validate();
  Rng rng(seed);
  iframe = build_ae("iframe", config, 3, 3, rng);
  flow = build_ae("flow", config, 6, 3, rng);
  residual = build_ae("residual", config, 3, 3, rng);
  // Start the flow near the zero field: small outputs and a low blur scale.
  ConvLayer& out = flow.g_s.back();
  for (float& w : out.weight.data()) w *= 0.1f;
  out.bias.data()[2] = -3.0f;
}

void SsfModel::visit(const Visitor& fn) {
  visit_ae(iframe, fn);
  visit_ae(flow, fn);
  visit_ae(residual, fn);
}

void SsfModel::visit(const std::function<void(const std::string&, const Tensor&, Side)>& fn) const {
  visit_ae(iframe, fn);
  visit_ae(flow, fn);
  visit_ae(residual, fn);
}

std::vector<NamedParam> SsfModel::parameters() const {
  std::vector<NamedParam> out;
  visit([&](const std::string& n, const Tensor& t, Side) { out.push_back({n, t}); });
  return out;
}

std::vector<NamedParam> SsfModel::parameters(Side side) const {
  std::vector<NamedParam> out;
  visit([&](const std::string& n, const Tensor& t, Side s) {
    if (s == side) out.push_back({n, t});
  });
  return out;
}

std::size_t SsfModel::parameter_count() const {
  std::size_t total = 0;
  visit([&](const std::string&, const Tensor& t, Side) { total += t.numel(); });
  return total;
}

std::size_t SsfModel::parameter_count(Side side) const {
  std::size_t total = 0;
  visit([&](const std::string&, const Tensor& t, Side s) {
    if (s == side) total += t.numel();
  });
  return total;
}

SsfModel SsfModel::clone() const {
  SsfModel copy = *this;
  copy.visit([](const std::string&, Tensor& t, Side) {
    const bool grad = t.requires_grad();
    t = Tensor::parameter(t.shape(), t.values());
    t.set_requires_grad(grad);
  });
  return copy;
}

SsfModel SsfModel::with_receiver(std::span<const Tensor> receiver) const {
  SsfModel copy = *this;
  std::size_t i = 0;
  copy.visit([&](const std::string& name, Tensor& t, Side s) {
    if (s != Side::kReceiver) return;
    if (i >= receiver.size() || !(receiver[i].shape() == t.shape())) {
      throw std::invalid_argument("receiver substitution does not match parameter " + name);
    }
    t = receiver[i++];
  });
  if (i != receiver.size()) throw std::invalid_argument("too many receiver tensors");
  return copy;
}

SsfModel SsfModel::with_sender(std::span<const Tensor> sender) const {
  SsfModel copy = *this;
  std::size_t i = 0;
  copy.visit([&](const std::string& name, Tensor& t, Side s) {
    if (s != Side::kSender) return;
    if (i >= sender.size() || !(sender[i].shape() == t.shape())) {
      throw std::invalid_argument("sender substitution does not match parameter " + name);
    }
    t = sender[i++];
  });
  if (i != sender.size()) throw std::invalid_argument("too many sender tensors");
  return copy;
}

void SsfModel::set_requires_grad(bool on) {
  visit([on](const std::string&, Tensor& t, Side) { t.set_requires_grad(on); });
}

std::size_t expected_parameter_count(const ArchConfig& config, Side side) {
  std::size_t total = 0;
  for (const AeSpec& ae : model_specs(config)) {
    for (const LayerSpec& l : ae.layers) {
      if (is_receiver_group(l.group) == (side == Side::kReceiver)) total += layer_params(l);
    }
    if (side == Side::kReceiver) total += 2 * static_cast<std::size_t>(config.hyperlatent_channels);
  }
  return total;
}

std::size_t expected_parameter_count(const ArchConfig& config) {
  return expected_parameter_count(config, Side::kSender) +
         expected_parameter_count(config, Side::kReceiver);
}

std::vector<GopEntry> gop_plan(int num_frames, int gop_size) {
  if (num_frames < 1) throw std::invalid_argument("GoP plan needs at least one frame");
  if (gop_size < 0) throw std::invalid_argument("GoP size must be >= 1 or infinite");
  std::vector<GopEntry> plan(num_frames);
  for (int i = 0; i < num_frames; ++i) {
    const bool intra = gop_size == kInfiniteGop ? i == 0 : i % gop_size == 0;
    plan[i] = {i, intra ? FrameKind::kI : FrameKind::kP, intra ? -1 : i - 1};
  }
  return plan;
}

double count_decoder_macs(const ArchConfig& config, int width, int height) {
  config.validate();
  if (width <= 0 || height <= 0 || width % ArchConfig::kDownsample != 0 ||
      height % ArchConfig::kDownsample != 0) {
    throw std::invalid_argument("MAC count needs dimensions that are multiples of 64");
  }
  auto ae_macs = [&](const AeSpec& ae) {
    double total = 0.0;
    // Hyper-synthesis starts at 1/64 resolution, synthesis at 1/16.
    auto walk = [&](std::string_view group, int start_div) {
      int div = start_div;
      for (const LayerSpec& l : ae.layers) {
        if (l.group != group) continue;
        div /= l.stride;
        const double pixels = static_cast<double>(width / div) * (height / div);
        total += pixels * l.kernel * l.kernel * l.in * l.out;
      }
    };
    walk("h_mu", ArchConfig::kDownsample);
    walk("h_sigma", ArchConfig::kDownsample);
    walk("g_s", ArchConfig::kCodecDownsample);
    return total;
  };
  const auto specs = model_specs(config);
  const double intra = ae_macs(specs[0]);
  const double inter = ae_macs(specs[1]) + ae_macs(specs[2]);
  constexpr double kGop = 12.0;
  const double per_frame = (intra + (kGop - 1.0) * inter) / kGop;
  return per_frame / (static_cast<double>(width) * height * 1000.0);
}

}  // namespace insa
