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

#include "insa/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "insa/error.hpp"

namespace insa {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw InputError("config key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v, long long lo, long long hi) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InputError("config key '" + key + "': '" + v + "' is not an integer");
  }
  if (out < lo || out > hi) {
    throw InputError("config key '" + key + "': " + v + " outside [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
  }
  return out;
}

double positive(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (!(d > 0.0)) throw InputError("config key '" + key + "' must be positive");
  return d;
}

}  // namespace

int parse_gop(const std::string& text) {
  if (text == "inf" || text == "infinite") return kInfiniteGop;
  return static_cast<int>(to_int("gop_size", text, 0, 65535));
}

int parse_epsilon_exponent(const std::string& text) {
  if (text.rfind("2^-", 0) == 0) return static_cast<int>(to_int("epsilon", text.substr(3), 1, 52));
  const double v = to_double("epsilon", text);
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  if (!(v > 0.0 && v < 1.0) || mant != 0.5 || 1 - exp > 52) {
    throw InputError("config key 'epsilon': " + text + " is not a power of two in [2^-52, 2^-1]");
  }
  return 1 - exp;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "preset") {
    const auto preset = preset_from_name(value);
    if (!preset || *preset == ArchPreset::kCustom) {
      throw InputError("config key 'preset': unknown architecture '" + value + "' (ssf-lite, ssf18, ssf8, ssf5, ssf3)");
    }
    cfg.preset = *preset;
  } else if (key == "beta") {
    cfg.beta = to_double(key, value);
    if (!(cfg.beta >= 0.0)) throw InputError("config key 'beta' must be >= 0");
  } else if (key == "gop_size") {
    cfg.gop_size = parse_gop(value);
  } else if (key == "train_gop") {
    cfg.train_gop = static_cast<int>(to_int(key, value, 1, 1000));
  } else if (key == "max_steps") {
    cfg.max_steps = static_cast<int>(to_int(key, value, 0, 100000000));
  } else if (key == "checkpoint_every") {
    cfg.checkpoint_every = static_cast<int>(to_int(key, value, 1, 100000000));
  } else if (key == "lr") {
    cfg.lr = static_cast<float>(positive(key, value));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_int(key, value, 0, INT64_MAX));
  } else if (key == "t" || key == "bin_width") {
    cfg.bin_width = positive(key, value);
  } else if (key == "sigma") {
    cfg.sigma = positive(key, value);
  } else if (key == "s" || key == "spike") {
    cfg.spike = positive(key, value);
  } else if (key == "alpha") {
    cfg.alpha = to_double(key, value);
    if (!(cfg.alpha >= 0.0)) throw InputError("config key 'alpha' must be >= 0");
  } else if (key == "epsilon") {
    cfg.epsilon_exponent = parse_epsilon_exponent(value);
  } else if (key == "temporal_subsample") {
    cfg.temporal_subsample = static_cast<int>(to_int(key, value, 1, 100000));
  } else if (key == "global_steps") {
    cfg.global_steps = static_cast<int>(to_int(key, value, 0, 100000000));
  } else if (key == "global_lr") {
    cfg.global_lr = static_cast<float>(positive(key, value));
  } else {
    throw InputError("unknown config key '" + key + "'");
  }
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  bool spike_given = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      apply_setting(cfg, key, value);
    } catch (const InputError& e) {
      throw InputError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    spike_given |= key == "s" || key == "spike";
  }
  // The spike width follows the bin width unless set explicitly.
  if (!spike_given) cfg.spike = cfg.bin_width / 6.0;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  return parse_run_config(in, path);
}

void RunConfig::validate() const {
  try {
    encoder(EncodeMode::kInsta).validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("invalid prior settings: ") + e.what());
  }
}

EncoderConfig RunConfig::encoder(EncodeMode mode) const {
  EncoderConfig e;
  e.mode = mode;
  e.gop_size = gop_size;
  e.finetune.beta = beta;
  e.finetune.lr = lr;
  e.finetune.max_steps = max_steps;
  e.finetune.checkpoint_every = checkpoint_every;
  e.finetune.train_gop = train_gop;
  e.finetune.seed = seed;
  e.prior.sigma = sigma;
  e.prior.spike = spike;
  e.prior.alpha = alpha;
  e.bin_width = bin_width;
  e.epsilon_exponent = epsilon_exponent;
  return e;
}

GlobalTrainConfig RunConfig::global_training() const {
  GlobalTrainConfig g;
  g.beta = beta;
  g.lr = global_lr;
  g.steps = global_steps;
  g.train_gop = train_gop;
  g.seed = seed;
  return g;
}

}  // namespace insa
