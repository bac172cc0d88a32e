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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Criteria 1, 4, 5 and 11 go through
// the `insa` command-line tool; the rest use the library directly with
// independent reference values. Criterion 6 re-runs the gradient cases of
// the unit-test binaries.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "insa/bitstream.hpp"
#include "insa/codec.hpp"
#include "insa/entropy.hpp"
#include "insa/metrics.hpp"
#include "insa/random.hpp"
#include "insa/update_prior.hpp"
#include "insa/video.hpp"
#include "insa/warp.hpp"
#include "trained_model.hpp"

namespace fs = std::filesystem;
using namespace insa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Command {
  int status = -1;
  std::string output;
};

Command run(const std::string& cmd) {
  Command c;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return c;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) c.output += buf;
  const int st = pclose(pipe);
  c.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return c;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CsvRow {
  int step;
  double rd_loss;
  double r_theta_bits;
  double total_loss;
};

std::vector<CsvRow> read_finetune_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);  // header
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    CsvRow r{};
    double seconds = 0.0;
    ls >> r.step >> r.rd_loss >> r.r_theta_bits >> r.total_loss >> seconds;
    if (ls) rows.push_back(r);
  }
  return rows;
}

// State shared by the criteria that use the CLI encodes.
struct Workspace {
  fs::path root;
  fs::path weights;
  fs::path clip;
  double cli_seconds = 0.0;
  bool encoded = false;
  std::string encode_error;

  fs::path stream(const std::string& mode) const { return root / (mode + ".insa"); }
  fs::path report(const std::string& mode) const { return root / (mode + ".csv"); }
  fs::path recon(const std::string& mode) const { return root / ("recon-" + mode); }
  fs::path decoded(const std::string& mode) const { return root / ("decoded-" + mode); }
};

const std::vector<std::string> kModes = {"insta", "encoder-only", "global"};

void prepare(Workspace& ws) {
  ws.root = fs::temp_directory_path() / ("insa-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(ws.root);
  fs::create_directories(ws.root);
  ws.weights = ws.root / "global.wts";
  ws.clip = ws.root / "clip";
  std::printf("training the desk-scale global model...\n");
  std::fflush(stdout);
  save_weights(ws.weights.string(), testing::trained_lite_model());
  write_frame_dir(ws.clip.string(), synthetic_clip(16, 64, 64, 4242), "pfm");

  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& mode : kModes) {
    const std::string enc = std::string(INSA_CLI) + " encode -w " + quote(ws.weights) + " -i " + quote(ws.clip) +
                            " -o " + quote(ws.stream(mode)) + " --mode " + mode + " --report " +
                            quote(ws.report(mode)) + " --recon-dir " + quote(ws.recon(mode)) +
                            " --recon-format pfm --set beta=0.0016 --set lr=1e-4 --set seed=5" +
                            " --set max_steps=200 --set checkpoint_every=20 --set gop_size=12";
    const Command e = run(enc);
    if (e.status != 0) {
      ws.encode_error = "encode " + mode + " exited " + std::to_string(e.status) + ": " + e.output;
      return;
    }
    const std::string dec = std::string(INSA_CLI) + " decode -w " + quote(ws.weights) + " -i " +
                            quote(ws.stream(mode)) + " -o " + quote(ws.decoded(mode)) + " --format pfm";
    const Command d = run(dec);
    if (d.status != 0) {
      ws.encode_error = "decode " + mode + " exited " + std::to_string(d.status) + ": " + d.output;
      return;
    }
  }
  ws.cli_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ws.encoded = true;
}

Outcome criterion_roundtrip(const Workspace& ws) {
  if (!ws.encoded) return {false, ws.encode_error};
  for (const auto& mode : kModes) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(ws.recon(mode))) files.push_back(e.path().filename());
    std::sort(files.begin(), files.end());
    if (files.size() != 16) return {false, mode + ": encoder wrote " + std::to_string(files.size()) + " frames"};
    for (const auto& f : files) {
      if (!fs::exists(ws.decoded(mode) / f)) return {false, mode + ": decoder did not write " + f.string()};
      if (slurp(ws.recon(mode) / f) != slurp(ws.decoded(mode) / f)) {
        return {false, mode + ": " + f.string() + " differs between encoder and decoder"};
      }
    }
  }
  const bool fast = ws.cli_seconds < 120.0;
  return {fast, "3 modes x 16 frames bit-identical; encode+decode " + fmt("%.1f s", ws.cli_seconds) + " (limit 120 s)"};
}

Outcome criterion_entropy() {
  const SpikeSlabPrior prior;
  const UpdateQuantGrid grid = build_update_grid(prior, 0.001, 1.0 / 256);
  const PmfTable table = spike_slab_bin_pmf(grid, prior);
  Rng rng(2024);
  std::vector<int> symbols(100000);
  double cross_entropy = 0.0;
  for (auto& s : symbols) {
    s = static_cast<int>(table.find(static_cast<std::uint32_t>(rng.below(kPmfTotal))));
    cross_entropy -= std::log2(static_cast<double>(table.freq(s)) / kPmfTotal);
  }
  const auto bytes = range_encode(symbols, std::span<const PmfTable>(&table, 1));
  const double coded = 8.0 * static_cast<double>(bytes.size());
  const double bound = cross_entropy * 1.001 + 64.0;
  if (range_decode(bytes, std::span<const PmfTable>(&table, 1), symbols.size()) != symbols) {
    return {false, "spike-slab stream did not decode"};
  }

  Rng fuzz(77);
  int exact = 0;
  const int cases = 1000;
  for (int c = 0; c < cases; ++c) {
    const std::size_t n = 1 + fuzz.below(c % 10 == 0 ? 2000 : 300);
    const std::size_t count = fuzz.below(400);
    const bool per_symbol = fuzz.below(2) == 1;
    std::vector<PmfTable> tables;
    for (std::size_t t = 0; t < (per_symbol ? count : 1); ++t) {
      std::vector<double> p(n);
      for (auto& v : p) v = std::pow(fuzz.uniform(), 1.0 + 12.0 * fuzz.uniform());
      tables.push_back(PmfTable::from_probabilities(p));
    }
    std::vector<int> sym(count);
    for (auto& s : sym) s = static_cast<int>(fuzz.below(n));
    if (per_symbol && count == 0) tables.push_back(PmfTable::from_probabilities(std::vector<double>(n, 1.0)));
    const auto b = range_encode(sym, tables);
    exact += range_decode(b, tables, count) == sym;
  }
  const bool pass = coded <= bound && exact == cases;
  return {pass, fmt("coded %.0f bits", coded) + fmt(" vs cross-entropy %.1f", cross_entropy) +
                    fmt(" (bound %.1f); ", bound) + std::to_string(exact) + "/" + std::to_string(cases) +
                    " fuzz round trips exact"};
}

Outcome criterion_zero_floor() {
  const SpikeSlabPrior prior;
  const UpdateQuantGrid grid = build_update_grid(prior, 0.001, 1.0 / 256);
  const PmfTable table = spike_slab_bin_pmf(grid, prior);
  const std::vector<int> zeros(100000, update_symbol_to_index(0, grid));
  const auto bytes = range_encode(zeros, std::span<const PmfTable>(&table, 1));
  const double per_param = 8.0 * static_cast<double>(bytes.size()) / static_cast<double>(zeros.size());
  // Centre-bin mass of the two-Gaussian mixture from the error function.
  const double h = 0.5 * grid.bin_width / std::sqrt(2.0);
  const double mass = (std::erf(h / prior.sigma) + prior.alpha * std::erf(h / prior.spike)) / (1.0 + prior.alpha);
  return {per_param <= 0.05, fmt("%.5f bits/parameter", per_param) + fmt(" (centre-bin mass %.5f", mass) +
                                 fmt(", -log2 = %.5f bits)", -std::log2(mass))};
}

std::vector<int> update_symbols_of(const Bitstream& bs, UpdateQuantGrid& grid, SpikeSlabPrior& prior) {
  const UpdateSection& u = *bs.update;
  prior = {u.sigma, u.spike, u.alpha};
  grid = update_grid_for(u);
  const PmfTable pmf = spike_slab_bin_pmf(grid, prior);
  std::vector<int> idx = range_decode(u.payload, std::span<const PmfTable>(&pmf, 1), u.parameter_count);
  for (auto& i : idx) i = update_index_to_symbol(i, grid);
  return idx;
}

Outcome criterion_sparsity(const Workspace& ws) {
  if (!ws.encoded) return {false, ws.encode_error};
  const Bitstream bs = read_bitstream(read_file(ws.stream("insta").string()));
  if (!bs.update) return {false, "InstA stream carries no update section"};
  UpdateQuantGrid grid;
  SpikeSlabPrior prior;
  const auto symbols = update_symbols_of(bs, grid, prior);
  const SparsityReport s = sparsity_report(symbols, prior, grid);
  return {s.saving_per_param > 0.0,
          std::to_string(s.parameters) + " parameters, " + fmt("%.4f zero, ", s.zero_fraction) +
              fmt("spike-slab %.4f bits/param, ", s.bits_spike_slab / static_cast<double>(s.parameters)) +
              fmt("slab-only %.4f, ", s.bits_gaussian / static_cast<double>(s.parameters)) +
              fmt("saving %.4f bits/param", s.saving_per_param)};
}

Outcome criterion_anytime(const Workspace& ws) {
  if (!ws.encoded) return {false, ws.encode_error};
  const auto insta = read_finetune_csv(ws.report("insta"));
  const auto enc = read_finetune_csv(ws.report("encoder-only"));
  if (insta.size() < 2 || enc.size() < 2) return {false, "finetune reports are missing checkpoints"};
  if (insta.back().step != 200 && insta.back().step != 199) {
    return {false, "InstA run stopped at step " + std::to_string(insta.back().step)};
  }
  // Best-so-far by total loss, and the rd_loss of that checkpoint.
  bool monotone = true;
  double best = std::numeric_limits<double>::infinity();
  double prev = best;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < insta.size(); ++i) {
    if (insta[i].total_loss < best) {
      best = insta[i].total_loss;
      best_i = i;
    }
    monotone = monotone && best <= prev;
    prev = best;
  }
  const double step0 = insta.front().total_loss;
  const double rel = (step0 - best) / step0;
  const double insta_rd_gain = insta.front().rd_loss - insta[best_i].rd_loss;
  double enc_best = std::numeric_limits<double>::infinity();
  for (const auto& r : enc) enc_best = std::min(enc_best, r.rd_loss);
  const double enc_rd_gain = enc.front().rd_loss - enc_best;
  const bool pass = monotone && rel >= 0.01 && enc_rd_gain < insta_rd_gain;
  return {pass, fmt("InstA total loss %.6f", step0) + fmt(" -> %.6f", best) + fmt(" (%.2f%% lower); ", 100.0 * rel) +
                    fmt("rd gain InstA %.3e", insta_rd_gain) + fmt(" vs encoder-only %.3e", enc_rd_gain)};
}

Outcome criterion_gradients() {
  struct Suite {
    const char* binary;
    const char* filter;
  };
  const std::vector<Suite> suites = {
      {TEST_TENSOR_BIN, "gradient suite*,ste_round*"},
      {TEST_MODEL_BIN, "blur backward*,scale-space warp"},
      {TEST_UPDATE_PRIOR_BIN, "update rate term"},
      {TEST_INSTA_BIN, "insta loss gradient*,update quantizer*"},
  };
  int cases = 0;
  for (const auto& s : suites) {
    const Command c = run(std::string(s.binary) + " --no-version --test-case='" + s.filter + "'");
    const auto pos = c.output.find("test cases:");
    int n = 0;
    if (pos != std::string::npos) std::sscanf(c.output.c_str() + pos, "test cases: %d", &n);
    if (c.status != 0 || n == 0) {
      return {false, fs::path(s.binary).filename().string() + " [" + s.filter + "] failed:\n" + c.output};
    }
    cases += n;
  }
  return {true, std::to_string(cases) +
                    " finite-difference and straight-through cases (1e-3 relative, 1e-4 for the update rate)"};
}

RdCurve curve(const std::string& label, double rate_scale, double psnr_shift) {
  RdCurve c;
  c.label = label;
  const double bpp[] = {0.05, 0.1, 0.2, 0.4, 0.8};
  const double psnr[] = {30.0, 32.1, 34.0, 35.7, 37.2};
  for (int i = 0; i < 5; ++i) c.points.push_back({bpp[i] * rate_scale, psnr[i] + psnr_shift});
  return c;
}

Outcome criterion_bdrate() {
  const RdCurve ref = curve("ref", 1.0, 0.0);
  const double same = bd_rate(ref, curve("same", 1.0, 0.0));
  const double twice = bd_rate(ref, curve("twice", 2.0, 0.0));
  const double cheaper = bd_rate(ref, curve("better", 1.0, 0.5));
  const bool pass = std::abs(same) <= 1e-9 && std::abs(twice - 100.0) <= 0.5 && cheaper < 0.0;
  return {pass, fmt("identical %.2e%%, ", same) + fmt("2x rate %+.4f%%, ", twice) +
                    fmt("+0.5 dB curve %+.3f%% (negative is better)", cheaper)};
}

Outcome criterion_quantizer() {
  const SpikeSlabPrior prior;
  const UpdateQuantGrid grid = build_update_grid(prior, 0.001, 1.0 / 256);
  Rng rng(99);
  double worst = 0.0;
  bool idempotent = true;
  for (int i = 0; i < 100000; ++i) {
    const float d = static_cast<float>(rng.uniform(-grid.half_width(), grid.half_width()));
    const int q = quantize_update(d, grid);
    const float back = dequantize_update(q, grid);
    worst = std::max(worst, std::abs(static_cast<double>(back) - d));
    idempotent = idempotent && quantize_update(back, grid) == q;
  }
  const int m = grid.max_symbol();
  const bool clips = quantize_update(1.0f, grid) == m && quantize_update(-1.0f, grid) == -m &&
                     quantize_update(1e30f, grid) == m && quantize_update(-1e30f, grid) == -m;
  // float storage of the update adds at most a few ulps of 0.04.
  const bool pass = worst <= 0.5 * grid.bin_width + 1e-8 && clips && idempotent;
  return {pass, fmt("max |deq(q(d)) - d| = %.3e", worst) + fmt(" (t/2 = %.1e), ", 0.5 * grid.bin_width) +
                    "extremes clip to +/-" + std::to_string(m) + (idempotent ? ", idempotent" : ", NOT idempotent")};
}

Outcome criterion_warp() {
  Tensor frame(Shape{1, 3, 32, 32});
  Rng rng(5);
  for (std::size_t i = 0; i < frame.numel(); ++i) frame.data()[i] = static_cast<float>(rng.uniform());
  double identity_err = 0.0;
  const Tensor warped = scale_space_warp(frame, Tensor(Shape{1, 3, 32, 32}, 0.0f));
  for (std::size_t i = 0; i < frame.numel(); ++i) {
    identity_err = std::max(identity_err, static_cast<double>(std::abs(warped.data()[i] - frame.data()[i])));
  }
  const BlurVolume vol = blur_stack(frame);
  const bool level0 = std::ranges::equal(frame.data(), vol.levels[0].data(),
                                 [](float a, float b) { return std::bit_cast<std::uint32_t>(a) ==
                                                               std::bit_cast<std::uint32_t>(b); });
  double scale_err = 0.0;
  for (int l = 0; l < kBlurLevels; ++l) {
    Tensor field(Shape{1, 3, 32, 32}, 0.0f);
    std::ranges::fill(field.data().subspan(2 * 32 * 32), static_cast<float>(l));
    const Tensor s = scale_space_warp(frame, field);
    for (std::size_t i = 0; i < frame.numel(); ++i) {
      scale_err = std::max(scale_err, static_cast<double>(std::abs(s.data()[i] - vol.levels[l].data()[i])));
    }
  }
  const bool pass = identity_err <= 1e-6 && level0 && scale_err <= 1e-6;
  return {pass, fmt("zero-field error %.1e, ", identity_err) + (level0 ? "level 0 bitwise equal, " : "level 0 differs, ") +
                    fmt("pure-scale error %.1e", scale_err)};
}

Outcome criterion_macs() {
  const double ssf18 = count_decoder_macs(preset_config(ArchPreset::kSsf18), 1920, 1088);
  const double ssf5 = count_decoder_macs(preset_config(ArchPreset::kSsf5), 1920, 1088);
  const double ratio = ssf5 / ssf18;
  const bool pass = ratio >= 0.2 && ratio <= 0.4 && ssf18 >= 313.4 / 2 && ssf18 <= 313.4 * 2;
  return {pass, fmt("SSF18 %.1f kMAC/px, ", ssf18) + fmt("SSF5 %.1f kMAC/px, ", ssf5) + fmt("ratio %.3f", ratio)};
}

Outcome criterion_rate_report(const Workspace& ws) {
  if (!ws.encoded) return {false, ws.encode_error};
  const RateReport r = rate_report(read_file(ws.stream("insta").string()));
  const double sum = r.model_update_fraction() + r.iframe_fraction() + r.flow_fraction() + r.residual_fraction();
  const bool pass = std::abs(sum - 1.0) <= 1e-6 && std::isfinite(r.model_update_fraction());
  return {pass, fmt("updates %.2f%%, ", 100.0 * r.model_update_fraction()) +
                    fmt("I-frames %.2f%%, ", 100.0 * r.iframe_fraction()) +
                    fmt("flow %.2f%%, ", 100.0 * r.flow_fraction()) +
                    fmt("residual %.2f%%; ", 100.0 * r.residual_fraction()) + fmt("sum - 1 = %.1e", sum - 1.0)};
}

}  // namespace

int main() {
  Workspace ws;
  try {
    prepare(ws);
  } catch (const std::exception& e) {
    ws.encode_error = std::string("setup failed: ") + e.what();
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "bit-exact CLI round trip in all modes", [&] { return criterion_roundtrip(ws); }},
      {2, "range coder near cross-entropy, fuzz exact", criterion_entropy},
      {3, "zero update costs <= 0.05 bits/parameter", criterion_zero_floor},
      {4, "spike-slab prior beats the slab alone", [&] { return criterion_sparsity(ws); }},
      {5, "anytime improvement, encoder-only gains less", [&] { return criterion_anytime(ws); }},
      {6, "gradient suite", criterion_gradients},
      {7, "BD-rate fidelity", criterion_bdrate},
      {8, "update quantizer contract", criterion_quantizer},
      {9, "warp and blur contracts", criterion_warp},
      {10, "decoder MAC accounting", criterion_macs},
      {11, "rate composition report", [&] { return criterion_rate_report(ws); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  if (failed == 0) fs::remove_all(ws.root);
  return failed == 0 ? 0 : 1;
}
