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

// insa: command-line driver for training, encoding, decoding and
// evaluating the instance-adaptive video codec.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "insa/bitstream.hpp"
#include "insa/codec.hpp"
#include "insa/config.hpp"
#include "insa/error.hpp"
#include "insa/insta.hpp"
#include "insa/metrics.hpp"
#include "insa/synthetic.hpp"
#include "insa/video.hpp"

namespace fs = std::filesystem;
using namespace insa;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInput = 2, kStream = 3, kDomain = 4 };

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value, applied after the file

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (!overrides.empty()) {
      std::string text;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        text += '\n';
      }
      for (const auto& kv : overrides) text += kv + '\n';
      std::istringstream in(text);
      cfg = parse_run_config(in, config_path.empty() ? "--set" : config_path + " + --set");
    }
    return cfg;
  }
};

void add_config_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "key=value run configuration file");
  cmd->add_option("--set", opts.overrides, "override one config key (key=value), repeatable");
}

VideoClip load_clip(const std::string& path, int subsample_step) {
  VideoClip clip = read_video(path);
  return subsample_step > 1 ? subsample(clip, subsample_step) : clip;
}

// Output files may name directories that do not exist yet.
const std::string& out_path(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
  return path;
}

std::string gop_text(int gop) { return gop == kInfiniteGop ? std::string("inf") : std::to_string(gop); }

void print_rate_report(const RateReport& r) {
  std::printf("rate composition (of %.0f section bits, %.0f container bits):\n", r.total(), r.overhead_bits);
  std::printf("  model updates     %12.0f bits  %8.4f%%\n", r.model_update_bits, 100.0 * r.model_update_fraction());
  std::printf("  I-frame latents   %12.0f bits  %8.4f%%\n", r.iframe_bits, 100.0 * r.iframe_fraction());
  std::printf("  P-frame flow      %12.0f bits  %8.4f%%\n", r.flow_bits, 100.0 * r.flow_fraction());
  std::printf("  P-frame residual  %12.0f bits  %8.4f%%\n", r.residual_bits, 100.0 * r.residual_fraction());
}

std::vector<RdCurve> pick_curve(const std::string& path, const std::string& label) {
  auto curves = read_rd_csv_file(path);
  if (label.empty()) return {curves.front()};
  for (const auto& c : curves) {
    if (c.label == label) return {c};
  }
  throw InputError(path + ": no curve labelled '" + label + "'");
}

void append_rd_point(const std::string& path, const std::string& label, double bpp, double psnr) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(out_path(path), std::ios::app);
  if (!out) throw InputError("cannot write " + path);
  if (fresh) out << "label,bpp,psnr\n";
  out.precision(12);
  out << label << ',' << bpp << ',' << psnr << '\n';
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  int frames = 16;
  int width = 64;
  int height = 64;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "ppm";
};

int run_synth(const SynthArgs& a) {
  if (a.frames < 1 || a.width < 1 || a.height < 1) throw InputError("frames, width and height must be >= 1");
  VideoClip clip;
  clip.frames = synthetic_clip(a.frames, a.height, a.width, a.seed);
  clip.width = a.width;
  clip.height = a.height;
  if (fs::path(a.out).extension() == ".y4m") {
    write_y4m(out_path(a.out), clip);
  } else {
    write_frame_dir(a.out, clip.frames, a.format);
  }
  std::printf("wrote %d frames of %dx%d to %s\n", a.frames, a.width, a.height, a.out.c_str());
  return kOk;
}

// ---------------------------------------------------------- train-global

struct TrainArgs {
  CommonOptions common;
  std::string clips_dir;
  std::string out;
  std::optional<int> steps;
};

int run_train(const TrainArgs& a) {
  RunConfig cfg = a.common.load();
  if (a.steps) cfg.global_steps = *a.steps;
  std::error_code ec;
  if (!fs::is_directory(a.clips_dir, ec)) throw InputError(a.clips_dir + ": training clip directory not found");
  std::vector<fs::path> sources;
  for (const auto& e : fs::directory_iterator(a.clips_dir)) {
    if ((e.is_regular_file() && e.path().extension() == ".y4m") || e.is_directory()) sources.push_back(e.path());
  }
  std::sort(sources.begin(), sources.end());
  if (sources.empty()) throw InputError(a.clips_dir + ": no clips found (expected *.y4m files or frame directories)");
  std::vector<std::vector<Tensor>> clips;
  for (const auto& p : sources) {
    VideoClip clip = load_clip(p.string(), cfg.temporal_subsample);
    std::vector<Tensor> padded;
    for (const auto& f : clip.frames) padded.push_back(pad_to_multiple(f, ArchConfig::kDownsample));
    clips.push_back(std::move(padded));
  }
  SsfModel model(preset_config(cfg.preset), cfg.seed);
  std::printf("training %s (%zu receiver parameters) on %zu clips for %d steps\n",
              std::string(preset_name(cfg.preset)).c_str(), model.parameter_count(Side::kReceiver), clips.size(),
              cfg.global_steps);
  const auto t0 = std::chrono::steady_clock::now();
  const GlobalTrainReport r = train_global(model, clips, cfg.global_training());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_weights(out_path(a.out), model);
  std::printf("rd_loss step 0: %.6f\n", r.initial_rd_loss);
  std::printf("rd_loss final:  %.6f\n", r.final_rd_loss);
  std::printf("wrote %s (%.1f s)\n", a.out.c_str(), secs);
  return kOk;
}

// ---------------------------------------------------------------- encode

struct EncodeArgs {
  CommonOptions common;
  std::string weights;
  std::string input;
  std::string output;
  std::string mode = "insta";
  std::string report;
  std::string recon_dir;
  std::string recon_format = "ppm";
};

int run_encode(const EncodeArgs& a) {
  const RunConfig cfg = a.common.load();
  const EncodeMode mode = encode_mode_from_name(a.mode);
  const SsfModel global = load_weights(a.weights);
  const VideoClip clip = load_clip(a.input, cfg.temporal_subsample);
  const auto t0 = std::chrono::steady_clock::now();
  const EncodeResult r = encode_clip(global, clip, cfg.encoder(mode));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file(out_path(a.output), r.bytes);

  const double bits = 8.0 * static_cast<double>(r.bytes.size());
  std::printf("mode: %s  frames: %zu  size: %dx%d  gop: %s\n", a.mode.c_str(), clip.size(), clip.width, clip.height,
              gop_text(cfg.gop_size).c_str());
  std::printf("bytes: %zu  bpp: %.6f\n", r.bytes.size(), bits_per_pixel(bits, clip.size(), clip.width, clip.height));
  std::printf("psnr: %.4f dB\n", psnr_rgb(r.recons, clip.frames));
  print_rate_report(rate_report(r.stream));
  if (r.report) {
    const std::string csv = a.report.empty() ? a.output + ".csv" : a.report;
    std::ofstream out(out_path(csv));
    if (!out) throw InputError("cannot write " + csv);
    r.report->write_csv(out);
    const Checkpoint& best = r.report->best();
    std::printf("finetune: best step %d  total_loss %.6f (step 0: %.6f)%s\n", best.step, best.total_loss,
                r.report->checkpoints.front().total_loss, r.report->diverged ? "  [diverged, stopped early]" : "");
    std::printf("finetune report: %s\n", csv.c_str());
  }
  if (!r.update_symbols.empty()) {
    const SparsityReport s =
        sparsity_report(r.update_symbols, canonical_prior(cfg.encoder(mode).prior), update_grid_for(*r.stream.update));
    std::printf("update: %zu parameters, %.4f zero, %.4f bits/param spike-slab, %.4f bits/param slab-only\n",
                s.parameters, s.zero_fraction, s.bits_spike_slab / static_cast<double>(s.parameters),
                s.bits_gaussian / static_cast<double>(s.parameters));
  }
  if (!a.recon_dir.empty()) write_frame_dir(a.recon_dir, r.recons, a.recon_format);
  std::printf("wrote %s (%.1f s)\n", a.output.c_str(), secs);
  return kOk;
}

// ---------------------------------------------------------------- decode

struct DecodeArgs {
  std::string weights;
  std::string input;
  std::string output;
  std::string format = "ppm";
};

int run_decode(const DecodeArgs& a) {
  const SsfModel global = load_weights(a.weights);
  const auto bytes = read_file(a.input);
  const DecodeResult d = decode_stream(global, bytes);
  write_frame_dir(a.output, d.frames, a.format);
  std::printf("decoded %zu frames of %dx%d\n", d.frames.size(), d.header.width, d.header.height);
  if (d.header.flags & kFlagUpdate) {
    std::printf("update decode: %.4f s (%zu nonzero updates)\n", d.update_decode_seconds, d.nonzero_updates);
  }
  return kOk;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  CommonOptions common;
  std::string original;
  std::string stream;
  std::string decoded;
  std::string weights;
  std::string mode = "global";
  std::string gop;
  int subsample_step = 0;
  std::string csv;
  std::string label = "run";
};

int run_eval(const EvalArgs& a) {
  RunConfig cfg = a.common.load();
  if (a.subsample_step > 0) cfg.temporal_subsample = a.subsample_step;
  if (!a.gop.empty()) cfg.gop_size = parse_gop(a.gop);
  const VideoClip clip = load_clip(a.original, cfg.temporal_subsample);

  std::vector<std::uint8_t> bytes;
  std::vector<Tensor> recon;
  if (!a.stream.empty()) {
    bytes = read_file(a.stream);
  } else {
    if (a.weights.empty()) throw InputError("eval needs --stream or --weights to encode the clip");
    const EncodeResult r = encode_clip(load_weights(a.weights), clip, cfg.encoder(encode_mode_from_name(a.mode)));
    bytes = r.bytes;
  }
  const Bitstream bs = read_bitstream(bytes);
  if (!a.decoded.empty()) {
    recon = read_frame_dir(a.decoded).frames;
  } else {
    if (a.weights.empty()) throw InputError("eval needs --decoded frames or --weights to decode");
    recon = decode_stream(load_weights(a.weights), bs).frames;
  }
  if (recon.size() != clip.size()) {
    throw InputError("original has " + std::to_string(clip.size()) + " frames after subsampling, decoded has " +
                     std::to_string(recon.size()));
  }
  int iframes = 0;
  for (const auto& f : bs.frames) iframes += f.kind == FrameKind::kI;
  const double bpp = bits_per_pixel(8.0 * static_cast<double>(bytes.size()), clip.size(), clip.width, clip.height);
  const double psnr = psnr_rgb(recon, clip.frames);
  std::printf("frames: %zu  I-frames: %d  gop: %s\n", clip.size(), iframes, gop_text(bs.header.gop_size).c_str());
  std::printf("bpp: %.6f\n", bpp);
  std::printf("psnr: %.4f dB\n", psnr);
  if (!a.csv.empty()) {
    if (!std::isfinite(psnr)) throw DomainError("PSNR is infinite (lossless match); not adding an RD point");
    append_rd_point(a.csv, a.label, bpp, psnr);
    std::printf("appended to %s\n", a.csv.c_str());
  }
  return kOk;
}

// ---------------------------------------------------------------- bdrate

struct BdArgs {
  std::string reference;
  std::string test;
  std::string reference_label;
  std::string test_label;
};

int run_bdrate(const BdArgs& a) {
  const RdCurve ref = pick_curve(a.reference, a.reference_label).front();
  const RdCurve tst = pick_curve(a.test, a.test_label).front();
  const double bd = bd_rate(ref, tst);
  std::printf("BD-rate of '%s' against '%s': %.4f%%\n", tst.label.c_str(), ref.label.c_str(), bd);
  return kOk;
}

// ----------------------------------------------------------- plot/report

struct PlotArgs {
  std::vector<std::string> csvs;
  std::string out;
  std::string title = "Rate-distortion";
};

int run_plot(const PlotArgs& a) {
  std::vector<RdCurve> curves;
  for (const auto& path : a.csvs) {
    for (auto& c : read_rd_csv_file(path)) curves.push_back(std::move(c));
  }
  std::ofstream out(out_path(a.out));
  if (!out) throw InputError("cannot write " + a.out);
  write_rd_svg(out, curves, a.title);
  std::printf("wrote %s (%zu curves)\n", a.out.c_str(), curves.size());
  return kOk;
}

struct ReportArgs {
  std::vector<std::string> streams;
  std::string svg;
  std::string csv;
};

int run_report(const ReportArgs& a) {
  std::vector<std::pair<std::string, RateReport>> reports;
  for (const auto& path : a.streams) {
    const RateReport r = rate_report(read_file(path));
    std::printf("%s\n", path.c_str());
    print_rate_report(r);
    reports.emplace_back(fs::path(path).stem().string(), r);
  }
  if (!a.csv.empty()) {
    std::ofstream out(out_path(a.csv));
    if (!out) throw InputError("cannot write " + a.csv);
    out << "stream,model_updates,iframe_latents,pframe_flow,pframe_residual,total_bits\n";
    out.precision(12);
    for (const auto& [name, r] : reports) {
      out << name << ',' << r.model_update_fraction() << ',' << r.iframe_fraction() << ',' << r.flow_fraction()
          << ',' << r.residual_fraction() << ',' << r.total() << '\n';
    }
  }
  if (!a.svg.empty()) {
    std::ofstream out(out_path(a.svg));
    if (!out) throw InputError("cannot write " + a.svg);
    write_rate_svg(out, reports, "Rate composition");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"insa: instance-adaptive neural video codec"};
  app.require_subcommand(1);
  std::function<int()> action;

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "write a synthetic test clip (Y4M if OUT ends in .y4m, else a frame directory)");
  c_synth->add_option("--frames", synth.frames, "number of frames")->capture_default_str();
  c_synth->add_option("--width", synth.width, "frame width")->capture_default_str();
  c_synth->add_option("--height", synth.height, "frame height")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "content seed")->capture_default_str();
  c_synth->add_option("-o,--output", synth.out, "output .y4m file or frame directory")->required();
  c_synth->add_option("--format", synth.format, "frame format for directories: ppm or pfm (lossless)")
      ->check(CLI::IsMember({"ppm", "pfm"}))
      ->capture_default_str();
  c_synth->callback([&] { action = [&] { return run_synth(synth); }; });

  TrainArgs train;
  auto* c_train = app.add_subcommand("train-global", "train a global model on a directory of clips");
  add_config_options(c_train, train.common);
  c_train->add_option("--clips", train.clips_dir, "directory of *.y4m files or PPM/PFM frame directories")->required();
  c_train->add_option("-o,--output", train.out, "output .wts weights file")->required();
  c_train->add_option("--steps", train.steps, "training steps (overrides global_steps)");
  c_train->callback([&] { action = [&] { return run_train(train); }; });

  EncodeArgs enc;
  auto* c_enc = app.add_subcommand("encode", "compress a clip");
  add_config_options(c_enc, enc.common);
  c_enc->add_option("-w,--weights", enc.weights, "global .wts weights")->required();
  c_enc->add_option("-i,--input", enc.input, "input .y4m or PPM/PFM frame directory")->required();
  c_enc->add_option("-o,--output", enc.output, "output .insa stream")->required();
  c_enc->add_option("--mode", enc.mode, "insta, encoder-only or global")
      ->check(CLI::IsMember({"insta", "encoder-only", "global"}))
      ->capture_default_str();
  c_enc->add_option("--report", enc.report, "finetune CSV report (default: OUTPUT.csv)");
  c_enc->add_option("--recon-dir", enc.recon_dir, "also write the encoder-side reconstruction here");
  c_enc->add_option("--recon-format", enc.recon_format, "ppm or pfm")
      ->check(CLI::IsMember({"ppm", "pfm"}))
      ->capture_default_str();
  c_enc->callback([&] { action = [&] { return run_encode(enc); }; });

  DecodeArgs dec;
  auto* c_dec = app.add_subcommand("decode", "decompress a stream to frames");
  c_dec->add_option("-w,--weights", dec.weights, "global .wts weights")->required();
  c_dec->add_option("-i,--input", dec.input, "input .insa stream")->required();
  c_dec->add_option("-o,--output", dec.output, "output frame directory")->required();
  c_dec->add_option("--format", dec.format, "ppm (8-bit) or pfm (float, lossless)")
      ->check(CLI::IsMember({"ppm", "pfm"}))
      ->capture_default_str();
  c_dec->callback([&] { action = [&] { return run_decode(dec); }; });

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "measure bpp and PSNR of a stream (or encode the clip first)");
  add_config_options(c_eval, ev.common);
  c_eval->add_option("--original", ev.original, "original .y4m or PPM/PFM frame directory")->required();
  c_eval->add_option("--stream", ev.stream, "existing .insa stream");
  c_eval->add_option("--decoded", ev.decoded, "decoded PPM/PFM frames (default: decode the stream)");
  c_eval->add_option("-w,--weights", ev.weights, "global weights for encoding or decoding");
  c_eval->add_option("--mode", ev.mode, "encode mode when no stream is given")
      ->check(CLI::IsMember({"insta", "encoder-only", "global"}))
      ->capture_default_str();
  c_eval->add_option("--gop", ev.gop, "GoP size for encoding, or inf");
  c_eval->add_option("--subsample", ev.subsample_step, "keep every k-th frame of the original");
  c_eval->add_option("--csv", ev.csv, "append label,bpp,psnr to this CSV");
  c_eval->add_option("--label", ev.label, "curve label for --csv")->capture_default_str();
  c_eval->callback([&] { action = [&] { return run_eval(ev); }; });

  BdArgs bd;
  auto* c_bd = app.add_subcommand("bdrate", "Bjontegaard rate difference between two RD curves");
  c_bd->add_option("reference", bd.reference, "reference curve CSV")->required();
  c_bd->add_option("test", bd.test, "test curve CSV")->required();
  c_bd->add_option("--reference-label", bd.reference_label, "curve label to use from the reference CSV");
  c_bd->add_option("--test-label", bd.test_label, "curve label to use from the test CSV");
  c_bd->callback([&] { action = [&] { return run_bdrate(bd); }; });

  PlotArgs plot;
  auto* c_plot = app.add_subcommand("plot", "SVG chart of RD curves");
  c_plot->add_option("csv", plot.csvs, "RD curve CSVs")->required();
  c_plot->add_option("-o,--output", plot.out, "output .svg")->required();
  c_plot->add_option("--title", plot.title, "chart title")->capture_default_str();
  c_plot->callback([&] { action = [&] { return run_plot(plot); }; });

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "rate composition of streams");
  c_rep->add_option("stream", rep.streams, ".insa streams")->required();
  c_rep->add_option("--svg", rep.svg, "stacked-bar SVG output");
  c_rep->add_option("--csv", rep.csv, "CSV output");
  c_rep->callback([&] { action = [&] { return run_report(rep); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    return action();
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInput;
  } catch (const StreamError& e) {
    std::fprintf(stderr, "stream error: %s\n", e.what());
    return kStream;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kDomain;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
}
