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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "insa/bitstream.hpp"
#include "insa/codec.hpp"
#include "insa/entropy.hpp"
#include "insa/error.hpp"
#include "insa/random.hpp"
#include "insa/synthetic.hpp"
#include "insa/video.hpp"
#include "test_util.hpp"
#include "trained_model.hpp"

using namespace insa;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> random_bytes(Rng& rng, std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = static_cast<std::uint8_t>(rng.next() & 0xff);
  return v;
}

Bitstream random_stream(Rng& rng, bool with_update) {
  Bitstream s;
  s.header.preset = ArchPreset::kSsfLite;
  s.header.arch = preset_config(ArchPreset::kSsfLite);
  s.header.width = static_cast<std::uint16_t>(1 + rng.next() % 2000);
  s.header.height = static_cast<std::uint16_t>(1 + rng.next() % 2000);
  s.header.gop_size = static_cast<std::uint16_t>(rng.next() % 20);
  s.header.beta = static_cast<float>(rng.uniform(0.0, 0.01));
  if (with_update) {
    UpdateSection u;
    u.sigma = static_cast<float>(rng.uniform(0.01, 0.1));
    u.parameter_count = static_cast<std::uint32_t>(rng.next() % 100000);
    u.epsilon_exponent = static_cast<std::uint8_t>(1 + rng.next() % 20);
    u.payload = random_bytes(rng, rng.next() % 300);
    s.update = u;
    s.header.flags = kFlagUpdate;
  }
  const int frames = static_cast<int>(rng.next() % 6);
  for (int f = 0; f < frames; ++f) {
    FrameSection fs;
    fs.kind = (f == 0 || rng.next() % 4 == 0) ? FrameKind::kI : FrameKind::kP;
    for (std::size_t k = 0; k < streams_per_frame(fs.kind); ++k) {
      LatentStream l;
      l.channels = static_cast<std::uint16_t>(1 + rng.next() % 64);
      l.height = static_cast<std::uint16_t>(1 + rng.next() % 30);
      l.width = static_cast<std::uint16_t>(1 + rng.next() % 30);
      l.tail_bound = static_cast<std::uint16_t>(1 + rng.next() % 100);
      l.payload = random_bytes(rng, rng.next() % 200);
      fs.streams.push_back(std::move(l));
    }
    s.frames.push_back(std::move(fs));
  }
  s.header.frames = static_cast<std::uint32_t>(frames);
  return s;
}

StreamError::Code read_error(std::span<const std::uint8_t> bytes) {
  try {
    read_bitstream(bytes);
  } catch (const StreamError& e) {
    return e.code();
  }
  FAIL("stream was accepted");
  return StreamError::Code::kMalformed;
}

std::string read_error_message(std::span<const std::uint8_t> bytes) {
  try {
    read_bitstream(bytes);
  } catch (const StreamError& e) {
    return e.what();
  }
  return {};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("insa_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Hand conversion for the Y4M oracle (BT.709 full range).
void yuv_to_rgb(double y, double u, double v, double rgb[3]) {
  const double cb = u - 128.0, cr = v - 128.0;
  rgb[0] = y + 1.5748 * cr;
  rgb[1] = y - 0.187324 * cb - 0.468124 * cr;
  rgb[2] = y + 1.8556 * cb;
  for (int i = 0; i < 3; ++i) rgb[i] = std::clamp(rgb[i] / 255.0, 0.0, 1.0);
}

VideoClip clip_of(std::vector<Tensor> frames) {
  VideoClip c;
  c.width = frames.front().shape().w;
  c.height = frames.front().shape().h;
  c.frames = std::move(frames);
  return c;
}

bool bit_identical(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("header-only stream is 29 header bytes plus CRC") {
  Bitstream s;
  s.header.arch = preset_config(ArchPreset::kSsfLite);
  s.header.width = 64;
  s.header.height = 64;
  const auto bytes = write_bitstream(s);
  CHECK(bytes.size() == kHeaderBytes + kCrcBytes);
  CHECK(bytes.size() == 33);
  CHECK(std::memcmp(bytes.data(), "INSA", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(read_bitstream(bytes) == s);
  CHECK(section_sizes(s).total() == bytes.size());
}

TEST_CASE("fuzzed streams round-trip and their section sizes add up") {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const Bitstream s = random_stream(rng, i % 2 == 0);
    const auto bytes = write_bitstream(s);
    const Bitstream back = read_bitstream(bytes);
    REQUIRE(back == s);
    CHECK(section_sizes(s).total() == bytes.size());
    for (std::size_t f = 0; f < s.frames.size(); ++f) CHECK(back.frames[f].kind == s.frames[f].kind);
  }
}

TEST_CASE("little-endian field layout") {
  Bitstream s;
  s.header.arch = ArchConfig{0x0102, 0x0304, 0x0506, 0x0708};
  s.header.preset = ArchPreset::kCustom;
  s.header.width = 0x1234;
  s.header.height = 0x0056;
  s.header.gop_size = 12;
  s.header.beta = 1.0f;
  const auto b = write_bitstream(s);
  CHECK(b[5] == 0);  // preset
  CHECK(b[6] == 0x02);
  CHECK(b[7] == 0x01);
  CHECK(b[14] == 0x34);
  CHECK(b[15] == 0x12);
  CHECK(b[16] == 0x56);
  CHECK(b[22] == 12);
  // 1.0f = 0x3f800000
  CHECK(b[24] == 0x00);
  CHECK(b[26] == 0x80);
  CHECK(b[27] == 0x3f);
  CHECK(b[28] == 0);  // flags
  std::uint32_t crc = 0;
  for (int i = 0; i < 4; ++i) crc |= static_cast<std::uint32_t>(b[29 + i]) << (8 * i);
  CHECK(crc == crc32_of(std::span(b).first(29)));
}

TEST_CASE("CRC32 matches the IEEE check value") {
  const std::string msg = "123456789";
  CHECK(crc32_of(std::span(reinterpret_cast<const std::uint8_t*>(msg.data()), msg.size())) == 0xCBF43926u);
}

TEST_CASE("reader diagnostics") {
  Rng rng(5);
  Bitstream s = random_stream(rng, true);
  while (s.frames.empty()) s = random_stream(rng, true);
  const auto bytes = write_bitstream(s);

  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    CHECK(read_error(b) == StreamError::Code::kBadMagic);
    CHECK(read_error_message(b) == "not an INSA stream");
    CHECK(read_error(std::vector<std::uint8_t>{}) == StreamError::Code::kBadMagic);
  }
  SUBCASE("future version") {
    auto b = bytes;
    b[4] = 2;
    CHECK(read_error(b) == StreamError::Code::kUnsupportedVersion);
    CHECK(read_error_message(b).find("version 2") != std::string::npos);
  }
  SUBCASE("every truncation") {
    for (std::size_t n = 4; n < bytes.size(); ++n) {
      CHECK(read_error(std::span(bytes).first(n)) == StreamError::Code::kTruncated);
    }
  }
  SUBCASE("trailing bytes") {
    auto b = bytes;
    b.push_back(0);
    CHECK(read_error(b) == StreamError::Code::kMalformed);
  }
  SUBCASE("flipping any payload byte") {
    const auto sizes = section_sizes(s);
    // Update payload starts after its 25 fixed bytes.
    std::size_t off = kHeaderBytes + 25;
    for (std::size_t i = 0; i < s.update->payload.size(); ++i) {
      auto b = bytes;
      b[off + i] ^= 0x10;
      CHECK(read_error(b) == StreamError::Code::kCrcMismatch);
    }
    off = kHeaderBytes + sizes.update;
    for (const auto& f : s.frames) {
      off += 1;
      for (const auto& l : f.streams) {
        off += 12;
        for (std::size_t i = 0; i < l.payload.size(); ++i) {
          auto b = bytes;
          b[off + i] ^= 0x01;
          CHECK(read_error(b) == StreamError::Code::kCrcMismatch);
        }
        off += l.payload.size();
      }
    }
    CHECK(off + kCrcBytes == bytes.size());
  }
  SUBCASE("unknown frame kind") {
    auto b = bytes;
    b[kHeaderBytes + section_sizes(s).update] = 7;
    CHECK(read_error(b) == StreamError::Code::kMalformed);
  }
}

TEST_CASE("writer rejects inconsistent sections") {
  Bitstream s;
  s.header.arch = preset_config(ArchPreset::kSsfLite);
  s.header.frames = 1;
  CHECK_THROWS_AS(write_bitstream(s), std::invalid_argument);
  s.frames.push_back(FrameSection{FrameKind::kP, {LatentStream{}, LatentStream{}}});
  CHECK_THROWS_AS(write_bitstream(s), std::invalid_argument);
}

TEST_CASE("weights file round-trips and detects damage") {
  const SsfModel m(preset_config(ArchPreset::kSsfLite), 3);
  const auto bytes = serialize_weights(m);
  CHECK(bytes.size() == 4 + 1 + 1 + 8 + 4 + 4 + 4 * m.parameter_count() + 4);
  const SsfModel back = deserialize_weights(bytes);
  CHECK(back.config() == m.config());
  const auto a = m.parameters(), b = back.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(bit_identical(a[i].tensor, b[i].tensor));
  }
  auto bad = bytes;
  bad[bytes.size() / 2] ^= 1;
  CHECK_THROWS_AS(deserialize_weights(bad), StreamError);
  CHECK_THROWS_AS(deserialize_weights(std::span(bytes).first(bytes.size() - 1)), StreamError);
  CHECK_THROWS_AS(deserialize_weights(std::span(bytes).subspan(1)), StreamError);

  TempDir dir("wts");
  save_weights(dir.file("m.wts"), m);
  CHECK(serialize_weights(load_weights(dir.file("m.wts"))) == bytes);
  CHECK_THROWS_AS(load_weights(dir.file("missing.wts")), InputError);
}

TEST_CASE("Y4M 4:2:0 matches the hand BT.709 conversion") {
  TempDir dir("y4m");
  const int w = 4, h = 4;
  std::vector<std::uint8_t> planes[2];
  std::ofstream out(dir.file("a.y4m"), std::ios::binary);
  out << "YUV4MPEG2 W4 H4 F25:1 Ip A1:1 C420jpeg\n";
  for (int f = 0; f < 2; ++f) {
    auto& p = planes[f];
    for (int i = 0; i < w * h; ++i) p.push_back(static_cast<std::uint8_t>(16 + 13 * i + 40 * f));
    for (int i = 0; i < 4; ++i) p.push_back(static_cast<std::uint8_t>(60 + 30 * i + f));   // U
    for (int i = 0; i < 4; ++i) p.push_back(static_cast<std::uint8_t>(200 - 25 * i - f));  // V
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size()));
  }
  out.close();
  const VideoClip clip = read_y4m(dir.file("a.y4m"));
  REQUIRE(clip.size() == 2);
  CHECK(clip.width == 4);
  CHECK(clip.height == 4);
  CHECK(clip.fps == doctest::Approx(25.0));
  double worst = 0.0;
  for (int f = 0; f < 2; ++f) {
    const auto& p = planes[f];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int ci = (y / 2) * 2 + x / 2;
        double rgb[3];
        yuv_to_rgb(p[y * w + x], p[16 + ci], p[20 + ci], rgb);
        for (int c = 0; c < 3; ++c) worst = std::max(worst, std::fabs(clip.frames[f].at(0, c, y, x) - rgb[c]));
      }
    }
  }
  CHECK(worst <= 1.0 / 255.0);
}

TEST_CASE("Y4M 4:4:4 write/read stays within one code value") {
  TempDir dir("y4m444");
  VideoClip clip = clip_of(synthetic_clip(2, 8, 10, 4));
  write_y4m(dir.file("c.y4m"), clip);
  const VideoClip back = read_y4m(dir.file("c.y4m"));
  REQUIRE(back.size() == 2);
  double worst = 0.0;
  for (int f = 0; f < 2; ++f) {
    for (std::size_t i = 0; i < back.frames[f].numel(); ++i) {
      worst = std::max(worst, static_cast<double>(std::fabs(back.frames[f].data()[i] - clip.frames[f].data()[i])));
    }
  }
  CHECK(worst <= 2.0 / 255.0);
}

TEST_CASE("Y4M rejects what it cannot read") {
  TempDir dir("y4mbad");
  {
    std::ofstream o(dir.file("422.y4m"), std::ios::binary);
    o << "YUV4MPEG2 W2 H2 F25:1 C422\nFRAME\n" << std::string(8, '\x80');
  }
  CHECK_THROWS_WITH_AS(read_y4m(dir.file("422.y4m")), doctest::Contains("colorspace"), InputError);
  {
    std::ofstream o(dir.file("short.y4m"), std::ios::binary);
    o << "YUV4MPEG2 W2 H2 F25:1 C444\nFRAME\n" << std::string(5, '\x80');
  }
  CHECK_THROWS_WITH_AS(read_y4m(dir.file("short.y4m")), doctest::Contains("truncated"), InputError);
  {
    std::ofstream o(dir.file("junk.y4m"), std::ios::binary);
    o << "RIFF";
  }
  CHECK_THROWS_AS(read_y4m(dir.file("junk.y4m")), InputError);
  CHECK_THROWS_AS(read_video(dir.file("absent.y4m")), InputError);
}

TEST_CASE("PPM and PFM frame directories") {
  TempDir dir("ppm");
  SUBCASE("empty directory") {
    CHECK_THROWS_WITH_AS(read_frame_dir(dir.path.string()), doctest::Contains("no frames found"), InputError);
  }
  SUBCASE("8-bit values round-trip exactly, files in lexicographic order") {
    std::vector<Tensor> frames;
    for (int f = 0; f < 3; ++f) {
      Tensor t(Shape{1, 3, 5, 7});
      for (std::size_t i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<float>((i * 7 + f * 31) % 256) / 255.0f;
      frames.push_back(t);
    }
    write_frame_dir(dir.path.string(), frames);
    const VideoClip clip = read_video(dir.path.string());
    REQUIRE(clip.size() == 3);
    for (int f = 0; f < 3; ++f) CHECK(bit_identical(clip.frames[f], frames[f]));
  }
  SUBCASE("mixed sizes") {
    write_ppm(dir.file("a.ppm"), Tensor(Shape{1, 3, 4, 4}, 0.5f));
    write_ppm(dir.file("b.ppm"), Tensor(Shape{1, 3, 4, 5}, 0.5f));
    CHECK_THROWS_WITH_AS(read_frame_dir(dir.path.string()), doctest::Contains("differs"), InputError);
  }
  SUBCASE("16-bit PPM with a comment") {
    std::ofstream o(dir.file("x.ppm"), std::ios::binary);
    o << "P6\n# made by hand\n1 1\n65535\n";
    const unsigned char px[6] = {0xff, 0xff, 0x80, 0x00, 0x00, 0x00};
    o.write(reinterpret_cast<const char*>(px), 6);
    o.close();
    const Tensor t = read_ppm(dir.file("x.ppm"));
    CHECK(t.at(0, 0, 0, 0) == 1.0f);
    CHECK(t.at(0, 1, 0, 0) == doctest::Approx(32768.0 / 65535.0));
    CHECK(t.at(0, 2, 0, 0) == 0.0f);
  }
  SUBCASE("PFM is lossless") {
    const Tensor t = testing::random_tensor(Shape{1, 3, 6, 9}, 8, -0.3, 1.4);
    write_pfm(dir.file("t.pfm"), t);
    CHECK(bit_identical(read_pfm(dir.file("t.pfm")), t));
  }
  SUBCASE("PFM directories read back bit-exactly") {
    std::vector<Tensor> frames;
    for (int f = 0; f < 2; ++f) frames.push_back(testing::random_tensor(Shape{1, 3, 4, 6}, 30 + f, -0.1, 1.1));
    write_frame_dir(dir.path.string(), frames, "pfm");
    const VideoClip clip = read_video(dir.path.string());
    REQUIRE(clip.size() == 2);
    for (int f = 0; f < 2; ++f) CHECK(bit_identical(clip.frames[f], frames[f]));
  }
  SUBCASE("a directory may not mix PPM and PFM") {
    write_ppm(dir.file("a.ppm"), Tensor(Shape{1, 3, 4, 4}, 0.5f));
    write_pfm(dir.file("b.pfm"), Tensor(Shape{1, 3, 4, 4}, 0.5f));
    CHECK_THROWS_WITH_AS(read_frame_dir(dir.path.string()), doctest::Contains("mixes"), InputError);
  }
}

TEST_CASE("subsampling keeps every k-th frame") {
  VideoClip clip = clip_of(synthetic_clip(10, 4, 4, 1));
  const VideoClip s = subsample(clip, 3);
  REQUIRE(s.size() == 4);
  CHECK(bit_identical(s.frames[1], clip.frames[3]));
  CHECK(subsample(clip, 2, 3).size() == 3);
  CHECK_THROWS_AS(subsample(clip, 0), std::invalid_argument);
}

TEST_CASE("padding to multiples of 64") {
  SUBCASE("64x64 is unchanged") {
    const Tensor t = testing::random_tensor(Shape{1, 3, 64, 64}, 1);
    CHECK(bit_identical(pad_to_multiple(t, 64), t));
  }
  SUBCASE("100x60 pads to 128x64 and crops back") {
    const Tensor t = testing::random_tensor(Shape{1, 3, 60, 100}, 2);
    const Tensor p = pad_to_multiple(t, 64);
    CHECK(p.shape() == Shape{1, 3, 64, 128});
    CHECK(bit_identical(crop(p, 100, 60), t));
    // Index-map oracle: padded column 100 + j mirrors column 98 - j.
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < 64; ++y) {
        const int sy = y < 60 ? y : 2 * 59 - y;
        for (int x = 0; x < 128; ++x) {
          const int sx = x < 100 ? x : 2 * 99 - x;
          REQUIRE(p.at(0, c, y, x) == t.at(0, c, sy, sx));
        }
      }
    }
  }
  SUBCASE("narrow frames fold repeatedly") {
    const Tensor t = testing::random_tensor(Shape{1, 3, 3, 1}, 3);
    const Tensor p = pad_to_multiple(t, 8);
    CHECK(p.shape() == Shape{1, 3, 8, 8});
    const int rows[8] = {0, 1, 2, 1, 0, 1, 2, 1};
    for (int y = 0; y < 8; ++y) CHECK(p.at(0, 1, y, 5) == t.at(0, 1, rows[y], 0));
  }
  CHECK_THROWS_AS(crop(Tensor(Shape{1, 3, 4, 4}), 5, 4), std::invalid_argument);
}

TEST_CASE("codec round trip is bit-exact") {
  const SsfModel& global = testing::trained_lite_model();
  VideoClip clip = clip_of(synthetic_clip(4, 60, 100, 9));

  SUBCASE("global mode with padding and P-frames") {
    EncoderConfig cfg;
    cfg.mode = EncodeMode::kGlobal;
    cfg.gop_size = 3;
    const EncodeResult enc = encode_clip(global, clip, cfg);
    CHECK_FALSE(enc.stream.update.has_value());
    CHECK(enc.bytes.size() == section_sizes(enc.stream).total());
    const DecodeResult dec = decode_stream(global, enc.bytes);
    REQUIRE(dec.frames.size() == 4);
    CHECK(dec.header.width == 100);
    CHECK(dec.header.height == 60);
    for (std::size_t i = 0; i < 4; ++i) CHECK(bit_identical(dec.frames[i], enc.recons[i]));
    const auto plan = gop_plan(4, 3);
    for (std::size_t i = 0; i < 4; ++i) CHECK(enc.stream.frames[i].kind == plan[i].kind);
  }
  SUBCASE("single frame clip") {
    VideoClip one = clip_of({clip.frames[0]});
    EncoderConfig cfg;
    cfg.mode = EncodeMode::kGlobal;
    const EncodeResult enc = encode_clip(global, one, cfg);
    REQUIRE(enc.stream.frames.size() == 1);
    CHECK(enc.stream.frames[0].kind == FrameKind::kI);
    CHECK(bit_identical(decode_stream(global, enc.bytes).frames[0], enc.recons[0]));
  }
  SUBCASE("update section with a short finetune") {
    EncoderConfig cfg;
    cfg.mode = EncodeMode::kInsta;
    cfg.gop_size = 0;
    cfg.finetune.max_steps = 4;
    cfg.finetune.checkpoint_every = 2;
    cfg.finetune.lr = 1e-3f;
    const EncodeResult enc = encode_clip(global, clip, cfg);
    REQUIRE(enc.stream.update.has_value());
    CHECK(enc.stream.update->parameter_count == global.parameter_count(Side::kReceiver));
    const DecodeResult dec = decode_stream(global, enc.bytes);
    std::size_t nonzero = 0;
    for (int s : enc.update_symbols) nonzero += s != 0;
    CHECK(dec.nonzero_updates == nonzero);
    CHECK(nonzero > 0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(bit_identical(dec.frames[i], enc.recons[i]));
    // Update payload length tracks its information content.
    const double coded = 8.0 * enc.stream.update->payload.size();
    CHECK(coded <= enc.update_bits_estimate * 1.001 + 64.0);
    CHECK(coded >= enc.update_bits_estimate - 64.0);
  }
  SUBCASE("decoder rejects a different architecture") {
    EncoderConfig cfg;
    cfg.mode = EncodeMode::kGlobal;
    const EncodeResult enc = encode_clip(global, clip_of({clip.frames[0]}), cfg);
    const SsfModel other(ArchConfig{16, 16, 16, 16}, 1);
    CHECK_THROWS_AS(decode_stream(other, enc.bytes), InputError);
  }
}

TEST_CASE("coded latent size agrees with eval-mode rate per frame") {
  const SsfModel& global = testing::trained_lite_model();
  EncoderConfig cfg;
  cfg.mode = EncodeMode::kGlobal;
  cfg.gop_size = 12;
  const EncodeResult enc = encode_clip(global, clip_of(synthetic_clip(3, 64, 64, 77)), cfg);
  for (std::size_t f = 0; f < enc.stream.frames.size(); ++f) {
    double coded = 0.0;
    for (const auto& l : enc.stream.frames[f].streams) coded += 8.0 * l.payload.size();
    const double est = enc.frame_bits_estimate[f];
    INFO("frame " << f << " coded " << coded << " estimate " << est);
    if (enc.stream.frames[f].kind == FrameKind::kI) {
      CHECK(std::fabs(coded - est) <= 64.0 + 0.001 * est);
    } else {
      // Residual symbols the model rates below 2^-16 cost at most ~16 bits
      // in a 16-bit table, so a P-frame can come out below its estimate.
      CHECK(coded <= est * 1.001 + 64.0);
    }
  }
}

TEST_CASE("zero update costs at most 0.05 bits per parameter plus 64 bytes") {
  const SsfModel global(preset_config(ArchPreset::kSsfLite), 1);
  const SpikeSlabPrior prior = canonical_prior(SpikeSlabPrior{});
  const UpdateQuantGrid grid = build_update_grid(prior, canonical_bin_width(0.001), 1.0 / 256);
  const std::size_t m = global.parameter_count(Side::kReceiver);
  const PmfTable pmf = spike_slab_bin_pmf(grid, prior);
  const std::vector<int> idx(m, update_symbol_to_index(0, grid));
  UpdateSection u;
  u.parameter_count = static_cast<std::uint32_t>(m);
  u.payload = range_encode(idx, std::span<const PmfTable>(&pmf, 1));
  const std::size_t overhead = update_section_size(u);
  CHECK(overhead <= (static_cast<std::size_t>(std::ceil(0.05 * m / 8.0)) + 64));
}
