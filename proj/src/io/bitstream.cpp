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

#include "insa/bitstream.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "insa/error.hpp"

namespace insa {
namespace {

constexpr char kMagic[4] = {'I', 'N', 'S', 'A'};
constexpr char kWeightsMagic[4] = {'I', 'N', 'S', 'W'};
constexpr std::uint8_t kWeightsVersion = 1;
constexpr std::size_t kStreamHeaderBytes = 12;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void raw(const char* s, std::size_t n) { out_.insert(out_.end(), s, s + n); }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> b, const char* what) : b_(b), what_(what) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > b_.size() - pos_) {
      throw StreamError(StreamError::Code::kTruncated,
                        std::string(what_) + " truncated: need " + std::to_string(n) +
                            " bytes at offset " + std::to_string(pos_) + ", have " +
                            std::to_string(b_.size() - pos_));
    }
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
  const char* what_;
};

void write_arch(Writer& w, ArchPreset preset, const ArchConfig& a) {
  w.u8(static_cast<std::uint8_t>(preset));
  for (int c : {a.codec_channels, a.hyper_channels, a.latent_channels, a.hyperlatent_channels}) {
    if (c < 1 || c > 0xffff) throw std::invalid_argument("channel count does not fit in u16");
    w.u16(static_cast<std::uint16_t>(c));
  }
}

void read_arch(Reader& r, ArchPreset* preset, ArchConfig* a) {
  const std::uint8_t p = r.u8();
  if (p > static_cast<std::uint8_t>(ArchPreset::kSsf3)) {
    throw StreamError(StreamError::Code::kMalformed, "unknown architecture preset " + std::to_string(p));
  }
  *preset = static_cast<ArchPreset>(p);
  a->codec_channels = r.u16();
  a->hyper_channels = r.u16();
  a->latent_channels = r.u16();
  a->hyperlatent_channels = r.u16();
  if (a->codec_channels == 0 || a->hyper_channels == 0 || a->latent_channels == 0 ||
      a->hyperlatent_channels == 0) {
    throw StreamError(StreamError::Code::kMalformed, "zero channel count in architecture");
  }
}

void check_crc(std::span<const std::uint8_t> bytes, const char* what) {
  const std::size_t body = bytes.size() - kCrcBytes;
  Reader tail(bytes.subspan(body), what);
  const std::uint32_t stored = tail.u32();
  const std::uint32_t actual = crc32_of(bytes.first(body));
  if (stored != actual) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s CRC mismatch: stored %08x, computed %08x", what, stored, actual);
    throw StreamError(StreamError::Code::kCrcMismatch, buf);
  }
}

std::uint32_t checked_u32(std::size_t n, const char* what) {
  if (n > 0xffffffffu) throw std::invalid_argument(std::string(what) + " exceeds 4 GiB");
  return static_cast<std::uint32_t>(n);
}

}  // namespace

std::size_t streams_per_frame(FrameKind kind) { return kind == FrameKind::kI ? 2 : 4; }

std::size_t SectionSizes::total() const {
  std::size_t t = header + update + crc;
  for (std::size_t f : frames) t += f;
  return t;
}

std::size_t update_section_size(const UpdateSection& u) {
  return 4 * 4 + 1 + 4 + 4 + u.payload.size() + 4;
}

std::size_t frame_section_size(const FrameSection& f) {
  std::size_t n = 1;
  for (const auto& s : f.streams) n += kStreamHeaderBytes + s.payload.size();
  return n;
}

SectionSizes section_sizes(const Bitstream& stream) {
  SectionSizes s;
  s.update = stream.update ? update_section_size(*stream.update) : 0;
  for (const auto& f : stream.frames) {
    s.frames.push_back(frame_section_size(f));
    std::vector<std::size_t> per;
    for (const auto& l : f.streams) per.push_back(kStreamHeaderBytes + l.payload.size());
    s.streams.push_back(std::move(per));
  }
  return s;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> write_bitstream(const Bitstream& stream) {
  const BitstreamHeader& h = stream.header;
  if (h.frames != stream.frames.size()) {
    throw std::invalid_argument("header declares " + std::to_string(h.frames) + " frames, stream has " +
                                std::to_string(stream.frames.size()));
  }
  Writer w;
  w.raw(kMagic, 4);
  w.u8(h.version);
  write_arch(w, h.preset, h.arch);
  w.u16(h.width);
  w.u16(h.height);
  w.u32(h.frames);
  w.u16(h.gop_size);
  w.f32(h.beta);
  w.u8(static_cast<std::uint8_t>((h.flags & ~kFlagUpdate) | (stream.update ? kFlagUpdate : 0)));
  if (stream.update) {
    const UpdateSection& u = *stream.update;
    w.f32(u.sigma);
    w.f32(u.spike);
    w.f32(u.alpha);
    w.f32(u.bin_width);
    w.u8(u.epsilon_exponent);
    w.u32(u.parameter_count);
    w.u32(checked_u32(u.payload.size(), "update payload"));
    w.bytes(u.payload);
    w.u32(crc32_of(u.payload));
  }
  for (const auto& f : stream.frames) {
    if (f.streams.size() != streams_per_frame(f.kind)) {
      throw std::invalid_argument("frame section has " + std::to_string(f.streams.size()) + " streams, expected " +
                                  std::to_string(streams_per_frame(f.kind)));
    }
    w.u8(static_cast<std::uint8_t>(f.kind));
    for (const auto& s : f.streams) {
      w.u16(s.channels);
      w.u16(s.height);
      w.u16(s.width);
      w.u16(s.tail_bound);
      w.u32(checked_u32(s.payload.size(), "latent payload"));
      w.bytes(s.payload);
    }
  }
  w.u32(crc32_of(w.data()));
  return std::move(w.data());
}

Bitstream read_bitstream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw StreamError(StreamError::Code::kBadMagic, "not an INSA stream");
  }
  Reader r(bytes, "INSA stream");
  r.bytes(4);
  Bitstream s;
  BitstreamHeader& h = s.header;
  h.version = r.u8();
  if (h.version != kBitstreamVersion) {
    throw StreamError(StreamError::Code::kUnsupportedVersion,
                      "unsupported INSA stream version " + std::to_string(h.version) +
                          " (this reader handles version " + std::to_string(kBitstreamVersion) + ")");
  }
  read_arch(r, &h.preset, &h.arch);
  h.width = r.u16();
  h.height = r.u16();
  h.frames = r.u32();
  h.gop_size = r.u16();
  h.beta = r.f32();
  h.flags = r.u8();
  if (h.width == 0 || h.height == 0) throw StreamError(StreamError::Code::kMalformed, "zero frame dimensions");
  if (h.flags & kFlagUpdate) {
    UpdateSection u;
    u.sigma = r.f32();
    u.spike = r.f32();
    u.alpha = r.f32();
    u.bin_width = r.f32();
    u.epsilon_exponent = r.u8();
    u.parameter_count = r.u32();
    const std::uint32_t len = r.u32();
    auto payload = r.bytes(len);
    u.payload.assign(payload.begin(), payload.end());
    const std::uint32_t crc = r.u32();
    if (crc != crc32_of(u.payload)) {
      throw StreamError(StreamError::Code::kCrcMismatch, "update section CRC mismatch");
    }
    s.update = std::move(u);
  }
  // Each frame section needs at least its kind byte and two stream headers.
  if (h.frames > r.remaining() / (1 + 2 * kStreamHeaderBytes) + 1) {
    throw StreamError(StreamError::Code::kTruncated,
                      "INSA stream truncated: header declares " + std::to_string(h.frames) + " frames");
  }
  for (std::uint32_t i = 0; i < h.frames; ++i) {
    FrameSection f;
    const std::uint8_t kind = r.u8();
    if (kind > 1) {
      throw StreamError(StreamError::Code::kMalformed,
                        "frame " + std::to_string(i) + " has unknown kind " + std::to_string(kind));
    }
    f.kind = static_cast<FrameKind>(kind);
    for (std::size_t k = 0; k < streams_per_frame(f.kind); ++k) {
      LatentStream l;
      l.channels = r.u16();
      l.height = r.u16();
      l.width = r.u16();
      l.tail_bound = r.u16();
      auto payload = r.bytes(r.u32());
      l.payload.assign(payload.begin(), payload.end());
      f.streams.push_back(std::move(l));
    }
    s.frames.push_back(std::move(f));
  }
  if (r.remaining() < kCrcBytes) {
    throw StreamError(StreamError::Code::kTruncated, "INSA stream truncated: missing trailing CRC");
  }
  if (r.remaining() > kCrcBytes) {
    throw StreamError(StreamError::Code::kMalformed,
                      std::to_string(r.remaining() - kCrcBytes) + " unexpected bytes before the trailing CRC");
  }
  check_crc(bytes, "INSA stream");
  return s;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed for " + path);
}

std::vector<std::uint8_t> serialize_weights(const SsfModel& model) {
  Writer w;
  w.raw(kWeightsMagic, 4);
  w.u8(kWeightsVersion);
  write_arch(w, preset_for(model.config()), model.config());
  const auto params = model.parameters();
  std::size_t floats = 0;
  for (const auto& p : params) floats += p.tensor.numel();
  w.u32(checked_u32(params.size(), "tensor count"));
  w.u32(checked_u32(floats, "weight count"));
  for (const auto& p : params) {
    for (float v : p.tensor.data()) w.f32(v);
  }
  w.u32(crc32_of(w.data()));
  return std::move(w.data());
}

SsfModel deserialize_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kWeightsMagic, 4) != 0) {
    throw StreamError(StreamError::Code::kBadMagic, "not an INSA weights file");
  }
  Reader r(bytes, "weights file");
  r.bytes(4);
  const std::uint8_t version = r.u8();
  if (version != kWeightsVersion) {
    throw StreamError(StreamError::Code::kUnsupportedVersion,
                      "unsupported weights version " + std::to_string(version));
  }
  ArchPreset preset;
  ArchConfig arch;
  read_arch(r, &preset, &arch);
  const std::uint32_t tensors = r.u32();
  const std::uint32_t floats = r.u32();
  if (static_cast<std::uint64_t>(floats) * 4 + kCrcBytes != r.remaining()) {
    throw StreamError(StreamError::Code::kTruncated,
                      "weights file holds " + std::to_string(r.remaining()) + " bytes after the header, expected " +
                          std::to_string(static_cast<std::uint64_t>(floats) * 4 + kCrcBytes));
  }
  check_crc(bytes, "weights file");
  SsfModel model(arch, 0);
  if (model.parameters().size() != tensors || model.parameter_count() != floats) {
    throw StreamError(StreamError::Code::kMalformed, "weights file does not match its architecture");
  }
  model.visit([&](const std::string&, Tensor& t, Side) {
    for (float& v : t.data()) v = r.f32();
  });
  return model;
}

void save_weights(const std::string& path, const SsfModel& model) {
  write_file(path, serialize_weights(model));
}

SsfModel load_weights(const std::string& path) { return deserialize_weights(read_file(path)); }

}  // namespace insa
