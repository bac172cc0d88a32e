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

// The .insa container. Little-endian throughout:
//
//   header   "INSA" u8 version, u8 arch preset, 4 x u16 channels,
//            u16 width, u16 height, u32 frames, u16 gop (0 = infinite),
//            f32 beta, u8 flags (bit 0: update section present)
//   update   f32 sigma, f32 spike, f32 alpha, f32 bin width,
//            u8 epsilon exponent, u32 parameter count,
//            u32 payload length, payload, u32 payload CRC32
//   frames   per frame: u8 kind, then per latent stream
//            u16 c, u16 h, u16 w, u16 tail bound, u32 length, payload
//   trailer  u32 CRC32 of everything before it
//
// I-frames carry two streams (y, z), P-frames four
// (flow y, flow z, residual y, residual z).

#ifndef INSA_BITSTREAM_HPP_
#define INSA_BITSTREAM_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "insa/model.hpp"

namespace insa {

inline constexpr std::uint8_t kBitstreamVersion = 1;
inline constexpr std::size_t kHeaderBytes = 29;
inline constexpr std::size_t kCrcBytes = 4;
inline constexpr std::uint8_t kFlagUpdate = 0x01;

struct BitstreamHeader {
  std::uint8_t version = kBitstreamVersion;
  ArchPreset preset = ArchPreset::kSsfLite;
  ArchConfig arch;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint32_t frames = 0;
  std::uint16_t gop_size = 12;
  float beta = 0.0f;
  std::uint8_t flags = 0;

  friend bool operator==(const BitstreamHeader&, const BitstreamHeader&) = default;
};

struct UpdateSection {
  float sigma = 0.05f;
  float spike = 0.001f / 6.0f;
  float alpha = 100.0f;
  float bin_width = 0.001f;
  std::uint8_t epsilon_exponent = 8;
  std::uint32_t parameter_count = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const UpdateSection&, const UpdateSection&) = default;
};

struct LatentStream {
  std::uint16_t channels = 0;
  std::uint16_t height = 0;
  std::uint16_t width = 0;
  std::uint16_t tail_bound = 1;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const LatentStream&, const LatentStream&) = default;
};

struct FrameSection {
  FrameKind kind = FrameKind::kI;
  std::vector<LatentStream> streams;

  friend bool operator==(const FrameSection&, const FrameSection&) = default;
};

std::size_t streams_per_frame(FrameKind kind);

struct Bitstream {
  BitstreamHeader header;
  std::optional<UpdateSection> update;
  std::vector<FrameSection> frames;

  friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

// Byte sizes of each part of a serialized stream. They add up to the
// file size.
struct SectionSizes {
  std::size_t header = kHeaderBytes;
  std::size_t update = 0;
  std::vector<std::size_t> frames;               // whole frame sections
  std::vector<std::vector<std::size_t>> streams;  // per stream, incl. its 12-byte header
  std::size_t crc = kCrcBytes;

  std::size_t total() const;
};

std::size_t update_section_size(const UpdateSection& u);
std::size_t frame_section_size(const FrameSection& f);
SectionSizes section_sizes(const Bitstream& stream);

// Serializes `stream`. The flags byte is derived from whether an update
// section is present, and the frame count must match the header.
std::vector<std::uint8_t> write_bitstream(const Bitstream& stream);
// Throws StreamError with a code per failure kind.
Bitstream read_bitstream(std::span<const std::uint8_t> bytes);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

// Global weights: "INSW", u8 version, u8 preset, 4 x u16 channels,
// u32 tensor count, u32 float count, f32 values in declaration order,
// u32 CRC32.
std::vector<std::uint8_t> serialize_weights(const SsfModel& model);
SsfModel deserialize_weights(std::span<const std::uint8_t> bytes);
void save_weights(const std::string& path, const SsfModel& model);
SsfModel load_weights(const std::string& path);

}  // namespace insa

#endif  // INSA_BITSTREAM_HPP_
