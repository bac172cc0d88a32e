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

// Static-model range coding over PmfTables, plus order-0 Exp-Golomb codes
// for latent values that fall outside a table's support.
//
// The range coder is the carry-less byte-oriented scheme (Subbotin) held in
// 64-bit registers. Renormalization keeps the range above 2^48, so with
// 16-bit tables the per-symbol truncation loss stays below 2^-32 bits.
// A stream ends with a fixed two-byte flush.

#ifndef INSA_ENTROPY_HPP_
#define INSA_ENTROPY_HPP_

#include <concepts>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "insa/error.hpp"
#include "insa/pmf.hpp"

namespace insa {

class RangeEncoder {
 public:
  void encode(const PmfTable& table, std::size_t symbol);
  // Equiprobable bit that bypasses any table.
  void put_bit(bool bit);
  std::vector<std::uint8_t> finish();

 private:
  void encode_interval(std::uint64_t cum, std::uint64_t freq, int total_bits);

  std::uint64_t low_ = 0;
  std::uint64_t range_ = ~0ull;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  std::size_t decode(const PmfTable& table);
  bool get_bit();
  // Throws unless exactly the encoder's bytes were consumed.
  void finish() const;

 private:
  std::uint8_t next_byte();
  void renormalize();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint64_t low_ = 0;
  std::uint64_t range_ = ~0ull;
  std::uint64_t code_ = 0;
};

// `tables` holds either one table shared by every symbol or one per symbol.
std::vector<std::uint8_t> range_encode(std::span<const int> symbols,
                                       std::span<const PmfTable> tables);
std::vector<int> range_decode(std::span<const std::uint8_t> bytes,
                              std::span<const PmfTable> tables, std::size_t count);

// MSB-first bit packing; the last byte is zero-padded.
class BitWriter {
 public:
  void put_bit(bool bit);
  void put_bits(std::uint64_t value, int count);
  std::size_t bit_count() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  bool get_bit();
  std::size_t position() const { return bits_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

template <typename W>
concept BitSink = requires(W w, bool b) { w.put_bit(b); };

template <typename R>
concept BitSource = requires(R r) {
  { r.get_bit() } -> std::convertible_to<bool>;
};

constexpr std::uint64_t zigzag(std::int64_t v) {
  return v >= 0 ? static_cast<std::uint64_t>(v) << 1
                : (static_cast<std::uint64_t>(-(v + 1)) << 1) | 1u;
}

constexpr std::int64_t unzigzag(std::uint64_t m) {
  return (m & 1u) ? -static_cast<std::int64_t>(m >> 1) - 1 : static_cast<std::int64_t>(m >> 1);
}

// Order-0 Exp-Golomb: floor(log2(m + 1)) zeros, then m + 1 in binary.
template <BitSink W>
void exp_golomb_encode_unsigned(std::uint64_t m, W& out) {
  const std::uint64_t v = m + 1;
  int len = 0;
  while ((v >> len) > 1) ++len;
  for (int i = 0; i < len; ++i) out.put_bit(false);
  for (int i = len; i >= 0; --i) out.put_bit(((v >> i) & 1u) != 0);
}

template <BitSource R>
std::uint64_t exp_golomb_decode_unsigned(R& in) {
  int zeros = 0;
  while (!in.get_bit()) {
    if (++zeros > 62) throw StreamError(StreamError::Code::kMalformed, "Exp-Golomb prefix too long");
  }
  std::uint64_t v = 1;
  for (int i = 0; i < zeros; ++i) v = (v << 1) | (in.get_bit() ? 1u : 0u);
  return v - 1;
}

template <BitSink W>
void exp_golomb_encode(std::int64_t value, W& out) {
  exp_golomb_encode_unsigned(zigzag(value), out);
}

template <BitSource R>
std::int64_t exp_golomb_decode(R& in) {
  return unzigzag(exp_golomb_decode_unsigned(in));
}

// Fills `probs` (2 * tail_bound + 1 entries) with the model's probabilities
// of symbols -tail_bound..tail_bound for latent element `index`.
using LatentModel =
    std::function<void(std::size_t index, int tail_bound, std::span<double> probs)>;

// In-range probabilities followed by one escape slot carrying the leftover
// mass (at least one count after quantization).
PmfTable make_escape_table(std::span<const double> in_range);

// Symbols with |k| <= tail_bound go through the table; others are coded as
// the escape slot followed by Exp-Golomb bits of the excess magnitude, sign
// folded in by zigzag.
std::vector<std::uint8_t> encode_latents_with_escape(std::span<const int> symbols,
                                                     const LatentModel& model, int tail_bound);
std::vector<int> decode_latents_with_escape(std::span<const std::uint8_t> bytes,
                                            const LatentModel& model, int tail_bound,
                                            std::size_t count);

}  // namespace insa

#endif  // INSA_ENTROPY_HPP_
