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

#include <stdexcept>
#include <string>

#include "insa/entropy.hpp"

namespace insa {
namespace {

constexpr std::uint64_t kTop = 1ull << 56;
constexpr std::uint64_t kBottom = 1ull << 48;
constexpr int kFlushBytes = 2;
// The decoder primes 8 bytes but the encoder only flushes 2.
constexpr std::size_t kDecoderOverread = 8 - kFlushBytes;

void check_tables(std::span<const PmfTable> tables, std::size_t count) {
  if (tables.empty() && count > 0) throw std::invalid_argument("range coder: no tables given");
  if (tables.size() != 1 && tables.size() != count) {
    throw std::invalid_argument("range coder: " + std::to_string(tables.size()) +
                                " tables for " + std::to_string(count) + " symbols");
  }
}

}  // namespace

void RangeEncoder::encode_interval(std::uint64_t cum, std::uint64_t freq, int total_bits) {
  const std::uint64_t r = range_ >> total_bits;
  low_ += r * cum;
  range_ = r * freq;
  while ((low_ ^ (low_ + range_)) < kTop ||
         (range_ < kBottom && ((range_ = (0 - low_) & (kBottom - 1)), true))) {
    out_.push_back(static_cast<std::uint8_t>(low_ >> 56));
    low_ <<= 8;
    range_ <<= 8;
  }
}

void RangeEncoder::encode(const PmfTable& table, std::size_t symbol) {
  if (symbol >= table.size()) {
    throw std::invalid_argument("range coder: symbol " + std::to_string(symbol) +
                                " outside table of " + std::to_string(table.size()));
  }
  encode_interval(table.cum(symbol), table.freq(symbol), kPmfPrecisionBits);
}

void RangeEncoder::put_bit(bool bit) { encode_interval(bit ? 1 : 0, 1, 1); }

std::vector<std::uint8_t> RangeEncoder::finish() {
  // range_ >= 2^48 here, so a multiple of 2^48 lies in [low, low + range).
  const std::uint64_t value = (low_ + (kBottom - 1)) & ~(kBottom - 1);
  for (int i = 0; i < kFlushBytes; ++i) {
    out_.push_back(static_cast<std::uint8_t>(value >> (56 - 8 * i)));
  }
  low_ = 0;
  range_ = ~0ull;
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
  if (bytes.size() < static_cast<std::size_t>(kFlushBytes)) {
    throw StreamError(StreamError::Code::kTruncated,
                      "range-coded payload of " + std::to_string(bytes.size()) +
                          " bytes is shorter than the flush");
  }
  for (int i = 0; i < 8; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  const std::size_t pos = pos_++;
  if (pos < bytes_.size()) return bytes_[pos];
  if (pos < bytes_.size() + kDecoderOverread) return 0;
  throw StreamError(StreamError::Code::kTruncated,
                    "range decoder ran past the end of a " + std::to_string(bytes_.size()) +
                        "-byte payload at byte " + std::to_string(pos - kDecoderOverread));
}

void RangeDecoder::renormalize() {
  while ((low_ ^ (low_ + range_)) < kTop ||
         (range_ < kBottom && ((range_ = (0 - low_) & (kBottom - 1)), true))) {
    code_ = (code_ << 8) | next_byte();
    low_ <<= 8;
    range_ <<= 8;
  }
}

std::size_t RangeDecoder::decode(const PmfTable& table) {
  const std::uint64_t r = range_ >> kPmfPrecisionBits;
  std::uint64_t target = (code_ - low_) / r;
  if (target >= kPmfTotal) target = kPmfTotal - 1;  // only on corrupt input
  const std::size_t s = table.find(static_cast<std::uint32_t>(target));
  low_ += r * table.cum(s);
  range_ = r * table.freq(s);
  renormalize();
  return s;
}

bool RangeDecoder::get_bit() {
  const std::uint64_t r = range_ >> 1;
  const bool bit = (code_ - low_) / r >= 1;
  if (bit) low_ += r;
  range_ = r;
  renormalize();
  return bit;
}

void RangeDecoder::finish() const {
  if (pos_ != bytes_.size() + kDecoderOverread) {
    throw StreamError(StreamError::Code::kTruncated,
                      "range-coded payload length mismatch: consumed " +
                          std::to_string(pos_ < kDecoderOverread ? 0 : pos_ - kDecoderOverread) +
                          " of " + std::to_string(bytes_.size()) + " bytes");
  }
}

std::vector<std::uint8_t> range_encode(std::span<const int> symbols,
                                       std::span<const PmfTable> tables) {
  check_tables(tables, symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const PmfTable& t = tables.size() == 1 ? tables[0] : tables[i];
    if (symbols[i] < 0 || static_cast<std::size_t>(symbols[i]) >= t.size()) {
      throw std::invalid_argument("range_encode: symbol " + std::to_string(symbols[i]) +
                                  " at position " + std::to_string(i) + " outside table of " +
                                  std::to_string(t.size()));
    }
  }
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    enc.encode(tables.size() == 1 ? tables[0] : tables[i], static_cast<std::size_t>(symbols[i]));
  }
  return enc.finish();
}

std::vector<int> range_decode(std::span<const std::uint8_t> bytes,
                              std::span<const PmfTable> tables, std::size_t count) {
  check_tables(tables, count);
  RangeDecoder dec(bytes);
  std::vector<int> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = static_cast<int>(dec.decode(tables.size() == 1 ? tables[0] : tables[i]));
  }
  dec.finish();
  return out;
}

void BitWriter::put_bit(bool bit) {
  if (bits_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
  ++bits_;
}

void BitWriter::put_bits(std::uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) put_bit(((value >> i) & 1u) != 0);
}

bool BitReader::get_bit() {
  if (bits_ / 8 >= bytes_.size()) {
    throw StreamError(StreamError::Code::kTruncated,
                      "bit reader ran past the end at bit " + std::to_string(bits_));
  }
  const bool bit = (bytes_[bits_ / 8] >> (7 - bits_ % 8)) & 1u;
  ++bits_;
  return bit;
}

PmfTable make_escape_table(std::span<const double> in_range) {
  std::vector<double> probs(in_range.begin(), in_range.end());
  double mass = 0.0;
  for (double p : probs) mass += p;
  probs.push_back(std::max(0.0, 1.0 - mass));
  return PmfTable::from_probabilities(probs);
}

std::vector<std::uint8_t> encode_latents_with_escape(std::span<const int> symbols,
                                                     const LatentModel& model, int tail_bound) {
  if (tail_bound <= 0) throw std::invalid_argument("latent coding needs tail_bound > 0");
  const std::size_t slots = 2 * static_cast<std::size_t>(tail_bound) + 1;
  std::vector<double> probs(slots);
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    model(i, tail_bound, probs);
    const PmfTable table = make_escape_table(probs);
    const int k = symbols[i];
    if (k >= -tail_bound && k <= tail_bound) {
      enc.encode(table, static_cast<std::size_t>(k + tail_bound));
      continue;
    }
    enc.encode(table, slots);
    const std::int64_t excess = static_cast<std::int64_t>(k > 0 ? k : -static_cast<std::int64_t>(k)) -
                                tail_bound - 1;
    exp_golomb_encode(k > 0 ? excess : -excess - 1, enc);
  }
  return enc.finish();
}

std::vector<int> decode_latents_with_escape(std::span<const std::uint8_t> bytes,
                                            const LatentModel& model, int tail_bound,
                                            std::size_t count) {
  if (tail_bound <= 0) throw std::invalid_argument("latent coding needs tail_bound > 0");
  const std::size_t slots = 2 * static_cast<std::size_t>(tail_bound) + 1;
  std::vector<double> probs(slots);
  RangeDecoder dec(bytes);
  std::vector<int> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    model(i, tail_bound, probs);
    const PmfTable table = make_escape_table(probs);
    const std::size_t s = dec.decode(table);
    if (s < slots) {
      out[i] = static_cast<int>(s) - tail_bound;
      continue;
    }
    const std::int64_t v = exp_golomb_decode(dec);
    const std::int64_t k = v >= 0 ? tail_bound + 1 + v : v - tail_bound;
    if (k > INT32_MAX || k < INT32_MIN) {
      throw StreamError(StreamError::Code::kMalformed, "escaped latent value out of range");
    }
    out[i] = static_cast<int>(k);
  }
  dec.finish();
  return out;
}

}  // namespace insa
