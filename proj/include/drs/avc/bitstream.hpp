#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace drs::avc {

/// MSB-first reader over an RBSP. Every read past the end throws
/// Error(BitstreamExhausted); the cursor never leaves the buffer.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> data) noexcept : data_(data) {}

  std::uint32_t read_bits(int n);
  bool read_flag() { return read_bits(1) != 0; }
  /// Unsigned Exp-Golomb, ue(v). More than 31 leading zeros is MalformedSyntax.
  std::uint32_t read_ue();
  /// Signed Exp-Golomb, se(v): k -> (-1)^(k+1) * ceil(k/2).
  std::int32_t read_se();
  void skip_bits(std::size_t n);

  std::size_t bits_left() const noexcept { return data_.size() * 8 - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

class BitWriter {
 public:
  void write_bits(std::uint64_t value, int n);
  void write_flag(bool v) { write_bits(v ? 1 : 0, 1); }
  void write_ue(std::uint32_t value);
  void write_se(std::int32_t value);
  /// rbsp_stop_one_bit followed by zero bits up to the byte boundary.
  void write_trailing_bits();

  std::size_t bit_count() const noexcept { return bits_; }
  /// Pads any partial byte with zero bits.
  std::vector<std::uint8_t> bytes() const;

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t bits_ = 0;
};

/// Removes emulation-prevention bytes: 00 00 03 xx (xx <= 3, or end of data) -> 00 00 xx.
std::vector<std::uint8_t> unescape_rbsp(std::span<const std::uint8_t> ebsp);

/// Inserts emulation-prevention bytes so no 00 00 0x (x <= 3) appears, and a
/// payload ending in 00 00 is terminated with 03.
std::vector<std::uint8_t> escape_rbsp(std::span<const std::uint8_t> rbsp);

}  // namespace drs::avc
