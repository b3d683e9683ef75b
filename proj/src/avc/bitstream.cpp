#include "drs/avc/bitstream.hpp"

#include "drs/error.hpp"

namespace drs::avc {

std::uint32_t BitReader::read_bits(int n) {
  if (n < 0 || n > 32) throw Error(ErrorCode::MalformedSyntax, "bit field width out of range");
  if (static_cast<std::size_t>(n) > bits_left()) {
    throw Error(ErrorCode::BitstreamExhausted, "read past end of RBSP");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint8_t byte = data_[pos_ >> 3];
    v = (v << 1) | ((byte >> (7 - (pos_ & 7))) & 1u);
    ++pos_;
  }
  return static_cast<std::uint32_t>(v);
}

void BitReader::skip_bits(std::size_t n) {
  if (n > bits_left()) throw Error(ErrorCode::BitstreamExhausted, "skip past end of RBSP");
  pos_ += n;
}

std::uint32_t BitReader::read_ue() {
  int zeros = 0;
  while (read_bits(1) == 0) {
    if (++zeros > 31) throw Error(ErrorCode::MalformedSyntax, "Exp-Golomb prefix longer than 31 bits");
  }
  if (zeros == 0) return 0;
  const std::uint64_t suffix = read_bits(zeros);
  return static_cast<std::uint32_t>((std::uint64_t{1} << zeros) - 1 + suffix);
}

std::int32_t BitReader::read_se() {
  const std::uint64_t k = read_ue();
  const auto mag = static_cast<std::int64_t>((k + 1) / 2);
  return static_cast<std::int32_t>((k & 1) ? mag : -mag);
}

void BitWriter::write_bits(std::uint64_t value, int n) {
  for (int i = n - 1; i >= 0; --i) {
    if ((bits_ & 7) == 0) buf_.push_back(0);
    if ((value >> i) & 1u) buf_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ & 7));
    ++bits_;
  }
}

void BitWriter::write_ue(std::uint32_t value) {
  const std::uint64_t v = std::uint64_t{value} + 1;
  int len = 0;
  while ((v >> (len + 1)) != 0) ++len;
  write_bits(0, len);
  write_bits(v, len + 1);
}

void BitWriter::write_se(std::int32_t value) {
  const std::int64_t v = value;
  const std::uint64_t k = v > 0 ? static_cast<std::uint64_t>(2 * v - 1) : static_cast<std::uint64_t>(-2 * v);
  write_ue(static_cast<std::uint32_t>(k));
}

void BitWriter::write_trailing_bits() {
  write_bits(1, 1);
  while ((bits_ & 7) != 0) write_bits(0, 1);
}

std::vector<std::uint8_t> BitWriter::bytes() const { return buf_; }

std::vector<std::uint8_t> unescape_rbsp(std::span<const std::uint8_t> ebsp) {
  std::vector<std::uint8_t> out;
  out.reserve(ebsp.size());
  int zeros = 0;
  for (std::size_t i = 0; i < ebsp.size(); ++i) {
    const std::uint8_t b = ebsp[i];
    if (zeros >= 2 && b == 0x03 && (i + 1 == ebsp.size() || ebsp[i + 1] <= 0x03)) {
      zeros = 0;
      continue;
    }
    out.push_back(b);
    zeros = b == 0 ? zeros + 1 : 0;
  }
  return out;
}

std::vector<std::uint8_t> escape_rbsp(std::span<const std::uint8_t> rbsp) {
  std::vector<std::uint8_t> out;
  out.reserve(rbsp.size() + rbsp.size() / 64 + 2);
  int zeros = 0;
  for (std::uint8_t b : rbsp) {
    if (zeros >= 2 && b <= 0x03) {
      out.push_back(0x03);
      zeros = 0;
    }
    out.push_back(b);
    zeros = b == 0 ? zeros + 1 : 0;
  }
  if (zeros >= 2) out.push_back(0x03);
  return out;
}

}  // namespace drs::avc
