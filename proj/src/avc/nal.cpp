#include "drs/avc/nal.hpp"

#include "drs/avc/bitstream.hpp"

namespace drs::avc {

namespace {

// Position of the next 00 00 01 prefix at or after `from`, or size if none.
std::size_t find_start_code(std::span<const std::uint8_t> b, std::size_t from) {
  for (std::size_t i = from; i + 2 < b.size(); ++i) {
    if (b[i + 2] > 1) {
      i += 2;  // neither i+1 nor i+2 can begin a prefix ending within reach
      continue;
    }
    if (b[i] == 0 && b[i + 1] == 0 && b[i + 2] == 1) return i;
  }
  return b.size();
}

}  // namespace

SplitResult split_annexb(std::span<const std::uint8_t> bytes) {
  SplitResult result;
  std::size_t sc = find_start_code(bytes, 0);
  for (std::size_t i = 0; i < sc; ++i) {
    if (bytes[i] != 0) {
      result.diagnostics.leading_garbage_bytes = sc;
      break;
    }
  }
  if (sc == bytes.size()) {
    result.diagnostics.leading_garbage_bytes = bytes.size();
    // All-zero input is padding, not garbage.
    bool all_zero = true;
    for (auto b : bytes) all_zero = all_zero && b == 0;
    if (all_zero) result.diagnostics.leading_garbage_bytes = 0;
    return result;
  }

  while (sc < bytes.size()) {
    const std::size_t begin = sc + 3;
    const std::size_t next = find_start_code(bytes, begin);
    std::size_t end = next;
    // Zero bytes before the next prefix are trailing_zero_8bits / zero_byte.
    while (end > begin && bytes[end - 1] == 0) --end;
    if (next == bytes.size() && end == begin) {
      result.diagnostics.truncated_final_unit = true;
    } else if (end == begin) {
      ++result.diagnostics.empty_units;
    } else {
      const std::uint8_t header = bytes[begin];
      if (header & 0x80u) {
        ++result.diagnostics.forbidden_bit_units;
      } else {
        NalUnit nal;
        nal.nal_ref_idc = (header >> 5) & 0x3;
        nal.nal_unit_type = header & 0x1f;
        nal.byte_offset = begin;
        nal.size = end - begin;
        nal.payload = unescape_rbsp(bytes.subspan(begin + 1, end - begin - 1));
        // Two or more zero bytes at end of stream look like a cut-off start code.
        if (next == bytes.size() && next - end >= 2) result.diagnostics.truncated_final_unit = true;
        result.units.push_back(std::move(nal));
      }
    }
    sc = next;
  }
  return result;
}

}  // namespace drs::avc
