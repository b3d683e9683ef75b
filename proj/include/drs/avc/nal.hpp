#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace drs::avc {

enum NalType : int {
  kNalSlice = 1,
  kNalSliceDataA = 2,
  kNalSliceDataB = 3,
  kNalSliceDataC = 4,
  kNalIdrSlice = 5,
  kNalSei = 6,
  kNalSps = 7,
  kNalPps = 8,
  kNalAud = 9,
};

struct NalUnit {
  int nal_ref_idc = 0;
  int nal_unit_type = 0;
  /// RBSP following the one-byte header, emulation-prevention bytes removed.
  std::vector<std::uint8_t> payload;
  /// Offset of the header byte in the source stream and escaped size
  /// (header included, start code excluded).
  std::size_t byte_offset = 0;
  std::size_t size = 0;

  bool is_vcl() const noexcept { return nal_unit_type >= 1 && nal_unit_type <= 5; }
};

struct SplitDiagnostics {
  std::size_t leading_garbage_bytes = 0;
  std::size_t forbidden_bit_units = 0;  // dropped
  std::size_t empty_units = 0;          // dropped
  bool truncated_final_unit = false;
};

struct SplitResult {
  std::vector<NalUnit> units;
  SplitDiagnostics diagnostics;
};

/// Splits an Annex-B byte stream on 00 00 01 / 00 00 00 01 start codes.
/// Never throws; anomalies are reported in diagnostics.
SplitResult split_annexb(std::span<const std::uint8_t> bytes);

}  // namespace drs::avc
