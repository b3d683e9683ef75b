#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drs/avc/nal.hpp"
#include "drs/avc/syntax.hpp"

namespace drs::avc {

/// One NAL unit with whatever header syntax was decoded for it.
struct ParsedUnit {
  NalUnit nal;
  std::optional<SliceHeaderInfo> slice;
  std::optional<SpsInfo> sps;
  std::optional<PpsInfo> pps;
};

struct StreamDiagnostics {
  SplitDiagnostics split;
  std::size_t malformed_units = 0;
  std::size_t unsupported_units = 0;
  std::size_t missing_parameter_set_units = 0;
  std::size_t units_before_first_idr = 0;
  std::size_t irregular_gops = 0;  // duration differs from gop_seconds * fps
  std::string first_error;
};

/// Parses parameter sets and slice headers in stream order, keeping the
/// active sets up to date. Units that fail to parse are kept without headers
/// and counted.
std::vector<ParsedUnit> parse_units(std::vector<NalUnit> units, StreamDiagnostics& diagnostics);

struct GopFeatureRow {
  int gop_index = 0;
  int duration_frames = 0;
  double bitrate_kbps = 0.0;
  int width = 0;
  int height = 0;
  double bits_total = 0.0;
  double bits_per_frame_mean = 0.0;
  double bits_per_frame_max = 0.0;
  double i_fraction = 0.0;
  double p_fraction = 0.0;
  double b_fraction = 0.0;
  double qp_mean = 0.0;
  double qp_min = 0.0;
  double qp_max = 0.0;
  double qp_stddev = 0.0;
  double frame_size_cov = 0.0;
};

/// Feature column names in CSV order (after the identity columns).
const std::vector<std::string>& gop_feature_names();
/// Values aligned to gop_feature_names().
std::vector<double> feature_values(const GopFeatureRow& row);

/// GOPs start at each IDR picture; a picture starts at a slice with
/// first_mb_in_slice == 0. Bits are counted over all VCL units of the GOP
/// (escaped size, header included). Slice-type fractions and QP statistics
/// are per slice; frame sizes are per picture. Throws NoIdrFound.
std::vector<GopFeatureRow> aggregate_gop_features(std::span<const ParsedUnit> units,
                                                  double gop_seconds, double fps,
                                                  StreamDiagnostics* diagnostics = nullptr);

struct ExtractResult {
  std::vector<GopFeatureRow> rows;
  StreamDiagnostics diagnostics;
};

/// split_annexb + parse_units + aggregate_gop_features. Empty input is EmptyInput.
ExtractResult extract_gop_features(std::span<const std::uint8_t> bytes, double gop_seconds, double fps);

}  // namespace drs::avc
