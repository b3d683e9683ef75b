#include "drs/avc/gop_features.hpp"

#include <algorithm>
#include <cmath>

#include "drs/error.hpp"
#include "drs/stats.hpp"

namespace drs::avc {

std::vector<ParsedUnit> parse_units(std::vector<NalUnit> units, StreamDiagnostics& diag) {
  ParameterSets active;
  std::vector<ParsedUnit> out;
  out.reserve(units.size());
  for (auto& nal : units) {
    ParsedUnit pu;
    pu.nal = std::move(nal);
    try {
      switch (pu.nal.nal_unit_type) {
        case kNalSps: {
          pu.sps = parse_sps(pu.nal);
          active.sps[pu.sps->seq_parameter_set_id] = *pu.sps;
          break;
        }
        case kNalPps: {
          pu.pps = parse_pps(pu.nal);
          active.pps[pu.pps->pic_parameter_set_id] = *pu.pps;
          break;
        }
        case kNalSlice:
        case kNalIdrSlice:
          pu.slice = parse_slice_header(pu.nal, active);
          break;
        default:
          break;
      }
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::UnsupportedProfile: ++diag.unsupported_units; break;
        case ErrorCode::MissingParameterSet: ++diag.missing_parameter_set_units; break;
        default: ++diag.malformed_units; break;
      }
      if (diag.first_error.empty()) diag.first_error = e.what();
    }
    out.push_back(std::move(pu));
  }
  return out;
}

const std::vector<std::string>& gop_feature_names() {
  static const std::vector<std::string> names = {
      "duration_frames", "bits_total", "bits_per_frame_mean", "bits_per_frame_max",
      "i_fraction",      "p_fraction", "b_fraction",          "qp_mean",
      "qp_min",          "qp_max",     "qp_stddev",           "frame_size_cov"};
  return names;
}

std::vector<double> feature_values(const GopFeatureRow& r) {
  return {static_cast<double>(r.duration_frames), r.bits_total, r.bits_per_frame_mean,
          r.bits_per_frame_max, r.i_fraction, r.p_fraction, r.b_fraction, r.qp_mean,
          r.qp_min, r.qp_max, r.qp_stddev, r.frame_size_cov};
}

namespace {

struct GopAccumulator {
  int width = 0;
  int height = 0;
  std::vector<double> frame_bits;
  std::vector<double> slice_qps;
  int i_slices = 0;
  int p_slices = 0;
  int b_slices = 0;
};

GopFeatureRow finish(const GopAccumulator& g, int index, double fps) {
  GopFeatureRow r;
  r.gop_index = index;
  r.duration_frames = static_cast<int>(g.frame_bits.size());
  r.width = g.width;
  r.height = g.height;
  for (double b : g.frame_bits) r.bits_total += b;
  r.bits_per_frame_mean = r.bits_total / r.duration_frames;
  r.bits_per_frame_max = *std::max_element(g.frame_bits.begin(), g.frame_bits.end());
  r.bitrate_kbps = r.bits_total * fps / r.duration_frames / 1000.0;
  const double slices = g.i_slices + g.p_slices + g.b_slices;
  r.i_fraction = g.i_slices / slices;
  r.p_fraction = g.p_slices / slices;
  r.b_fraction = g.b_slices / slices;
  r.qp_mean = stats::mean(g.slice_qps);
  r.qp_min = *std::min_element(g.slice_qps.begin(), g.slice_qps.end());
  r.qp_max = *std::max_element(g.slice_qps.begin(), g.slice_qps.end());
  r.qp_stddev = stats::stddev(g.slice_qps);
  r.frame_size_cov = r.bits_per_frame_mean > 0 ? stats::stddev(g.frame_bits) / r.bits_per_frame_mean : 0.0;
  return r;
}

}  // namespace

std::vector<GopFeatureRow> aggregate_gop_features(std::span<const ParsedUnit> units,
                                                  double gop_seconds, double fps,
                                                  StreamDiagnostics* diagnostics) {
  if (!(fps > 0.0) || !std::isfinite(fps) || !(gop_seconds > 0.0) || !std::isfinite(gop_seconds)) {
    throw Error(ErrorCode::InvalidRange, "fps and gop_seconds must be positive");
  }
  StreamDiagnostics local;
  StreamDiagnostics& diag = diagnostics ? *diagnostics : local;

  // Resolution lookup: the SPS behind each slice's PPS, tracked in order.
  ParameterSets active;
  std::vector<GopFeatureRow> rows;
  std::optional<GopAccumulator> gop;
  bool in_picture = false;

  auto close_gop = [&] {
    if (gop && !gop->frame_bits.empty() && !gop->slice_qps.empty()) {
      rows.push_back(finish(*gop, static_cast<int>(rows.size()), fps));
    }
    gop.reset();
  };

  for (const ParsedUnit& pu : units) {
    if (pu.sps) active.sps[pu.sps->seq_parameter_set_id] = *pu.sps;
    if (pu.pps) active.pps[pu.pps->pic_parameter_set_id] = *pu.pps;
    if (!pu.nal.is_vcl()) continue;
    const double bits = 8.0 * static_cast<double>(pu.nal.size);

    if (pu.slice) {
      const SliceHeaderInfo& sh = *pu.slice;
      const bool new_picture = sh.first_mb_in_slice == 0 || !in_picture;
      if (new_picture && sh.is_idr()) {
        close_gop();
        gop.emplace();
        const auto pit = active.pps.find(sh.pic_parameter_set_id);
        const auto sit = pit == active.pps.end() ? active.sps.end()
                                                 : active.sps.find(pit->second.seq_parameter_set_id);
        if (sit == active.sps.end()) {
          throw Error(ErrorCode::MissingParameterSet, "IDR slice without an active SPS");
        }
        gop->width = sit->second.width;
        gop->height = sit->second.height;
      }
      if (!gop) {
        ++diag.units_before_first_idr;
        continue;
      }
      if (new_picture) gop->frame_bits.push_back(0.0);
      in_picture = true;
      gop->frame_bits.back() += bits;
      gop->slice_qps.push_back(sh.slice_qp);
      switch (sh.kind()) {
        case SliceKind::I:
        case SliceKind::SI: ++gop->i_slices; break;
        case SliceKind::P:
        case SliceKind::SP: ++gop->p_slices; break;
        case SliceKind::B: ++gop->b_slices; break;
      }
    } else if (gop && in_picture) {
      // Partitions and unparsed slices still carry bits of the current picture.
      gop->frame_bits.back() += bits;
    } else {
      ++diag.units_before_first_idr;
    }
  }
  close_gop();
  if (rows.empty()) throw Error(ErrorCode::NoIdrFound, "stream contains no decodable IDR picture");

  const int expected = static_cast<int>(std::lround(gop_seconds * fps));
  for (const auto& r : rows) {
    if (r.duration_frames != expected) ++diag.irregular_gops;
  }
  return rows;
}

ExtractResult extract_gop_features(std::span<const std::uint8_t> bytes, double gop_seconds,
                                   double fps) {
  if (bytes.empty()) throw Error(ErrorCode::EmptyInput, "empty bitstream");
  ExtractResult result;
  SplitResult split = split_annexb(bytes);
  result.diagnostics.split = split.diagnostics;
  const auto parsed = parse_units(std::move(split.units), result.diagnostics);
  result.rows = aggregate_gop_features(parsed, gop_seconds, fps, &result.diagnostics);
  return result;
}

}  // namespace drs::avc
