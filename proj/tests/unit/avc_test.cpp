#include <gtest/gtest.h>

#include <random>

#include "../support/avc_writer.hpp"
#include "drs/avc/bitstream.hpp"
#include "drs/avc/gop_features.hpp"
#include "drs/avc/nal.hpp"
#include "drs/avc/syntax.hpp"
#include "drs/error.hpp"

namespace drs::avc {
namespace {

using Bytes = std::vector<std::uint8_t>;
using testing::sps_720p;
using testing::StreamBuilder;

BitWriter& bits_from_string(BitWriter& w, const std::string& s) {
  for (char c : s) w.write_flag(c == '1');
  return w;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::InvariantViolation;
}

NalUnit single_unit(const Bytes& stream) {
  auto split = split_annexb(stream);
  EXPECT_EQ(split.units.size(), 1u);
  return split.units.at(0);
}

// ---- Exp-Golomb ----------------------------------------------------------

TEST(ExpGolomb, CodeDefinition) {
  BitWriter w;
  bits_from_string(w, "1" "010" "011" "00100" "00111");
  const auto b = w.bytes();
  BitReader r(b);
  EXPECT_EQ(r.read_ue(), 0u);
  EXPECT_EQ(r.read_ue(), 1u);
  EXPECT_EQ(r.read_ue(), 2u);
  EXPECT_EQ(r.read_ue(), 3u);
  EXPECT_EQ(r.read_ue(), 6u);
}

TEST(ExpGolomb, SignedMapping) {
  BitWriter w;
  w.write_ue(3);
  w.write_ue(4);
  w.write_ue(0);
  w.write_ue(1);
  const auto b = w.bytes();
  BitReader r(b);
  // codeNum 3 -> +2 and 4 -> -2, per (-1)^(k+1) * ceil(k/2)
  EXPECT_EQ(r.read_se(), 2);
  EXPECT_EQ(r.read_se(), -2);
  EXPECT_EQ(r.read_se(), 0);
  EXPECT_EQ(r.read_se(), 1);
}

TEST(ExpGolomb, RoundTripUnsigned) {
  BitWriter w;
  for (std::uint32_t k = 0; k < (1u << 16); ++k) w.write_ue(k);
  const auto b = w.bytes();
  BitReader r(b);
  for (std::uint32_t k = 0; k < (1u << 16); ++k) ASSERT_EQ(r.read_ue(), k);
}

TEST(ExpGolomb, RoundTripSigned) {
  BitWriter w;
  for (std::int32_t k = -(1 << 15); k < (1 << 15); ++k) w.write_se(k);
  const auto b = w.bytes();
  BitReader r(b);
  for (std::int32_t k = -(1 << 15); k < (1 << 15); ++k) ASSERT_EQ(r.read_se(), k);
}

TEST(ExpGolomb, ExhaustionIsStructured) {
  const Bytes b = {0x00};
  BitReader r(b);
  EXPECT_EQ(code_of([&] { r.read_ue(); }), ErrorCode::BitstreamExhausted);
  BitReader r2(b);
  r2.read_bits(8);
  EXPECT_EQ(code_of([&] { r2.read_flag(); }), ErrorCode::BitstreamExhausted);
}

TEST(ExpGolomb, TooManyLeadingZerosIsMalformed) {
  const Bytes b(8, 0x00);
  BitReader r(b);
  EXPECT_EQ(code_of([&] { r.read_ue(); }), ErrorCode::MalformedSyntax);
}

// ---- Annex-B splitting ---------------------------------------------------

TEST(SplitAnnexB, EmptyInput) {
  const auto split = split_annexb({});
  EXPECT_TRUE(split.units.empty());
  EXPECT_EQ(split.diagnostics.leading_garbage_bytes, 0u);
}

TEST(SplitAnnexB, HandBuiltSpsHeader) {
  const Bytes b = {0x00, 0x00, 0x00, 0x01, 0x67, 0x42, 0x00, 0x1E};
  const NalUnit nal = single_unit(b);
  EXPECT_EQ(nal.nal_unit_type, 7);
  EXPECT_EQ(nal.nal_ref_idc, 3);
  EXPECT_EQ(nal.byte_offset, 4u);
  EXPECT_EQ(nal.size, 4u);
  EXPECT_EQ(nal.payload, (Bytes{0x42, 0x00, 0x1E}));
}

TEST(SplitAnnexB, RemovesEmulationPrevention) {
  const Bytes b = {0x00, 0x00, 0x01, 0x06, 0x00, 0x00, 0x03, 0x01, 0x80};
  const NalUnit nal = single_unit(b);
  EXPECT_EQ(nal.payload, (Bytes{0x00, 0x00, 0x01, 0x80}));
  EXPECT_EQ(nal.size, 6u);
}

TEST(SplitAnnexB, MixedStartCodesAndGarbage) {
  const Bytes b = {0xAB, 0xCD, 0x00, 0x00, 0x01, 0x09, 0xF0, 0x00,
                   0x00, 0x00, 0x01, 0x09, 0x10, 0x00, 0x00, 0x01, 0xE9, 0x10};
  const auto split = split_annexb(b);
  ASSERT_EQ(split.units.size(), 2u);
  EXPECT_EQ(split.diagnostics.leading_garbage_bytes, 2u);
  EXPECT_EQ(split.diagnostics.forbidden_bit_units, 1u);
  EXPECT_EQ(split.units[0].size, 2u);  // trailing zero_byte belongs to the next start code
  EXPECT_EQ(split.units[1].byte_offset, 11u);
}

TEST(SplitAnnexB, TruncatedTailIsFlagged) {
  const Bytes b = {0x00, 0x00, 0x01, 0x09, 0xF0, 0x00, 0x00};
  const auto split = split_annexb(b);
  ASSERT_EQ(split.units.size(), 1u);
  EXPECT_TRUE(split.diagnostics.truncated_final_unit);
  const Bytes b2 = {0x00, 0x00, 0x01, 0x09, 0xF0, 0x00, 0x00, 0x01};
  EXPECT_TRUE(split_annexb(b2).diagnostics.truncated_final_unit);
}

TEST(Escape, RoundTripOnAdversarialPayloads) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    Bytes raw(rng() % 64);
    // Mostly zeros and small values to hit the emulation patterns.
    for (auto& v : raw) v = static_cast<std::uint8_t>(rng() % 3 == 0 ? rng() % 256 : rng() % 4);
    const Bytes esc = escape_rbsp(raw);
    for (std::size_t i = 0; i + 2 < esc.size(); ++i) {
      ASSERT_FALSE(esc[i] == 0 && esc[i + 1] == 0 && esc[i + 2] <= 2) << "trial " << trial;
    }
    ASSERT_EQ(unescape_rbsp(esc), raw);
    ASSERT_EQ(escape_rbsp(unescape_rbsp(esc)), esc);
  }
}

// ---- Parameter sets and slice headers -----------------------------------

TEST(Syntax, Sps720pRoundTrip) {
  const SpsInfo want = sps_720p();
  const NalUnit nal = single_unit(testing::annexb(3, kNalSps, testing::write_sps(want)));
  const SpsInfo got = parse_sps(nal);
  EXPECT_EQ(got.width, 1280);
  EXPECT_EQ(got.height, 720);
  EXPECT_EQ(got, want);
}

TEST(Syntax, HighProfileCroppedSps) {
  SpsInfo s;
  s.profile_idc = 100;
  s.level_idc = 40;
  s.seq_parameter_set_id = 2;
  s.seq_scaling_matrix_present_flag = true;
  s.pic_order_cnt_type = 1;
  s.max_num_ref_frames = 4;
  s.pic_width_in_mbs = 120;
  s.pic_height_in_map_units = 68;
  s.frame_cropping_flag = true;
  s.frame_crop_bottom_offset = 4;
  s.vui_parameters_present_flag = true;
  s.width = 1920;
  s.height = 1080;  // 68*16 - 2*4
  const NalUnit nal = single_unit(testing::annexb(3, kNalSps, testing::write_sps(s)));
  EXPECT_EQ(parse_sps(nal), s);
}

TEST(Syntax, InterlacedSpsHeight) {
  SpsInfo s = sps_720p();
  s.profile_idc = 77;
  s.frame_mbs_only_flag = false;
  s.mb_adaptive_frame_field_flag = true;
  s.pic_height_in_map_units = 17;  // 2 * 17 * 16 = 544
  s.frame_cropping_flag = true;
  s.frame_crop_bottom_offset = 2;  // 4 lines per unit for interlaced 4:2:0
  s.height = 536;
  const NalUnit nal = single_unit(testing::annexb(3, kNalSps, testing::write_sps(s)));
  EXPECT_EQ(parse_sps(nal), s);
}

TEST(Syntax, UnsupportedProfile) {
  SpsInfo s = sps_720p();
  s.profile_idc = 118;  // multiview
  const NalUnit nal = single_unit(testing::annexb(3, kNalSps, testing::write_sps(s)));
  EXPECT_EQ(code_of([&] { parse_sps(nal); }), ErrorCode::UnsupportedProfile);
}

TEST(Syntax, TruncatedSpsIsMalformed) {
  auto rbsp = testing::write_sps(sps_720p());
  rbsp.resize(4);
  const NalUnit nal = single_unit(testing::annexb(3, kNalSps, rbsp));
  EXPECT_EQ(code_of([&] { parse_sps(nal); }), ErrorCode::MalformedSyntax);
}

TEST(Syntax, SliceQpFromPpsAndDelta) {
  ParameterSets active;
  active.sps[0] = sps_720p();
  PpsInfo pps;
  pps.pic_init_qp_minus26 = -3;
  const NalUnit pnal = single_unit(testing::annexb(3, kNalPps, testing::write_pps(pps)));
  active.pps[0] = parse_pps(pnal);
  EXPECT_EQ(active.pps[0], pps);

  SliceHeaderInfo sh;
  sh.nal_unit_type = kNalIdrSlice;
  sh.nal_ref_idc = 3;
  sh.slice_type = 7;
  sh.slice_qp_delta = 5;
  const NalUnit snal =
      single_unit(testing::annexb(3, kNalIdrSlice, testing::write_slice(sh, active.sps[0], pps)));
  const SliceHeaderInfo got = parse_slice_header(snal, active);
  EXPECT_EQ(got.slice_qp, 28);
  EXPECT_EQ(got.kind(), SliceKind::I);
}

TEST(Syntax, UnknownPpsIsMissingParameterSet) {
  ParameterSets active;
  active.sps[0] = sps_720p();
  active.pps[0] = PpsInfo{};
  SliceHeaderInfo sh;
  sh.nal_unit_type = kNalSlice;
  sh.nal_ref_idc = 2;
  sh.slice_type = 5;
  sh.pic_parameter_set_id = 9;
  PpsInfo as_written;
  as_written.pic_parameter_set_id = 9;
  const NalUnit nal =
      single_unit(testing::annexb(2, kNalSlice, testing::write_slice(sh, active.sps[0], as_written)));
  EXPECT_EQ(code_of([&] { parse_slice_header(nal, active); }), ErrorCode::MissingParameterSet);
}

TEST(Syntax, BSliceWithSkippedSyntaxRoundTrips) {
  SpsInfo sps = sps_720p();
  sps.profile_idc = 100;
  sps.pic_order_cnt_type = 0;
  sps.log2_max_pic_order_cnt_lsb_minus4 = 2;
  sps.log2_max_frame_num_minus4 = 5;
  PpsInfo pps;
  pps.pic_parameter_set_id = 1;
  pps.entropy_coding_mode_flag = true;
  pps.bottom_field_pic_order_in_frame_present_flag = true;
  pps.num_slice_groups_minus1 = 2;
  pps.slice_group_map_type = 6;
  pps.weighted_bipred_idc = 1;
  pps.redundant_pic_cnt_present_flag = true;
  pps.pic_init_qp_minus26 = 4;
  ParameterSets active;
  active.sps[0] = sps;
  active.pps[1] = parse_pps(single_unit(testing::annexb(3, kNalPps, testing::write_pps(pps))));
  ASSERT_EQ(active.pps[1], pps);

  SliceHeaderInfo sh;
  sh.nal_unit_type = kNalSlice;
  sh.nal_ref_idc = 1;
  sh.first_mb_in_slice = 1200;
  sh.slice_type = 1;
  sh.pic_parameter_set_id = 1;
  sh.frame_num = 37;
  sh.pic_order_cnt_lsb = 45;
  sh.delta_pic_order_cnt_bottom = -1;
  sh.redundant_pic_cnt = 0;
  sh.direct_spatial_mv_pred_flag = true;
  sh.num_ref_idx_active_override_flag = true;
  sh.num_ref_idx_l0_active_minus1 = 2;
  sh.num_ref_idx_l1_active_minus1 = 1;
  sh.cabac_init_idc = 2;
  sh.slice_qp_delta = -7;
  sh.slice_qp = 23;
  const auto rbsp = testing::write_slice(sh, sps, pps, {.list_modification = true, .adaptive_marking = true});
  const SliceHeaderInfo got = parse_slice_header(single_unit(testing::annexb(1, kNalSlice, rbsp)), active);
  EXPECT_EQ(got, sh);
}

TEST(Syntax, SliceQpOutOfRangeIsMalformed) {
  ParameterSets active;
  active.sps[0] = sps_720p();
  active.pps[0] = PpsInfo{};
  SliceHeaderInfo sh;
  sh.nal_unit_type = kNalIdrSlice;
  sh.nal_ref_idc = 3;
  sh.slice_type = 2;
  sh.slice_qp_delta = 30;  // 56
  const NalUnit nal =
      single_unit(testing::annexb(3, kNalIdrSlice, testing::write_slice(sh, active.sps[0], PpsInfo{})));
  EXPECT_EQ(code_of([&] { parse_slice_header(nal, active); }), ErrorCode::MalformedSyntax);
}

// ---- GOP aggregation -----------------------------------------------------


TEST(GopFeatures, SixtyPFramesAfterIdr) {
  StreamBuilder s;
  s.frame(true, 1000);
  for (int i = 0; i < 60; ++i) s.frame(false, 1000);
  const auto result = extract_gop_features(s.bytes, 1.0, 60.0);
  ASSERT_EQ(result.rows.size(), 1u);
  const GopFeatureRow& r = result.rows[0];
  EXPECT_EQ(r.duration_frames, 61);
  EXPECT_DOUBLE_EQ(r.bits_total, 61 * 8000.0);
  EXPECT_DOUBLE_EQ(r.bits_per_frame_mean, 8000.0);
  EXPECT_DOUBLE_EQ(r.bits_per_frame_max, 8000.0);
  EXPECT_DOUBLE_EQ(r.i_fraction, 1.0 / 61.0);
  EXPECT_DOUBLE_EQ(r.p_fraction, 60.0 / 61.0);
  EXPECT_DOUBLE_EQ(r.b_fraction, 0.0);
  EXPECT_NEAR(r.i_fraction + r.p_fraction + r.b_fraction, 1.0, 1e-9);
  EXPECT_EQ(r.frame_size_cov, 0.0);
  EXPECT_EQ(r.width, 1280);
  EXPECT_EQ(r.height, 720);
  EXPECT_DOUBLE_EQ(r.bitrate_kbps, 480.0);
  EXPECT_EQ(result.diagnostics.irregular_gops, 1u);
}

TEST(GopFeatures, UnequalFrameSizesCovExact) {
  StreamBuilder s;
  s.frame(true, 4000);
  for (int i = 0; i < 3; ++i) s.frame(false, 1000);
  const auto rows = extract_gop_features(s.bytes, 1.0, 4.0).rows;
  ASSERT_EQ(rows.size(), 1u);
  // frame bits 32000, 8000 x3: mean 14000, population sd sqrt(3)*6000... computed directly
  const double mean = (32000.0 + 3 * 8000.0) / 4.0;
  const double var = ((32000.0 - mean) * (32000.0 - mean) + 3 * (8000.0 - mean) * (8000.0 - mean)) / 4.0;
  EXPECT_NEAR(rows[0].frame_size_cov, std::sqrt(var) / mean, 1e-12);
}

TEST(GopFeatures, ConstantQp) {
  StreamBuilder s;
  s.frame(true, 300, 30);
  for (int i = 0; i < 9; ++i) s.frame(false, 200, 30);
  const auto rows = extract_gop_features(s.bytes, 1.0, 10.0).rows;
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].qp_mean, 30.0);
  EXPECT_EQ(rows[0].qp_stddev, 0.0);
  EXPECT_EQ(rows[0].qp_min, 30.0);
  EXPECT_EQ(rows[0].qp_max, 30.0);
}

TEST(GopFeatures, TwoIdrsTwoRows) {
  StreamBuilder s;
  for (int g = 0; g < 2; ++g) {
    s.frame(true, 500, 24 + g);
    for (int i = 0; i < 59; ++i) s.frame(false, 100 + g, 30);
  }
  const auto result = extract_gop_features(s.bytes, 1.0, 60.0);
  ASSERT_EQ(result.rows.size(), 2u);
  EXPECT_EQ(result.rows[0].gop_index, 0);
  EXPECT_EQ(result.rows[1].gop_index, 1);
  EXPECT_EQ(result.rows[0].duration_frames, 60);
  EXPECT_EQ(result.rows[1].duration_frames, 60);
  EXPECT_EQ(result.rows[1].qp_min, 25.0);
  EXPECT_EQ(result.diagnostics.irregular_gops, 0u);
}

TEST(GopFeatures, MultiSlicePicturesAndBFrames) {
  StreamBuilder s;
  s.frame(true, 100, 26, 2, 0);
  s.frame(true, 100, 28, 2, 1800);  // second slice of the IDR picture
  s.frame(false, 50, 30, 1, 0);
  s.frame(false, 50, 30, 0, 0);
  const auto rows = extract_gop_features(s.bytes, 1.0, 3.0).rows;
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].duration_frames, 3);
  EXPECT_DOUBLE_EQ(rows[0].bits_per_frame_max, 1600.0);
  EXPECT_DOUBLE_EQ(rows[0].i_fraction, 0.5);
  EXPECT_DOUBLE_EQ(rows[0].b_fraction, 0.25);
  EXPECT_DOUBLE_EQ(rows[0].p_fraction, 0.25);
  EXPECT_DOUBLE_EQ(rows[0].qp_mean, 28.5);
}

TEST(GopFeatures, NoIdr) {
  StreamBuilder s;
  s.frame(false, 100);
  s.frame(false, 100);
  EXPECT_EQ(code_of([&] { extract_gop_features(s.bytes, 1.0, 30.0); }), ErrorCode::NoIdrFound);
  EXPECT_EQ(code_of([&] { extract_gop_features(Bytes{}, 1.0, 30.0); }), ErrorCode::EmptyInput);
}

TEST(GopFeatures, UnitsBeforeFirstIdrAreCounted) {
  StreamBuilder s;
  s.frame(false, 100);
  s.frame(true, 100);
  s.frame(false, 100);
  const auto result = extract_gop_features(s.bytes, 1.0, 2.0);
  EXPECT_EQ(result.rows.size(), 1u);
  EXPECT_EQ(result.diagnostics.units_before_first_idr, 1u);
}

TEST(GopFeatures, FeatureVectorMatchesNames) {
  StreamBuilder s;
  s.frame(true, 100);
  const auto rows = extract_gop_features(s.bytes, 1.0, 1.0).rows;
  EXPECT_EQ(feature_values(rows[0]).size(), gop_feature_names().size());
}

// ---- Robustness ------------------------------------------------------------

TEST(Fuzz, ArbitraryBytesTerminateWithStructuredErrors) {
  StreamBuilder valid;
  valid.frame(true, 120);
  for (int i = 0; i < 5; ++i) valid.frame(false, 60);
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 3000; ++trial) {
    Bytes b;
    if (trial % 2 == 0) {
      b.resize(rng() % 256);
      for (auto& v : b) v = static_cast<std::uint8_t>(rng() % 4 == 0 ? rng() % 4 : rng() % 256);
    } else {
      b = valid.bytes;
      const int flips = 1 + static_cast<int>(rng() % 8);
      for (int f = 0; f < flips; ++f) b[rng() % b.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
      b.resize(rng() % (b.size() + 1));
    }
    try {
      const auto r = extract_gop_features(b, 1.0, 30.0);
      for (const auto& row : r.rows) {
        for (double v : feature_values(row)) ASSERT_TRUE(std::isfinite(v));
        ASSERT_GE(row.qp_min, 0.0);
        ASSERT_LE(row.qp_max, 51.0);
      }
    } catch (const Error&) {
      // structured failure is fine
    }
  }
}

}  // namespace
}  // namespace drs::avc
