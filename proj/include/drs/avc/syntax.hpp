#pragma once

#include <array>
#include <cstdint>
#include <map>

#include "drs/avc/nal.hpp"

namespace drs::avc {

struct SpsInfo {
  int profile_idc = 0;
  int constraint_flags = 0;  // constraint_set0..5 flags + reserved bits, as read
  int level_idc = 0;
  int seq_parameter_set_id = 0;
  int chroma_format_idc = 1;
  bool separate_colour_plane_flag = false;
  int bit_depth_luma_minus8 = 0;
  int bit_depth_chroma_minus8 = 0;
  bool qpprime_y_zero_transform_bypass_flag = false;
  bool seq_scaling_matrix_present_flag = false;
  int log2_max_frame_num_minus4 = 0;
  int pic_order_cnt_type = 0;
  int log2_max_pic_order_cnt_lsb_minus4 = 0;
  bool delta_pic_order_always_zero_flag = false;
  int max_num_ref_frames = 0;
  bool gaps_in_frame_num_value_allowed_flag = false;
  int pic_width_in_mbs = 0;
  int pic_height_in_map_units = 0;
  bool frame_mbs_only_flag = true;
  bool mb_adaptive_frame_field_flag = false;
  bool direct_8x8_inference_flag = false;
  bool frame_cropping_flag = false;
  int frame_crop_left_offset = 0;
  int frame_crop_right_offset = 0;
  int frame_crop_top_offset = 0;
  int frame_crop_bottom_offset = 0;
  bool vui_parameters_present_flag = false;
  // derived
  int width = 0;
  int height = 0;

  int chroma_array_type() const noexcept {
    return separate_colour_plane_flag ? 0 : chroma_format_idc;
  }

  friend bool operator==(const SpsInfo&, const SpsInfo&) = default;
};

struct PpsInfo {
  int pic_parameter_set_id = 0;
  int seq_parameter_set_id = 0;
  bool entropy_coding_mode_flag = false;
  bool bottom_field_pic_order_in_frame_present_flag = false;
  int num_slice_groups_minus1 = 0;
  int slice_group_map_type = 0;
  int num_ref_idx_l0_default_active_minus1 = 0;
  int num_ref_idx_l1_default_active_minus1 = 0;
  bool weighted_pred_flag = false;
  int weighted_bipred_idc = 0;
  int pic_init_qp_minus26 = 0;
  int pic_init_qs_minus26 = 0;
  int chroma_qp_index_offset = 0;
  bool deblocking_filter_control_present_flag = false;
  bool constrained_intra_pred_flag = false;
  bool redundant_pic_cnt_present_flag = false;

  friend bool operator==(const PpsInfo&, const PpsInfo&) = default;
};

enum class SliceKind { P, B, I, SP, SI };

struct SliceHeaderInfo {
  int nal_unit_type = 0;
  int nal_ref_idc = 0;
  int first_mb_in_slice = 0;
  int slice_type = 0;  // raw 0..9; 5..9 are the *_ALL variants
  int pic_parameter_set_id = 0;
  int colour_plane_id = 0;
  int frame_num = 0;
  bool field_pic_flag = false;
  bool bottom_field_flag = false;
  int idr_pic_id = 0;
  int pic_order_cnt_lsb = 0;
  int delta_pic_order_cnt_bottom = 0;
  std::array<int, 2> delta_pic_order_cnt = {0, 0};
  int redundant_pic_cnt = 0;
  bool direct_spatial_mv_pred_flag = false;
  bool num_ref_idx_active_override_flag = false;
  int num_ref_idx_l0_active_minus1 = 0;
  int num_ref_idx_l1_active_minus1 = 0;
  int cabac_init_idc = 0;
  int slice_qp_delta = 0;
  // derived: 26 + pic_init_qp_minus26 + slice_qp_delta
  int slice_qp = 0;

  SliceKind kind() const noexcept { return static_cast<SliceKind>(slice_type % 5); }
  bool is_idr() const noexcept { return nal_unit_type == kNalIdrSlice; }

  friend bool operator==(const SliceHeaderInfo&, const SliceHeaderInfo&) = default;
};

struct ParameterSets {
  std::map<int, SpsInfo> sps;
  std::map<int, PpsInfo> pps;
};

/// Errors: UnsupportedProfile, MalformedSyntax (truncation included).
SpsInfo parse_sps(const NalUnit& nal);
/// Errors: MalformedSyntax.
PpsInfo parse_pps(const NalUnit& nal);
/// Parses up to and including slice_qp_delta.
/// Errors: MissingParameterSet, UnsupportedProfile, MalformedSyntax.
SliceHeaderInfo parse_slice_header(const NalUnit& nal, const ParameterSets& active);

}  // namespace drs::avc
