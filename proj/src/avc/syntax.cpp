#include "drs/avc/syntax.hpp"

#include <string>

#include "drs/avc/bitstream.hpp"
#include "drs/error.hpp"

namespace drs::avc {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedSyntax, what);
}

int ue_in(BitReader& br, std::uint32_t max, const char* name) {
  const std::uint32_t v = br.read_ue();
  if (v > max) malformed(std::string(name) + " out of range");
  return static_cast<int>(v);
}

int se_in(BitReader& br, int lo, int hi, const char* name) {
  const std::int32_t v = br.read_se();
  if (v < lo || v > hi) malformed(std::string(name) + " out of range");
  return v;
}

// Truncation inside header syntax is a syntax error of the unit.
template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BitstreamExhausted) {
      malformed(std::string("truncated header: ") + e.what());
    }
    throw;
  }
}

bool is_high_family(int profile_idc) {
  switch (profile_idc) {
    case 100: case 110: case 122: case 244: case 44:
      return true;
    default:
      return false;
  }
}

bool is_supported_profile(int profile_idc) {
  return profile_idc == 66 || profile_idc == 77 || profile_idc == 88 || is_high_family(profile_idc);
}

void skip_scaling_list(BitReader& br, int size) {
  int last = 8;
  int next = 8;
  for (int j = 0; j < size; ++j) {
    if (next != 0) {
      const int delta = se_in(br, -128, 127, "delta_scale");
      next = (last + delta + 256) % 256;
    }
    last = next == 0 ? last : next;
  }
}

}  // namespace

SpsInfo parse_sps(const NalUnit& nal) {
  if (nal.nal_unit_type != kNalSps) malformed("NAL unit is not an SPS");
  return guarded([&] {
    BitReader br(nal.payload);
    SpsInfo s;
    s.profile_idc = static_cast<int>(br.read_bits(8));
    s.constraint_flags = static_cast<int>(br.read_bits(8));
    s.level_idc = static_cast<int>(br.read_bits(8));
    if (!is_supported_profile(s.profile_idc)) {
      throw Error(ErrorCode::UnsupportedProfile,
                  "profile_idc " + std::to_string(s.profile_idc) + " is not supported");
    }
    s.seq_parameter_set_id = ue_in(br, 31, "seq_parameter_set_id");
    if (is_high_family(s.profile_idc)) {
      s.chroma_format_idc = ue_in(br, 3, "chroma_format_idc");
      if (s.chroma_format_idc == 3) s.separate_colour_plane_flag = br.read_flag();
      s.bit_depth_luma_minus8 = ue_in(br, 6, "bit_depth_luma_minus8");
      s.bit_depth_chroma_minus8 = ue_in(br, 6, "bit_depth_chroma_minus8");
      s.qpprime_y_zero_transform_bypass_flag = br.read_flag();
      s.seq_scaling_matrix_present_flag = br.read_flag();
      if (s.seq_scaling_matrix_present_flag) {
        const int lists = s.chroma_format_idc != 3 ? 8 : 12;
        for (int i = 0; i < lists; ++i) {
          if (br.read_flag()) skip_scaling_list(br, i < 6 ? 16 : 64);
        }
      }
    }
    s.log2_max_frame_num_minus4 = ue_in(br, 12, "log2_max_frame_num_minus4");
    s.pic_order_cnt_type = ue_in(br, 2, "pic_order_cnt_type");
    if (s.pic_order_cnt_type == 0) {
      s.log2_max_pic_order_cnt_lsb_minus4 = ue_in(br, 12, "log2_max_pic_order_cnt_lsb_minus4");
    } else if (s.pic_order_cnt_type == 1) {
      s.delta_pic_order_always_zero_flag = br.read_flag();
      br.read_se();  // offset_for_non_ref_pic
      br.read_se();  // offset_for_top_to_bottom_field
      const int cycle = ue_in(br, 255, "num_ref_frames_in_pic_order_cnt_cycle");
      for (int i = 0; i < cycle; ++i) br.read_se();
    }
    s.max_num_ref_frames = ue_in(br, 16, "max_num_ref_frames");
    s.gaps_in_frame_num_value_allowed_flag = br.read_flag();
    s.pic_width_in_mbs = ue_in(br, 1023, "pic_width_in_mbs_minus1") + 1;
    s.pic_height_in_map_units = ue_in(br, 1023, "pic_height_in_map_units_minus1") + 1;
    s.frame_mbs_only_flag = br.read_flag();
    if (!s.frame_mbs_only_flag) s.mb_adaptive_frame_field_flag = br.read_flag();
    s.direct_8x8_inference_flag = br.read_flag();
    s.frame_cropping_flag = br.read_flag();
    if (s.frame_cropping_flag) {
      s.frame_crop_left_offset = ue_in(br, 8192, "frame_crop_left_offset");
      s.frame_crop_right_offset = ue_in(br, 8192, "frame_crop_right_offset");
      s.frame_crop_top_offset = ue_in(br, 8192, "frame_crop_top_offset");
      s.frame_crop_bottom_offset = ue_in(br, 8192, "frame_crop_bottom_offset");
    }
    s.vui_parameters_present_flag = br.read_flag();

    const int field_factor = s.frame_mbs_only_flag ? 1 : 2;
    int crop_unit_x = 1;
    int crop_unit_y = field_factor;
    if (s.chroma_array_type() != 0) {
      const int sub_w = s.chroma_format_idc == 3 ? 1 : 2;
      const int sub_h = s.chroma_format_idc == 1 ? 2 : 1;
      crop_unit_x = sub_w;
      crop_unit_y = sub_h * field_factor;
    }
    s.width = s.pic_width_in_mbs * 16 -
              crop_unit_x * (s.frame_crop_left_offset + s.frame_crop_right_offset);
    s.height = field_factor * s.pic_height_in_map_units * 16 -
               crop_unit_y * (s.frame_crop_top_offset + s.frame_crop_bottom_offset);
    if (s.width <= 0 || s.height <= 0 || s.width % 2 != 0 || s.height % 2 != 0) {
      malformed("cropped picture size must be positive and even");
    }
    return s;
  });
}

PpsInfo parse_pps(const NalUnit& nal) {
  if (nal.nal_unit_type != kNalPps) malformed("NAL unit is not a PPS");
  return guarded([&] {
    BitReader br(nal.payload);
    PpsInfo p;
    p.pic_parameter_set_id = ue_in(br, 255, "pic_parameter_set_id");
    p.seq_parameter_set_id = ue_in(br, 31, "seq_parameter_set_id");
    p.entropy_coding_mode_flag = br.read_flag();
    p.bottom_field_pic_order_in_frame_present_flag = br.read_flag();
    p.num_slice_groups_minus1 = ue_in(br, 7, "num_slice_groups_minus1");
    if (p.num_slice_groups_minus1 > 0) {
      const int groups = p.num_slice_groups_minus1 + 1;
      p.slice_group_map_type = ue_in(br, 6, "slice_group_map_type");
      if (p.slice_group_map_type == 0) {
        for (int i = 0; i < groups; ++i) br.read_ue();  // run_length_minus1
      } else if (p.slice_group_map_type == 2) {
        for (int i = 0; i < groups - 1; ++i) {
          br.read_ue();  // top_left
          br.read_ue();  // bottom_right
        }
      } else if (p.slice_group_map_type >= 3 && p.slice_group_map_type <= 5) {
        br.read_flag();  // slice_group_change_direction_flag
        br.read_ue();    // slice_group_change_rate_minus1
      } else if (p.slice_group_map_type == 6) {
        const int units = ue_in(br, 139264, "pic_size_in_map_units_minus1") + 1;
        int bits = 0;
        while ((1 << bits) < groups) ++bits;
        br.skip_bits(static_cast<std::size_t>(units) * static_cast<std::size_t>(bits));
      }
    }
    p.num_ref_idx_l0_default_active_minus1 = ue_in(br, 31, "num_ref_idx_l0_default_active_minus1");
    p.num_ref_idx_l1_default_active_minus1 = ue_in(br, 31, "num_ref_idx_l1_default_active_minus1");
    p.weighted_pred_flag = br.read_flag();
    p.weighted_bipred_idc = static_cast<int>(br.read_bits(2));
    if (p.weighted_bipred_idc > 2) malformed("weighted_bipred_idc out of range");
    p.pic_init_qp_minus26 = se_in(br, -26, 25, "pic_init_qp_minus26");
    p.pic_init_qs_minus26 = se_in(br, -26, 25, "pic_init_qs_minus26");
    p.chroma_qp_index_offset = se_in(br, -12, 12, "chroma_qp_index_offset");
    p.deblocking_filter_control_present_flag = br.read_flag();
    p.constrained_intra_pred_flag = br.read_flag();
    p.redundant_pic_cnt_present_flag = br.read_flag();
    return p;
  });
}

namespace {

void skip_ref_pic_list_modification(BitReader& br) {
  if (!br.read_flag()) return;
  for (int n = 0;; ++n) {
    if (n > 64) malformed("ref_pic_list_modification does not terminate");
    const int idc = ue_in(br, 5, "modification_of_pic_nums_idc");
    if (idc == 3) break;
    if (idc == 0 || idc == 1 || idc == 2) {
      br.read_ue();
    } else {
      throw Error(ErrorCode::UnsupportedProfile, "MVC reference list modification");
    }
  }
}

void skip_pred_weight_table(BitReader& br, const SpsInfo& sps, const SliceHeaderInfo& sh) {
  ue_in(br, 7, "luma_log2_weight_denom");
  const bool chroma = sps.chroma_array_type() != 0;
  if (chroma) ue_in(br, 7, "chroma_log2_weight_denom");
  const int lists = sh.kind() == SliceKind::B ? 2 : 1;
  for (int list = 0; list < lists; ++list) {
    const int refs = (list == 0 ? sh.num_ref_idx_l0_active_minus1 : sh.num_ref_idx_l1_active_minus1) + 1;
    for (int i = 0; i < refs; ++i) {
      if (br.read_flag()) {
        br.read_se();
        br.read_se();
      }
      if (chroma && br.read_flag()) {
        for (int j = 0; j < 2; ++j) {
          br.read_se();
          br.read_se();
        }
      }
    }
  }
}

void skip_dec_ref_pic_marking(BitReader& br, bool idr) {
  if (idr) {
    br.read_flag();  // no_output_of_prior_pics_flag
    br.read_flag();  // long_term_reference_flag
    return;
  }
  if (!br.read_flag()) return;  // adaptive_ref_pic_marking_mode_flag
  for (int n = 0;; ++n) {
    if (n > 66) malformed("dec_ref_pic_marking does not terminate");
    const int op = ue_in(br, 6, "memory_management_control_operation");
    if (op == 0) break;
    if (op == 1 || op == 3) br.read_ue();  // difference_of_pic_nums_minus1
    if (op == 2) br.read_ue();              // long_term_pic_num
    if (op == 3 || op == 6) br.read_ue();   // long_term_frame_idx
    if (op == 4) br.read_ue();              // max_long_term_frame_idx_plus1
  }
}

}  // namespace

SliceHeaderInfo parse_slice_header(const NalUnit& nal, const ParameterSets& active) {
  if (nal.nal_unit_type != kNalSlice && nal.nal_unit_type != kNalIdrSlice) {
    malformed("NAL unit is not a coded slice");
  }
  return guarded([&] {
    BitReader br(nal.payload);
    SliceHeaderInfo sh;
    sh.nal_unit_type = nal.nal_unit_type;
    sh.nal_ref_idc = nal.nal_ref_idc;
    if (sh.is_idr() && nal.nal_ref_idc == 0) malformed("IDR slice with nal_ref_idc 0");
    sh.first_mb_in_slice = ue_in(br, 139263, "first_mb_in_slice");
    sh.slice_type = ue_in(br, 9, "slice_type");
    sh.pic_parameter_set_id = ue_in(br, 255, "pic_parameter_set_id");

    const auto pit = active.pps.find(sh.pic_parameter_set_id);
    if (pit == active.pps.end()) {
      throw Error(ErrorCode::MissingParameterSet,
                  "slice references unknown PPS " + std::to_string(sh.pic_parameter_set_id));
    }
    const PpsInfo& pps = pit->second;
    const auto sit = active.sps.find(pps.seq_parameter_set_id);
    if (sit == active.sps.end()) {
      throw Error(ErrorCode::MissingParameterSet,
                  "PPS references unknown SPS " + std::to_string(pps.seq_parameter_set_id));
    }
    const SpsInfo& sps = sit->second;
    if (sh.is_idr() && sh.kind() != SliceKind::I && sh.kind() != SliceKind::SI) {
      malformed("IDR picture with inter slice type");
    }

    if (sps.separate_colour_plane_flag) sh.colour_plane_id = static_cast<int>(br.read_bits(2));
    sh.frame_num = static_cast<int>(br.read_bits(sps.log2_max_frame_num_minus4 + 4));
    if (!sps.frame_mbs_only_flag) {
      sh.field_pic_flag = br.read_flag();
      if (sh.field_pic_flag) sh.bottom_field_flag = br.read_flag();
    }
    if (sh.is_idr()) sh.idr_pic_id = ue_in(br, 65535, "idr_pic_id");
    if (sps.pic_order_cnt_type == 0) {
      sh.pic_order_cnt_lsb = static_cast<int>(br.read_bits(sps.log2_max_pic_order_cnt_lsb_minus4 + 4));
      if (pps.bottom_field_pic_order_in_frame_present_flag && !sh.field_pic_flag) {
        sh.delta_pic_order_cnt_bottom = br.read_se();
      }
    }
    if (sps.pic_order_cnt_type == 1 && !sps.delta_pic_order_always_zero_flag) {
      sh.delta_pic_order_cnt[0] = br.read_se();
      if (pps.bottom_field_pic_order_in_frame_present_flag && !sh.field_pic_flag) {
        sh.delta_pic_order_cnt[1] = br.read_se();
      }
    }
    if (pps.redundant_pic_cnt_present_flag) sh.redundant_pic_cnt = ue_in(br, 127, "redundant_pic_cnt");

    const SliceKind kind = sh.kind();
    if (kind == SliceKind::B) sh.direct_spatial_mv_pred_flag = br.read_flag();
    sh.num_ref_idx_l0_active_minus1 = pps.num_ref_idx_l0_default_active_minus1;
    sh.num_ref_idx_l1_active_minus1 = pps.num_ref_idx_l1_default_active_minus1;
    if (kind == SliceKind::P || kind == SliceKind::SP || kind == SliceKind::B) {
      sh.num_ref_idx_active_override_flag = br.read_flag();
      if (sh.num_ref_idx_active_override_flag) {
        sh.num_ref_idx_l0_active_minus1 = ue_in(br, 31, "num_ref_idx_l0_active_minus1");
        if (kind == SliceKind::B) {
          sh.num_ref_idx_l1_active_minus1 = ue_in(br, 31, "num_ref_idx_l1_active_minus1");
        }
      }
    }
    const int max_refs = sh.field_pic_flag ? 31 : 15;
    if (sh.num_ref_idx_l0_active_minus1 > max_refs || sh.num_ref_idx_l1_active_minus1 > max_refs) {
      malformed("num_ref_idx_active out of range");
    }

    if (kind != SliceKind::I && kind != SliceKind::SI) skip_ref_pic_list_modification(br);
    if (kind == SliceKind::B) skip_ref_pic_list_modification(br);

    if ((pps.weighted_pred_flag && (kind == SliceKind::P || kind == SliceKind::SP)) ||
        (pps.weighted_bipred_idc == 1 && kind == SliceKind::B)) {
      skip_pred_weight_table(br, sps, sh);
    }
    if (nal.nal_ref_idc != 0) skip_dec_ref_pic_marking(br, sh.is_idr());
    if (pps.entropy_coding_mode_flag && kind != SliceKind::I && kind != SliceKind::SI) {
      sh.cabac_init_idc = ue_in(br, 2, "cabac_init_idc");
    }
    sh.slice_qp_delta = se_in(br, -87, 77, "slice_qp_delta");
    sh.slice_qp = 26 + pps.pic_init_qp_minus26 + sh.slice_qp_delta;
    if (sh.slice_qp < 0 || sh.slice_qp > 51) malformed("slice_qp outside [0, 51]");
    return sh;
  });
}

}  // namespace drs::avc
