#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "drs/avc/gop_features.hpp"
#include "drs/drs_sim.hpp"
#include "drs/ladder.hpp"
#include "drs/rcql.hpp"
#include "drs/rd_model.hpp"
#include "drs/vqm.hpp"

namespace drs::io {

using Json = nlohmann::ordered_json;

/// Two-space indented with a trailing newline.
std::string dump(const Json& j);
/// Errors: ParseError.
Json parse_json(std::string_view text);

enum class RateUnit { Kbps, Mbps };
/// "kbps" or "mbps". Errors: ParseError.
RateUnit parse_rate_unit(std::string_view text);
double to_kbps(double value, RateUnit unit) noexcept;

// ---- quality log: content_id, gop_index, bitrate_kbps, width, height, vqm_score

std::vector<ladder::QualityEntry> parse_quality_log(std::string_view csv, RateUnit unit = RateUnit::Kbps);
std::string format_quality_log(std::span<const ladder::QualityEntry> entries);

// ---- scored points: content_id, resolution, bitrate_kbps, subjective_jod, objective_score

std::vector<rcql::ScoredPoint> parse_scored_points(std::string_view csv, RateUnit unit = RateUnit::Kbps);
std::string format_scored_points(std::span<const rcql::ScoredPoint> points);

// ---- feature log: content_id, gop_index, bitrate_kbps, width, height, features...
// An optional label_jod column (empty cell for unlabeled rows) is the target.

struct FeatureLog {
  vqm::FeatureSchema schema;
  std::vector<vqm::GopRecord> records;
};

/// Feature columns keep their file order. log_bitrate and log_pixels are
/// appended from the identity columns when the file lacks them.
FeatureLog parse_feature_log(std::string_view csv, RateUnit unit = RateUnit::Kbps);
std::string format_feature_log(const FeatureLog& log);
std::string format_gop_features(std::string_view content_id, std::span<const avc::GopFeatureRow> rows);

// ---- ladders and manifests (JSON)

/// { "rungs": [ { "bitrate_kbps": n, "resolutions": [[w,h], ...] } ] }, or an object holding
/// that under "ladder". Errors: ParseError, InvalidRange.
ladder::Ladder parse_ladder(std::string_view json, RateUnit unit = RateUnit::Kbps);
Json ladder_json(const ladder::Ladder& ladder);

/// { "segment_index": n, "entries": [ { "bitrate_kbps", "resolution": [w,h], "uri", "score" } ] }
sim::SegmentManifest parse_manifest(std::string_view json, RateUnit unit = RateUnit::Kbps);
Json manifest_json(const sim::SegmentManifest& manifest);

// ---- analysis outputs

Json solution_json(const ladder::LadderSolution& solution);
std::string format_probability(const ladder::ProbabilityTable& table);
/// gop, rung_kbps, width, height, score
std::string format_trace(const sim::DrsTrace& trace);
/// rung_kbps, mean_quality, flips, then one usage column per resolution
std::string format_rung_summary(const sim::DrsTrace& trace);
std::string format_rd_points(std::span<const rd::RDPoint> points);
Json bd_json(const sim::BdResult& result);
Json gain_json(const sim::GainStats& stats);
std::string format_histogram(std::span<const sim::HistogramBin> bins);

Json logistic_json(const Resolution& resolution, const rd::LogisticParams& params);
Json crossover_json(const rd::CrossOverResult& result);

Json rcql_report_json(const rcql::RcqlReport& report);
std::string format_rcql_rows(const rcql::RcqlReport& report);

Json cv_json(const vqm::CvResult& result);
Json gfs_json(const vqm::GfsResult& result);

}  // namespace drs::io
