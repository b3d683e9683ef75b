#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drs/rd_model.hpp"
#include "drs/types.hpp"

namespace drs::rcql {

struct ScoredPoint {
  std::string content_id;
  Resolution resolution;
  double bitrate_kbps = 0.0;
  double subjective_jod = 0.0;
  double objective_score = 0.0;
};

struct DeltaBitrate {
  double kbps = 0.0;
  // Exactly one side had no cross-over; the distance to the nearer range endpoint was used.
  bool imputed = false;
};

/// |b_subj - b_obj|. When exactly one side is missing, the found cross-over's
/// distance to the nearer range endpoint; 0 when both are missing.
DeltaBitrate delta_bitrate(const rd::CrossOverResult& subjective, const rd::CrossOverResult& objective);

/// Area between the two subjective fits over [min(x_s,x_o), max(x_s,x_o)].
double rcql_s(const rd::QualityFn& subjective_low, const rd::QualityFn& subjective_high,
              double subj_xover_kbps, double obj_xover_kbps);
double rcql_s(const rd::LogisticParams& subjective_low, const rd::LogisticParams& subjective_high,
              double subj_xover_kbps, double obj_xover_kbps);

double rcql_avg(double rcql_s_value, double subj_xover_kbps, double obj_xover_kbps) noexcept;

struct RankingAccuracy {
  double acc_percent = 0.0;
  double ql_jod = 0.0;
  int comparable_pairs = 0;
  int discordant_pairs = 0;
  int subjective_ties = 0;
};

/// Pairs records of `low` and `high` resolution sharing (content, nominal bitrate).
/// Objective ties on a pair with a subjective preference count as discordant.
RankingAccuracy ranking_accuracy(const std::vector<ScoredPoint>& points, Resolution low,
                                 Resolution high, double tie_eps = 1e-9);

struct Correlations {
  double srocc = 0.0;
  double plcc = 0.0;
};

Correlations correlations(const std::vector<double>& subjective, const std::vector<double>& objective);

/// Mean over contents of the per-content median over runs. Contents with no
/// finite values are skipped; NaN if none remain.
double median_then_mean(const std::map<std::string, std::vector<double>>& per_content_runs);

struct ResolutionPair {
  Resolution low;
  Resolution high;
};

struct RcqlRow {
  ResolutionPair pair;
  std::string content_id;
  rd::CrossOverResult subjective_xover;
  rd::CrossOverResult objective_xover;
  double delta_bitrate_kbps = 0.0;
  bool delta_imputed = false;
  double rcql_s = 0.0;
  double rcql_avg = 0.0;
  std::optional<double> acc_percent;
  std::optional<double> ql_jod;
};

struct PairSummary {
  ResolutionPair pair;
  int contents = 0;
  double delta_bitrate_kbps = 0.0;
  double rcql_s = 0.0;
  double rcql_avg = 0.0;
  double acc_percent = 0.0;
  double ql_jod = 0.0;
  int acc_contents = 0;
};

struct RcqlReport {
  std::vector<RcqlRow> rows;
  std::vector<PairSummary> summaries;
  Correlations correlation;
  std::vector<std::string> skipped;
};

struct BenchOptions {
  double tie_eps = 1e-9;
};

/// Fits subjective and objective logistic curves per (content, resolution) and
/// evaluates every measure per resolution pair and content. A content missing a
/// resolution (or with too few points to fit) is skipped for that pair.
RcqlReport bench(const std::vector<ScoredPoint>& points, const std::vector<ResolutionPair>& pairs,
                 const BenchOptions& options = {});

}  // namespace drs::rcql
