#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "drs/ladder.hpp"
#include "drs/rd_model.hpp"
#include "drs/types.hpp"

namespace drs::sim {

struct TraceEntry {
  std::size_t gop = 0;
  double rung_kbps = 0.0;
  Resolution resolution;
  double score = 0.0;
};

struct RungSummary {
  double rung_kbps = 0.0;
  double mean_quality = 0.0;
  std::size_t flips = 0;  // resolution changes between consecutive GOPs
  std::map<Resolution, std::size_t> usage;
};

struct DrsTrace {
  std::size_t gops = 0;
  std::size_t granularity = 1;
  std::vector<TraceEntry> entries;  // rung-major, GOP order within a rung
  std::vector<RungSummary> rungs;   // ascending

  /// Per-rung mean points, (rung kbps, mean quality).
  std::vector<rd::RDPoint> rd_points() const;
  /// Entries of one rung. Errors: MismatchedTraces when absent.
  std::span<const TraceEntry> rung_entries(double rung_kbps) const;
};

/// Per window of `granularity` GOPs and per rung, picks the ladder resolution
/// with the largest window-summed score (ties to the lower resolution).
/// Rung means are sums of window sums over the GOP count.
/// Errors: IncompleteLog, InvalidRange (granularity 0 or empty ladder).
DrsTrace simulate(const ladder::QualityLog& log, const ladder::Ladder& ladder, std::size_t granularity = 1);

struct ManifestEntry {
  double rung_kbps = 0.0;
  Resolution resolution;
  std::string uri;
  double score = 0.0;
};

struct SegmentManifest {
  int segment_index = 0;
  std::vector<ManifestEntry> entries;
};

/// Keeps the best-scoring entry of each of `rungs` (ties to the lower
/// resolution); entries at other bitrates are dropped. Output is sorted by
/// rung. Errors: MissingRung, NonFinite.
SegmentManifest filter_manifest(const SegmentManifest& manifest, std::span<const double> rungs);

enum class BdMethod { Pchip, Logistic };

struct BdResult {
  double bd_rate_percent = 0.0;
  double bd_quality = 0.0;
  // Common quality interval used for the rate delta and common log10-rate
  // interval used for the quality delta.
  double quality_lo = 0.0, quality_hi = 0.0;
  double log_rate_lo = 0.0, log_rate_hi = 0.0;
};

/// Average rate difference (percent) at equal quality: PCHIP of log10(rate)
/// over quality, integrated across the common quality range.
/// Errors: TooFewPoints (< 4), NoOverlap, NonMonotoneCurve (quality not
/// strictly increasing in rate, so rate is not a function of quality).
double bd_rate(const rd::RDCurve& anchor, const rd::RDCurve& test, BdMethod method = BdMethod::Pchip);
/// Average quality difference at equal log10(rate). Errors: TooFewPoints, NoOverlap.
double bd_quality(const rd::RDCurve& anchor, const rd::RDCurve& test, BdMethod method = BdMethod::Pchip);
/// Both deltas plus their intervals.
BdResult bd_compare(const rd::RDCurve& anchor, const rd::RDCurve& test, BdMethod method = BdMethod::Pchip);

struct GainStats {
  std::vector<double> deltas;  // drs - baseline per GOP
  double mean = 0.0;
  double median = 0.0;
  double p5 = 0.0, p25 = 0.0, p75 = 0.0, p95 = 0.0;
  double min = 0.0, max = 0.0;
};

/// Errors: MismatchedTraces (GOP counts differ or the rung is missing).
GainStats gain_distribution(const DrsTrace& baseline, const DrsTrace& drs, double rung_kbps);

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the last bin is closed. A zero-width
/// range yields one bin holding every value. Errors: EmptyInput, InvalidRange.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

}  // namespace drs::sim
