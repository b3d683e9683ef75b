#include "drs/drs_sim.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>

#include "drs/error.hpp"
#include "drs/stats.hpp"

namespace drs::sim {

using ladder::Ladder;
using ladder::QualityLog;

// ---- simulation -------------------------------------------------------------

std::vector<rd::RDPoint> DrsTrace::rd_points() const {
  std::vector<rd::RDPoint> pts;
  for (const auto& r : rungs) pts.push_back({r.rung_kbps, r.mean_quality});
  return pts;
}

std::span<const TraceEntry> DrsTrace::rung_entries(double rung_kbps) const {
  for (std::size_t r = 0; r < rungs.size(); ++r) {
    if (rungs[r].rung_kbps == rung_kbps) return std::span<const TraceEntry>(entries).subspan(r * gops, gops);
  }
  throw Error(ErrorCode::MismatchedTraces, "trace has no rung " + std::to_string(rung_kbps) + " kbps");
}

DrsTrace simulate(const QualityLog& log, const Ladder& ladder, std::size_t granularity) {
  if (granularity == 0) throw Error(ErrorCode::InvalidRange, "granularity must be positive");
  if (ladder.rungs.empty()) throw Error(ErrorCode::InvalidRange, "empty ladder");
  if (log.gops() == 0) throw Error(ErrorCode::IncompleteLog, "quality log has no GOPs");
  DrsTrace trace;
  trace.gops = log.gops();
  trace.granularity = granularity;
  trace.entries.reserve(log.gops() * ladder.rungs.size());

  for (const auto& rung : ladder.rungs) {
    const std::size_t r = log.rung_index(rung.kbps);
    std::vector<std::size_t> res;  // ascending, as the ladder keeps them
    for (const auto& resolution : rung.resolutions) res.push_back(log.resolution_index(resolution));
    std::sort(res.begin(), res.end());
    for (std::size_t g = 0; g < log.gops(); ++g) {
      for (std::size_t k : res) {
        if (!log.has(g, r, k)) {
          throw Error(ErrorCode::IncompleteLog, "no score for " + to_string(log.resolutions()[k]) + " at " +
                                                    std::to_string(rung.kbps) + " kbps, GOP " + std::to_string(g));
        }
      }
    }

    RungSummary summary;
    summary.rung_kbps = rung.kbps;
    double total = 0.0;
    std::size_t previous = res.size();
    for (std::size_t start = 0; start < log.gops(); start += granularity) {
      const std::size_t end = std::min(start + granularity, log.gops());
      std::size_t best = 0;
      double best_sum = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < res.size(); ++j) {
        double sum = 0.0;
        for (std::size_t g = start; g < end; ++g) sum += log.score(g, r, res[j]);
        if (sum > best_sum) {
          best_sum = sum;
          best = j;
        }
      }
      total += best_sum;
      for (std::size_t g = start; g < end; ++g) {
        trace.entries.push_back({g, rung.kbps, log.resolutions()[res[best]], log.score(g, r, res[best])});
      }
      if (previous != res.size() && previous != best) ++summary.flips;
      previous = best;
      summary.usage[log.resolutions()[res[best]]] += end - start;
    }
    summary.mean_quality = total / static_cast<double>(log.gops());
    trace.rungs.push_back(std::move(summary));
  }
  return trace;
}

// ---- packager filtering ------------------------------------------------------------

SegmentManifest filter_manifest(const SegmentManifest& manifest, std::span<const double> rungs) {
  SegmentManifest out;
  out.segment_index = manifest.segment_index;
  std::vector<double> sorted(rungs.begin(), rungs.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const auto& e : manifest.entries) {
    if (!std::isfinite(e.score)) throw Error(ErrorCode::NonFinite, "non-finite score in manifest");
  }
  for (double rung : sorted) {
    const ManifestEntry* best = nullptr;
    for (const auto& e : manifest.entries) {
      if (e.rung_kbps != rung) continue;
      if (!best || e.score > best->score || (e.score == best->score && e.resolution < best->resolution)) {
        best = &e;
      }
    }
    if (!best) {
      throw Error(ErrorCode::MissingRung, "segment " + std::to_string(manifest.segment_index) + " has no entry at " +
                                              std::to_string(rung) + " kbps");
    }
    out.entries.push_back(*best);
  }
  return out;
}

// ---- Bjontegaard deltas ---------------------------------------------------------------

namespace {

constexpr std::size_t kMinBdPoints = 4;

void check_points(const rd::RDCurve& c, const char* which) {
  if (c.size() < kMinBdPoints) {
    throw Error(ErrorCode::TooFewPoints, std::string(which) + " curve has " + std::to_string(c.size()) +
                                             " points; BD needs 4");
  }
}

struct QualityAxis {
  std::vector<double> q;
  std::vector<double> log_rate;
};

// Quality as the abscissa; rate must be a function of it.
QualityAxis quality_axis(const rd::RDCurve& c, const char* which) {
  QualityAxis a;
  for (const auto& p : c.points()) {
    if (!a.q.empty() && !(p.quality > a.q.back())) {
      throw Error(ErrorCode::NonMonotoneCurve,
                  std::string(which) + " curve quality is not strictly increasing with bitrate");
    }
    a.q.push_back(p.quality);
    a.log_rate.push_back(std::log10(p.bitrate_kbps));
  }
  return a;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, 1e-12);
}

// Inverse of the logistic on its open range; extrapolated values are
// clamped just inside the asymptotes.
double logistic_inverse(const rd::LogisticParams& p, double q) {
  const double span = p.beta1 - p.beta2;
  const double eps = 1e-12 * std::max(1.0, std::abs(span));
  const double y = std::clamp(q, p.beta2 + eps, p.beta1 - eps);
  return p.beta3 - std::abs(p.beta4) * std::log(span / (y - p.beta2) - 1.0);
}

struct Interval {
  double lo, hi;
};

Interval overlap(double a_lo, double a_hi, double b_lo, double b_hi, const char* what) {
  const Interval i{std::max(a_lo, b_lo), std::min(a_hi, b_hi)};
  if (!(i.hi > i.lo)) throw Error(ErrorCode::NoOverlap, std::string("curves do not overlap in ") + what);
  return i;
}

double bd_rate_impl(const rd::RDCurve& anchor, const rd::RDCurve& test, BdMethod method, Interval* used) {
  check_points(anchor, "anchor");
  check_points(test, "test");
  const QualityAxis a = quality_axis(anchor, "anchor");
  const QualityAxis t = quality_axis(test, "test");
  const Interval iv = overlap(a.q.front(), a.q.back(), t.q.front(), t.q.back(), "quality");
  if (used) *used = iv;
  double gap = 0.0;
  if (method == BdMethod::Pchip) {
    const rd::PchipCurve pa(a.q, a.log_rate);
    const rd::PchipCurve pt(t.q, t.log_rate);
    gap = pt.integral(iv.lo, iv.hi) - pa.integral(iv.lo, iv.hi);
  } else {
    const auto fa = rd::fit_logistic(anchor);
    const auto ft = rd::fit_logistic(test);
    gap = integrate([&](double q) { return std::log10(std::max(logistic_inverse(ft, q), 1e-300)) -
                                             std::log10(std::max(logistic_inverse(fa, q), 1e-300)); },
                    iv.lo, iv.hi);
  }
  const double avg = gap / (iv.hi - iv.lo);
  const double pct = (std::pow(10.0, avg) - 1.0) * 100.0;
  if (!std::isfinite(pct)) throw Error(ErrorCode::NonFinite, "BD-rate is not finite");
  return pct;
}

double bd_quality_impl(const rd::RDCurve& anchor, const rd::RDCurve& test, BdMethod method, Interval* used) {
  check_points(anchor, "anchor");
  check_points(test, "test");
  const Interval iv = overlap(std::log10(anchor.min_bitrate()), std::log10(anchor.max_bitrate()),
                              std::log10(test.min_bitrate()), std::log10(test.max_bitrate()), "bitrate");
  if (used) *used = iv;
  double gap = 0.0;
  if (method == BdMethod::Pchip) {
    auto axis = [](const rd::RDCurve& c) {
      std::vector<double> x, y;
      for (const auto& p : c.points()) {
        x.push_back(std::log10(p.bitrate_kbps));
        y.push_back(p.quality);
      }
      return rd::PchipCurve(std::move(x), std::move(y));
    };
    const rd::PchipCurve pa = axis(anchor);
    const rd::PchipCurve pt = axis(test);
    gap = pt.integral(iv.lo, iv.hi) - pa.integral(iv.lo, iv.hi);
  } else {
    const auto fa = rd::fit_logistic(anchor);
    const auto ft = rd::fit_logistic(test);
    gap = integrate([&](double u) {
      const double x = std::pow(10.0, u);
      return rd::eval_logistic(ft, x) - rd::eval_logistic(fa, x);
    }, iv.lo, iv.hi);
  }
  return gap / (iv.hi - iv.lo);
}

}  // namespace

double bd_rate(const rd::RDCurve& anchor, const rd::RDCurve& test, BdMethod method) {
  return bd_rate_impl(anchor, test, method, nullptr);
}

double bd_quality(const rd::RDCurve& anchor, const rd::RDCurve& test, BdMethod method) {
  return bd_quality_impl(anchor, test, method, nullptr);
}

BdResult bd_compare(const rd::RDCurve& anchor, const rd::RDCurve& test, BdMethod method) {
  BdResult r;
  Interval q{}, u{};
  r.bd_rate_percent = bd_rate_impl(anchor, test, method, &q);
  r.bd_quality = bd_quality_impl(anchor, test, method, &u);
  r.quality_lo = q.lo;
  r.quality_hi = q.hi;
  r.log_rate_lo = u.lo;
  r.log_rate_hi = u.hi;
  return r;
}

// ---- gain distribution ------------------------------------------------------------------

GainStats gain_distribution(const DrsTrace& baseline, const DrsTrace& drs, double rung_kbps) {
  if (baseline.gops != drs.gops) {
    throw Error(ErrorCode::MismatchedTraces, "traces cover " + std::to_string(baseline.gops) + " and " +
                                                 std::to_string(drs.gops) + " GOPs");
  }
  const auto b = baseline.rung_entries(rung_kbps);
  const auto d = drs.rung_entries(rung_kbps);
  if (b.empty()) throw Error(ErrorCode::MismatchedTraces, "traces are empty");
  GainStats s;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i].gop != d[i].gop) throw Error(ErrorCode::MismatchedTraces, "GOP order differs between traces");
    s.deltas.push_back(d[i].score - b[i].score);
  }
  s.mean = stats::mean(s.deltas);
  s.median = stats::median(s.deltas);
  s.p5 = stats::quantile(s.deltas, 0.05);
  s.p25 = stats::quantile(s.deltas, 0.25);
  s.p75 = stats::quantile(s.deltas, 0.75);
  s.p95 = stats::quantile(s.deltas, 0.95);
  s.min = *std::min_element(s.deltas.begin(), s.deltas.end());
  s.max = *std::max_element(s.deltas.begin(), s.deltas.end());
  return s;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values to bin");
  if (bins == 0) throw Error(ErrorCode::InvalidRange, "bin count must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite value in histogram input");
  }
  const double lo = *std::min_element(values.begin(), values.end());
  const double hi = *std::max_element(values.begin(), values.end());
  if (!(hi > lo)) return {{lo, hi, values.size()}};
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = lo + width * static_cast<double>(b);
    out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    b = std::min(b, bins - 1);
    // Keep assignment consistent with the printed edges.
    while (b > 0 && v < out[b].left) --b;
    while (b + 1 < bins && v >= out[b + 1].left) ++b;
    ++out[b].count;
  }
  return out;
}

}  // namespace drs::sim
