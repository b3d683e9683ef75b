#include "drs/rcql.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "drs/error.hpp"
#include "drs/stats.hpp"

namespace drs::rcql {

namespace {

double nearer_endpoint_distance(double x, const rd::BitrateRange& range) {
  return std::min(std::abs(x - range.lo), std::abs(range.hi - x));
}

double nearer_endpoint(double x, const rd::BitrateRange& range) {
  return std::abs(x - range.lo) <= std::abs(range.hi - x) ? range.lo : range.hi;
}

}  // namespace

DeltaBitrate delta_bitrate(const rd::CrossOverResult& subj, const rd::CrossOverResult& obj) {
  if (!(subj.lower_curve == obj.lower_curve) || !(subj.higher_curve == obj.higher_curve) ||
      subj.range.lo != obj.range.lo || subj.range.hi != obj.range.hi) {
    throw Error(ErrorCode::MismatchedPair,
                "cross-overs were not evaluated on the same resolution pair and range");
  }
  const bool has_s = subj.bitrate_kbps.has_value();
  const bool has_o = obj.bitrate_kbps.has_value();
  if (has_s && has_o) return {std::abs(*subj.bitrate_kbps - *obj.bitrate_kbps), false};
  if (has_s) return {nearer_endpoint_distance(*subj.bitrate_kbps, subj.range), true};
  if (has_o) return {nearer_endpoint_distance(*obj.bitrate_kbps, obj.range), true};
  return {0.0, false};
}

double rcql_s(const rd::QualityFn& low, const rd::QualityFn& high, double x_s, double x_o) {
  if (!std::isfinite(x_s) || !std::isfinite(x_o)) {
    throw Error(ErrorCode::NotEvaluable, "cross-over bitrates must be finite");
  }
  const double a = std::min(x_s, x_o);
  const double b = std::max(x_s, x_o);
  if (a == b) return 0.0;
  auto gap = [&](double x) {
    const double g = high(x) - low(x);
    if (!std::isfinite(g)) throw Error(ErrorCode::NotEvaluable, "fit not evaluable in interval");
    return std::abs(g);
  };
  double err = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(gap, a, b, 20, 1e-10, &err);
  return std::max(value, 0.0);
}

double rcql_s(const rd::LogisticParams& low, const rd::LogisticParams& high, double x_s,
              double x_o) {
  return rcql_s([&](double x) { return rd::eval_logistic(low, x); },
                [&](double x) { return rd::eval_logistic(high, x); }, x_s, x_o);
}

double rcql_avg(double rcql_s_value, double x_s, double x_o) noexcept {
  const double width = std::abs(x_s - x_o);
  if (width == 0.0) return 0.0;
  return rcql_s_value / width;
}

RankingAccuracy ranking_accuracy(const std::vector<ScoredPoint>& points, Resolution low,
                                 Resolution high, double tie_eps) {
  std::map<std::pair<std::string, double>, const ScoredPoint*> lows;
  std::map<std::pair<std::string, double>, const ScoredPoint*> highs;
  for (const auto& p : points) {
    if (p.resolution == low) lows[{p.content_id, p.bitrate_kbps}] = &p;
    if (p.resolution == high) highs[{p.content_id, p.bitrate_kbps}] = &p;
  }
  RankingAccuracy out;
  int concordant = 0;
  double loss = 0.0;
  for (const auto& [key, lp] : lows) {
    const auto it = highs.find(key);
    if (it == highs.end()) continue;
    const ScoredPoint* hp = it->second;
    const double ds = hp->subjective_jod - lp->subjective_jod;
    if (std::abs(ds) <= tie_eps) {
      ++out.subjective_ties;
      continue;
    }
    const double dobj = hp->objective_score - lp->objective_score;
    ++out.comparable_pairs;
    if ((ds > 0 && dobj > 0) || (ds < 0 && dobj < 0)) {
      ++concordant;
    } else {
      ++out.discordant_pairs;
      loss += std::abs(ds);
    }
  }
  if (out.comparable_pairs == 0) {
    throw Error(ErrorCode::NoComparablePairs,
                "no matched (content, bitrate) pairs with a subjective preference for " +
                    to_string(low) + " vs " + to_string(high));
  }
  out.acc_percent = 100.0 * concordant / out.comparable_pairs;
  out.ql_jod = out.discordant_pairs > 0 ? loss / out.discordant_pairs : 0.0;
  return out;
}

Correlations correlations(const std::vector<double>& subjective,
                          const std::vector<double>& objective) {
  if (subjective.size() != objective.size() || subjective.size() < 3) {
    throw Error(ErrorCode::DegenerateInput, "correlations need two equal-length samples of >= 3");
  }
  Correlations c;
  c.srocc = stats::spearman(subjective, objective);
  c.plcc = stats::pearson(subjective, objective);
  if (std::isnan(c.srocc) || std::isnan(c.plcc)) {
    throw Error(ErrorCode::DegenerateInput, "zero variance in correlation input");
  }
  return c;
}

double median_then_mean(const std::map<std::string, std::vector<double>>& per_content_runs) {
  std::vector<double> medians;
  for (const auto& [content, runs] : per_content_runs) {
    std::vector<double> finite;
    for (double v : runs) {
      if (std::isfinite(v)) finite.push_back(v);
    }
    if (!finite.empty()) medians.push_back(stats::median(finite));
  }
  if (medians.empty()) return std::numeric_limits<double>::quiet_NaN();
  return stats::mean(medians);
}

namespace {

struct ContentFits {
  std::optional<rd::LogisticParams> subjective;
  std::optional<rd::LogisticParams> objective;
  double min_rate = 0.0;
  double max_rate = 0.0;
};

}  // namespace

RcqlReport bench(const std::vector<ScoredPoint>& points, const std::vector<ResolutionPair>& pairs,
                 const BenchOptions& options) {
  RcqlReport report;

  std::vector<double> subj_all;
  std::vector<double> obj_all;
  std::map<std::pair<std::string, Resolution>, std::vector<const ScoredPoint*>> groups;
  std::set<std::string> contents;
  for (const auto& p : points) {
    subj_all.push_back(p.subjective_jod);
    obj_all.push_back(p.objective_score);
    groups[{p.content_id, p.resolution}].push_back(&p);
    contents.insert(p.content_id);
  }
  report.correlation = correlations(subj_all, obj_all);

  std::map<std::pair<std::string, Resolution>, ContentFits> fits;
  auto fits_for = [&](const std::string& content, Resolution res) -> const ContentFits* {
    const auto key = std::make_pair(content, res);
    if (auto it = fits.find(key); it != fits.end()) return &it->second;
    const auto g = groups.find(key);
    if (g == groups.end()) return nullptr;
    ContentFits f;
    std::vector<rd::RDPoint> subj;
    std::vector<rd::RDPoint> obj;
    for (const ScoredPoint* p : g->second) {
      subj.push_back({p->bitrate_kbps, p->subjective_jod});
      obj.push_back({p->bitrate_kbps, p->objective_score});
    }
    try {
      const rd::RDCurve sc(res, subj);
      const rd::RDCurve oc(res, obj);
      f.min_rate = sc.min_bitrate();
      f.max_rate = sc.max_bitrate();
      f.subjective = rd::fit_logistic(sc);
      f.objective = rd::fit_logistic(oc);
    } catch (const Error& e) {
      report.skipped.push_back(content + " " + to_string(res) + ": " + e.what());
      f.subjective.reset();
    }
    return &fits.emplace(key, f).first->second;
  };

  for (const auto& pair : pairs) {
    PairSummary summary;
    summary.pair = pair;
    for (const auto& content : contents) {
      const ContentFits* lf = fits_for(content, pair.low);
      const ContentFits* hf = fits_for(content, pair.high);
      if (!lf || !hf) {
        report.skipped.push_back(content + " " + to_string(pair.low) + " vs " +
                                 to_string(pair.high) + ": missing resolution");
        continue;
      }
      if (!lf->subjective || !hf->subjective) continue;
      const rd::BitrateRange range{std::min(lf->min_rate, hf->min_rate),
                                   std::max(lf->max_rate, hf->max_rate)};
      RcqlRow row;
      row.pair = pair;
      row.content_id = content;
      row.subjective_xover = rd::find_crossover(rd::FittedCurve{pair.low, *lf->subjective},
                                                rd::FittedCurve{pair.high, *hf->subjective}, range);
      row.objective_xover = rd::find_crossover(rd::FittedCurve{pair.low, *lf->objective},
                                               rd::FittedCurve{pair.high, *hf->objective}, range);
      const DeltaBitrate db = delta_bitrate(row.subjective_xover, row.objective_xover);
      row.delta_bitrate_kbps = db.kbps;
      row.delta_imputed = db.imputed;

      const auto& xs = row.subjective_xover.bitrate_kbps;
      const auto& xo = row.objective_xover.bitrate_kbps;
      if (xs || xo) {
        const double s = xs ? *xs : nearer_endpoint(*xo, range);
        const double o = xo ? *xo : nearer_endpoint(*xs, range);
        row.rcql_s = rcql_s(*lf->subjective, *hf->subjective, s, o);
        row.rcql_avg = rcql_avg(row.rcql_s, s, o);
      }

      std::vector<ScoredPoint> subset;
      for (const ScoredPoint* p : groups[{content, pair.low}]) subset.push_back(*p);
      for (const ScoredPoint* p : groups[{content, pair.high}]) subset.push_back(*p);
      try {
        const RankingAccuracy ra = ranking_accuracy(subset, pair.low, pair.high, options.tie_eps);
        row.acc_percent = ra.acc_percent;
        row.ql_jod = ra.ql_jod;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoComparablePairs) throw;
      }

      ++summary.contents;
      summary.delta_bitrate_kbps += row.delta_bitrate_kbps;
      summary.rcql_s += row.rcql_s;
      summary.rcql_avg += row.rcql_avg;
      if (row.acc_percent) {
        ++summary.acc_contents;
        summary.acc_percent += *row.acc_percent;
        summary.ql_jod += *row.ql_jod;
      }
      report.rows.push_back(std::move(row));
    }
    if (summary.contents > 0) {
      summary.delta_bitrate_kbps /= summary.contents;
      summary.rcql_s /= summary.contents;
      summary.rcql_avg /= summary.contents;
    }
    if (summary.acc_contents > 0) {
      summary.acc_percent /= summary.acc_contents;
      summary.ql_jod /= summary.acc_contents;
    }
    report.summaries.push_back(summary);
  }
  return report;
}

}  // namespace drs::rcql
