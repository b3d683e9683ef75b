#include "drs/rd_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "drs/error.hpp"

namespace drs::rd {

RDCurve::RDCurve(Resolution resolution, std::vector<RDPoint> points)
    : resolution_(resolution), points_(std::move(points)) {
  for (const auto& p : points_) {
    if (!std::isfinite(p.bitrate_kbps) || !std::isfinite(p.quality)) {
      throw Error(ErrorCode::NonFinite, "RD point with non-finite value");
    }
    if (p.bitrate_kbps <= 0.0) {
      throw Error(ErrorCode::InvalidCurve, "RD point bitrate must be positive");
    }
  }
  if (points_.size() < 2) {
    throw Error(ErrorCode::InvalidCurve, "RD curve needs at least 2 points");
  }
  std::stable_sort(points_.begin(), points_.end(),
                   [](const RDPoint& a, const RDPoint& b) { return a.bitrate_kbps < b.bitrate_kbps; });
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].bitrate_kbps == points_[i - 1].bitrate_kbps) {
      throw Error(ErrorCode::InvalidCurve, "duplicate bitrate in RD curve");
    }
  }
}

double eval_logistic(const LogisticParams& p, double x) noexcept {
  const double z = (x - p.beta3) / std::abs(p.beta4);
  return p.beta2 + (p.beta1 - p.beta2) / (1.0 + std::exp(-z));
}

namespace {

// Variable projection: for fixed (beta3, log beta4) the model is linear in
// (beta2, beta1 - beta2); the amplitude is kept nonnegative.
struct Projection {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double rss = 0.0;
};

class ReducedProblem {
 public:
  ReducedProblem(std::span<const RDPoint> pts, double b3_lo, double b3_hi)
      : pts_(pts), lo_(b3_lo), hi_(b3_hi) {}

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return pts_.size(); }

  Projection solve(double b3, double u, std::vector<double>* residuals) const {
    const double b4 = std::exp(u);
    const std::size_t n = pts_.size();
    s_.resize(n);
    double ms = 0.0;
    double my = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      s_[j] = 1.0 / (1.0 + std::exp(-(pts_[j].bitrate_kbps - b3) / b4));
      ms += s_[j];
      my += pts_[j].quality;
    }
    ms /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sss = 0.0;
    double ssy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ds = s_[j] - ms;
      sss += ds * ds;
      ssy += ds * (pts_[j].quality - my);
    }
    double amp = 0.0;
    if (sss > 0.0 && std::isfinite(sss)) {
      amp = ssy / sss;
      if (!(amp > 0.0) || !std::isfinite(amp)) amp = 0.0;
    }
    Projection out;
    out.beta2 = my - amp * ms;
    out.beta1 = out.beta2 + amp;
    if (residuals) residuals->resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = pts_[j].quality - out.beta2 - amp * s_[j];
      out.rss += r * r;
      if (residuals) (*residuals)[j] = r;
    }
    return out;
  }

 private:
  std::span<const RDPoint> pts_;
  double lo_;
  double hi_;
  mutable std::vector<double> s_;
};

struct LocalResult {
  double b3 = 0.0;
  double u = 0.0;
  Projection proj;
  int iterations = 0;
};

LocalResult levenberg_marquardt(const ReducedProblem& prob, double b3, double u, int max_iter) {
  std::vector<double> r;
  std::vector<double> rp;
  std::vector<double> rm;
  Projection cur = prob.solve(b3, u, &r);
  double lambda = 1e-3;
  int it = 0;
  const std::size_t n = prob.size();
  std::vector<std::array<double, 2>> jac(n);

  for (; it < max_iter; ++it) {
    if (cur.rss <= 1e-30) break;
    // Central-difference Jacobian of the projected residual vector.
    const double h3 = 1e-6 * std::max(std::abs(b3), 1.0);
    const double hu = 1e-6;
    const double b3p = std::min(b3 + h3, prob.hi());
    const double b3m = std::max(b3 - h3, prob.lo());
    prob.solve(b3p, u, &rp);
    prob.solve(b3m, u, &rm);
    for (std::size_t j = 0; j < n; ++j) jac[j][0] = (rp[j] - rm[j]) / (b3p - b3m);
    prob.solve(b3, u + hu, &rp);
    prob.solve(b3, u - hu, &rm);
    for (std::size_t j = 0; j < n; ++j) jac[j][1] = (rp[j] - rm[j]) / (2.0 * hu);

    double a00 = 0.0, a01 = 0.0, a11 = 0.0, g0 = 0.0, g1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      a00 += jac[j][0] * jac[j][0];
      a01 += jac[j][0] * jac[j][1];
      a11 += jac[j][1] * jac[j][1];
      g0 += jac[j][0] * r[j];
      g1 += jac[j][1] * r[j];
    }
    const bool at_lo = b3 <= prob.lo();
    const bool at_hi = b3 >= prob.hi();

    bool improved = false;
    while (lambda < 1e20) {
      const double m00 = a00 + lambda * std::max(a00, 1e-300);
      const double m11 = a11 + lambda * std::max(a11, 1e-300);
      double d0 = 0.0;
      double d1 = 0.0;
      const double det = m00 * m11 - a01 * a01;
      if (det > 0.0 && std::isfinite(det)) {
        d0 = -(m11 * g0 - a01 * g1) / det;
        d1 = -(m00 * g1 - a01 * g0) / det;
      } else if (m11 > 0.0) {
        d1 = -g1 / m11;
      }
      // Active bound on beta3: drop that direction and step in log beta4 only.
      if ((at_lo && d0 < 0.0) || (at_hi && d0 > 0.0)) {
        d0 = 0.0;
        d1 = m11 > 0.0 ? -g1 / m11 : 0.0;
      }
      const double nb3 = std::clamp(b3 + d0, prob.lo(), prob.hi());
      const double nu = u + std::clamp(d1, -5.0, 5.0);
      Projection trial = prob.solve(nb3, nu, &rp);
      if (trial.rss < cur.rss) {
        const double gain = cur.rss - trial.rss;
        b3 = nb3;
        u = nu;
        cur = trial;
        r.swap(rp);
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (gain <= 1e-15 * cur.rss) lambda = 1e20;  // converged
        break;
      }
      lambda *= 4.0;
    }
    if (!improved || lambda >= 1e20) break;
  }
  return {b3, u, cur, it};
}

double quantile_sorted(std::span<const RDPoint> pts, double q) {
  const double pos = q * static_cast<double>(pts.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, pts.size() - 1);
  const double f = pos - static_cast<double>(i);
  return pts[i].bitrate_kbps * (1.0 - f) + pts[j].bitrate_kbps * f;
}

}  // namespace

LogisticParams fit_logistic(const RDCurve& curve, const FitOptions& options) {
  const auto pts = curve.points();
  if (pts.size() < 4) {
    throw Error(ErrorCode::TooFewPoints, "logistic fit needs at least 4 points");
  }
  const double r_min = curve.min_bitrate();
  ReducedProblem prob(pts, 0.5 * r_min, r_min);

  constexpr std::array<double, 4> kB3Frac = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  constexpr std::array<double, 4> kSlopeQ = {0.25, 0.5, 0.75, 1.0};

  LocalResult best;
  bool have = false;
  for (double fb : kB3Frac) {
    const double b3 = prob.lo() + fb * (prob.hi() - prob.lo());
    for (double q : kSlopeQ) {
      const double b4 = quantile_sorted(pts, q) - 0.5 * r_min;
      LocalResult local = levenberg_marquardt(prob, b3, std::log(b4), options.max_iterations);
      if (!have || local.proj.rss < best.proj.rss) {
        best = local;
        have = true;
      }
    }
  }

  LogisticParams out;
  out.beta1 = best.proj.beta1;
  out.beta2 = best.proj.beta2;
  out.beta3 = std::clamp(best.b3, prob.lo(), prob.hi());
  out.beta4 = std::exp(best.u);
  out.rss = best.proj.rss;
  out.r_min = r_min;
  out.iterations = best.iterations;
  return out;
}

// ---------------------------------------------------------------------------
// PCHIP

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

double pchip_end_slope(double h0, double h1, double m0, double m1) {
  double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if (sign(d) != sign(m0)) {
    d = 0.0;
  } else if (sign(m0) != sign(m1) && std::abs(d) > 3.0 * std::abs(m0)) {
    d = 3.0 * m0;
  }
  return d;
}

}  // namespace

PchipCurve::PchipCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw Error(ErrorCode::TooFewPoints, "PCHIP needs at least 2 knots");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
      throw Error(ErrorCode::NonFinite, "PCHIP knot is not finite");
    }
    if (i > 0 && !(x_[i] > x_[i - 1])) {
      throw Error(ErrorCode::InvalidCurve, "PCHIP knots must be strictly increasing");
    }
  }
  std::vector<double> h(n - 1);
  std::vector<double> m(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x_[k + 1] - x_[k];
    m[k] = (y_[k + 1] - y_[k]) / h[k];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = m[0];
  } else {
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (sign(m[k - 1]) * sign(m[k]) <= 0) {
        d_[k] = 0.0;
      } else {
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
      }
    }
    d_[0] = pchip_end_slope(h[0], h[1], m[0], m[1]);
    d_[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  }
  c2_.resize(n - 1);
  c3_.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    c2_[k] = (3.0 * m[k] - 2.0 * d_[k] - d_[k + 1]) / h[k];
    c3_[k] = (d_[k] + d_[k + 1] - 2.0 * m[k]) / (h[k] * h[k]);
  }
}

std::size_t PchipCurve::segment(double x) const noexcept {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return 0;
  const auto k = static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(k, x_.size() - 2);
}

double PchipCurve::operator()(double x) const noexcept {
  const std::size_t k = segment(x);
  // Exact knot values, including the right end.
  if (x == x_[k]) return y_[k];
  if (x == x_[k + 1]) return y_[k + 1];
  const double t = x - x_[k];
  return y_[k] + t * (d_[k] + t * (c2_[k] + t * c3_[k]));
}

double PchipCurve::segment_antiderivative(std::size_t k, double t) const noexcept {
  return t * (y_[k] + t * (d_[k] / 2.0 + t * (c2_[k] / 3.0 + t * c3_[k] / 4.0)));
}

double PchipCurve::integral(double a, double b) const noexcept {
  if (a == b) return 0.0;
  if (a > b) return -integral(b, a);
  const std::size_t ka = segment(a);
  const std::size_t kb = segment(b);
  if (ka == kb) {
    return segment_antiderivative(ka, b - x_[ka]) - segment_antiderivative(ka, a - x_[ka]);
  }
  double total = segment_antiderivative(ka, x_[ka + 1] - x_[ka]) -
                 segment_antiderivative(ka, a - x_[ka]);
  for (std::size_t k = ka + 1; k < kb; ++k) {
    total += segment_antiderivative(k, x_[k + 1] - x_[k]);
  }
  total += segment_antiderivative(kb, b - x_[kb]);
  return total;
}

PchipCurve fit_pchip(const RDCurve& curve) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : curve.points()) {
    x.push_back(p.bitrate_kbps);
    y.push_back(p.quality);
  }
  return PchipCurve(std::move(x), std::move(y));
}

// ---------------------------------------------------------------------------
// Cross-over

const char* to_string(CrossOverStatus status) noexcept {
  switch (status) {
    case CrossOverStatus::Found: return "found";
    case CrossOverStatus::None: return "none";
    case CrossOverStatus::MultipleResolved: return "multiple_resolved";
  }
  return "none";
}

CrossOverResult find_crossover(const QualityFn& low, const QualityFn& high, BitrateRange range,
                               const CrossOverOptions& options) {
  if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || !(range.lo < range.hi) ||
      range.lo <= 0.0) {
    throw Error(ErrorCode::InvalidRange, "cross-over search range must satisfy 0 < lo < hi");
  }
  const int n = std::max(options.scan_intervals, 1);
  const auto diff = [&](double x) { return high(x) - low(x); };
  const auto at = [&](int i) {
    if (i == n) return range.hi;
    return range.lo + (range.hi - range.lo) * static_cast<double>(i) / static_cast<double>(n);
  };

  CrossOverResult result;
  result.range = range;

  // Brackets between consecutive nonzero-sign samples; exact zeros in between
  // are attributed to the bracket that spans them.
  double prev_x = 0.0;
  int prev_sign = 0;
  std::optional<std::pair<double, double>> first_bracket;
  std::optional<double> first_zero;
  double zero_in_run = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i <= n; ++i) {
    const double x = at(i);
    const double g = diff(x);
    if (!std::isfinite(g)) {
      throw Error(ErrorCode::NotEvaluable, "curve difference is not finite in range");
    }
    const int s = sign(g);
    if (s == 0) {
      if (std::isnan(zero_in_run)) zero_in_run = x;
      continue;
    }
    if (prev_sign != 0 && s != prev_sign) {
      ++result.sign_changes;
      if (!first_bracket) {
        first_bracket = {prev_x, x};
        if (!std::isnan(zero_in_run)) first_zero = zero_in_run;
      }
    }
    prev_sign = s;
    prev_x = x;
    zero_in_run = std::numeric_limits<double>::quiet_NaN();
  }

  if (result.sign_changes == 0) {
    result.status = CrossOverStatus::None;
    return result;
  }

  double root = 0.0;
  if (first_zero) {
    root = *first_zero;
  } else {
    double a = first_bracket->first;
    double b = first_bracket->second;
    const int sa = sign(diff(a));
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      const int sm = sign(diff(mid));
      if (sm == 0) {
        a = b = mid;
        break;
      }
      if (sm == sa) {
        a = mid;
      } else {
        b = mid;
      }
    }
    root = 0.5 * (a + b);
  }
  result.bitrate_kbps = root;
  result.status =
      result.sign_changes == 1 ? CrossOverStatus::Found : CrossOverStatus::MultipleResolved;
  return result;
}

CrossOverResult find_crossover(const FittedCurve& low, const FittedCurve& high,
                               BitrateRange range, const CrossOverOptions& options) {
  const LogisticParams lp = low.params;
  const LogisticParams hp = high.params;
  CrossOverResult r = find_crossover([lp](double x) { return eval_logistic(lp, x); },
                                     [hp](double x) { return eval_logistic(hp, x); }, range,
                                     options);
  r.lower_curve = low.resolution;
  r.higher_curve = high.resolution;
  return r;
}

}  // namespace drs::rd
