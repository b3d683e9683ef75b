#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "drs/types.hpp"

namespace drs::rd {

struct RDPoint {
  double bitrate_kbps = 0.0;
  double quality = 0.0;
};

/// Rate-quality samples for one resolution. Bitrates are strictly increasing.
class RDCurve {
 public:
  RDCurve() = default;
  /// Sorts by bitrate and validates: at least 2 points, positive finite bitrates,
  /// finite qualities, no duplicate bitrates. Throws Error(InvalidCurve / NonFinite).
  RDCurve(Resolution resolution, std::vector<RDPoint> points);

  const Resolution& resolution() const noexcept { return resolution_; }
  std::span<const RDPoint> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double min_bitrate() const { return points_.front().bitrate_kbps; }
  double max_bitrate() const { return points_.back().bitrate_kbps; }

 private:
  Resolution resolution_;
  std::vector<RDPoint> points_;
};

// f(x) = beta2 + (beta1 - beta2) / (1 + exp(-(x - beta3) / |beta4|))
struct LogisticParams {
  double beta1 = 0.0;  // high-bitrate asymptote
  double beta2 = 0.0;  // low-bitrate asymptote
  double beta3 = 0.0;  // inflection point, kbps
  double beta4 = 1.0;  // slope scale, kbps
  double rss = 0.0;
  double r_min = 0.0;  // minimum bitrate of the fitted curve
  int iterations = 0;
};

struct FitOptions {
  int max_iterations = 400;
};

/// Least-squares fit with beta3 confined to [r_min/2, r_min], beta4 > 0 and
/// beta1 >= beta2. Multi-start (16 deterministic starts) variable-projection
/// Levenberg-Marquardt. Needs at least 4 points.
LogisticParams fit_logistic(const RDCurve& curve, const FitOptions& options = {});

double eval_logistic(const LogisticParams& params, double bitrate_kbps) noexcept;

/// Fritsch-Carlson monotone piecewise cubic Hermite interpolant.
/// Outside the knot span the end polynomials are extended.
class PchipCurve {
 public:
  /// x strictly increasing, at least 2 knots.
  PchipCurve(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const noexcept;
  /// Exact integral of the interpolant over [a, b] (a > b gives the negated value).
  double integral(double a, double b) const noexcept;

  double x_min() const noexcept { return x_.front(); }
  double x_max() const noexcept { return x_.back(); }
  std::span<const double> knots_x() const noexcept { return x_; }
  std::span<const double> knots_y() const noexcept { return y_; }
  std::span<const double> slopes() const noexcept { return d_; }

 private:
  std::size_t segment(double x) const noexcept;
  double segment_antiderivative(std::size_t k, double t) const noexcept;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
  std::vector<double> c2_;
  std::vector<double> c3_;
};

PchipCurve fit_pchip(const RDCurve& curve);

struct BitrateRange {
  double lo = 0.0;
  double hi = 0.0;
};

enum class CrossOverStatus { Found, None, MultipleResolved };

const char* to_string(CrossOverStatus status) noexcept;

struct CrossOverResult {
  std::optional<double> bitrate_kbps;
  Resolution lower_curve;
  Resolution higher_curve;
  CrossOverStatus status = CrossOverStatus::None;
  int sign_changes = 0;
  BitrateRange range;
};

struct FittedCurve {
  Resolution resolution;
  LogisticParams params;
};

using QualityFn = std::function<double(double)>;

struct CrossOverOptions {
  int scan_intervals = 1 << 16;
};

/// Locates where quality(high) - quality(low) changes sign on the range by a
/// uniform bracket scan followed by bisection. A difference that is zero
/// everywhere counts as no cross-over.
CrossOverResult find_crossover(const QualityFn& low, const QualityFn& high, BitrateRange range,
                               const CrossOverOptions& options = {});

CrossOverResult find_crossover(const FittedCurve& low, const FittedCurve& high,
                               BitrateRange range, const CrossOverOptions& options = {});

}  // namespace drs::rd
