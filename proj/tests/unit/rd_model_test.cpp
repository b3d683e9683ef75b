#include "drs/rd_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "drs/error.hpp"

namespace {

using drs::Error;
using drs::ErrorCode;
using drs::Resolution;
using namespace drs::rd;

LogisticParams make_params(double b1, double b2, double b3, double b4) {
  LogisticParams p;
  p.beta1 = b1;
  p.beta2 = b2;
  p.beta3 = b3;
  p.beta4 = b4;
  return p;
}

RDCurve sample_curve(const LogisticParams& p, const std::vector<double>& rates,
                     const std::vector<double>& noise = {}) {
  std::vector<RDPoint> pts;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double n = noise.empty() ? 0.0 : noise[i];
    pts.push_back({rates[i], eval_logistic(p, rates[i]) + n});
  }
  return RDCurve({1920, 1080}, pts);
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Independent oracle: brute-force grid over all four parameters.
double grid_search_rss(const RDCurve& c) {
  const auto pts = c.points();
  const double r_min = c.min_bitrate();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> s(pts.size());
  for (int i3 = 0; i3 <= 25; ++i3) {
    const double b3 = r_min / 2 + (r_min / 2) * i3 / 25.0;
    for (int i4 = 0; i4 < 60; ++i4) {
      const double b4 = 50.0 * std::pow(4000.0 / 50.0, i4 / 59.0);
      for (std::size_t j = 0; j < pts.size(); ++j) {
        s[j] = 1.0 / (1.0 + std::exp(-(pts[j].bitrate_kbps - b3) / b4));
      }
      for (int i1 = 0; i1 <= 80; ++i1) {
        const double b1 = 6.0 + 0.05 * i1;
        for (int i2 = 0; i2 <= 100; ++i2) {
          const double b2 = -3.0 + 0.08 * i2;
          if (b1 < b2) continue;
          double rss = 0.0;
          for (std::size_t j = 0; j < pts.size(); ++j) {
            const double r = pts[j].quality - (b2 + (b1 - b2) * s[j]);
            rss += r * r;
          }
          best = std::min(best, rss);
        }
      }
    }
  }
  return best;
}

const std::vector<double> kRates = {1000, 1500, 2000, 3000, 4000, 6000};

TEST(RDCurve, RejectsInvalidInput) {
  EXPECT_THROW(RDCurve({1, 1}, {{100, 1.0}}), Error);
  EXPECT_THROW(RDCurve({1, 1}, {{100, 1.0}, {100, 2.0}}), Error);
  EXPECT_THROW(RDCurve({1, 1}, {{-5, 1.0}, {100, 2.0}}), Error);
  EXPECT_THROW(RDCurve({1, 1}, {{50, NAN}, {100, 2.0}}), Error);
  RDCurve sorted({1, 1}, {{300, 3.0}, {100, 1.0}, {200, 2.0}});
  EXPECT_EQ(sorted.points()[0].bitrate_kbps, 100);
  EXPECT_EQ(sorted.points()[2].bitrate_kbps, 300);
}

TEST(EvalLogistic, InflectionMidpoint) {
  const auto p = make_params(8, 2, 600, 400);
  EXPECT_DOUBLE_EQ(eval_logistic(p, 600), 5.0);
}

TEST(EvalLogistic, HighAsymptote) {
  const auto p = make_params(8, 2, 600, 400);
  EXPECT_NEAR(eval_logistic(p, 1e9), 8.0, 1e-9);
}

TEST(EvalLogistic, HandEvaluation) {
  // 2 + 6 / (1 + e^-1)
  const auto p = make_params(8, 2, 600, 400);
  EXPECT_NEAR(eval_logistic(p, 1000), 6.38635, 5e-5);
}

TEST(EvalLogistic, UsesAbsoluteSlope) {
  const auto p = make_params(8, 2, 600, 400);
  const auto q = make_params(8, 2, 600, -400);
  EXPECT_DOUBLE_EQ(eval_logistic(p, 1234), eval_logistic(q, 1234));
}

TEST(FitLogistic, RecoversNoiselessParameters) {
  const auto truth = make_params(8, 2, 600, 400);
  const auto fit = fit_logistic(sample_curve(truth, kRates));
  EXPECT_LT(rel_err(fit.beta1, 8), 1e-3);
  EXPECT_LT(rel_err(fit.beta2, 2), 1e-3);
  EXPECT_LT(rel_err(fit.beta3, 600), 1e-3);
  EXPECT_LT(rel_err(fit.beta4, 400), 1e-3);
  EXPECT_LE(fit.rss, 1e-8);
}

TEST(FitLogistic, FlatCurve) {
  std::vector<RDPoint> pts;
  for (double r : kRates) pts.push_back({r, 5.0});
  const auto fit = fit_logistic(RDCurve({1280, 720}, pts));
  EXPECT_NEAR(fit.beta1, 5.0, 1e-9);
  EXPECT_NEAR(fit.beta2, 5.0, 1e-9);
  EXPECT_LE(fit.rss, 1e-8);
}

TEST(FitLogistic, NoisyCurveMatchesGridSearchOracle) {
  const auto truth = make_params(8, 2, 600, 400);
  const auto curve = sample_curve(truth, kRates, {0.05, -0.08, 0.03, 0.06, -0.04, 0.02});
  const double oracle = grid_search_rss(curve);
  const auto fit = fit_logistic(curve);
  EXPECT_LE(fit.rss, oracle * 1.01) << "oracle rss " << oracle;
}

TEST(FitLogistic, TooFewPoints) {
  RDCurve c({1, 1}, {{100, 1}, {200, 2}, {300, 3}});
  try {
    fit_logistic(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPoints);
  }
}

TEST(FitLogistic, DecreasingDataKeepsMonotoneFit) {
  std::vector<RDPoint> pts;
  for (double r : kRates) pts.push_back({r, 10.0 - r / 1000.0});
  const auto fit = fit_logistic(RDCurve({1, 1}, pts));
  EXPECT_GE(fit.beta1, fit.beta2);
  EXPECT_GT(fit.beta4, 0.0);
}

TEST(FitLogisticProperty, Beta3ClampAndDeterminism) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<RDPoint> pts;
    double r = 300 + 2000 * u(rng);
    for (int i = 0; i < 6; ++i) {
      pts.push_back({r, 10 * u(rng)});  // arbitrary noisy data
      r *= 1.2 + u(rng);
    }
    const RDCurve c({1, 1}, pts);
    const auto a = fit_logistic(c);
    const auto b = fit_logistic(c);
    EXPECT_GE(a.beta3, c.min_bitrate() / 2);
    EXPECT_LE(a.beta3, c.min_bitrate());
    EXPECT_GE(a.beta1, a.beta2);
    EXPECT_GT(a.beta4, 0.0);
    EXPECT_EQ(a.beta1, b.beta1);
    EXPECT_EQ(a.beta2, b.beta2);
    EXPECT_EQ(a.beta3, b.beta3);
    EXPECT_EQ(a.beta4, b.beta4);
    // monotone non-decreasing
    double prev = eval_logistic(a, 1.0);
    for (double x = 10; x < 1e5; x *= 1.37) {
      const double v = eval_logistic(a, x);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Pchip, TwoPointsIsLinear) {
  PchipCurve p({1000, 2000}, {2.0, 4.0});
  EXPECT_NEAR(p(1500), 3.0, 1e-12);
  EXPECT_NEAR(p(1250), 2.5, 1e-12);
  EXPECT_NEAR(p.integral(1000, 2000), 3000.0, 1e-9);
}

TEST(Pchip, InterpolatesKnots) {
  const std::vector<double> x = {1, 2.5, 3, 7, 9};
  const std::vector<double> y = {0.3, -1.0, 4.0, 4.0, 2.0};
  PchipCurve p(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(p(x[i]), y[i], 1e-12);
}

TEST(Pchip, TooFewPoints) {
  EXPECT_THROW(PchipCurve({1}, {1}), Error);
}

TEST(PchipProperty, MonotoneAndShapePreserving) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x;
    std::vector<double> y;
    double xv = 0.0;
    double yv = 0.0;
    const bool monotone = trial % 2 == 0;
    for (int i = 0; i < 7; ++i) {
      xv += 0.1 + u(rng);
      yv = monotone ? yv + 3 * u(rng) * u(rng) : 5 * u(rng);
      x.push_back(xv);
      y.push_back(yv);
    }
    PchipCurve p(x, y);
    double prev = p(x.front());
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      const double lo = std::min(y[k], y[k + 1]);
      const double hi = std::max(y[k], y[k + 1]);
      for (int s = 0; s <= 50; ++s) {
        const double xx = x[k] + (x[k + 1] - x[k]) * s / 50.0;
        const double v = p(xx);
        EXPECT_GE(v, lo - 1e-12);
        EXPECT_LE(v, hi + 1e-12);
        if (monotone) {
          EXPECT_GE(v, prev - 1e-12);
          prev = v;
        }
      }
    }
    // integral against fine trapezoid
    const int n = 20000;
    double trap = 0.0;
    const double a = x.front();
    const double b = x.back();
    for (int i = 0; i < n; ++i) {
      const double x0 = a + (b - a) * i / n;
      const double x1 = a + (b - a) * (i + 1) / n;
      trap += 0.5 * (p(x0) + p(x1)) * (x1 - x0);
    }
    EXPECT_NEAR(p.integral(a, b), trap, 1e-6 * std::max(1.0, std::abs(trap)));
  }
}

// Oracle: uniform sign-change scan with linear interpolation at the crossing.
std::vector<double> dense_scan_roots(const QualityFn& low, const QualityFn& high, double lo,
                                     double hi, int samples) {
  std::vector<double> roots;
  double px = lo;
  double pg = high(lo) - low(lo);
  for (int i = 1; i < samples; ++i) {
    const double x = lo + (hi - lo) * i / (samples - 1);
    const double g = high(x) - low(x);
    if ((pg < 0 && g > 0) || (pg > 0 && g < 0)) {
      roots.push_back(px + (x - px) * (-pg) / (g - pg));
    }
    if (g != 0) {
      px = x;
      pg = g;
    }
  }
  return roots;
}

TEST(FindCrossover, CoincidentCurvesAreNone) {
  const FittedCurve a{{1280, 720}, make_params(8, 2, 600, 400)};
  const auto r = find_crossover(a, a, {1000, 10000});
  EXPECT_EQ(r.status, CrossOverStatus::None);
  EXPECT_FALSE(r.bitrate_kbps.has_value());
}

TEST(FindCrossover, MatchesDenseOracle) {
  const FittedCurve low{{1280, 720}, make_params(8, 2, 600, 400)};
  const FittedCurve high{{1920, 1080}, make_params(9, 1, 900, 500)};
  const auto r = find_crossover(low, high, {1000, 10000});
  const auto roots = dense_scan_roots([&](double x) { return eval_logistic(low.params, x); },
                                      [&](double x) { return eval_logistic(high.params, x); },
                                      1000, 10000, 1000000);
  ASSERT_EQ(roots.size(), 1u);
  ASSERT_EQ(r.status, CrossOverStatus::Found);
  EXPECT_NEAR(*r.bitrate_kbps, roots[0], 0.1);
  EXPECT_EQ(r.lower_curve, (Resolution{1280, 720}));
  EXPECT_EQ(r.higher_curve, (Resolution{1920, 1080}));
  const double g = eval_logistic(high.params, *r.bitrate_kbps) -
                   eval_logistic(low.params, *r.bitrate_kbps);
  EXPECT_LE(std::abs(g), 1e-6 * 8.0);
}

TEST(FindCrossover, DominanceIsNone) {
  const FittedCurve low{{1280, 720}, make_params(8, 2, 600, 400)};
  const FittedCurve high{{1920, 1080}, make_params(9, 3, 600, 400)};
  EXPECT_EQ(find_crossover(low, high, {1000, 10000}).status, CrossOverStatus::None);
}

TEST(FindCrossover, MultipleCrossingsReportLowest) {
  const QualityFn low = [](double) { return 0.0; };
  const QualityFn high = [](double x) { return std::sin(x / 1000.0); };
  const auto r = find_crossover(low, high, {1000, 10000});
  EXPECT_EQ(r.status, CrossOverStatus::MultipleResolved);
  EXPECT_NEAR(*r.bitrate_kbps, 1000 * M_PI, 1e-6);
  EXPECT_EQ(r.sign_changes, 3);
}

TEST(FindCrossover, InvalidRange) {
  const FittedCurve a{{1, 1}, make_params(8, 2, 600, 400)};
  try {
    find_crossover(a, a, {5000, 1000});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidRange);
  }
}

}  // namespace
