#include "drs/rcql.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drs/error.hpp"

namespace {

using drs::Error;
using drs::ErrorCode;
using drs::Resolution;
using namespace drs::rcql;
namespace rd = drs::rd;

const Resolution k720{1280, 720};
const Resolution k1080{1920, 1080};

rd::CrossOverResult xover(std::optional<double> x, rd::BitrateRange range = {1000, 10000}) {
  rd::CrossOverResult r;
  r.bitrate_kbps = x;
  r.status = x ? rd::CrossOverStatus::Found : rd::CrossOverStatus::None;
  r.lower_curve = k720;
  r.higher_curve = k1080;
  r.range = range;
  return r;
}

rd::LogisticParams lp(double b1, double b2, double b3, double b4) {
  rd::LogisticParams p;
  p.beta1 = b1;
  p.beta2 = b2;
  p.beta3 = b3;
  p.beta4 = b4;
  return p;
}

TEST(DeltaBitrate, PerfectPrediction) {
  EXPECT_EQ(delta_bitrate(xover(3000), xover(3000)).kbps, 0.0);
}

TEST(DeltaBitrate, AbsoluteDifference) {
  EXPECT_DOUBLE_EQ(delta_bitrate(xover(3000), xover(4200)).kbps, 1200.0);
  EXPECT_DOUBLE_EQ(delta_bitrate(xover(4200), xover(3000)).kbps, 1200.0);
}

TEST(DeltaBitrate, MissingObjectiveUsesNearerEndpoint) {
  const auto d = delta_bitrate(xover(3000), xover(std::nullopt));
  // endpoints 1000 and 10000; nearer is 1000
  EXPECT_DOUBLE_EQ(d.kbps, std::min(3000.0 - 1000.0, 10000.0 - 3000.0));
  EXPECT_TRUE(d.imputed);
  EXPECT_DOUBLE_EQ(delta_bitrate(xover(std::nullopt), xover(9000)).kbps, 1000.0);
}

TEST(DeltaBitrate, BothMissing) {
  const auto d = delta_bitrate(xover(std::nullopt), xover(std::nullopt));
  EXPECT_EQ(d.kbps, 0.0);
  EXPECT_FALSE(d.imputed);
}

TEST(DeltaBitrate, MismatchedPair) {
  auto b = xover(3000);
  b.higher_curve = {3840, 2160};
  try {
    delta_bitrate(xover(3000), b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MismatchedPair);
  }
}

TEST(RcqlS, EmptyInterval) {
  EXPECT_EQ(rcql_s(lp(8, 2, 600, 400), lp(9, 1, 900, 500), 2500, 2500), 0.0);
}

TEST(RcqlS, MatchesDenseTrapezoid) {
  const auto low = lp(8, 2, 600, 400);
  const auto high = lp(9, 1, 900, 500);
  const double got = rcql_s(low, high, 2000, 3000);
  const int n = 1000000;
  double trap = 0.0;
  auto f = [&](double x) {
    return std::abs(rd::eval_logistic(high, x) - rd::eval_logistic(low, x));
  };
  double prev = f(2000);
  for (int i = 1; i <= n; ++i) {
    const double x = 2000.0 + 1000.0 * i / n;
    const double v = f(x);
    trap += 0.5 * (prev + v) * (1000.0 / n);
    prev = v;
  }
  EXPECT_NEAR(got, trap, 1e-4 * trap);
  EXPECT_DOUBLE_EQ(got, rcql_s(low, high, 3000, 2000));
}

TEST(RcqlAvg, Definition) {
  EXPECT_DOUBLE_EQ(rcql_avg(500, 2000, 3000), 0.5);
  EXPECT_EQ(rcql_avg(0, 2000, 2000), 0.0);
}

TEST(RcqlAvg, ConstantGap) {
  const rd::QualityFn low = [](double x) { return std::log(x); };
  const rd::QualityFn high = [](double x) { return std::log(x) + 0.3; };
  const double s = rcql_s(low, high, 1234, 4321);
  EXPECT_NEAR(rcql_avg(s, 1234, 4321), 0.3, 1e-9);
  EXPECT_NEAR(rcql_avg(s, 1234, 4321) * std::abs(4321 - 1234), s, 1e-9 * s);
}

std::vector<ScoredPoint> pair_points(const std::vector<std::array<double, 4>>& rows) {
  // each row: subjective low, subjective high, objective low, objective high
  std::vector<ScoredPoint> pts;
  int i = 0;
  for (const auto& r : rows) {
    const double rate = 1000.0 + 500.0 * i++;
    pts.push_back({"c", k720, rate, r[0], r[2]});
    pts.push_back({"c", k1080, rate, r[1], r[3]});
  }
  return pts;
}

TEST(RankingAccuracy, OracleVqm) {
  std::vector<ScoredPoint> pts = pair_points({{1, 2, 0, 0}, {3, 2, 0, 0}, {4, 4.5, 0, 0}});
  for (auto& p : pts) p.objective_score = p.subjective_jod;
  const auto r = ranking_accuracy(pts, k720, k1080);
  EXPECT_DOUBLE_EQ(r.acc_percent, 100.0);
  EXPECT_DOUBLE_EQ(r.ql_jod, 0.0);
}

TEST(RankingAccuracy, InvertedVqm) {
  std::vector<ScoredPoint> pts = pair_points({{1, 2, 0, 0}, {3, 2.5, 0, 0}, {4, 4.7, 0, 0}});
  for (auto& p : pts) p.objective_score = -p.subjective_jod;
  const auto r = ranking_accuracy(pts, k720, k1080);
  EXPECT_DOUBLE_EQ(r.acc_percent, 0.0);
  EXPECT_NEAR(r.ql_jod, (1.0 + 0.5 + 0.7) / 3.0, 1e-12);
}

TEST(RankingAccuracy, HandCountedConstruction) {
  // 7 concordant, 3 discordant with subjective gaps 0.2, 0.4, 0.6
  const auto pts = pair_points({{1, 2, 1, 2},
                                {2, 1, 2, 1},
                                {1, 3, 0, 5},
                                {3, 1, 5, 0},
                                {1, 1.5, 1, 1.1},
                                {5, 6, 4, 9},
                                {6, 5, 9, 4},
                                {1, 1.2, 2, 1},
                                {2, 1.6, 1, 2},
                                {3, 3.6, 3, 3}});  // objective tie -> discordant
  const auto r = ranking_accuracy(pts, k720, k1080);
  EXPECT_DOUBLE_EQ(r.acc_percent, 70.0);
  EXPECT_NEAR(r.ql_jod, 0.4, 1e-12);
  EXPECT_EQ(r.comparable_pairs, 10);
  EXPECT_EQ(r.discordant_pairs, 3);
}

TEST(RankingAccuracy, SubjectiveTiesExcluded) {
  const auto pts = pair_points({{1, 1, 0, 5}, {1, 2, 0, 5}});
  const auto r = ranking_accuracy(pts, k720, k1080);
  EXPECT_EQ(r.comparable_pairs, 1);
  EXPECT_EQ(r.subjective_ties, 1);
  EXPECT_DOUBLE_EQ(r.acc_percent, 100.0);
}

TEST(RankingAccuracy, NoComparablePairs) {
  const auto pts = pair_points({{1, 1, 0, 5}});
  try {
    ranking_accuracy(pts, k720, k1080);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoComparablePairs);
  }
}

TEST(RankingAccuracyProperty, InvariantUnderIncreasingTransform) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::array<double, 4>> rows;
    for (int i = 0; i < 12; ++i) rows.push_back({n(rng), n(rng), n(rng), n(rng)});
    auto pts = pair_points(rows);
    const auto a = ranking_accuracy(pts, k720, k1080);
    for (auto& p : pts) p.objective_score = std::exp(3 * p.objective_score) + 7;
    const auto b = ranking_accuracy(pts, k720, k1080);
    EXPECT_EQ(a.acc_percent, b.acc_percent);
    EXPECT_EQ(a.ql_jod, b.ql_jod);
  }
}

TEST(Correlations, Identity) {
  const std::vector<double> s = {1, 2, 3, 5, 4};
  const auto c = correlations(s, s);
  EXPECT_NEAR(c.srocc, 1.0, 1e-12);
  EXPECT_NEAR(c.plcc, 1.0, 1e-12);
}

TEST(Correlations, Negation) {
  const std::vector<double> s = {1, 2, 3, 5, 4};
  std::vector<double> o;
  for (double v : s) o.push_back(-v);
  const auto c = correlations(s, o);
  EXPECT_NEAR(c.srocc, -1.0, 1e-12);
  EXPECT_NEAR(c.plcc, -1.0, 1e-12);
}

TEST(Correlations, MonotoneNonlinear) {
  const std::vector<double> s = {0.5, 1, 2, 3, 5, 8};
  std::vector<double> o;
  for (double v : s) o.push_back(v * v * v);
  const auto c = correlations(s, o);
  EXPECT_NEAR(c.srocc, 1.0, 1e-12);
  EXPECT_LT(c.plcc, 1.0);
}

TEST(Correlations, TiesUseAverageRanks) {
  // ranks of {1,2,2,3} are {1,2.5,2.5,4}
  const std::vector<double> s = {1, 2, 2, 3};
  const std::vector<double> o = {1, 2, 3, 4};
  const double expect = 0.9486832980505138;  // pearson({1,2.5,2.5,4},{1,2,3,4})
  EXPECT_NEAR(correlations(s, o).srocc, expect, 1e-12);
}

TEST(Correlations, Degenerate) {
  EXPECT_THROW(correlations({1, 2}, {1, 2}), Error);
  EXPECT_THROW(correlations({1, 1, 1}, {1, 2, 3}), Error);
}

TEST(CorrelationsProperty, Invariances) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) {
      a.push_back(n(rng));
      b.push_back(a.back() + n(rng));
    }
    const auto c = correlations(a, b);
    std::vector<double> bt, ba;
    for (double v : b) {
      bt.push_back(std::atan(v) * 5);
      ba.push_back(3 * v - 2);
    }
    EXPECT_NEAR(correlations(a, bt).srocc, c.srocc, 1e-12);
    EXPECT_NEAR(correlations(a, ba).plcc, c.plcc, 1e-12);
  }
}

TEST(MedianThenMean, Basic) {
  std::map<std::string, std::vector<double>> m = {{"a", {1, 5, 3}}, {"b", {10}}};
  EXPECT_DOUBLE_EQ(median_then_mean(m), (3.0 + 10.0) / 2.0);
}

std::vector<ScoredPoint> synthetic_scores(int contents) {
  std::vector<ScoredPoint> pts;
  for (int c = 0; c < contents; ++c) {
    const std::string id = "content" + std::to_string(c);
    for (double rate : {1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 6000.0, 8000.0}) {
      const double lo = rd::eval_logistic(lp(7 + 0.2 * c, 2, 600, 500), rate);
      const double hi = rd::eval_logistic(lp(8.5 + 0.1 * c, 0.5, 900, 700), rate);
      pts.push_back({id, k720, rate, lo, lo * 1.1 + 0.2});
      pts.push_back({id, k1080, rate, hi, hi * 1.05 + 0.5});
    }
  }
  return pts;
}

TEST(Bench, OracleInputGivesPerfectMeasures) {
  auto pts = synthetic_scores(3);
  for (auto& p : pts) p.objective_score = p.subjective_jod;
  const auto report = bench(pts, {{k720, k1080}});
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_NEAR(report.correlation.srocc, 1.0, 1e-12);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.delta_bitrate_kbps, 0.0);
    EXPECT_EQ(row.rcql_s, 0.0);
    EXPECT_EQ(*row.acc_percent, 100.0);
    EXPECT_EQ(*row.ql_jod, 0.0);
  }
}

TEST(Bench, MissingResolutionSkipsContent) {
  auto pts = synthetic_scores(2);
  std::erase_if(pts, [](const ScoredPoint& p) { return p.content_id == "content1" && p.resolution == k1080; });
  const auto report = bench(pts, {{k720, k1080}});
  EXPECT_EQ(report.rows.size(), 1u);
  ASSERT_EQ(report.skipped.size(), 1u);
  EXPECT_NE(report.skipped[0].find("content1"), std::string::npos);
}

TEST(Bench, RowsMatchDirectCalls) {
  const auto pts = synthetic_scores(2);
  const auto report = bench(pts, {{k720, k1080}});
  ASSERT_EQ(report.rows.size(), 2u);
  const auto& row = report.rows[0];
  // Recompute content0 directly.
  std::vector<rd::RDPoint> sl, sh, ol, oh;
  for (const auto& p : pts) {
    if (p.content_id != "content0") continue;
    auto& s = p.resolution == k720 ? sl : sh;
    auto& o = p.resolution == k720 ? ol : oh;
    s.push_back({p.bitrate_kbps, p.subjective_jod});
    o.push_back({p.bitrate_kbps, p.objective_score});
  }
  const auto fsl = rd::fit_logistic(rd::RDCurve(k720, sl));
  const auto fsh = rd::fit_logistic(rd::RDCurve(k1080, sh));
  const auto fol = rd::fit_logistic(rd::RDCurve(k720, ol));
  const auto foh = rd::fit_logistic(rd::RDCurve(k1080, oh));
  const auto xs = rd::find_crossover({k720, fsl}, {k1080, fsh}, {1000, 8000});
  const auto xo = rd::find_crossover({k720, fol}, {k1080, foh}, {1000, 8000});
  ASSERT_TRUE(xs.bitrate_kbps && xo.bitrate_kbps);
  EXPECT_EQ(row.delta_bitrate_kbps, std::abs(*xs.bitrate_kbps - *xo.bitrate_kbps));
  EXPECT_EQ(row.rcql_s, rcql_s(fsl, fsh, *xs.bitrate_kbps, *xo.bitrate_kbps));
  EXPECT_GE(row.rcql_s, 0.0);
}

}  // namespace
