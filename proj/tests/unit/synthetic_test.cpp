#include <gtest/gtest.h>

#include "drs/ladder.hpp"
#include "drs/rng.hpp"
#include "drs/synthetic.hpp"

namespace drs {
namespace {

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(0, 0), derive_seed(0, 0));
  EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(0, 1));
}

TEST(Rng, UniformIndexStaysInRange) {
  Rng rng(derive_seed(5, 0));
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = uniform_index(rng, 7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(11);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  shuffle(v, rng);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Synthetic, ShapeRangeAndDeterminism) {
  synthetic::QualityLogOptions opt;
  opt.gops = 120;
  opt.seed = 4;
  const auto a = synthetic::quality_log(opt);
  const auto b = synthetic::quality_log(opt);
  ASSERT_EQ(a.size(), 120u * 8u * 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].score, b[i].score);
    EXPECT_GE(a[i].score, 0.0);
    EXPECT_LE(a[i].score, 10.0);
  }
  opt.seed = 5;
  const auto c = synthetic::quality_log(opt);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].score != c[i].score;
  EXPECT_TRUE(differs);
  const auto log = ladder::QualityLog::from_entries(a);
  EXPECT_EQ(log.gops(), 120u);
  EXPECT_EQ(log.rungs(), synthetic::sports_rungs());
}

TEST(Synthetic, WinnerMovesUpWithBitrate) {
  synthetic::QualityLogOptions opt;
  opt.gops = 600;
  const auto table = ladder::best_resolution_probability(ladder::QualityLog::from_entries(synthetic::quality_log(opt)));
  // Lowest rung favors the smallest resolution, the top rung the largest.
  EXPECT_GT(table.probability.front().front(), 0.5);
  EXPECT_GT(table.probability.back().back(), 0.5);
}

}  // namespace
}  // namespace drs
