#include "dwos/core/rng.hpp"
#include "dwos/core/sparse.hpp"
#include "dwos/core/stats.hpp"
#include "dwos/core/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <set>

using namespace dwos;

TEST(Rng, SameKeySameSequence) {
  CounterRng a = make_rng(42, StreamTag::kWalk, 3, 7), b = make_rng(42, StreamTag::kWalk, 3, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, StreamsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t p = 0; p < 50; ++p)
    for (std::uint64_t w = 0; w < 50; ++w) first.insert(make_rng(1, StreamTag::kWalk, p, w)());
  EXPECT_EQ(first.size(), 2500u);
  EXPECT_NE(make_rng(1, StreamTag::kWalk, 0)(), make_rng(2, StreamTag::kWalk, 0)());
  EXPECT_NE(make_rng(1, StreamTag::kWalk, 0)(), make_rng(1, StreamTag::kOptimizer, 0)());
}

TEST(Rng, ChildDoesNotAdvanceParent) {
  CounterRng a(9), b(9);
  (void)a.child(1)();
  EXPECT_EQ(a(), b());
  EXPECT_NE(a.child(1).key(), a.child(2).key());
}

TEST(Rng, UniformRange) {
  CounterRng r(5);
  RunningStats s;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform(), v = r.uniform_open0();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    s.push(u);
  }
  EXPECT_NEAR(s.mean, 0.5, 4e-3);
  EXPECT_NEAR(s.variance(), 1.0 / 12.0, 2e-3);
}

TEST(Stats, Welford) {
  const std::vector<double> xs{1, 2, 3, 4, 10};
  const RunningStats s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 4.0);
  EXPECT_DOUBLE_EQ(s.variance(), 12.5);
  EXPECT_DOUBLE_EQ(s.stderr_mean(), std::sqrt(12.5 / 5));
  EXPECT_EQ(RunningStats{}.variance(), 0.0);
}

TEST(Sparse, AddScaleDense) {
  SparseGrad g(5);
  g.add(3, 1.0);
  g.add(1, 2.0);
  g.add(3, 0.5);
  EXPECT_EQ(g[3], 1.5);
  EXPECT_EQ(g[0], 0.0);
  SparseGrad h(5);
  h.add(0, 1.0);
  h.add(g, 2.0);
  EXPECT_EQ(h.to_dense(), (std::vector<double>{1.0, 4.0, 0.0, 3.0, 0.0}));
  h.scale(0.5);
  EXPECT_EQ(h[1], 2.0);
  EXPECT_TRUE(h.all_finite());
  h.add(2, std::nan(""));
  EXPECT_FALSE(h.all_finite());
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}
