#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "kssd/errors.hpp"
#include "kssd/rng.hpp"

using namespace kssd;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, DeriveSeedSeparatesLabels) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t g = 0; g < 20; ++g)
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(derive_seed(7, {3, g, t}));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
  EXPECT_NE(derive_seed(7, {1}), derive_seed(8, {1}));
}

TEST(Rng, Uniform01Range) {
  Rng r(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(Rng, UniformBelowIsRoughlyFlat) {
  Rng r(2);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[r.uniform_below(7)];
  for (int c : counts) EXPECT_NEAR(c, n / 7, 5 * std::sqrt(n / 7.0));
}

TEST(Rng, NormalMoments) {
  Rng r(3);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(s4 / n, 3.0, 0.06);
}

TEST(SampleIndices, DistinctAndInRange) {
  Rng r(4);
  for (std::size_t k : {0u, 1u, 5u, 20u}) {
    auto idx = sample_indices(r, 20, k);
    ASSERT_EQ(idx.size(), k);
    std::sort(idx.begin(), idx.end());
    EXPECT_TRUE(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    for (auto i : idx) EXPECT_LT(i, 20u);
  }
  EXPECT_THROW(sample_indices(r, 5, 6), InvalidArgument);
}

TEST(SampleIndices, EachIndexEquallyLikely) {
  Rng r(5);
  std::vector<int> hits(10, 0);
  const int trials = 30000;
  for (int t = 0; t < trials; ++t)
    for (auto i : sample_indices(r, 10, 3)) ++hits[i];
  const double expected = trials * 0.3;
  for (int h : hits) EXPECT_NEAR(h, expected, 5 * std::sqrt(expected));
}
