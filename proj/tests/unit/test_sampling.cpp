#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "kssd/errors.hpp"
#include "kssd/rng.hpp"
#include "kssd/sampling.hpp"

using namespace kssd;

namespace {

std::vector<bool> all_observed(std::size_t m1, std::size_t m2) { return std::vector<bool>(m1 * m2, true); }

}  // namespace

TEST(DeriveCounts, MissingRowsAndColumns) {
  // 20 x 17 signal with 5 whole rows and 2 whole columns missing.
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < 20; ++i)
    if (i != 0 && i != 4 && i != 7 && i != 11 && i != 19) rows.push_back(i);
  for (std::size_t j = 0; j < 17; ++j)
    if (j != 2 && j != 9) cols.push_back(j);
  const auto counts = derive_counts(SamplingPattern::intersection(20, 17, rows, cols));
  EXPECT_EQ(counts, (SampleCounts{15, 15, 225}));
}

TEST(DeriveCounts, DiscreteRowsTouchedByMissingEntries) {
  auto mask = all_observed(20, 17);
  for (std::size_t j = 0; j < 17; ++j) mask[4 * 17 + j] = false;
  mask[10 * 17 + 3] = false;
  const auto counts = derive_counts(SamplingPattern::discrete(20, 17, mask));
  EXPECT_EQ(counts.k1, 18u);
  EXPECT_EQ(counts.k2, 0u);
  EXPECT_EQ(counts.observed_cells, 20u * 17u - 18u);
}

TEST(DeriveCounts, FullAndSingleMissing) {
  const auto full = derive_counts(SamplingPattern::full(6, 4));
  EXPECT_EQ(full, (SampleCounts{6, 4, 24}));
  auto mask = all_observed(10, 10);
  mask[3 * 10 + 4] = false;
  EXPECT_EQ(derive_counts(SamplingPattern::discrete(10, 10, mask)), (SampleCounts{9, 9, 99}));
}

TEST(DeriveCounts, IntersectionUsesIndexSets) {
  const auto p = SamplingPattern::intersection(8, 9, {1, 3, 5}, {0, 8});
  EXPECT_EQ(derive_counts(p), (SampleCounts{3, 2, 6}));
  EXPECT_TRUE(p.observed(3, 8));
  EXPECT_FALSE(p.observed(2, 8));
  EXPECT_EQ(p.observed_cells(), (std::vector<std::size_t>{9, 17, 27, 35, 45, 53}));
}

TEST(SamplingPattern, ValidatesIndices) {
  EXPECT_THROW(SamplingPattern::intersection(5, 5, {2, 1}, {0}), InvalidArgument);
  EXPECT_THROW(SamplingPattern::intersection(5, 5, {1, 1}, {0}), InvalidArgument);
  EXPECT_THROW(SamplingPattern::intersection(5, 5, {5}, {0}), InvalidArgument);
  EXPECT_THROW(SamplingPattern::intersection(5, 5, {}, {0}), InvalidArgument);
  EXPECT_THROW(SamplingPattern::discrete(2, 2, std::vector<bool>(4, false)), InvalidArgument);
  EXPECT_THROW(SamplingPattern::discrete(2, 2, std::vector<bool>(3, true)), DimensionError);
}

TEST(SamplingPattern, UnionCellCount) {
  const std::vector<std::size_t> rows{0, 2}, cols{1, 3, 4};
  const auto p = SamplingPattern::union_of(6, 5, rows, cols);
  EXPECT_EQ(p.kind(), PatternKind::Discrete);
  EXPECT_EQ(p.observed_cells().size(), union_cell_count(6, 5, 2, 3));
  EXPECT_EQ(union_cell_count(6, 5, 2, 3), 2u * 5u + 3u * 6u - 6u);
  EXPECT_EQ(derive_counts(p), (SampleCounts{2, 3, 22}));
  EXPECT_FALSE(counts_diverge(p, derive_counts(p)));
}

TEST(SampleIntersection, FullAndDeterministic) {
  const auto all = sample_intersection(6, 4, 6, 4, 1);
  EXPECT_EQ(all.row_indices(), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(all.col_indices(), (std::vector<std::size_t>{0, 1, 2, 3}));
  const auto a = sample_intersection(30, 20, 7, 5, 99);
  const auto b = sample_intersection(30, 20, 7, 5, 99);
  EXPECT_EQ(a.row_indices(), b.row_indices());
  EXPECT_EQ(a.col_indices(), b.col_indices());
  EXPECT_TRUE(std::is_sorted(a.row_indices().begin(), a.row_indices().end()));
  EXPECT_THROW(sample_intersection(5, 5, 6, 1, 0), InvalidArgument);
  EXPECT_THROW(sample_intersection(5, 5, 0, 1, 0), InvalidArgument);
}

TEST(SampleDiscrete, Extremes) {
  const auto all = sample_discrete(4, 5, 20, 3);
  EXPECT_EQ(all.observed_cells().size(), 20u);
  const auto one = sample_discrete(4, 5, 1, 3);
  EXPECT_EQ(one.observed_cells().size(), 1u);
  EXPECT_THROW(sample_discrete(4, 5, 21, 3), InvalidArgument);
  EXPECT_THROW(sample_discrete(4, 5, 0, 3), InvalidArgument);
}

TEST(SampleUnion, ObservesWholeRowsAndColumns) {
  Rng rng(8);
  const auto p = sample_union(10, 12, 3, 4, rng);
  EXPECT_EQ(p.observed_cells().size(), union_cell_count(10, 12, 3, 4));
  std::size_t full_rows = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    bool full = true;
    for (std::size_t j = 0; j < 12; ++j) full &= p.observed(i, j);
    full_rows += full ? 1 : 0;
  }
  EXPECT_EQ(full_rows, 3u);
}

TEST(Restrict, Rows) {
  const auto eye = DenseMatrix::identity(3);
  const std::vector<std::size_t> rows{0, 2};
  EXPECT_EQ(restrict_rows(eye, rows), DenseMatrix::from_rows({{1, 0, 0}, {0, 0, 1}}));
  const std::vector<std::size_t> all{0, 1, 2};
  EXPECT_EQ(restrict_rows(eye, all), eye);
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(restrict_rows(eye, bad), InvalidArgument);
}

TEST(Restrict, Signal) {
  const auto y = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(restrict_signal(y, SamplingPattern::full(2, 3)), y);
  EXPECT_EQ(restrict_signal(y, SamplingPattern::intersection(2, 3, {1}, {0, 2})),
            DenseMatrix::from_rows({{4, 6}}));
  std::vector<bool> mask{true, false, true, false, true, false};
  EXPECT_EQ(restrict_signal(y, SamplingPattern::discrete(2, 3, mask)),
            DenseMatrix::from_rows({{1, 0, 3}, {0, 5, 0}}));
  EXPECT_THROW(restrict_signal(y, SamplingPattern::full(3, 3)), DimensionError);
}

TEST(CountsDiverge, FlagsScatteredMasks) {
  // One missing cell per row and column: k1 = k2 = 0 but almost all cells seen.
  auto mask = all_observed(6, 6);
  for (std::size_t i = 0; i < 6; ++i) mask[i * 6 + i] = false;
  const auto p = SamplingPattern::discrete(6, 6, mask);
  EXPECT_TRUE(counts_diverge(p, derive_counts(p)));
}

TEST(MaskIo, GridRoundTrip) {
  Rng rng(1);
  const auto p = sample_discrete(5, 7, 12, rng);
  std::stringstream buf;
  write_mask_csv(buf, p);
  const auto q = read_mask_csv(buf);
  EXPECT_EQ(q.mask(), p.mask());
}

TEST(MaskIo, RejectsNonBinaryEntries) {
  std::istringstream in("1,0\n0,2\n");
  try {
    read_mask_csv(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 2u);
  }
}

TEST(MaskIo, IntersectionRoundTrip) {
  const auto p = SamplingPattern::intersection(10, 8, {1, 4, 9}, {0, 7});
  std::stringstream buf;
  write_intersection_pattern(buf, p);
  const auto q = read_intersection_pattern(buf, 10, 8);
  EXPECT_EQ(q.row_indices(), p.row_indices());
  EXPECT_EQ(q.col_indices(), p.col_indices());
  EXPECT_EQ(parse_index_list("0, 3,7"), (std::vector<std::size_t>{0, 3, 7}));
  EXPECT_THROW(parse_index_list("1,x"), ParseError);
}

TEST(SamplingEnergy, IntersectionExpectation) {
  // Fixed Y; mean of ||Y_Omega||^2 over uniform intersections vs k1k2/(m1m2) ||Y||^2.
  const std::size_t m1 = 12, m2 = 10, k1 = 5, k2 = 4;
  Rng gen(17);
  DenseMatrix y(m1, m2);
  for (std::size_t i = 0; i < m1; ++i)
    for (std::size_t j = 0; j < m2; ++j) y.set(i, j, gen.normal());
  const double total = frobenius_norm_sq(y);
  const int n = 10000;
  double s = 0.0, s2 = 0.0;
  Rng rng(18);
  for (int t = 0; t < n; ++t) {
    const double e = frobenius_norm_sq(restrict_signal(y, sample_intersection(m1, m2, k1, k2, rng)));
    s += e;
    s2 += e * e;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, double(k1 * k2) / double(m1 * m2) * total, 3.0 * se);
}
