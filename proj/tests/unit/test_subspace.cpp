#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kssd/dense_matrix.hpp"
#include "kssd/errors.hpp"
#include "kssd/subspace.hpp"
#include "oracles.hpp"

using namespace kssd;

namespace {

DenseMatrix random_matrix(std::mt19937_64& gen, std::size_t r, std::size_t c) {
  return oracle::from_mat(oracle::gaussian(gen, r, c));
}

}  // namespace

TEST(Subspace, StandardBasisColumnsGiveMaximalCoherence) {
  DenseMatrix basis(10, 2);
  basis.set(0, 0, 1.0);
  basis.set(1, 1, 1.0);
  EXPECT_NEAR(Subspace(basis).coherence(), 5.0, 1e-12);
}

TEST(Subspace, FlatBasisGivesUnitCoherence) {
  // Normalized Haar-like columns of order 4: every entry is +-1/2.
  const auto basis = DenseMatrix::from_rows({{1, 1}, {1, -1}, {1, 1}, {1, -1}});
  EXPECT_NEAR(Subspace(basis).coherence(), 1.0, 1e-10);
  EXPECT_NEAR(random_hadamard_subspace(64, 5, 9).coherence(), 1.0, 1e-10);
}

TEST(Subspace, CoherenceDependsOnlyOnSpan) {
  std::mt19937_64 gen(1);
  const auto basis = random_matrix(gen, 12, 3);
  const auto mix = DenseMatrix::from_rows({{2, 1, 0}, {0, 1, 0}, {1, 0, -3}});
  EXPECT_NEAR(Subspace(basis).coherence(), Subspace(multiply(basis, mix)).coherence(), 1e-12);
}

TEST(Subspace, CoherenceMatchesProjectorOracle) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 10; ++t) {
    const auto basis = random_matrix(gen, 15, 1 + t % 5);
    EXPECT_NEAR(Subspace(basis).coherence(), oracle::coherence(oracle::to_mat(basis)), 1e-10);
  }
}

TEST(Subspace, CoherenceWithinTheoreticalRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_gaussian_subspace(30, 4, seed);
    EXPECT_GE(s.coherence(), 1.0);
    EXPECT_LE(s.coherence(), 30.0 / 4.0);
  }
}

TEST(Subspace, RejectsDeficientAndWideBases) {
  EXPECT_THROW(Subspace(DenseMatrix::from_rows({{1, 2}, {2, 4}, {3, 6}})), SingularityError);
  EXPECT_THROW(Subspace(DenseMatrix::from_rows({{1, 0, 1}, {0, 1, 1}})), SingularityError);
}

TEST(Projector, SingleAxis) {
  const Subspace s(DenseMatrix::from_rows({{1}, {0}, {0}}));
  const auto p = projector(s);
  EXPECT_EQ(p.rows(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p(i, j), i == 0 && j == 0 ? 1.0 : 0.0, 1e-15);
}

TEST(Projector, IdempotentSymmetricAndFixesBasis) {
  std::mt19937_64 gen(3);
  const auto basis = random_matrix(gen, 20, 5);
  const auto p = projector(Subspace(basis));
  const auto& e = p.eigen();
  EXPECT_LT((e * e - e).norm(), 1e-10);
  EXPECT_LT((e - e.transpose()).norm(), 1e-10);
  EXPECT_LT((e * basis.eigen() - basis.eigen()).norm(), 1e-10);
  EXPECT_LT((projector_from_gram(basis).eigen() - e).norm(), 1e-10);
}

TEST(KsCoherence, ProductRuleMatchesDirectEvaluation) {
  std::mt19937_64 gen(4);
  for (int t = 0; t < 10; ++t) {
    const KSModel model(Subspace(random_matrix(gen, 6 + t % 3, 2)), Subspace(random_matrix(gen, 5, 1 + t % 3)));
    const double product = ks_coherence(model);
    EXPECT_NEAR(product, model.row_space.coherence() * model.col_space.coherence(), 1e-14);
    EXPECT_NEAR(ks_coherence_direct(model), product, 1e-9 * product);
  }
}

TEST(KsCoherence, DirectMatchesOracleOnExplicitKron) {
  std::mt19937_64 gen(5);
  const auto a = random_matrix(gen, 6, 2);
  const auto b = random_matrix(gen, 5, 2);
  const KSModel model{Subspace(a), Subspace(b)};
  const double expected = oracle::coherence(oracle::kron(oracle::to_mat(a), oracle::to_mat(b)));
  EXPECT_NEAR(ks_coherence_direct(model), expected, 1e-9 * expected);
}

TEST(SignalCoherence, Extremes) {
  DenseMatrix flat(4, 5);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) flat.set(i, j, (i + j) % 2 ? 1.0 : -1.0);
  EXPECT_NEAR(signal_coherence(flat), 1.0, 1e-14);
  DenseMatrix spike(4, 5);
  spike.set(2, 3, 7.0);
  EXPECT_NEAR(signal_coherence(spike), 20.0, 1e-12);
  EXPECT_THROW(signal_coherence(DenseMatrix(3, 3)), DegenerateSignalError);
}

TEST(OrthogonalComplement, DimensionAndOrthogonality) {
  const auto s = random_gaussian_subspace(9, 3, 7);
  const auto c = orthogonal_complement(s);
  EXPECT_EQ(c.ambient_dim(), 9u);
  EXPECT_EQ(c.dim(), 6u);
  EXPECT_LT((s.ortho().eigen().transpose() * c.ortho().eigen()).norm(), 1e-12);
  EXPECT_THROW(orthogonal_complement(Subspace(DenseMatrix::identity(3))), InvalidArgument);
}

TEST(RandomSubspace, DeterministicPerSeed) {
  const auto a = random_gaussian_subspace(20, 4, 123);
  const auto b = random_gaussian_subspace(20, 4, 123);
  const auto c = random_gaussian_subspace(20, 4, 124);
  EXPECT_EQ(a.basis(), b.basis());
  EXPECT_FALSE(a.basis() == c.basis());
  EXPECT_EQ(random_gaussian_subspace(100, 10, 0).dim(), 10u);
}

TEST(RandomSubspace, HadamardNeedsPowerOfTwo) {
  EXPECT_THROW(random_hadamard_subspace(48, 3, 0), InvalidArgument);
  EXPECT_THROW(random_hadamard_subspace(8, 9, 0), InvalidArgument);
  const auto h = random_hadamard_subspace(16, 4, 1);
  EXPECT_LT((h.basis().eigen().transpose() * h.basis().eigen() - Eigen::MatrixXd::Identity(4, 4)).norm(),
            1e-12);
}

// Mean coherence of Gaussian 100 x 10 bases, compared with an independent
// simulation (std::mt19937_64 draws, projector by elimination).
TEST(RandomSubspace, GaussianCoherenceMatchesIndependentSimulation) {
  const int seeds = 50;
  double lib_sum = 0.0, lib_sq = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const double mu = random_gaussian_subspace(100, 10, static_cast<std::uint64_t>(s)).coherence();
    lib_sum += mu;
    lib_sq += mu * mu;
  }
  std::mt19937_64 gen(2024);
  double ref_sum = 0.0, ref_sq = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const double mu = oracle::coherence(oracle::gaussian(gen, 100, 10));
    ref_sum += mu;
    ref_sq += mu * mu;
  }
  const double lib_mean = lib_sum / seeds, ref_mean = ref_sum / seeds;
  const double lib_var = lib_sq / seeds - lib_mean * lib_mean;
  const double ref_var = ref_sq / seeds - ref_mean * ref_mean;
  const double se = std::sqrt((lib_var + ref_var) / seeds);
  EXPECT_NEAR(lib_mean, ref_mean, 4.0 * se);
  RecordProperty("mean_coherence", std::to_string(lib_mean));
}
