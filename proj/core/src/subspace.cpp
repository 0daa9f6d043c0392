#include "kssd/subspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "kssd/errors.hpp"
#include "kssd/rng.hpp"

namespace kssd {

namespace {

constexpr double kCoherenceSlack = 1e-8;

double coherence_from_ortho(const Eigen::MatrixXd& q) {
  const double m = static_cast<double>(q.rows());
  const double n = static_cast<double>(q.cols());
  const double upper = m / n;
  const double mu = upper * q.rowwise().squaredNorm().maxCoeff();
  if (mu < 1.0 - kCoherenceSlack || mu > upper + kCoherenceSlack) {
    throw Error("coherence " + std::to_string(mu) + " outside [1, " + std::to_string(upper) +
                "]; basis is not orthonormal");
  }
  return std::clamp(mu, 1.0, upper);
}

}  // namespace

Subspace::Subspace(DenseMatrix basis)
    : basis_(std::move(basis)),
      ortho_(DenseMatrix(orthonormalize(basis_.eigen()).thin)),
      coherence_(coherence_from_ortho(ortho_.eigen())) {}

KSModel::KSModel(Subspace a, Subspace b) : row_space(std::move(a)), col_space(std::move(b)) {}

DenseMatrix projector(const Subspace& s) {
  const auto& q = s.ortho().eigen();
  return DenseMatrix(Eigen::MatrixXd(q * q.transpose()));
}

DenseMatrix projector_from_gram(const DenseMatrix& basis) {
  const DenseMatrix gram_inv = pseudoinverse_gram(basis);
  const auto& m = basis.eigen();
  return DenseMatrix(Eigen::MatrixXd(m * gram_inv.eigen() * m.transpose()));
}

double coherence(const Subspace& s) { return s.coherence(); }

double ks_coherence(const KSModel& m) {
  return m.row_space.coherence() * m.col_space.coherence();
}

double ks_coherence_direct(const KSModel& m) {
  const DenseMatrix d = kron(m.row_space.basis(), m.col_space.basis());
  const DenseMatrix gram_inv = pseudoinverse_gram(d);
  const Eigen::MatrixXd weighted = d.eigen() * gram_inv.eigen();  // D (D^T D)^{-1}
  const Eigen::Index ambient = d.eigen().rows();
  double best = 0.0;
  for (Eigen::Index j = 0; j < ambient; ++j) {
    // U^D e_j = D (D^T D)^{-1} D^T e_j, and D^T e_j is row j of D.
    const Eigen::VectorXd column = weighted * d.eigen().row(j).transpose();
    best = std::max(best, column.squaredNorm());
  }
  return static_cast<double>(ambient) / static_cast<double>(d.eigen().cols()) * best;
}

double signal_coherence(const DenseMatrix& y) {
  const double energy = frobenius_norm_sq(y);
  if (energy == 0.0) throw DegenerateSignalError("signal coherence is undefined for a zero signal");
  const double peak = infinity_entry_norm(y);
  return static_cast<double>(y.rows() * y.cols()) * peak * peak / energy;
}

Subspace orthogonal_complement(const Subspace& s) {
  const std::size_t m = s.ambient_dim();
  const std::size_t n = s.dim();
  if (n >= m) throw InvalidArgument("the full space has an empty orthogonal complement");
  const QrBasis qr = orthonormalize(s.basis().eigen(), true);
  return Subspace(DenseMatrix(Eigen::MatrixXd(qr.full.rightCols(static_cast<Eigen::Index>(m - n)))));
}

Subspace random_gaussian_subspace(std::size_t ambient, std::size_t dim, std::uint64_t seed) {
  if (dim == 0 || dim > ambient) {
    throw InvalidArgument("subspace dimension " + std::to_string(dim) +
                          " must lie in [1, ambient = " + std::to_string(ambient) + "]");
  }
  Rng rng(seed);
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(ambient), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < basis.rows(); ++i)
    for (Eigen::Index j = 0; j < basis.cols(); ++j) basis(i, j) = rng.normal();
  return Subspace(DenseMatrix(std::move(basis)));
}

Subspace random_hadamard_subspace(std::size_t ambient, std::size_t dim, std::uint64_t seed) {
  if (!std::has_single_bit(ambient)) {
    throw InvalidArgument("Hadamard ambient dimension must be a power of two, got " +
                          std::to_string(ambient));
  }
  if (dim == 0 || dim > ambient) {
    throw InvalidArgument("subspace dimension " + std::to_string(dim) +
                          " must lie in [1, ambient = " + std::to_string(ambient) + "]");
  }
  Rng rng(seed);
  const auto columns = sample_indices(rng, ambient, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ambient));
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(ambient), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < ambient; ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      const bool odd = std::popcount(i & columns[c]) % 2 == 1;
      basis(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = odd ? -scale : scale;
    }
  }
  return Subspace(DenseMatrix(std::move(basis)));
}

}  // namespace kssd
