#pragma once

#include <cstddef>
#include <cstdint>

#include "kssd/dense_matrix.hpp"

namespace kssd {

class Rng;

/// Column span of a full-rank basis matrix, with its orthonormalization and
/// coherence computed once at construction. Immutable afterwards.
///
/// Coherence follows the usual matrix-completion definition
///   mu(S) = (ambient / dim) * max_j || P_S e_j ||^2,
/// evaluated from the rows of the orthonormal basis, so it lies in
/// [1, ambient / dim] and depends only on the span.
class Subspace {
public:
  /// Throws SingularityError if `basis` is rank deficient or wider than tall.
  explicit Subspace(DenseMatrix basis);

  const DenseMatrix& basis() const noexcept { return basis_; }
  const DenseMatrix& ortho() const noexcept { return ortho_; }
  double coherence() const noexcept { return coherence_; }

  std::size_t ambient_dim() const noexcept { return basis_.rows(); }
  std::size_t dim() const noexcept { return basis_.cols(); }

private:
  DenseMatrix basis_;
  DenseMatrix ortho_;
  double coherence_;
};

/// Kronecker-structured subspace D = A (x) B for signals Y = A X B^T.
///
/// `row_space` is the left factor A (m1 x n1): it acts on the row index of Y,
/// i.e. it spans the columns of Y. `col_space` is B (m2 x n2) and spans the
/// rows of Y.
struct KSModel {
  Subspace row_space;
  Subspace col_space;

  KSModel(Subspace a, Subspace b);

  std::size_t m1() const noexcept { return row_space.ambient_dim(); }
  std::size_t m2() const noexcept { return col_space.ambient_dim(); }
  std::size_t n1() const noexcept { return row_space.dim(); }
  std::size_t n2() const noexcept { return col_space.dim(); }
};

/// Orthogonal projector onto the span, built as ortho * ortho^T.
DenseMatrix projector(const Subspace& s);

/// Projector through the normal equations: M (M^T M)^{-1} M^T.
DenseMatrix projector_from_gram(const DenseMatrix& basis);

double coherence(const Subspace& s);

/// mu(A (x) B) via the product rule mu(A) * mu(B).
double ks_coherence(const KSModel& m);

/// mu(A (x) B) evaluated directly on the explicit m1 m2 x n1 n2 Kronecker
/// basis: every U^D e_j is formed and its squared norm taken. O(m1 m2 n1 n2)
/// memory, O((m1 m2)^2 n1 n2) time.
double ks_coherence_direct(const KSModel& m);

/// m1 m2 ||Y||_inf^2 / ||Y||_F^2. Throws DegenerateSignalError for Y = 0.
double signal_coherence(const DenseMatrix& y);

/// Complement of dimension ambient - dim, taken from the trailing columns
/// of the full QR of the basis. Throws InvalidArgument for the full space.
Subspace orthogonal_complement(const Subspace& s);

/// Basis with independent standard normal entries drawn row-major from a
/// generator seeded with `seed`.
Subspace random_gaussian_subspace(std::size_t ambient, std::size_t dim, std::uint64_t seed);

/// dim distinct columns of the normalized Walsh-Hadamard matrix of order
/// `ambient` (a power of two), chosen uniformly by `seed`. Every entry has
/// magnitude 1/sqrt(ambient), so the coherence is exactly 1.
Subspace random_hadamard_subspace(std::size_t ambient, std::size_t dim, std::uint64_t seed);

}  // namespace kssd
