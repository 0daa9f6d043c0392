#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace kssd {

/// Real m x n matrix with finite entries.
///
/// The public surface is deliberately small; numerical kernels work on the
/// underlying Eigen storage through eigen() and wrap their results back into
/// a DenseMatrix, which re-validates the finiteness invariant.
class DenseMatrix {
public:
  using Storage = Eigen::MatrixXd;

  /// Zero matrix. Both dimensions must be positive.
  DenseMatrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of Eigen storage; throws if empty or non-finite.
  explicit DenseMatrix(Storage values);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix from_row_major(std::size_t rows, std::size_t cols,
                                    std::span<const double> entries);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// Bounds-checked read.
  double at(std::size_t i, std::size_t j) const;
  /// Bounds-checked write; rejects non-finite values.
  void set(std::size_t i, std::size_t j, double value);

  const Storage& eigen() const noexcept { return values_; }

  std::vector<double> row_major() const;

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

private:
  Storage values_;
};

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

/// Kronecker product: block (i, j) of the result is a(i, j) * b.
DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

/// Row-major vectorization: entry (i, j) lands at index i * cols + j.
/// With this order vec(A X B^T) == kron(A, B) * vec(X).
DenseMatrix vectorize(const DenseMatrix& m);

/// Inverse of vectorize for a rows x cols target.
DenseMatrix unvectorize(const DenseMatrix& v, std::size_t rows, std::size_t cols);

double frobenius_norm_sq(const DenseMatrix& m);
double infinity_entry_norm(const DenseMatrix& m);

/// Column vector of length dim with a one at index j.
DenseMatrix standard_basis_vector(std::size_t dim, std::size_t j);

/// Relative threshold on |R(i,i)| below which a column counts as dependent.
inline constexpr double kRankTolerance = 1e-10;

/// (M^T M)^{-1} through a Householder QR of M. Throws SingularityError when
/// some |R(i,i)| < kRankTolerance * max |R(j,j)|.
DenseMatrix pseudoinverse_gram(const DenseMatrix& basis);

/// Orthonormal basis for the column span of `basis` from an unpivoted
/// Householder QR. `full` additionally carries the trailing columns of the
/// square Q, which span the orthogonal complement.
struct QrBasis {
  Eigen::MatrixXd thin;  // m x n, orthonormal columns, same span as input
  Eigen::MatrixXd full;  // m x m, present only when requested
};

/// Throws SingularityError on rank deficiency (same tolerance as above).
QrBasis orthonormalize(const Eigen::MatrixXd& basis, bool want_full = false);

/// Number of columns whose R diagonal falls under the relative tolerance.
std::size_t count_deficient_columns(const Eigen::MatrixXd& r_upper);

}  // namespace kssd
