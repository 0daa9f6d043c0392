#include "kssd/dense_matrix.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kssd/errors.hpp"

namespace kssd {

namespace {

Eigen::Index to_index(std::size_t n) {
  if (n > static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max())) {
    throw DimensionError("dimension " + std::to_string(n) + " exceeds the index range");
  }
  return static_cast<Eigen::Index>(n);
}

std::size_t checked_product(std::size_t a, std::size_t b) {
  if (a != 0 && b > static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max()) / a) {
    throw DimensionError("dimension product " + std::to_string(a) + " x " + std::to_string(b) +
                         " overflows the index range");
  }
  return a * b;
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("matrix dimensions must be positive");
  }
  checked_product(rows, cols);
  values_ = Storage::Zero(to_index(rows), to_index(cols));
}

DenseMatrix::DenseMatrix(Storage values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw DimensionError("matrix dimensions must be positive");
  }
  if (!values_.allFinite()) {
    throw InvalidArgument("matrix entries must be finite");
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw DimensionError("matrix dimensions must be positive");
  const std::size_t cols = rows.begin()->size();
  Storage m(to_index(rows.size()), to_index(cols));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (row.size() != cols) throw DimensionError("ragged row in matrix literal");
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return DenseMatrix(std::move(m));
}

DenseMatrix DenseMatrix::from_row_major(std::size_t rows, std::size_t cols,
                                        std::span<const double> entries) {
  if (entries.size() != checked_product(rows, cols)) {
    throw DimensionError("entry count " + std::to_string(entries.size()) + " does not match " +
                         std::to_string(rows) + " x " + std::to_string(cols));
  }
  Storage m(to_index(rows), to_index(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entries[i * cols + j];
  return DenseMatrix(std::move(m));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  return DenseMatrix(Storage::Identity(to_index(n), to_index(n)));
}

double DenseMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= rows() || j >= cols()) throw InvalidArgument("matrix index out of range");
  return (*this)(i, j);
}

void DenseMatrix::set(std::size_t i, std::size_t j, double value) {
  if (i >= rows() || j >= cols()) throw InvalidArgument("matrix index out of range");
  if (!std::isfinite(value)) throw InvalidArgument("matrix entries must be finite");
  values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
}

std::vector<double> DenseMatrix::row_major() const {
  std::vector<double> out;
  out.reserve(rows() * cols());
  for (Eigen::Index i = 0; i < values_.rows(); ++i)
    for (Eigen::Index j = 0; j < values_.cols(); ++j) out.push_back(values_(i, j));
  return out;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("cannot multiply " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " by " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  return DenseMatrix(DenseMatrix::Storage(a.eigen() * b.eigen()));
}

DenseMatrix transpose(const DenseMatrix& a) {
  return DenseMatrix(DenseMatrix::Storage(a.eigen().transpose()));
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  const std::size_t rows = checked_product(a.rows(), b.rows());
  const std::size_t cols = checked_product(a.cols(), b.cols());
  checked_product(rows, cols);
  const auto& ea = a.eigen();
  const auto& eb = b.eigen();
  DenseMatrix::Storage out(to_index(rows), to_index(cols));
  for (Eigen::Index i = 0; i < ea.rows(); ++i)
    for (Eigen::Index j = 0; j < ea.cols(); ++j)
      out.block(i * eb.rows(), j * eb.cols(), eb.rows(), eb.cols()) = ea(i, j) * eb;
  return DenseMatrix(std::move(out));
}

DenseMatrix vectorize(const DenseMatrix& m) {
  const auto entries = m.row_major();
  return DenseMatrix::from_row_major(entries.size(), 1, entries);
}

DenseMatrix unvectorize(const DenseMatrix& v, std::size_t rows, std::size_t cols) {
  if (v.cols() != 1) throw DimensionError("unvectorize expects a column vector");
  const auto entries = v.row_major();
  return DenseMatrix::from_row_major(rows, cols, entries);
}

double frobenius_norm_sq(const DenseMatrix& m) { return m.eigen().squaredNorm(); }

double infinity_entry_norm(const DenseMatrix& m) { return m.eigen().cwiseAbs().maxCoeff(); }

DenseMatrix standard_basis_vector(std::size_t dim, std::size_t j) {
  if (j >= dim) {
    throw InvalidArgument("basis index " + std::to_string(j) + " out of range for dimension " +
                          std::to_string(dim));
  }
  DenseMatrix e(dim, 1);
  e.set(j, 0, 1.0);
  return e;
}

std::size_t count_deficient_columns(const Eigen::MatrixXd& r_upper) {
  const Eigen::Index n = std::min(r_upper.rows(), r_upper.cols());
  double largest = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) largest = std::max(largest, std::abs(r_upper(i, i)));
  // Columns beyond the row count have no diagonal entry at all.
  std::size_t deficient = static_cast<std::size_t>(r_upper.cols() - n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(r_upper(i, i)) >= kRankTolerance * largest) || largest == 0.0) ++deficient;
  }
  return deficient;
}

QrBasis orthonormalize(const Eigen::MatrixXd& basis, bool want_full) {
  const Eigen::Index m = basis.rows();
  const Eigen::Index n = basis.cols();
  if (m == 0 || n == 0) throw DimensionError("basis must be non-empty");
  if (n > m) {
    throw SingularityError("basis has " + std::to_string(n) + " columns in ambient dimension " +
                               std::to_string(m),
                           static_cast<std::size_t>(n - m));
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const std::size_t deficient = count_deficient_columns(r);
  if (deficient > 0) {
    throw SingularityError("basis is rank deficient: " + std::to_string(deficient) + " of " +
                               std::to_string(n) + " columns are dependent",
                           deficient);
  }
  QrBasis out;
  if (want_full) {
    out.full = qr.householderQ();
    out.thin = out.full.leftCols(n);
  } else {
    out.thin = qr.householderQ() * Eigen::MatrixXd::Identity(m, n);
  }
  return out;
}

DenseMatrix pseudoinverse_gram(const DenseMatrix& basis) {
  const Eigen::Index n = basis.eigen().cols();
  if (basis.eigen().rows() < n) {
    throw SingularityError("Gram matrix of a wide basis is singular",
                           static_cast<std::size_t>(n - basis.eigen().rows()));
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis.eigen());
  const Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const std::size_t deficient = count_deficient_columns(r);
  if (deficient > 0) {
    throw SingularityError("basis is rank deficient: " + std::to_string(deficient) + " of " +
                               std::to_string(n) + " columns are dependent",
                           deficient);
  }
  // M^T M = R^T R, so (M^T M)^{-1} = R^{-1} R^{-T}.
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd gram_inv = r_inv * r_inv.transpose();
  gram_inv = 0.5 * (gram_inv + gram_inv.transpose()).eval();
  return DenseMatrix(std::move(gram_inv));
}

}  // namespace kssd
