#include "kssd/detector.hpp"

#include <cmath>
#include <string>

#include "kssd/chisq.hpp"
#include "kssd/errors.hpp"

namespace kssd {

namespace {

// Condition-number ceiling for the selected design before switching from
// Cholesky on the normal equations to QR on the design itself.
constexpr double kMaxDesignCondition = 1e6;

void check_shape(const DenseMatrix& y, const KSModel& model) {
  if (y.rows() != model.m1() || y.cols() != model.m2()) {
    throw DimensionError("signal is " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                         " but the model expects " + std::to_string(model.m1()) + "x" +
                         std::to_string(model.m2()));
  }
}

void check_pattern(const SamplingPattern& p, const KSModel& model) {
  if (p.m1() != model.m1() || p.m2() != model.m2()) {
    throw DimensionError("pattern is " + std::to_string(p.m1()) + "x" + std::to_string(p.m2()) +
                         " but the model expects " + std::to_string(model.m1()) + "x" +
                         std::to_string(model.m2()));
  }
}

Eigen::MatrixXd restricted_ortho(const Eigen::MatrixXd& ortho, const std::vector<std::size_t>& rows,
                                 const char* which) {
  const auto n = static_cast<std::size_t>(ortho.cols());
  if (rows.size() < n) {
    throw UndersampledError(std::string(which) + ": " + std::to_string(rows.size()) +
                                " observed indices for a subspace of dimension " +
                                std::to_string(n),
                            n - rows.size());
  }
  Eigen::MatrixXd restricted(static_cast<Eigen::Index>(rows.size()), ortho.cols());
  for (std::size_t t = 0; t < rows.size(); ++t)
    restricted.row(static_cast<Eigen::Index>(t)) = ortho.row(static_cast<Eigen::Index>(rows[t]));
  try {
    return orthonormalize(restricted).thin;
  } catch (const SingularityError& e) {
    throw UndersampledError(std::string(which) + " restricted basis lost rank: " + e.what(),
                            e.deficient_columns());
  }
}

// Squared Frobenius norm of (Y - Q_A X Q_B^T) over the observed cells.
double masked_residual(const Eigen::MatrixXd& y, const Eigen::MatrixXd& mask,
                       const Eigen::MatrixXd& qa, const Eigen::MatrixXd& qb,
                       const Eigen::MatrixXd& coeffs) {
  const Eigen::MatrixXd fit = qa * coeffs * qb.transpose();
  return (y - fit).cwiseProduct(mask).squaredNorm();
}

// Least squares on the explicit selected rows of Q_A (x) Q_B.
Eigen::MatrixXd solve_by_qr(const Eigen::MatrixXd& y, const SamplingPattern& pattern,
                            const Eigen::MatrixXd& qa, const Eigen::MatrixXd& qb) {
  const Eigen::Index n1 = qa.cols();
  const Eigen::Index n2 = qb.cols();
  const auto cells = pattern.observed_cells();
  const auto m2 = pattern.m2();
  Eigen::MatrixXd design(static_cast<Eigen::Index>(cells.size()), n1 * n2);
  Eigen::VectorXd target(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(cells[r] / m2);
    const auto j = static_cast<Eigen::Index>(cells[r] % m2);
    const auto row = static_cast<Eigen::Index>(r);
    for (Eigen::Index p = 0; p < n1; ++p)
      for (Eigen::Index q = 0; q < n2; ++q) design(row, p * n2 + q) = qa(i, p) * qb(j, q);
    target(row) = y(i, j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < n1 * n2) {
    throw UndersampledError("observed cells do not determine the " + std::to_string(n1 * n2) +
                                " KS coefficients (rank " + std::to_string(qr.rank()) + ")",
                            static_cast<std::size_t>(n1 * n2 - qr.rank()));
  }
  const Eigen::VectorXd x = qr.solve(target);
  Eigen::MatrixXd coeffs(n1, n2);
  for (Eigen::Index p = 0; p < n1; ++p)
    for (Eigen::Index q = 0; q < n2; ++q) coeffs(p, q) = x(p * n2 + q);
  return coeffs;
}

}  // namespace

NoiseModel::NoiseModel(double variance) : variance_(variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InvalidArgument("noise variance must be positive and finite");
  }
}

double full_residual(const DenseMatrix& y, const KSModel& model) {
  check_shape(y, model);
  const auto& qa = model.row_space.ortho().eigen();
  const auto& qb = model.col_space.ortho().eigen();
  const Eigen::MatrixXd core = qa.transpose() * y.eigen() * qb;
  return (y.eigen() - qa * core * qb.transpose()).squaredNorm();
}

ResidualResult residual_intersection(const DenseMatrix& y, const KSModel& model,
                                     const SamplingPattern& pattern) {
  check_shape(y, model);
  check_pattern(pattern, model);
  if (pattern.kind() != PatternKind::Intersection) {
    throw InvalidArgument("residual_intersection needs an intersection pattern");
  }
  const Eigen::MatrixXd qa = restricted_ortho(model.row_space.ortho().eigen(), pattern.row_indices(), "rows");
  const Eigen::MatrixXd qb = restricted_ortho(model.col_space.ortho().eigen(), pattern.col_indices(), "columns");
  const DenseMatrix observed = restrict_signal(y, pattern);
  const auto& yo = observed.eigen();
  const Eigen::MatrixXd core = qa.transpose() * yo * qb;

  ResidualResult out;
  out.residual_energy = (yo - qa * core * qb.transpose()).squaredNorm();
  out.observed_energy = yo.squaredNorm();
  out.full_residual_energy = full_residual(y, model);
  out.counts = derive_counts(pattern);
  return out;
}

ResidualResult residual_discrete(const DenseMatrix& y, const KSModel& model,
                                 const SamplingPattern& pattern) {
  check_shape(y, model);
  check_pattern(pattern, model);
  const auto& qa = model.row_space.ortho().eigen();
  const auto& qb = model.col_space.ortho().eigen();
  const Eigen::Index n1 = qa.cols();
  const Eigen::Index n2 = qb.cols();
  const Eigen::MatrixXd mask = pattern.indicator();
  const SampleCounts counts = derive_counts(pattern);

  const auto unknowns = static_cast<std::size_t>(n1 * n2);
  if (counts.observed_cells < unknowns) {
    throw UndersampledError(std::to_string(counts.observed_cells) +
                                " observed cells cannot determine " + std::to_string(unknowns) +
                                " KS coefficients",
                            unknowns - counts.observed_cells);
  }

  // Gram of the selected design rows a_i (x) b_j over observed (i, j):
  //   G[(p,q),(p',q')] = sum_i a_ip a_ip' sum_j M_ij b_jq b_jq'.
  Eigen::MatrixXd b_outer(qb.rows(), n2 * n2);
  for (Eigen::Index q = 0; q < n2; ++q)
    for (Eigen::Index r = 0; r < n2; ++r) b_outer.col(q * n2 + r) = qb.col(q).cwiseProduct(qb.col(r));
  Eigen::MatrixXd a_outer(qa.rows(), n1 * n1);
  for (Eigen::Index p = 0; p < n1; ++p)
    for (Eigen::Index r = 0; r < n1; ++r) a_outer.col(p * n1 + r) = qa.col(p).cwiseProduct(qa.col(r));
  const Eigen::MatrixXd row_grams = mask * b_outer;                        // m1 x n2^2
  const Eigen::MatrixXd blocks = a_outer.transpose() * row_grams;          // n1^2 x n2^2
  Eigen::MatrixXd gram(n1 * n2, n1 * n2);
  for (Eigen::Index p = 0; p < n1; ++p)
    for (Eigen::Index pp = 0; pp < n1; ++pp)
      for (Eigen::Index q = 0; q < n2; ++q)
        for (Eigen::Index qq = 0; qq < n2; ++qq)
          gram(p * n2 + q, pp * n2 + qq) = blocks(p * n1 + pp, q * n2 + qq);

  const Eigen::MatrixXd masked_y = y.eigen().cwiseProduct(mask);
  const Eigen::MatrixXd rhs_matrix = qa.transpose() * masked_y * qb;  // n1 x n2
  Eigen::VectorXd rhs(n1 * n2);
  for (Eigen::Index p = 0; p < n1; ++p)
    for (Eigen::Index q = 0; q < n2; ++q) rhs(p * n2 + q) = rhs_matrix(p, q);

  Eigen::MatrixXd coeffs;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  // cond(design)^2 = cond(gram).
  const bool well_conditioned =
      llt.info() == Eigen::Success && llt.rcond() * kMaxDesignCondition * kMaxDesignCondition > 1.0;
  if (well_conditioned) {
    const Eigen::VectorXd x = llt.solve(rhs);
    coeffs.resize(n1, n2);
    for (Eigen::Index p = 0; p < n1; ++p)
      for (Eigen::Index q = 0; q < n2; ++q) coeffs(p, q) = x(p * n2 + q);
  } else {
    coeffs = solve_by_qr(y.eigen(), pattern, qa, qb);
  }

  ResidualResult out;
  out.residual_energy = masked_residual(y.eigen(), mask, qa, qb, coeffs);
  out.observed_energy = masked_y.squaredNorm();
  out.full_residual_energy = full_residual(y, model);
  out.counts = counts;
  return out;
}

ResidualResult residual(const DenseMatrix& y, const KSModel& model, const SamplingPattern& pattern) {
  return pattern.kind() == PatternKind::Intersection ? residual_intersection(y, model, pattern)
                                                     : residual_discrete(y, model, pattern);
}

DetectionOutcome detect_noiseless(const ResidualResult& r, std::optional<double> eta) {
  const double threshold = eta.value_or(kNoiselessFloor * r.observed_energy);
  if (!(threshold >= 0.0)) throw InvalidArgument("threshold must be nonnegative");
  return {r.residual_energy, threshold,
          r.residual_energy <= threshold ? Hypothesis::H0 : Hypothesis::H1};
}

double detection_probability(double noncentrality, double dof, double eta) {
  if (!(eta >= 0.0)) throw InvalidArgument("threshold must be nonnegative");
  return 1.0 - noncentral_chisq_cdf(eta, dof, noncentrality);
}

double default_noisy_dof(const KSModel& model) {
  return static_cast<double>(model.n1() * model.n2());
}

double residual_dof(const KSModel& model, const SampleCounts& counts, PatternKind kind) {
  const double cells = kind == PatternKind::Intersection
                           ? static_cast<double>(counts.k1 * counts.k2)
                           : static_cast<double>(counts.observed_cells);
  return cells - static_cast<double>(model.n1() * model.n2());
}

DetectionOutcome detect_noisy(const DenseMatrix& y_noisy, const KSModel& model,
                              const SamplingPattern& pattern, double eta, const NoiseModel& noise) {
  if (!(eta >= 0.0)) throw InvalidArgument("threshold must be nonnegative");
  const ResidualResult r = residual(y_noisy, model, pattern);
  const double statistic = r.residual_energy / noise.variance();
  return {statistic, eta, statistic <= eta ? Hypothesis::H0 : Hypothesis::H1};
}

double noisy_noncentrality(const ResidualResult& clean, const NoiseModel& noise) {
  return clean.residual_energy / noise.variance();
}

}  // namespace kssd
