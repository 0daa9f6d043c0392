#pragma once

#include <cstddef>
#include <optional>

#include "kssd/dense_matrix.hpp"
#include "kssd/sampling.hpp"
#include "kssd/subspace.hpp"

namespace kssd {

/// Residual energies of one observed signal against a KS model.
struct ResidualResult {
  double residual_energy = 0.0;       // ||Y_Omega - projection||_F^2 on the observed cells
  double observed_energy = 0.0;       // ||Y_Omega||_F^2
  double full_residual_energy = 0.0;  // ||Y - U^A Y U^B||_F^2 on the complete signal
  SampleCounts counts;
};

enum class Hypothesis {
  H0,  // signal lies in the KS subspace
  H1,  // signal does not lie in the KS subspace
};

struct DetectionOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  Hypothesis decision = Hypothesis::H0;
};

/// Per-entry Gaussian noise variance. Must be positive.
class NoiseModel {
public:
  explicit NoiseModel(double variance);
  double variance() const noexcept { return variance_; }

private:
  double variance_;
};

/// Relative floor used in place of eta = 0 in floating point.
inline constexpr double kNoiselessFloor = 1e-9;

/// Whole rows and columns observed. Projects the k1 x k2 block Y_Omega onto
/// the restricted subspaces A_Omega and B_Omega from both sides and returns
/// the Frobenius residual. Throws UndersampledError when k1 < n1, k2 < n2 or
/// a restricted basis loses rank.
ResidualResult residual_intersection(const DenseMatrix& y, const KSModel& model,
                                     const SamplingPattern& pattern);

/// Arbitrary observed cells. The statistic is the least-squares residual of
/// the observed entries against the rows of A (x) B picked out by those
/// cells (row-major vec order). On intersection masks this coincides with
/// residual_intersection.
///
/// The normal equations are assembled from the Kronecker factors in
/// O(m1 m2 (n1^2 + n2^2) + n1^2 n2^2 m1) and solved by Cholesky; when the
/// estimated condition number of the selected design exceeds 1e6 the
/// explicit design is formed and solved by column-pivoted QR instead.
ResidualResult residual_discrete(const DenseMatrix& y, const KSModel& model,
                                 const SamplingPattern& pattern);

/// Dispatches on the pattern kind.
ResidualResult residual(const DenseMatrix& y, const KSModel& model,
                        const SamplingPattern& pattern);

/// ||Y - U^A Y U^B||_F^2.
double full_residual(const DenseMatrix& y, const KSModel& model);

/// H0 iff residual_energy <= eta. Without eta the threshold is
/// kNoiselessFloor * observed_energy.
DetectionOutcome detect_noiseless(const ResidualResult& r, std::optional<double> eta = std::nullopt);

/// 1 - P[chi'^2_dof(noncentrality) <= eta].
double detection_probability(double noncentrality, double dof, double eta);

/// Degrees of freedom used for the noisy test by default: n1 * n2.
double default_noisy_dof(const KSModel& model);

/// Dimension of the residual space for a given pattern, k1 k2 - n1 n2 for
/// intersections and observed_cells - n1 n2 otherwise. This is the dof of
/// the statistic under pure Gaussian noise.
double residual_dof(const KSModel& model, const SampleCounts& counts, PatternKind kind);

/// Residual statistic of a noisy observation in units of the noise variance,
/// thresholded at eta (same units).
DetectionOutcome detect_noisy(const DenseMatrix& y_noisy, const KSModel& model,
                              const SamplingPattern& pattern, double eta, const NoiseModel& noise);

/// Noncentrality fed to detection_probability: the clean-signal residual
/// divided by the noise variance.
double noisy_noncentrality(const ResidualResult& clean, const NoiseModel& noise);

}  // namespace kssd
