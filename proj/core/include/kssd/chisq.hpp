#pragma once

namespace kssd {

/// P[chi^2_dof <= x] through the regularized lower incomplete gamma
/// function P(dof/2, x/2). dof may be fractional but must be positive.
double central_chisq_cdf(double x, double dof);

/// Inverse of central_chisq_cdf in x for p in [0, 1).
double central_chisq_quantile(double p, double dof);

/// P[chi'^2_dof(lambda) <= x] as the Poisson mixture
///   sum_j e^{-lambda/2} (lambda/2)^j / j! * P[chi^2_{dof+2j} <= x].
/// Terms are accumulated outward from the Poisson mode and the sum stops once
/// the untouched Poisson mass is below 1e-12.
double noncentral_chisq_cdf(double x, double dof, double noncentrality);

}  // namespace kssd
