#include "kssd/chisq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "kssd/errors.hpp"

namespace kssd {

namespace {

constexpr double kPoissonTail = 1e-12;

void check_args(double x, double dof, double noncentrality) {
  if (!(x >= 0.0)) throw InvalidArgument("chi-square argument must be nonnegative");
  if (!(dof > 0.0) || !std::isfinite(dof)) throw InvalidArgument("degrees of freedom must be positive");
  if (!(noncentrality >= 0.0) || !std::isfinite(noncentrality)) {
    throw InvalidArgument("noncentrality must be nonnegative and finite");
  }
}

}  // namespace

double central_chisq_cdf(double x, double dof) {
  check_args(x, dof, 0.0);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double central_chisq_quantile(double p, double dof) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("quantile level must lie in [0, 1)");
  check_args(0.0, dof, 0.0);
  if (p == 0.0) return 0.0;
  return 2.0 * boost::math::gamma_p_inv(0.5 * dof, p);
}

double noncentral_chisq_cdf(double x, double dof, double noncentrality) {
  check_args(x, dof, noncentrality);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (noncentrality == 0.0) return central_chisq_cdf(x, dof);

  const double half_lambda = 0.5 * noncentrality;
  const double half_x = 0.5 * x;
  const double mode = std::floor(half_lambda);
  const double log_w_mode =
      -half_lambda + mode * std::log(half_lambda) - std::lgamma(mode + 1.0);
  const double w_mode = std::exp(log_w_mode);

  double sum = 0.0;
  double mass = 0.0;

  // Downward from the mode.
  double w = w_mode;
  for (double j = mode; j >= 0.0; j -= 1.0) {
    sum += w * boost::math::gamma_p(0.5 * dof + j, half_x);
    mass += w;
    if (w < kPoissonTail * 1e-4 * w_mode) break;
    w *= j / half_lambda;
  }

  // Upward from mode + 1 until the unvisited Poisson mass is negligible.
  w = w_mode;
  for (double j = mode + 1.0; mass < 1.0 - kPoissonTail; j += 1.0) {
    w *= half_lambda / j;
    if (w == 0.0) break;
    const double p = boost::math::gamma_p(0.5 * dof + j, half_x);
    sum += w * p;
    mass += w;
    // Remaining terms are bounded by the remaining mass times p, and p only
    // shrinks as j grows.
    if (p * (1.0 - mass) < kPoissonTail && j > half_lambda) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace kssd
