#pragma once

#include <cstddef>
#include <string>

namespace kssd {

/// Sampling regime a bound applies to: whole rows/columns (intersection)
/// or discrete missing entries (union of rows and columns).
enum class Regime { Intersection, Union };

/// How the beta and gamma2 parameters are evaluated.
///
/// Corrected (default) uses (m2/n2)(1/mu_B) + (m1/n1)(1/mu_A) in beta's
/// denominator and mu_B inside gamma2, the forms the symmetric derivation of
/// the coefficient bound produces. AsWritten uses m1/n2 and mu_A verbatim as
/// originally typeset.
enum class FormulaMode { Corrected, AsWritten };

struct BoundInputs {
  std::size_t m1 = 0, m2 = 0;
  std::size_t n1 = 0, n2 = 0;
  std::size_t k1 = 0, k2 = 0;
  double mu_a = 1.0;
  double mu_b = 1.0;
  double mu_y = 1.0;
  double delta = 0.05;
  double full_residual_energy = 0.0;  // ||Y - U^A Y U^B||_F^2
  double signal_energy = 0.0;         // ||Y||_F^2
};

struct BoundParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

struct BoundReport {
  Regime regime = Regime::Intersection;
  BoundParams params;
  /// Lower bound as displayed; may be negative. -infinity when gamma1 or
  /// gamma2 is >= 1 (the bound is then vacuous).
  double lower = 0.0;
  /// max(lower, 0).
  double lower_clamped = 0.0;
  /// Upper bound as displayed: against ||Y - U^A Y U^B||^2 for the
  /// intersection regime and against ||Y||^2 for the union regime.
  double upper = 0.0;
  /// Union-regime upper pre-multiplier applied to the full residual energy
  /// instead; equals `upper` for the intersection regime.
  double upper_residual_normalized = 0.0;
  double probability_floor = 0.0;  // 1 - 8 delta
  bool k1_condition_met = false;
  bool k2_condition_met = false;
  bool lower_finite = false;
};

/// ceil((8/3) n mu ln(2n/delta)).
std::size_t min_samples(std::size_t n, double mu, double delta);

BoundParams theorem1_params(const BoundInputs& b, FormulaMode mode = FormulaMode::Corrected);
BoundParams theorem2_params(const BoundInputs& b, FormulaMode mode = FormulaMode::Corrected);

/// Intersection regime: with probability >= 1 - 8 delta
///   ((1-a) k1k2/(m1m2) - (b+1)^2/(2(1-g2)(1-g1)) (n1 mu_A/m1 + n2 mu_B/m2)) R
///     <= residual <= (1+a) k1k2/(m1m2) R,   R = ||Y - U^A Y U^B||^2.
BoundReport theorem1_bounds(const BoundInputs& b, FormulaMode mode = FormulaMode::Corrected);

/// Union regime, K = k1 m2 + k2 m1 - k1 k2:
///   K/(m1m2) ((1-a) - m1m2 (b+1)^2/(2 k1k2 (1-g1)(1-g2)) (n1 mu_A/m1 + n2 mu_B/m2)) R
///     <= residual <= (1+a) K/(m1m2) ||Y||^2.
BoundReport theorem2_bounds(const BoundInputs& b, FormulaMode mode = FormulaMode::Corrected);

BoundReport evaluate_bounds(Regime regime, const BoundInputs& b,
                            FormulaMode mode = FormulaMode::Corrected);

/// Square incoherent case (mu = 1, all parameters -> 0), coefficient of the
/// full residual in the lower bound: 2k(m-k)/m^2 * (1 - nm/k^2).
double incoherent_lower_bound(std::size_t m, std::size_t n, std::size_t k);

/// General incoherent union coefficient before specialising to the square
/// case: K/(m1m2) * (1 - (n1 m2 + n2 m1)/(2 k1 k2)).
double incoherent_union_coefficient(std::size_t m1, std::size_t m2, std::size_t n1,
                                    std::size_t n2, std::size_t k1, std::size_t k2);

/// Flat key=value lines, one per field.
std::string to_key_value(const BoundReport& r);

/// Header for to_csv_row: regime,alpha,beta,gamma1,gamma2,lower,lower_clamped,
/// upper,upper_residual_normalized,probability_floor,k1_condition_met,k2_condition_met
std::string bound_csv_header();
std::string to_csv_row(const BoundReport& r);

std::string to_string(Regime r);

}  // namespace kssd
