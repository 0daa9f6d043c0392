#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kssd/bounds.hpp"
#include "kssd/dense_matrix.hpp"
#include "kssd/subspace.hpp"

namespace kssd {

/// Where a synthetic test signal lives relative to D = A (x) B.
enum class SignalCase {
  InD,       // A X B^T
  InAperpB,  // A_perp X B^T
  InABperp,  // A X B_perp^T
  InDperp,   // orthogonal complement of D
};

enum class BasisKind {
  Gaussian,  // i.i.d. standard normal bases
  Hadamard,  // Walsh-Hadamard columns, coherence exactly 1 (power-of-two ambient)
};

struct ExperimentConfig {
  std::size_t m1 = 100, m2 = 100;
  std::size_t n1 = 10, n2 = 10;
  /// (k1, k2) grid points; empty means default_k_grid on each axis, paired.
  std::vector<std::pair<std::size_t, std::size_t>> k_grid;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  SignalCase signal_case = SignalCase::InDperp;
  /// Intersection draws k1 rows x k2 columns; Union observes the union of
  /// k1 full rows and k2 full columns (a discrete mask).
  Regime regime = Regime::Intersection;
  /// When set, each trial is also checked against the matching theorem.
  std::optional<double> delta;
  BasisKind basis = BasisKind::Gaussian;
  FormulaMode formula_mode = FormulaMode::Corrected;
  /// Draw a fresh signal per trial instead of holding it fixed.
  bool resample_signal = false;
  /// Worker threads; results do not depend on this value.
  std::size_t threads = 1;
};

struct TrialSummary {
  std::size_t k1 = 0, k2 = 0;
  std::size_t completed = 0;  // trials with a full-rank restricted model
  std::size_t failed = 0;     // trials rejected as undersampled
  double min = 0.0, mean = 0.0, max = 0.0;
  double positive_fraction = 0.0;
  /// Fraction of trials with residual in [max(lower, 0), upper]; NaN
  /// without delta.
  double coverage_fraction = 0.0;
  /// Bounds for the fixed signal at this grid point; NaN without delta.
  double lower = 0.0, upper = 0.0;
  bool undersampled = false;  // k below n, or every trial failed
};

struct SweepResult {
  ExperimentConfig config;
  double mu_a = 0.0, mu_b = 0.0, mu_y = 0.0;
  double threshold = 0.0;  // product_threshold of the model, a k1*k2 abscissa
  double signal_energy = 0.0;
  double full_residual_energy = 0.0;
  std::vector<TrialSummary> points;
};

/// k in {n, n + step, ...} capped at m, with m always included.
std::vector<std::size_t> default_k_grid(std::size_t n, std::size_t m, std::size_t step = 5);

/// Bases for a config: row space from derive_seed(seed, {1}), column space
/// from derive_seed(seed, {2}).
KSModel make_model(const ExperimentConfig& cfg);

/// Unit-Frobenius-norm signal for the requested case. InDperp draws a
/// Gaussian matrix and removes its projection onto D, so membership in the
/// complement is exact up to rounding.
DenseMatrix make_signal(SignalCase signal_case, const KSModel& model, std::uint64_t seed);

/// (n1 mu_A ln n1) * (n2 mu_B ln n2): the positivity threshold on k1 * k2.
double product_threshold(const KSModel& model);

/// Per-axis positivity floor n mu ln n.
double positivity_floor(std::size_t n, double mu);

/// Runs `trials` independent masks at each grid point with the model and
/// (by default) the signal held fixed. Trial t at grid index g uses the
/// pattern seed derive_seed(seed, {3, g, t}), so output is independent of
/// the thread count.
SweepResult run_residual_sweep(const ExperimentConfig& cfg);

/// Columns: k1,k2,k1k2,min,mean,max,positive_fraction,coverage_fraction,
/// lower,upper,threshold.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// Resolved configuration as key=value lines.
std::string describe(const ExperimentConfig& cfg);

std::string to_string(SignalCase c);
std::string to_string(BasisKind b);

struct ExpectationConfig {
  std::size_t m1 = 30, m2 = 30;
  std::size_t n1 = 3, n2 = 3;
  std::size_t k1 = 15, k2 = 15;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  BasisKind basis = BasisKind::Gaussian;
  std::size_t threads = 1;
};

struct ExpectationCheck {
  std::string name;
  bool equality = true;  // equality within 3 SE, else estimate <= reference + 3 SE
  double estimate = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  double ratio = 0.0;  // estimate / reference
  bool passed = false;
};

/// Monte Carlo estimates, for a fixed unit-norm signal in the complement of
/// D and orthonormal bases, of
///   E||Y_Omega||^2 (intersection)  == k1k2/(m1m2) ||Y||^2
///   E||Y_Omega||^2 (union)         == (k1/m1 + k2/m2 - k1k2/(m1m2)) ||Y||^2
///   E||A_Omega^T Y_Omega B_Omega||^2 <= k1k2/(2 m1m2) (n1 mu_A/m1 + n2 mu_B/m2) ||Y||^2
///   and its union analogue with K/(2 m1m2) in front.
std::vector<ExpectationCheck> validate_expectations(const ExpectationConfig& cfg);

void write_expectations_csv(std::ostream& out, const std::vector<ExpectationCheck>& checks);

}  // namespace kssd
