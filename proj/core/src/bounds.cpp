#include "kssd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "kssd/errors.hpp"
#include "kssd/matrix_io.hpp"

namespace kssd {

namespace {

constexpr double kMuSlack = 1e-9;

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1), got " + format_real(delta));
  }
}

void check_mu(double mu, const char* name) {
  if (!(mu >= 1.0 - kMuSlack) || !std::isfinite(mu)) {
    throw InvalidArgument(std::string(name) + " must be a finite coherence >= 1, got " +
                          format_real(mu));
  }
}

void check_inputs(const BoundInputs& b) {
  check_delta(b.delta);
  check_mu(b.mu_a, "mu_A");
  check_mu(b.mu_b, "mu_B");
  check_mu(b.mu_y, "mu_Y");
  if (b.n1 == 0 || b.n2 == 0) throw InvalidArgument("subspace dimensions must be positive");
  if (b.k1 < b.n1 || b.k2 < b.n2) {
    throw InvalidArgument("sample counts (" + std::to_string(b.k1) + ", " + std::to_string(b.k2) +
                          ") below subspace dimensions (" + std::to_string(b.n1) + ", " +
                          std::to_string(b.n2) + ")");
  }
  if (b.k1 > b.m1 || b.k2 > b.m2) {
    throw InvalidArgument("sample counts exceed signal dimensions");
  }
  if (!(b.full_residual_energy >= 0.0) || !(b.signal_energy >= 0.0)) {
    throw InvalidArgument("energies must be nonnegative");
  }
}

double gamma_term(std::size_t n, double mu, std::size_t k, double delta) {
  const double nd = static_cast<double>(n);
  return std::sqrt(8.0 * nd * mu / (3.0 * static_cast<double>(k)) * std::log(2.0 * nd / delta));
}

double beta_denominator(const BoundInputs& b, FormulaMode mode) {
  const double m1 = static_cast<double>(b.m1);
  const double m2 = static_cast<double>(b.m2);
  const double n1 = static_cast<double>(b.n1);
  const double n2 = static_cast<double>(b.n2);
  const double a_term = mode == FormulaMode::Corrected ? m1 / n1 : m1 / n2;
  return (m2 / n2) / b.mu_b + a_term / b.mu_a;
}

BoundParams common_params(const BoundInputs& b, FormulaMode mode) {
  BoundParams p;
  p.gamma1 = gamma_term(b.n1, b.mu_a, b.k1, b.delta);
  p.gamma2 = gamma_term(b.n2, mode == FormulaMode::Corrected ? b.mu_b : b.mu_a, b.k2, b.delta);
  return p;
}

double coherence_mix(const BoundInputs& b) {
  return static_cast<double>(b.n1) / static_cast<double>(b.m1) * b.mu_a +
         static_cast<double>(b.n2) / static_cast<double>(b.m2) * b.mu_b;
}

void fill_conditions(BoundReport& r, const BoundInputs& b) {
  r.k1_condition_met = b.k1 >= min_samples(b.n1, b.mu_a, b.delta);
  r.k2_condition_met = b.k2 >= min_samples(b.n2, b.mu_b, b.delta);
  r.lower_finite = r.k1_condition_met && r.k2_condition_met && r.params.gamma1 < 1.0 &&
                   r.params.gamma2 < 1.0;
  r.probability_floor = 1.0 - 8.0 * b.delta;
}

void finish_lower(BoundReport& r, double coefficient, double energy) {
  if (!r.lower_finite) {
    r.lower = -std::numeric_limits<double>::infinity();
  } else {
    r.lower = coefficient * energy + 0.0;
  }
  r.lower_clamped = std::max(r.lower, 0.0);
}

}  // namespace

std::size_t min_samples(std::size_t n, double mu, double delta) {
  if (n == 0) throw InvalidArgument("subspace dimension must be positive");
  check_mu(mu, "mu");
  check_delta(delta);
  const double nd = static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(8.0 / 3.0 * nd * mu * std::log(2.0 * nd / delta)));
}

BoundParams theorem1_params(const BoundInputs& b, FormulaMode mode) {
  check_inputs(b);
  const double log_inv_delta = std::log(1.0 / b.delta);
  const double k1k2 = static_cast<double>(b.k1) * static_cast<double>(b.k2);
  BoundParams p = common_params(b, mode);
  p.alpha = std::sqrt(2.0 * b.mu_y * b.mu_y / k1k2 * log_inv_delta);
  p.beta = std::sqrt(4.0 * b.mu_y * log_inv_delta / beta_denominator(b, mode));
  return p;
}

BoundParams theorem2_params(const BoundInputs& b, FormulaMode mode) {
  check_inputs(b);
  const double log_inv_delta = std::log(1.0 / b.delta);
  const double k1 = static_cast<double>(b.k1);
  const double k2 = static_cast<double>(b.k2);
  const double m1 = static_cast<double>(b.m1);
  const double m2 = static_cast<double>(b.m2);
  const double cells = k1 * m2 + k2 * m1 - k1 * k2;
  BoundParams p = common_params(b, mode);
  p.alpha = std::sqrt(2.0 * b.mu_y * b.mu_y * k1 * k2 / (cells * cells) * log_inv_delta);
  const double spread = m1 / k1 + m2 / k2 - 1.0;
  p.beta = std::sqrt(4.0 * b.mu_y * log_inv_delta / (spread * beta_denominator(b, mode)));
  return p;
}

BoundReport theorem1_bounds(const BoundInputs& b, FormulaMode mode) {
  BoundReport r;
  r.regime = Regime::Intersection;
  r.params = theorem1_params(b, mode);
  fill_conditions(r, b);
  const auto& p = r.params;
  const double fraction = static_cast<double>(b.k1) * static_cast<double>(b.k2) /
                          (static_cast<double>(b.m1) * static_cast<double>(b.m2));
  const double lower_coeff =
      (1.0 - p.alpha) * fraction -
      (p.beta + 1.0) * (p.beta + 1.0) / (2.0 * (1.0 - p.gamma2) * (1.0 - p.gamma1)) *
          coherence_mix(b);
  finish_lower(r, lower_coeff, b.full_residual_energy);
  r.upper = (1.0 + p.alpha) * fraction * b.full_residual_energy;
  r.upper_residual_normalized = r.upper;
  return r;
}

BoundReport theorem2_bounds(const BoundInputs& b, FormulaMode mode) {
  BoundReport r;
  r.regime = Regime::Union;
  r.params = theorem2_params(b, mode);
  fill_conditions(r, b);
  const auto& p = r.params;
  const double k1k2 = static_cast<double>(b.k1) * static_cast<double>(b.k2);
  const double m1m2 = static_cast<double>(b.m1) * static_cast<double>(b.m2);
  const double fraction =
      static_cast<double>(b.k1 * b.m2 + b.k2 * b.m1 - b.k1 * b.k2) / m1m2;
  const double lower_coeff =
      fraction * ((1.0 - p.alpha) - m1m2 * (p.beta + 1.0) * (p.beta + 1.0) /
                                        (2.0 * k1k2 * (1.0 - p.gamma1) * (1.0 - p.gamma2)) *
                                        coherence_mix(b));
  finish_lower(r, lower_coeff, b.full_residual_energy);
  r.upper = (1.0 + p.alpha) * fraction * b.signal_energy;
  r.upper_residual_normalized = (1.0 + p.alpha) * fraction * b.full_residual_energy;
  return r;
}

BoundReport evaluate_bounds(Regime regime, const BoundInputs& b, FormulaMode mode) {
  return regime == Regime::Intersection ? theorem1_bounds(b, mode) : theorem2_bounds(b, mode);
}

double incoherent_lower_bound(std::size_t m, std::size_t n, std::size_t k) {
  if (m == 0 || k == 0) throw InvalidArgument("m and k must be positive");
  const double md = static_cast<double>(m);
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  return 2.0 * kd * (md - kd) / (md * md) * (1.0 - nd * md / (kd * kd));
}

double incoherent_union_coefficient(std::size_t m1, std::size_t m2, std::size_t n1,
                                    std::size_t n2, std::size_t k1, std::size_t k2) {
  if (m1 == 0 || m2 == 0 || k1 == 0 || k2 == 0) throw InvalidArgument("dimensions must be positive");
  const double cells = static_cast<double>(k1 * m2 + k2 * m1 - k1 * k2);
  const double m1m2 = static_cast<double>(m1) * static_cast<double>(m2);
  const double k1k2 = static_cast<double>(k1) * static_cast<double>(k2);
  return cells / m1m2 *
         (1.0 - static_cast<double>(n1 * m2 + n2 * m1) / (2.0 * k1k2));
}

std::string to_string(Regime r) {
  return r == Regime::Intersection ? "intersection" : "union";
}

std::string to_key_value(const BoundReport& r) {
  std::ostringstream out;
  out << "regime=" << to_string(r.regime) << '\n'
      << "alpha=" << format_real(r.params.alpha) << '\n'
      << "beta=" << format_real(r.params.beta) << '\n'
      << "gamma1=" << format_real(r.params.gamma1) << '\n'
      << "gamma2=" << format_real(r.params.gamma2) << '\n'
      << "lower=" << format_real(r.lower) << '\n'
      << "lower_clamped=" << format_real(r.lower_clamped) << '\n'
      << "upper=" << format_real(r.upper) << '\n'
      << "upper_residual_normalized=" << format_real(r.upper_residual_normalized) << '\n'
      << "probability_floor=" << format_real(r.probability_floor) << '\n'
      << "sample_conditions_met=" << (r.k1_condition_met && r.k2_condition_met ? "true" : "false") << '\n'
      << "lower_finite=" << (r.lower_finite ? "true" : "false") << '\n'
      << "k1_condition_met=" << (r.k1_condition_met ? "true" : "false") << '\n'
      << "k2_condition_met=" << (r.k2_condition_met ? "true" : "false") << '\n';
  return out.str();
}

std::string bound_csv_header() {
  return "regime,alpha,beta,gamma1,gamma2,lower,lower_clamped,upper,upper_residual_normalized,"
         "probability_floor,k1_condition_met,k2_condition_met";
}

std::string to_csv_row(const BoundReport& r) {
  std::ostringstream out;
  out << to_string(r.regime) << ',' << format_real(r.params.alpha) << ','
      << format_real(r.params.beta) << ',' << format_real(r.params.gamma1) << ','
      << format_real(r.params.gamma2) << ',' << format_real(r.lower) << ','
      << format_real(r.lower_clamped) << ',' << format_real(r.upper) << ','
      << format_real(r.upper_residual_normalized) << ',' << format_real(r.probability_floor)
      << ',' << (r.k1_condition_met ? 1 : 0) << ',' << (r.k2_condition_met ? 1 : 0);
  return out.str();
}

}  // namespace kssd
