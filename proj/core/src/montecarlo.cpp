#include "kssd/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "kssd/detector.hpp"
#include "kssd/errors.hpp"
#include "kssd/matrix_io.hpp"
#include "kssd/rng.hpp"
#include "kssd/sampling.hpp"

namespace kssd {

namespace {

// Stream labels for derive_seed.
constexpr std::uint64_t kRowBasisStream = 1;
constexpr std::uint64_t kColBasisStream = 2;
constexpr std::uint64_t kPatternStream = 3;
constexpr std::uint64_t kSignalStream = 4;
constexpr std::uint64_t kTrialSignalStream = 5;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Subspace make_subspace(BasisKind kind, std::size_t ambient, std::size_t dim, std::uint64_t seed) {
  return kind == BasisKind::Gaussian ? random_gaussian_subspace(ambient, dim, seed)
                                     : random_hadamard_subspace(ambient, dim, seed);
}

KSModel model_for(std::size_t m1, std::size_t m2, std::size_t n1, std::size_t n2, BasisKind kind,
                  std::uint64_t seed) {
  return KSModel(make_subspace(kind, m1, n1, derive_seed(seed, {kRowBasisStream})),
                 make_subspace(kind, m2, n2, derive_seed(seed, {kColBasisStream})));
}

Eigen::MatrixXd gaussian(Rng& rng, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  return g;
}

// Runs body(job) for job in [0, jobs) on up to `threads` workers. Each job
// writes only its own output slot, so scheduling cannot affect results.
void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, jobs));
  if (threads == 1) {
    for (std::size_t j = 0; j < jobs; ++j) body(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t j = next++; j < jobs && !failed; j = next++) {
        try {
          body(j);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          failed = true;
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

struct TrialOutcome {
  double residual = 0.0;
  bool ok = false;
  bool positive = false;
  bool covered = false;
};

BoundInputs bound_inputs(const KSModel& model, const DenseMatrix& y, std::size_t k1,
                         std::size_t k2, double delta, double full_res) {
  BoundInputs b;
  b.m1 = model.m1();
  b.m2 = model.m2();
  b.n1 = model.n1();
  b.n2 = model.n2();
  b.k1 = k1;
  b.k2 = k2;
  b.mu_a = model.row_space.coherence();
  b.mu_b = model.col_space.coherence();
  b.mu_y = signal_coherence(y);
  b.delta = delta;
  b.full_residual_energy = full_res;
  b.signal_energy = frobenius_norm_sq(y);
  return b;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

std::vector<std::size_t> default_k_grid(std::size_t n, std::size_t m, std::size_t step) {
  if (step == 0) throw InvalidArgument("grid step must be positive");
  if (n == 0 || n > m) throw InvalidArgument("grid needs 1 <= n <= m");
  std::vector<std::size_t> grid;
  for (std::size_t k = n; k <= m; k += step) grid.push_back(k);
  if (grid.back() != m) grid.push_back(m);
  return grid;
}

KSModel make_model(const ExperimentConfig& cfg) {
  return model_for(cfg.m1, cfg.m2, cfg.n1, cfg.n2, cfg.basis, cfg.seed);
}

DenseMatrix make_signal(SignalCase signal_case, const KSModel& model, std::uint64_t seed) {
  Rng rng(seed);
  const auto& qa = model.row_space.ortho().eigen();
  const auto& qb = model.col_space.ortho().eigen();
  Eigen::MatrixXd y;
  switch (signal_case) {
    case SignalCase::InD:
      y = model.row_space.basis().eigen() * gaussian(rng, model.n1(), model.n2()) *
          model.col_space.basis().eigen().transpose();
      break;
    case SignalCase::InAperpB: {
      const Subspace a_perp = orthogonal_complement(model.row_space);
      y = a_perp.basis().eigen() * gaussian(rng, a_perp.dim(), model.n2()) *
          model.col_space.basis().eigen().transpose();
      break;
    }
    case SignalCase::InABperp: {
      const Subspace b_perp = orthogonal_complement(model.col_space);
      y = model.row_space.basis().eigen() * gaussian(rng, model.n1(), b_perp.dim()) *
          b_perp.basis().eigen().transpose();
      break;
    }
    case SignalCase::InDperp: {
      if (model.n1() == model.m1() && model.n2() == model.m2()) {
        throw InvalidArgument("D spans the whole signal space; its complement is empty");
      }
      y = gaussian(rng, model.m1(), model.m2());
      for (int pass = 0; pass < 2; ++pass) {
        y -= qa * (qa.transpose() * y * qb) * qb.transpose();
      }
      break;
    }
  }
  const double norm = y.norm();
  if (!(norm > 0.0)) throw DegenerateSignalError("generated signal is zero");
  y /= norm;
  return DenseMatrix(std::move(y));
}

double positivity_floor(std::size_t n, double mu) {
  return static_cast<double>(n) * mu * std::log(static_cast<double>(n));
}

double product_threshold(const KSModel& model) {
  return positivity_floor(model.n1(), model.row_space.coherence()) *
         positivity_floor(model.n2(), model.col_space.coherence());
}

SweepResult run_residual_sweep(const ExperimentConfig& cfg) {
  if (cfg.trials == 0) throw InvalidArgument("trials must be at least 1");
  if (cfg.delta && !(*cfg.delta > 0.0 && *cfg.delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  std::vector<std::pair<std::size_t, std::size_t>> grid = cfg.k_grid;
  if (grid.empty()) {
    const auto g1 = default_k_grid(cfg.n1, cfg.m1);
    const auto g2 = default_k_grid(cfg.n2, cfg.m2);
    for (std::size_t t = 0; t < std::min(g1.size(), g2.size()); ++t) grid.emplace_back(g1[t], g2[t]);
  }
  for (const auto& [k1, k2] : grid) {
    if (k1 < 1 || k1 > cfg.m1 || k2 < 1 || k2 > cfg.m2) {
      throw InvalidArgument("grid point (" + std::to_string(k1) + ", " + std::to_string(k2) +
                            ") outside [1, m]");
    }
  }

  const KSModel model = make_model(cfg);
  const DenseMatrix signal = make_signal(cfg.signal_case, model, derive_seed(cfg.seed, {kSignalStream}));
  const double full_res = full_residual(signal, model);

  SweepResult result;
  result.config = cfg;
  result.config.k_grid = grid;
  result.mu_a = model.row_space.coherence();
  result.mu_b = model.col_space.coherence();
  result.mu_y = signal_coherence(signal);
  result.threshold = product_threshold(model);
  result.signal_energy = frobenius_norm_sq(signal);
  result.full_residual_energy = full_res;

  // Fixed-signal bounds per grid point.
  std::vector<std::optional<BoundReport>> fixed_bounds(grid.size());
  if (cfg.delta) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto [k1, k2] = grid[g];
      if (k1 < cfg.n1 || k2 < cfg.n2) continue;
      fixed_bounds[g] = evaluate_bounds(cfg.regime, bound_inputs(model, signal, k1, k2, *cfg.delta, full_res),
                                        cfg.formula_mode);
    }
  }

  const std::size_t trials = cfg.trials;
  std::vector<TrialOutcome> outcomes(grid.size() * trials);
  parallel_for(outcomes.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t g = job / trials;
    const std::size_t t = job % trials;
    const auto [k1, k2] = grid[g];
    if (k1 < cfg.n1 || k2 < cfg.n2) return;

    Rng rng(derive_seed(cfg.seed, {kPatternStream, g, t}));
    const SamplingPattern pattern = cfg.regime == Regime::Intersection
                                        ? sample_intersection(cfg.m1, cfg.m2, k1, k2, rng)
                                        : sample_union(cfg.m1, cfg.m2, k1, k2, rng);
    std::optional<DenseMatrix> fresh;
    if (cfg.resample_signal) {
      fresh.emplace(make_signal(cfg.signal_case, model, derive_seed(cfg.seed, {kTrialSignalStream, g, t})));
    }
    const DenseMatrix& y = fresh ? *fresh : signal;

    TrialOutcome& out = outcomes[job];
    ResidualResult r;
    try {
      r = residual(y, model, pattern);
    } catch (const UndersampledError&) {
      return;
    }
    out.ok = true;
    out.residual = r.residual_energy;
    out.positive = r.residual_energy > kNoiselessFloor * r.observed_energy;
    if (cfg.delta) {
      const BoundReport b =
          fresh ? evaluate_bounds(cfg.regime,
                                  bound_inputs(model, y, k1, k2, *cfg.delta, r.full_residual_energy),
                                  cfg.formula_mode)
                : *fixed_bounds[g];
      out.covered = r.residual_energy >= b.lower_clamped && r.residual_energy <= b.upper;
    }
  });

  for (std::size_t g = 0; g < grid.size(); ++g) {
    TrialSummary s;
    s.k1 = grid[g].first;
    s.k2 = grid[g].second;
    s.lower = fixed_bounds[g] ? fixed_bounds[g]->lower : kNaN;
    s.upper = fixed_bounds[g] ? fixed_bounds[g]->upper : kNaN;
    double sum = 0.0;
    std::size_t positive = 0;
    std::size_t covered = 0;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialOutcome& o = outcomes[g * trials + t];
      if (!o.ok) {
        ++s.failed;
        continue;
      }
      ++s.completed;
      sum += o.residual;
      s.min = std::min(s.min, o.residual);
      s.max = std::max(s.max, o.residual);
      positive += o.positive ? 1 : 0;
      covered += o.covered ? 1 : 0;
    }
    if (s.k1 < cfg.n1 || s.k2 < cfg.n2) s.failed = 0;
    s.undersampled = s.completed == 0;
    if (s.undersampled) {
      s.min = s.mean = s.max = kNaN;
      s.positive_fraction = kNaN;
      s.coverage_fraction = kNaN;
    } else {
      const double n = static_cast<double>(s.completed);
      s.mean = sum / n;
      s.positive_fraction = static_cast<double>(positive) / n;
      s.coverage_fraction = cfg.delta ? static_cast<double>(covered) / n : kNaN;
    }
    result.points.push_back(s);
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "k1,k2,k1k2,min,mean,max,positive_fraction,coverage_fraction,lower,upper,threshold\n";
  for (const auto& s : result.points) {
    out << s.k1 << ',' << s.k2 << ',' << s.k1 * s.k2 << ',' << format_real(s.min) << ','
        << format_real(s.mean) << ',' << format_real(s.max) << ','
        << format_real(s.positive_fraction) << ',' << format_real(s.coverage_fraction) << ','
        << format_real(s.lower) << ',' << format_real(s.upper) << ','
        << format_real(result.threshold) << '\n';
  }
}

std::string to_string(SignalCase c) {
  switch (c) {
    case SignalCase::InD: return "ind";
    case SignalCase::InAperpB: return "aperpb";
    case SignalCase::InABperp: return "abperp";
    case SignalCase::InDperp: return "dperp";
  }
  return "unknown";
}

std::string to_string(BasisKind b) { return b == BasisKind::Gaussian ? "gaussian" : "hadamard"; }

std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "m1=" << cfg.m1 << "\nm2=" << cfg.m2 << "\nn1=" << cfg.n1 << "\nn2=" << cfg.n2
      << "\ntrials=" << cfg.trials << "\nseed=" << cfg.seed
      << "\ncase=" << to_string(cfg.signal_case) << "\nregime=" << to_string(cfg.regime)
      << "\nbasis=" << to_string(cfg.basis)
      << "\nformula=" << (cfg.formula_mode == FormulaMode::Corrected ? "corrected" : "as-written")
      << "\ndelta=" << (cfg.delta ? format_real(*cfg.delta) : std::string("none"))
      << "\nresample_signal=" << (cfg.resample_signal ? "true" : "false") << "\nk_grid=";
  if (cfg.k_grid.empty()) out << "default";
  for (std::size_t g = 0; g < cfg.k_grid.size(); ++g) {
    out << (g ? ";" : "") << cfg.k_grid[g].first << 'x' << cfg.k_grid[g].second;
  }
  out << '\n';
  return out.str();
}

std::vector<ExpectationCheck> validate_expectations(const ExpectationConfig& cfg) {
  if (cfg.trials == 0) throw InvalidArgument("trials must be at least 1");
  if (cfg.k1 < 1 || cfg.k1 > cfg.m1 || cfg.k2 < 1 || cfg.k2 > cfg.m2) {
    throw InvalidArgument("sample counts must lie in [1, m]");
  }
  const KSModel model = model_for(cfg.m1, cfg.m2, cfg.n1, cfg.n2, cfg.basis, cfg.seed);
  const DenseMatrix signal = make_signal(SignalCase::InDperp, model, derive_seed(cfg.seed, {kSignalStream}));
  const double energy = frobenius_norm_sq(signal);
  const auto& qa = model.row_space.ortho().eigen();
  const auto& qb = model.col_space.ortho().eigen();
  const auto& y = signal.eigen();

  struct Sample {
    double inter_energy, union_energy, inter_coeff, union_coeff;
  };
  std::vector<Sample> samples(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    Rng rng(derive_seed(cfg.seed, {kPatternStream, 0, t}));
    // One row/column draw serves both regimes: the intersection of the
    // chosen sets and their union.
    const auto inter = sample_intersection(cfg.m1, cfg.m2, cfg.k1, cfg.k2, rng);
    const auto uni = SamplingPattern::union_of(cfg.m1, cfg.m2, inter.row_indices(), inter.col_indices());
    const Eigen::MatrixXd inter_mask = inter.indicator();
    const Eigen::MatrixXd union_mask = uni.indicator();
    const Eigen::MatrixXd yi = y.cwiseProduct(inter_mask);
    const Eigen::MatrixXd yu = y.cwiseProduct(union_mask);
    samples[t] = {yi.squaredNorm(), yu.squaredNorm(), (qa.transpose() * yi * qb).squaredNorm(),
                  (qa.transpose() * yu * qb).squaredNorm()};
  });

  const double m1 = static_cast<double>(cfg.m1), m2 = static_cast<double>(cfg.m2);
  const double k1 = static_cast<double>(cfg.k1), k2 = static_cast<double>(cfg.k2);
  const double inter_fraction = k1 * k2 / (m1 * m2);
  const double union_fraction = k1 / m1 + k2 / m2 - k1 * k2 / (m1 * m2);
  const double mix = static_cast<double>(cfg.n1) / m1 * model.row_space.coherence() +
                     static_cast<double>(cfg.n2) / m2 * model.col_space.coherence();

  auto check = [&](std::string name, bool equality, double reference, double Sample::*field) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.*field);
    ExpectationCheck c;
    c.name = std::move(name);
    c.equality = equality;
    c.estimate = mean_of(v);
    c.std_error = std_error_of(v, c.estimate);
    c.reference = reference;
    c.ratio = reference != 0.0 ? c.estimate / reference : kNaN;
    const double slack = 3.0 * c.std_error + 1e-12 * std::abs(reference);
    c.passed = equality ? std::abs(c.estimate - reference) <= slack : c.estimate <= reference + slack;
    return c;
  };

  return {
      check("intersection_energy", true, inter_fraction * energy, &Sample::inter_energy),
      check("union_energy", true, union_fraction * energy, &Sample::union_energy),
      check("intersection_coefficient", false, 0.5 * inter_fraction * mix * energy, &Sample::inter_coeff),
      check("union_coefficient", false, 0.5 * union_fraction * mix * energy, &Sample::union_coeff),
  };
}

void write_expectations_csv(std::ostream& out, const std::vector<ExpectationCheck>& checks) {
  out << "name,kind,estimate,std_error,reference,ratio,passed\n";
  for (const auto& c : checks) {
    out << c.name << ',' << (c.equality ? "equality" : "upper_bound") << ','
        << format_real(c.estimate) << ',' << format_real(c.std_error) << ','
        << format_real(c.reference) << ',' << format_real(c.ratio) << ','
        << (c.passed ? 1 : 0) << '\n';
  }
}

}  // namespace kssd
