// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "kssd/bounds.hpp"
#include "kssd/chisq.hpp"
#include "kssd/commands.hpp"
#include "kssd/detector.hpp"
#include "kssd/montecarlo.hpp"
#include "kssd/rng.hpp"
#include "kssd/sampling.hpp"
#include "kssd/subspace.hpp"
#include "oracles.hpp"

using namespace kssd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::vector<std::vector<bool>> observed_grid(const SamplingPattern& p) {
  std::vector<std::vector<bool>> g(p.m1(), std::vector<bool>(p.m2()));
  for (std::size_t i = 0; i < p.m1(); ++i)
    for (std::size_t j = 0; j < p.m2(); ++j) g[i][j] = p.observed(i, j);
  return g;
}

// 1. mu(A) mu(B) against the coherence of the explicit Kronecker basis.
Outcome product_rule() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n1 = 1 + gen() % 4, n2 = 1 + gen() % 4;
    const std::size_t m1 = n1 + gen() % (21 - n1), m2 = n2 + gen() % (21 - n2);
    const KSModel model(random_gaussian_subspace(m1, n1, derive_seed(11, {std::uint64_t(t), 1})),
                        random_gaussian_subspace(m2, n2, derive_seed(11, {std::uint64_t(t), 2})));
    const double direct = ks_coherence_direct(model);
    worst = std::max(worst, std::abs(ks_coherence(model) - direct) / direct);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0, "max_rel_gap=" + fmt(worst) + " seconds=" + fmt(secs)};
}

// 2. Intersection residual against least squares on the explicit design.
Outcome detector_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const KSModel model(random_gaussian_subspace(20, 4, derive_seed(12, {std::uint64_t(t), 1})),
                        random_gaussian_subspace(20, 4, derive_seed(12, {std::uint64_t(t), 2})));
    const auto y = oracle::from_mat(oracle::gaussian(gen, 20, 20));
    const std::size_t k1 = 8 + gen() % 13, k2 = 8 + gen() % 13;
    const auto p = sample_intersection(20, 20, k1, k2, derive_seed(12, {std::uint64_t(t), 3}));
    const double expected =
        oracle::masked_ls_residual(oracle::to_mat(y), oracle::to_mat(model.row_space.basis()),
                                   oracle::to_mat(model.col_space.basis()), observed_grid(p));
    const double got = residual_intersection(y, model, p).residual_energy;
    worst = std::max(worst, std::abs(got - expected) / std::max(expected, 1e-300));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 30.0, "max_rel_gap=" + fmt(worst) + " seconds=" + fmt(secs)};
}

struct SweepCheck {
  bool pass = true;
  std::size_t points_checked = 0;
  double worst_in_subspace = 0.0;
  double worst_positive_fraction = 1.0;
};

SweepCheck sweep_profile(std::size_t m, std::size_t n, std::size_t trials) {
  SweepCheck out;
  for (auto regime : {Regime::Intersection, Regime::Union}) {
    for (auto c : {SignalCase::InD, SignalCase::InDperp, SignalCase::InAperpB, SignalCase::InABperp}) {
      ExperimentConfig cfg;
      cfg.m1 = cfg.m2 = m;
      cfg.n1 = cfg.n2 = n;
      cfg.trials = trials;
      cfg.regime = regime;
      cfg.signal_case = c;
      const auto r = run_residual_sweep(cfg);
      const double floor_a = positivity_floor(n, r.mu_a);
      const double floor_b = positivity_floor(n, r.mu_b);
      for (const auto& p : r.points) {
        if (c == SignalCase::InD) {
          if (p.undersampled || p.completed != trials) {
            out.pass = false;
            continue;
          }
          out.worst_in_subspace = std::max(out.worst_in_subspace, p.max);
          out.pass = out.pass && p.max <= 1e-9;
        } else if (double(p.k1) >= floor_a && double(p.k2) >= floor_b) {
          ++out.points_checked;
          const double frac = p.completed == trials ? p.positive_fraction : 0.0;
          out.worst_positive_fraction = std::min(out.worst_positive_fraction, frac);
          out.pass = out.pass && frac == 1.0;
        }
      }
    }
  }
  return out;
}

// 3. Zero residual inside D and positivity past the per-axis threshold.
Outcome sweep_reproduction() {
  auto t0 = Clock::now();
  const auto full = sweep_profile(100, 10, 1000);
  const double full_secs = seconds_since(t0);
  t0 = Clock::now();
  const auto fast = sweep_profile(40, 5, 200);
  const double fast_secs = seconds_since(t0);
  const bool pass = full.pass && fast.pass && full.points_checked > 0 && fast.points_checked > 0 &&
                    full_secs < 600.0 && fast_secs < 30.0;
  return {pass, "full_max_in_subspace=" + fmt(full.worst_in_subspace) +
                    " full_min_positive_fraction=" + fmt(full.worst_positive_fraction) +
                    " full_points=" + std::to_string(full.points_checked) +
                    " full_seconds=" + fmt(full_secs) + " fast_max_in_subspace=" + fmt(fast.worst_in_subspace) +
                    " fast_min_positive_fraction=" + fmt(fast.worst_positive_fraction) +
                    " fast_points=" + std::to_string(fast.points_checked) + " fast_seconds=" + fmt(fast_secs)};
}

// 4. Monte Carlo expectations of the observed energy and coefficient bounds.
Outcome expectations() {
  const auto t0 = Clock::now();
  ExpectationConfig cfg;
  cfg.m1 = cfg.m2 = 30;
  cfg.k1 = cfg.k2 = 15;
  cfg.trials = 10000;
  const auto checks = validate_expectations(cfg);
  bool pass = !checks.empty();
  std::string detail;
  for (const auto& c : checks) {
    const bool ok = c.equality ? (c.ratio >= 0.97 && c.ratio <= 1.03) : c.passed;
    pass = pass && ok;
    detail += c.name + "_ratio=" + fmt(c.ratio) + " ";
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 60.0, detail + "seconds=" + fmt(secs)};
}

// 5. Empirical coverage of [max(lower, 0), upper] with incoherent bases.
Outcome coverage() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (double delta : {0.05, 0.1}) {
    for (auto regime : {Regime::Intersection, Regime::Union}) {
      ExperimentConfig cfg;
      cfg.m1 = cfg.m2 = 64;
      cfg.n1 = cfg.n2 = 2;
      cfg.basis = BasisKind::Hadamard;
      cfg.k_grid = {{48, 48}};
      cfg.trials = 2000;
      cfg.delta = delta;
      cfg.regime = regime;
      const auto r = run_residual_sweep(cfg);
      const std::size_t floor_k = std::max(min_samples(2, r.mu_a, delta), min_samples(2, r.mu_b, delta));
      const auto& p = r.points.front();
      const bool ok = p.k1 >= floor_k && p.coverage_fraction >= 1.0 - 8.0 * delta - 0.03;
      pass = pass && ok;
      detail += to_string(regime) + "@" + fmt(delta) + "=" + fmt(p.coverage_fraction) + " ";
    }
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 120.0, detail + "seconds=" + fmt(secs)};
}

// 6. Noiseless false alarms, P_D monotonicity and the noncentral CDF.
Outcome detection() {
  const auto t0 = Clock::now();
  std::size_t alarms = 0;
  const KSModel model(random_gaussian_subspace(100, 10, 61), random_gaussian_subspace(100, 10, 62));
  const auto y = make_signal(SignalCase::InD, model, 63);
  Rng rng(64);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 10 + rng.uniform_below(91);
    const auto p = t % 2 == 0 ? sample_intersection(100, 100, k, k, rng) : sample_union(100, 100, k, k, rng);
    alarms += detect_noiseless(residual(y, model, p)).decision == Hypothesis::H1;
  }

  const double dof = 100.0;
  const double eta = central_chisq_quantile(0.95, dof);
  bool increasing = true;
  double prev = -1.0;
  for (int i = 0; i < 40; ++i) {
    const double pd = detection_probability(0.5 * i, dof, eta);
    increasing = increasing && pd > prev;
    prev = pd;
  }

  struct Spot {
    double x;
    int dof;
    double lambda;
  };
  const Spot spots[] = {{10.0, 4, 3.0}, {5.0, 2, 1.0}, {30.0, 10, 15.0}, {3.0, 1, 0.5}, {12.0, 6, 8.0}};
  double worst = 0.0;
  std::uint64_t seed = 600;
  for (const auto& s : spots) {
    const double sim = oracle::simulated_noncentral_chisq_cdf(s.x, s.dof, s.lambda, 1000000, seed++);
    worst = std::max(worst, std::abs(noncentral_chisq_cdf(s.x, s.dof, s.lambda) - sim));
  }
  const double secs = seconds_since(t0);
  return {alarms == 0 && increasing && worst <= 0.0015 && secs < 60.0,
          "false_alarms=" + std::to_string(alarms) + " pd_increasing=" + (increasing ? "true" : "false") +
              " max_cdf_gap=" + fmt(worst) + " seconds=" + fmt(secs)};
}

// 7. Square incoherent lower coefficient is non-positive when nm > k^2.
Outcome incoherent_sign() {
  const auto t0 = Clock::now();
  std::size_t checked = 0, violations = 0;
  for (std::size_t m = 1; m <= 50; ++m)
    for (std::size_t n = 1; n <= m; ++n)
      for (std::size_t k = 1; k <= m; ++k)
        if (n * m > k * k) {
          ++checked;
          violations += incoherent_lower_bound(m, n, k) > 0.0;
        }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 5.0, "cases=" + std::to_string(checked) + " violations=" +
                                             std::to_string(violations) + " seconds=" + fmt(secs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. Byte-identical simulate output across runs and thread counts.
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("kssd_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto prefix = [&](const char* tag) { return (dir / tag).string(); };
  const std::vector<std::string> base = {"simulate", "--preset", "fast", "--case",  "all",
                                         "--regime", "both",     "--seed", "7",      "--delta",
                                         "0.1"};
  std::ostringstream sink;
  int rc = 0;
  for (auto [tag, threads] : {std::pair{"a", "1"}, std::pair{"b", "1"}, std::pair{"c", "8"}}) {
    auto args = base;
    args.insert(args.end(), {"--threads", threads, "--out", prefix(tag)});
    rc |= cli::run(args, sink, sink);
  }
  std::size_t files = 0, mismatches = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("a_", 0) != 0 || entry.path().extension() != ".csv") continue;
    ++files;
    const std::string first = slurp(entry.path());
    const std::string rest = name.substr(2);
    mismatches += first != slurp(dir / ("b_" + rest));
    mismatches += first != slurp(dir / ("c_" + rest));
  }
  fs::remove_all(dir);
  return {rc == 0 && files > 0 && mismatches == 0,
          "exit=" + std::to_string(rc) + " csv_files=" + std::to_string(files) +
              " mismatches=" + std::to_string(mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 kronecker_coherence_product_rule", product_rule},
      {"2 intersection_residual_oracle", detector_oracle},
      {"3 residual_sweep_zero_and_positive", sweep_reproduction},
      {"4 observed_energy_expectations", expectations},
      {"5 bound_coverage", coverage},
      {"6 detection_tests", detection},
      {"7 incoherent_lower_bound_sign", incoherent_sign},
      {"8 simulate_determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
