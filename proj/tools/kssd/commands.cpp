#include "kssd/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "kssd/bounds.hpp"
#include "kssd/chisq.hpp"
#include "kssd/detector.hpp"
#include "kssd/errors.hpp"
#include "kssd/manifest.hpp"
#include "kssd/matrix_io.hpp"
#include "kssd/sampling.hpp"
#include "kssd/subspace.hpp"

namespace kssd::cli {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kDirectCoherenceLimit = 10000;
constexpr double kZeroResidual = 1e-9;
constexpr double kCoverageSlack = 0.03;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

[[noreturn]] void rethrow_with_path(const ParseError& e, const fs::path& path) {
  throw ParseError(path.string() + ":" + std::to_string(e.line()) + ":" +
                       std::to_string(e.column()) + ": " + e.what(),
                   e.line(), e.column());
}

DenseMatrix load_matrix(const fs::path& path) {
  std::istringstream in(read_text(path));
  try {
    return read_matrix_csv(in);
  } catch (const ParseError& e) {
    rethrow_with_path(e, path);
  }
}

// A mask file is either a 0/1 grid or the two-line rows:/cols: form.
SamplingPattern load_mask(const fs::path& path, std::size_t m1, std::size_t m2) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  try {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text.compare(first, 5, "rows:") == 0 ||
                                       text.compare(first, 5, "cols:") == 0)) {
      return read_intersection_pattern(in, m1, m2);
    }
    return read_mask_csv(in);
  } catch (const ParseError& e) {
    rethrow_with_path(e, path);
  }
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw InvalidArgument("config field '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::pair<std::size_t, std::size_t>> parse_grid(const std::string& key,
                                                            const std::string& text) {
  // "10x10;15x20" or "10;15" (square points).
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto x = item.find('x');
    if (x == std::string::npos) {
      const auto k = parse_number<std::size_t>(key, item);
      grid.emplace_back(k, k);
    } else {
      grid.emplace_back(parse_number<std::size_t>(key, trim(item.substr(0, x))),
                        parse_number<std::size_t>(key, trim(item.substr(x + 1))));
    }
  }
  if (grid.empty()) throw InvalidArgument("config field '" + key + "': empty grid");
  return grid;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << contents;
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

// Human report to stdout; with --out also to <out>.txt. The manifest goes to
// <out>.manifest, or to stdout after the report when there is no --out.
void emit(std::ostream& out, const std::string& report, const RunManifest& manifest,
          const std::string& prefix, const std::string& report_suffix = ".txt") {
  out << report;
  std::ostringstream m;
  manifest.write(m);
  if (prefix.empty()) {
    out << "# manifest\n" << m.str();
  } else {
    write_file(prefix + report_suffix, report);
    write_file(prefix + ".manifest", m.str());
  }
}

RunManifest new_manifest(const std::string& name) {
  RunManifest m;
  m.subcommand = name;
  m.version = version();
  return m;
}

// ---------------------------------------------------------------- coherence

struct CoherenceArgs {
  std::vector<std::string> files;
  std::string out;
};

int cmd_coherence(const CoherenceArgs& a, std::ostream& out) {
  RunManifest manifest = new_manifest("coherence");
  std::ostringstream report;
  const Subspace sa(load_matrix(a.files[0]));
  manifest.add_input(a.files[0]);
  report << "m1=" << sa.ambient_dim() << "\nn1=" << sa.dim() << "\nmu_a=" << format_real(sa.coherence())
         << '\n';
  if (a.files.size() == 2) {
    const Subspace sb(load_matrix(a.files[1]));
    manifest.add_input(a.files[1]);
    report << "m2=" << sb.ambient_dim() << "\nn2=" << sb.dim()
           << "\nmu_b=" << format_real(sb.coherence()) << '\n';
    const KSModel model(sa, sb);
    const double product = ks_coherence(model);
    report << "mu_kron=" << format_real(product) << '\n';
    if (model.m1() * model.m2() <= kDirectCoherenceLimit) {
      const double direct = ks_coherence_direct(model);
      report << "mu_kron_direct=" << format_real(direct) << '\n'
             << "product_rule_relative_gap=" << format_real(std::abs(direct - product) / product) << '\n';
    } else {
      report << "mu_kron_direct=skipped (m1*m2 > " << kDirectCoherenceLimit << ")\n";
    }
  }
  manifest.params["files"] = std::to_string(a.files.size());
  emit(out, report.str(), manifest, a.out);
  return kExitOk;
}

// ------------------------------------------------------------------- detect

struct DetectArgs {
  std::string signal, basis_a, basis_b, mask;
  std::string rows, cols;
  std::optional<double> eta;
  bool noisy = false;
  std::optional<double> variance;
  double pfa = 0.05;
  std::optional<double> dof;
  std::optional<double> delta;
  bool as_written = false;
  std::string out;
};

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  RunManifest manifest = new_manifest("detect");
  const DenseMatrix y = load_matrix(a.signal);
  manifest.add_input(a.signal);
  const KSModel model(Subspace(load_matrix(a.basis_a)), Subspace(load_matrix(a.basis_b)));
  manifest.add_input(a.basis_a);
  manifest.add_input(a.basis_b);

  std::optional<SamplingPattern> pattern;
  if (!a.mask.empty()) {
    if (!a.rows.empty() || !a.cols.empty()) throw InvalidArgument("give either a mask file or --rows/--cols");
    pattern.emplace(load_mask(a.mask, y.rows(), y.cols()));
    manifest.add_input(a.mask);
  } else if (!a.rows.empty() && !a.cols.empty()) {
    pattern.emplace(SamplingPattern::intersection(y.rows(), y.cols(), parse_index_list(a.rows),
                                                  parse_index_list(a.cols)));
    manifest.params["rows"] = a.rows;
    manifest.params["cols"] = a.cols;
  } else {
    throw InvalidArgument("a mask file or both --rows and --cols are required");
  }
  if (pattern->m1() != y.rows() || pattern->m2() != y.cols()) {
    throw DimensionError("mask is " + std::to_string(pattern->m1()) + "x" + std::to_string(pattern->m2()) +
                         " but the signal is " + std::to_string(y.rows()) + "x" +
                         std::to_string(y.cols()));
  }

  const ResidualResult r = residual(y, model, *pattern);
  std::ostringstream report;
  DetectionOutcome outcome;
  if (a.noisy) {
    if (!a.variance) throw InvalidArgument("--noisy needs --variance");
    const NoiseModel noise(*a.variance);
    const double dof = a.dof.value_or(residual_dof(model, r.counts, pattern->kind()));
    if (!(dof > 0.0)) throw InvalidArgument("noisy test needs positive degrees of freedom");
    const double eta = a.eta ? *a.eta : central_chisq_quantile(1.0 - a.pfa, dof);
    outcome = {r.residual_energy / noise.variance(), eta,
               r.residual_energy / noise.variance() <= eta ? Hypothesis::H0 : Hypothesis::H1};
    report << "mode=noisy\nvariance=" << format_real(noise.variance()) << "\ndof=" << format_real(dof)
           << '\n';
    if (!a.eta) report << "pfa=" << format_real(a.pfa) << '\n';
    manifest.params["variance"] = format_real(noise.variance());
    manifest.params["dof"] = format_real(dof);
    manifest.params["pfa"] = format_real(a.pfa);
  } else {
    outcome = detect_noiseless(r, a.eta);
    report << "mode=noiseless\n";
  }
  report << "statistic=" << format_real(outcome.statistic) << "\neta=" << format_real(outcome.threshold)
         << "\ndecision=" << (outcome.decision == Hypothesis::H0 ? "H0" : "H1")
         << "\nresidual_energy=" << format_real(r.residual_energy)
         << "\nobserved_energy=" << format_real(r.observed_energy)
         << "\nfull_residual_energy=" << format_real(r.full_residual_energy)
         << "\npattern=" << (pattern->kind() == PatternKind::Intersection ? "intersection" : "discrete")
         << "\nk1=" << r.counts.k1 << "\nk2=" << r.counts.k2
         << "\nobserved_cells=" << r.counts.observed_cells << '\n';
  if (pattern->kind() == PatternKind::Discrete && counts_diverge(*pattern, r.counts)) {
    report << "warning=derived (k1, k2) summarize this mask poorly\n";
  }
  if (a.eta) manifest.params["eta"] = format_real(*a.eta);

  if (a.delta) {
    manifest.params["delta"] = format_real(*a.delta);
    BoundInputs b;
    b.m1 = model.m1();
    b.m2 = model.m2();
    b.n1 = model.n1();
    b.n2 = model.n2();
    b.k1 = r.counts.k1;
    b.k2 = r.counts.k2;
    b.mu_a = model.row_space.coherence();
    b.mu_b = model.col_space.coherence();
    b.mu_y = signal_coherence(y);
    b.delta = *a.delta;
    b.full_residual_energy = r.full_residual_energy;
    b.signal_energy = frobenius_norm_sq(y);
    const Regime regime = pattern->kind() == PatternKind::Intersection ? Regime::Intersection : Regime::Union;
    if (b.k1 < b.n1 || b.k2 < b.n2) {
      report << "bounds=unavailable (derived counts below subspace dimensions)\n";
    } else {
      report << to_key_value(evaluate_bounds(
          regime, b, a.as_written ? FormulaMode::AsWritten : FormulaMode::Corrected));
    }
  }
  manifest.params["noisy"] = yes_no(a.noisy);
  emit(out, report.str(), manifest, a.out);
  return outcome.decision == Hypothesis::H0 ? kExitOk : kExitH1;
}

// ------------------------------------------------------------------- bounds

struct BoundsArgs {
  std::vector<std::size_t> dims;    // m1 m2 n1 n2
  std::vector<std::size_t> counts;  // k1 k2
  std::vector<double> mu;           // mu_a mu_b mu_y
  std::vector<double> energy;       // full residual [, signal]
  std::vector<std::string> from_files;  // signal basis_a basis_b
  double delta = 0.05;
  std::string regime = "intersection";
  bool as_written = false;
  bool csv = false;
  std::string out;
};

int cmd_bounds(const BoundsArgs& a, std::ostream& out) {
  RunManifest manifest = new_manifest("bounds");
  BoundInputs b;
  b.delta = a.delta;
  if (a.counts.size() != 2) throw InvalidArgument("--counts needs k1,k2");
  b.k1 = a.counts[0];
  b.k2 = a.counts[1];
  if (!a.from_files.empty()) {
    if (a.from_files.size() != 3) throw InvalidArgument("--from-files needs signal,basis_a,basis_b");
    const DenseMatrix y = load_matrix(a.from_files[0]);
    const KSModel model(Subspace(load_matrix(a.from_files[1])), Subspace(load_matrix(a.from_files[2])));
    for (const auto& f : a.from_files) manifest.add_input(f);
    if (y.rows() != model.m1() || y.cols() != model.m2()) {
      throw DimensionError("signal shape does not match the bases");
    }
    b.m1 = model.m1();
    b.m2 = model.m2();
    b.n1 = model.n1();
    b.n2 = model.n2();
    b.mu_a = model.row_space.coherence();
    b.mu_b = model.col_space.coherence();
    b.mu_y = signal_coherence(y);
    b.full_residual_energy = full_residual(y, model);
    b.signal_energy = frobenius_norm_sq(y);
  } else {
    if (a.dims.size() != 4) throw InvalidArgument("--dims needs m1,m2,n1,n2");
    if (a.mu.size() != 3) throw InvalidArgument("--mu needs mu_a,mu_b,mu_y");
    b.m1 = a.dims[0];
    b.m2 = a.dims[1];
    b.n1 = a.dims[2];
    b.n2 = a.dims[3];
    b.mu_a = a.mu[0];
    b.mu_b = a.mu[1];
    b.mu_y = a.mu[2];
    b.full_residual_energy = a.energy.empty() ? 1.0 : a.energy[0];
    b.signal_energy = a.energy.size() > 1 ? a.energy[1] : b.full_residual_energy;
    if (a.energy.size() > 2) throw InvalidArgument("--energy takes at most two values");
  }
  const Regime regime = parse_regime(a.regime);
  const FormulaMode mode = a.as_written ? FormulaMode::AsWritten : FormulaMode::Corrected;
  const BoundReport r = evaluate_bounds(regime, b, mode);

  std::ostringstream report;
  report << "m1=" << b.m1 << "\nm2=" << b.m2 << "\nn1=" << b.n1 << "\nn2=" << b.n2 << "\nk1=" << b.k1
         << "\nk2=" << b.k2 << "\nmu_a=" << format_real(b.mu_a) << "\nmu_b=" << format_real(b.mu_b)
         << "\nmu_y=" << format_real(b.mu_y) << "\ndelta=" << format_real(b.delta)
         << "\nformula=" << (a.as_written ? "as-written" : "corrected")
         << "\nmin_samples_k1=" << min_samples(b.n1, b.mu_a, b.delta)
         << "\nmin_samples_k2=" << min_samples(b.n2, b.mu_b, b.delta) << '\n'
         << to_key_value(r);
  if (a.csv) report << bound_csv_header() << '\n' << to_csv_row(r) << '\n';

  manifest.params["regime"] = to_string(regime);
  manifest.params["delta"] = format_real(b.delta);
  manifest.params["formula"] = a.as_written ? "as-written" : "corrected";
  manifest.params["k1"] = std::to_string(b.k1);
  manifest.params["k2"] = std::to_string(b.k2);
  if (a.from_files.empty()) {
    manifest.params["dims"] = std::to_string(b.m1) + "," + std::to_string(b.m2) + "," +
                              std::to_string(b.n1) + "," + std::to_string(b.n2);
    manifest.params["mu"] = format_real(b.mu_a) + "," + format_real(b.mu_b) + "," + format_real(b.mu_y);
  }
  if (!a.out.empty()) write_file(a.out + ".csv", bound_csv_header() + "\n" + to_csv_row(r) + "\n");
  emit(out, report.str(), manifest, a.out);
  return kExitOk;
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string preset = "full";
  std::string config;
  std::string signal_case = "dperp";
  std::string regime = "intersection";
  std::string mode = "sweep";
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::size_t threads = 1;
  std::string basis;
  std::size_t exp_trials = 0;
  bool as_written = false;
  bool resample_signal = false;
  std::string out = "kssd-simulate";
  // Which flags were given explicitly (they override the config file).
  CLI::Option* trials_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* basis_opt = nullptr;
  CLI::Option* case_opt = nullptr;
  CLI::Option* regime_opt = nullptr;
};

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "full") {
    cfg.m1 = cfg.m2 = 100;
    cfg.n1 = cfg.n2 = 10;
    cfg.trials = 1000;
  } else if (name == "fast") {
    cfg.m1 = cfg.m2 = 40;
    cfg.n1 = cfg.n2 = 5;
    cfg.trials = 200;
  } else {
    throw InvalidArgument("unknown preset '" + name + "' (expected full or fast)");
  }
  return cfg;
}

struct CheckLine {
  bool pass;
  std::string text;
};

std::vector<CheckLine> sweep_checks(const SweepResult& s) {
  const auto& cfg = s.config;
  const std::string tag = "case=" + to_string(cfg.signal_case) + " regime=" + to_string(cfg.regime);
  std::vector<CheckLine> lines;
  if (cfg.signal_case == SignalCase::InD) {
    double worst = 0.0;
    std::size_t points = 0;
    for (const auto& p : s.points) {
      if (p.undersampled) continue;
      ++points;
      worst = std::max(worst, p.max);
    }
    lines.push_back({points > 0 && worst <= kZeroResidual,
                     "zero_residual " + tag + " points=" + std::to_string(points) +
                         " max_residual=" + format_real(worst)});
  } else {
    const double f1 = positivity_floor(cfg.n1, s.mu_a);
    const double f2 = positivity_floor(cfg.n2, s.mu_b);
    std::size_t points = 0;
    double worst = 1.0;
    for (const auto& p : s.points) {
      if (p.undersampled || static_cast<double>(p.k1) < f1 || static_cast<double>(p.k2) < f2) continue;
      ++points;
      worst = std::min(worst, p.positive_fraction);
    }
    lines.push_back({points > 0 && worst == 1.0,
                     "positive_residual " + tag + " points=" + std::to_string(points) +
                         " min_positive_fraction=" + format_real(worst)});
  }
  if (cfg.delta) {
    const std::size_t ms1 = min_samples(cfg.n1, s.mu_a, *cfg.delta);
    const std::size_t ms2 = min_samples(cfg.n2, s.mu_b, *cfg.delta);
    const double target = 1.0 - 8.0 * *cfg.delta - kCoverageSlack;
    std::size_t points = 0;
    double worst = 1.0;
    for (const auto& p : s.points) {
      if (p.undersampled || p.k1 < ms1 || p.k2 < ms2) continue;
      ++points;
      worst = std::min(worst, p.coverage_fraction);
    }
    if (points == 0) {
      lines.push_back({true, "coverage " + tag + " skipped: no grid point reaches min_samples (" +
                                 std::to_string(ms1) + ", " + std::to_string(ms2) + ")"});
    } else {
      lines.push_back({worst >= target, "coverage " + tag + " points=" + std::to_string(points) +
                                            " min_coverage=" + format_real(worst) +
                                            " target=" + format_real(target)});
    }
  }
  return lines;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  RunManifest manifest = new_manifest("simulate");
  ExperimentConfig cfg = preset_config(a.preset);
  std::string cases = a.signal_case;
  std::string regimes = a.regime;
  if (!a.config.empty()) {
    std::istringstream in(read_text(a.config));
    // case/regime may be "all"/"both" in the file, so pull them out first.
    std::ostringstream rest;
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
      if (key == "case" && !a.case_opt->count()) {
        cases = trim(line.substr(eq + 1));
      } else if (key == "regime" && !a.regime_opt->count()) {
        regimes = trim(line.substr(eq + 1));
      } else if (key != "case" && key != "regime") {
        rest << line << '\n';
      }
    }
    std::istringstream body(rest.str());
    apply_config_text(cfg, body);
    manifest.add_input(a.config);
  }
  if (a.trials_opt->count()) cfg.trials = a.trials;
  if (a.seed_opt->count()) cfg.seed = a.seed;
  if (a.delta_opt->count()) cfg.delta = a.delta;
  if (a.basis_opt->count()) cfg.basis = parse_basis(a.basis);
  if (a.as_written) cfg.formula_mode = FormulaMode::AsWritten;
  if (a.resample_signal) cfg.resample_signal = true;
  cfg.threads = std::max<std::size_t>(1, a.threads);
  if (cfg.trials == 0) throw InvalidArgument("config field 'trials': must be at least 1");

  std::vector<SignalCase> case_list;
  if (lower(cases) == "all") {
    case_list = {SignalCase::InDperp, SignalCase::InAperpB, SignalCase::InABperp, SignalCase::InD};
  } else {
    case_list = {parse_signal_case(cases)};
  }
  std::vector<Regime> regime_list;
  if (lower(regimes) == "both") {
    regime_list = {Regime::Intersection, Regime::Union};
  } else {
    regime_list = {parse_regime(regimes)};
  }
  if (a.mode != "sweep" && a.mode != "expectations" && a.mode != "both") {
    throw InvalidArgument("--mode must be sweep, expectations or both");
  }

  std::ostringstream config_text;
  config_text << "preset=" << a.preset << '\n' << describe(cfg) << "cases=";
  for (std::size_t i = 0; i < case_list.size(); ++i) config_text << (i ? "," : "") << to_string(case_list[i]);
  config_text << "\nregimes=";
  for (std::size_t i = 0; i < regime_list.size(); ++i) config_text << (i ? "," : "") << to_string(regime_list[i]);
  config_text << "\nmode=" << a.mode << '\n';

  std::vector<CheckLine> checks;
  if (a.mode != "expectations") {
    for (const Regime regime : regime_list) {
      for (const SignalCase c : case_list) {
        ExperimentConfig run = cfg;
        run.regime = regime;
        run.signal_case = c;
        const SweepResult result = run_residual_sweep(run);
        std::ostringstream csv;
        write_sweep_csv(csv, result);
        const std::string path = a.out + "_" + to_string(c) + "_" + to_string(regime) + ".csv";
        write_file(path, csv.str());
        out << "wrote " << path << " (mu_a=" << format_real(result.mu_a)
            << " mu_b=" << format_real(result.mu_b) << " threshold=" << format_real(result.threshold)
            << ")\n";
        if (run.k_grid.empty()) {
          config_text << "k_grid." << to_string(c) << '.' << to_string(regime) << '=';
          for (std::size_t g = 0; g < result.config.k_grid.size(); ++g) {
            config_text << (g ? ";" : "") << result.config.k_grid[g].first << 'x'
                        << result.config.k_grid[g].second;
          }
          config_text << '\n';
        }
        for (auto& line : sweep_checks(result)) checks.push_back(std::move(line));
      }
    }
  }
  if (a.mode != "sweep") {
    ExpectationConfig ec;
    ec.seed = cfg.seed;
    ec.basis = cfg.basis;
    ec.threads = cfg.threads;
    if (a.exp_trials) ec.trials = a.exp_trials;
    const auto results = validate_expectations(ec);
    std::ostringstream csv;
    write_expectations_csv(csv, results);
    const std::string path = a.out + "_expectations.csv";
    write_file(path, csv.str());
    out << "wrote " << path << '\n';
    config_text << "expectation_trials=" << ec.trials << '\n';
    for (const auto& r : results) {
      checks.push_back({r.passed, "expectation " + r.name + " estimate=" + format_real(r.estimate) +
                                      " reference=" + format_real(r.reference) +
                                      " ratio=" + format_real(r.ratio)});
    }
  }
  write_file(a.out + ".config", config_text.str());

  for (const auto& c : checks) out << (c.pass ? "PASS " : "FAIL ") << c.text << '\n';

  manifest.seed = cfg.seed;
  manifest.params["preset"] = a.preset;
  manifest.params["cases"] = cases;
  manifest.params["regimes"] = regimes;
  manifest.params["trials"] = std::to_string(cfg.trials);
  manifest.params["threads"] = std::to_string(cfg.threads);
  manifest.params["basis"] = to_string(cfg.basis);
  manifest.params["mode"] = a.mode;
  manifest.params["delta"] = cfg.delta ? format_real(*cfg.delta) : "none";
  manifest.params["out"] = a.out;
  std::ostringstream m;
  manifest.write(m);
  write_file(a.out + ".manifest", m.str());
  return kExitOk;
}

}  // namespace

std::string version() { return KSSD_VERSION; }

SignalCase parse_signal_case(const std::string& text) {
  const std::string t = lower(text);
  if (t == "ind" || t == "d") return SignalCase::InD;
  if (t == "aperpb") return SignalCase::InAperpB;
  if (t == "abperp") return SignalCase::InABperp;
  if (t == "dperp") return SignalCase::InDperp;
  throw InvalidArgument("config field 'case': unknown signal case '" + text +
                        "' (expected ind, aperpb, abperp, dperp)");
}

Regime parse_regime(const std::string& text) {
  const std::string t = lower(text);
  if (t == "intersection") return Regime::Intersection;
  if (t == "union" || t == "discrete") return Regime::Union;
  throw InvalidArgument("config field 'regime': unknown regime '" + text +
                        "' (expected intersection, union or discrete)");
}

BasisKind parse_basis(const std::string& text) {
  const std::string t = lower(text);
  if (t == "gaussian") return BasisKind::Gaussian;
  if (t == "hadamard") return BasisKind::Hadamard;
  throw InvalidArgument("config field 'basis': unknown basis '" + text + "' (expected gaussian or hadamard)");
}

void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "m1") cfg.m1 = parse_number<std::size_t>(key, value);
  else if (key == "m2") cfg.m2 = parse_number<std::size_t>(key, value);
  else if (key == "m") cfg.m1 = cfg.m2 = parse_number<std::size_t>(key, value);
  else if (key == "n1") cfg.n1 = parse_number<std::size_t>(key, value);
  else if (key == "n2") cfg.n2 = parse_number<std::size_t>(key, value);
  else if (key == "n") cfg.n1 = cfg.n2 = parse_number<std::size_t>(key, value);
  else if (key == "trials") cfg.trials = parse_number<std::size_t>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "threads") cfg.threads = parse_number<std::size_t>(key, value);
  else if (key == "case") cfg.signal_case = parse_signal_case(value);
  else if (key == "regime") cfg.regime = parse_regime(value);
  else if (key == "basis") cfg.basis = parse_basis(value);
  else if (key == "k_grid") cfg.k_grid = parse_grid(key, value);
  else if (key == "delta") {
    if (lower(value) == "none") {
      cfg.delta.reset();
    } else {
      const double d = parse_number<double>(key, value);
      if (!(d > 0.0 && d < 1.0)) throw InvalidArgument("config field 'delta': must lie in (0, 1)");
      cfg.delta = d;
    }
  } else if (key == "formula") {
    const std::string t = lower(value);
    if (t == "corrected") cfg.formula_mode = FormulaMode::Corrected;
    else if (t == "as-written" || t == "as_written") cfg.formula_mode = FormulaMode::AsWritten;
    else throw InvalidArgument("config field 'formula': expected corrected or as-written");
  } else if (key == "resample_signal") {
    const std::string t = lower(value);
    if (t == "true" || t == "1") cfg.resample_signal = true;
    else if (t == "false" || t == "0") cfg.resample_signal = false;
    else throw InvalidArgument("config field 'resample_signal': expected true or false");
  } else {
    throw InvalidArgument("config field '" + key + "': unknown key");
  }
}

void apply_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key=value", line_no, 1);
    }
    apply_config_value(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  if (cfg.trials == 0) throw InvalidArgument("config field 'trials': must be at least 1");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kronecker-structured subspace detection from partial observations", "kssd"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  CoherenceArgs coh;
  auto* sub_coh = app.add_subcommand("coherence", "Coherence of one basis, or of A (x) B for two");
  sub_coh->add_option("basis", coh.files, "Basis CSV file(s)")->required()->expected(1, 2);
  sub_coh->add_option("--out", coh.out, "Output prefix for <out>.txt and <out>.manifest");

  DetectArgs det;
  auto* sub_det = app.add_subcommand("detect", "Residual-energy test of a partially observed signal");
  sub_det->add_option("signal", det.signal, "Signal CSV (m1 x m2)")->required();
  sub_det->add_option("basis_a", det.basis_a, "Row-space basis CSV (m1 x n1)")->required();
  sub_det->add_option("basis_b", det.basis_b, "Column-space basis CSV (m2 x n2)")->required();
  sub_det->add_option("mask", det.mask, "Mask file: 0/1 grid or rows:/cols: lines");
  sub_det->add_option("--rows", det.rows, "Observed rows, e.g. 0,3,7");
  sub_det->add_option("--cols", det.cols, "Observed columns");
  sub_det->add_option("--eta", det.eta, "Threshold (default: noiseless floor, or chi-square quantile)");
  sub_det->add_flag("--noisy", det.noisy, "Noisy test: statistic = residual / variance");
  sub_det->add_option("--variance", det.variance, "Noise variance for --noisy");
  sub_det->add_option("--pfa", det.pfa, "False-alarm rate for the default noisy threshold")->capture_default_str();
  sub_det->add_option("--dof", det.dof, "Degrees of freedom for the default noisy threshold");
  sub_det->add_option("--delta", det.delta, "Also print the matching bound report");
  sub_det->add_flag("--as-written", det.as_written, "Use the verbatim beta/gamma2 forms");
  sub_det->add_option("--out", det.out, "Output prefix for <out>.txt and <out>.manifest");

  BoundsArgs bnd;
  auto* sub_bnd = app.add_subcommand("bounds", "Evaluate the residual-energy bounds");
  sub_bnd->add_option("--dims", bnd.dims, "m1,m2,n1,n2")->delimiter(',')->expected(4);
  sub_bnd->add_option("--counts", bnd.counts, "k1,k2")->delimiter(',')->expected(2)->required();
  sub_bnd->add_option("--mu", bnd.mu, "mu_a,mu_b,mu_y")->delimiter(',')->expected(3);
  sub_bnd->add_option("--energy", bnd.energy, "Full residual energy [,signal energy] (default 1)")
      ->delimiter(',')
      ->expected(1, 2);
  sub_bnd->add_option("--from-files", bnd.from_files, "signal,basis_a,basis_b")->delimiter(',')->expected(3);
  sub_bnd->add_option("--delta", bnd.delta, "Failure probability parameter")->required();
  sub_bnd->add_option("--regime", bnd.regime, "intersection, union or discrete")->capture_default_str();
  sub_bnd->add_flag("--as-written", bnd.as_written, "Use the verbatim beta/gamma2 forms");
  sub_bnd->add_flag("--csv", bnd.csv, "Also print the CSV header and row");
  sub_bnd->add_option("--out", bnd.out, "Output prefix for <out>.txt, <out>.csv and <out>.manifest");

  SimulateArgs sim;
  auto* sub_sim = app.add_subcommand("simulate", "Monte Carlo residual sweeps and expectation checks");
  sub_sim->add_option("--preset", sim.preset, "full (m=100, n=10, 1000 trials) or fast (m=40, n=5, 200)")
      ->capture_default_str();
  sub_sim->add_option("--config", sim.config, "key=value file overriding the preset");
  sim.case_opt = sub_sim->add_option("--case", sim.signal_case, "ind, aperpb, abperp, dperp or all")
                     ->capture_default_str();
  sim.regime_opt = sub_sim->add_option("--regime", sim.regime, "intersection, union/discrete or both")
                       ->capture_default_str();
  sub_sim->add_option("--mode", sim.mode, "sweep, expectations or both")->capture_default_str();
  sim.trials_opt = sub_sim->add_option("--trials", sim.trials, "Masks per grid point");
  sim.seed_opt = sub_sim->add_option("--seed", sim.seed, "Base seed (default 0)");
  sim.delta_opt = sub_sim->add_option("--delta", sim.delta, "Check bound coverage at this delta");
  sim.basis_opt = sub_sim->add_option("--basis", sim.basis, "gaussian or hadamard");
  sub_sim->add_option("--threads", sim.threads, "Worker threads (output does not depend on it)")
      ->capture_default_str();
  sub_sim->add_option("--expectation-trials", sim.exp_trials, "Trials for --mode expectations");
  sub_sim->add_flag("--as-written", sim.as_written, "Use the verbatim beta/gamma2 forms");
  sub_sim->add_flag("--resample-signal", sim.resample_signal, "Draw a fresh signal per trial");
  sub_sim->add_option("--out", sim.out, "Output prefix")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  try {
    if (sub_coh->parsed()) return cmd_coherence(coh, out);
    if (sub_det->parsed()) return cmd_detect(det, out);
    if (sub_bnd->parsed()) return cmd_bounds(bnd, out);
    if (sub_sim->parsed()) return cmd_simulate(sim, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SingularityError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DegenerateSignalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace kssd::cli
