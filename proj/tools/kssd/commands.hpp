#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kssd/montecarlo.hpp"

namespace kssd::cli {

/// Exit statuses shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,  // success, or decision H0
  kExitH1 = 10,
  kExitInput = 2,      // unreadable/malformed input, bad flags
  kExitNumerical = 3,  // rank deficiency, undersampling, degenerate signal
};

std::string version();

/// Entry point for `kssd`. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies one simulate config key (m1, n, trials, case, k_grid, ...) to cfg.
/// Throws InvalidArgument naming the field on bad values.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads key=value lines ('#' comments, blank lines ignored) into cfg.
void apply_config_text(ExperimentConfig& cfg, std::istream& in);

SignalCase parse_signal_case(const std::string& text);
Regime parse_regime(const std::string& text);
BasisKind parse_basis(const std::string& text);

}  // namespace kssd::cli
