#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kssd/dense_matrix.hpp"

namespace kssd {

// Matrix text format: one matrix row per line, comma-separated reals, no
// header. Blank lines are ignored. Writers emit the shortest round-trip form so a
// written matrix re-parses to identical doubles.

/// Parse CSV text. Throws ParseError carrying the 1-based line and column.
DenseMatrix read_matrix_csv(std::istream& in);
DenseMatrix read_matrix_file(const std::filesystem::path& path);

void write_matrix_csv(std::ostream& out, const DenseMatrix& m);
void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m);

/// Raw numeric grid before any DenseMatrix invariants are applied.
std::vector<std::vector<double>> read_numeric_grid(std::istream& in);

/// Shortest decimal rendering that re-parses to the same double.
std::string format_real(double value);

}  // namespace kssd
