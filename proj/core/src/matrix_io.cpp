#include "kssd/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "kssd/errors.hpp"

namespace kssd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::vector<double>> read_numeric_grid(std::istream& in) {
  std::vector<std::vector<double>> grid;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t column = 1;
    while (true) {
      const auto comma = line.find(',', start);
      const auto field_raw = std::string_view(line).substr(
          start, comma == std::string::npos ? std::string::npos : comma - start);
      const auto field = trim(field_raw);
      if (field.empty()) {
        throw ParseError("empty field at line " + std::to_string(line_no) + ", column " +
                             std::to_string(column),
                         line_no, column);
      }
      double value = 0.0;
      const char* begin = field.data();
      const char* end = field.data() + field.size();
      if (*begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError("invalid number '" + std::string(field) + "' at line " +
                             std::to_string(line_no) + ", column " + std::to_string(column),
                         line_no, column);
      }
      row.push_back(value);
      if (comma == std::string::npos) break;
      start = comma + 1;
      ++column;
    }
    if (!grid.empty() && row.size() != grid.front().size()) {
      throw ParseError("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                           " fields, expected " + std::to_string(grid.front().size()),
                       line_no, row.size());
    }
    grid.push_back(std::move(row));
  }
  if (grid.empty()) throw ParseError("no matrix rows found", 0, 0);
  return grid;
}

DenseMatrix read_matrix_csv(std::istream& in) {
  const auto grid = read_numeric_grid(in);
  const std::size_t rows = grid.size();
  const std::size_t cols = grid.front().size();
  std::vector<double> flat;
  flat.reserve(rows * cols);
  for (const auto& row : grid) flat.insert(flat.end(), row.begin(), row.end());
  return DenseMatrix::from_row_major(rows, cols, flat);
}

DenseMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0, 0);
  try {
    return read_matrix_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
  }
}

std::string format_real(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_matrix_csv(out, m);
}

}  // namespace kssd
