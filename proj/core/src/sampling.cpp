#include "kssd/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "kssd/errors.hpp"
#include "kssd/matrix_io.hpp"
#include "kssd/rng.hpp"

namespace kssd {

namespace {

void validate_indices(const std::vector<std::size_t>& idx, std::size_t bound, const char* what) {
  if (idx.empty()) throw InvalidArgument(std::string(what) + " index set is empty");
  for (std::size_t t = 0; t < idx.size(); ++t) {
    if (idx[t] >= bound) {
      throw InvalidArgument(std::string(what) + " index " + std::to_string(idx[t]) +
                            " out of range [0, " + std::to_string(bound) + ")");
    }
    if (t > 0 && idx[t] <= idx[t - 1]) {
      throw InvalidArgument(std::string(what) + " indices must be strictly increasing");
    }
  }
}

void check_count(std::size_t k, std::size_t m, const char* what) {
  if (k < 1 || k > m) {
    throw InvalidArgument(std::string(what) + " = " + std::to_string(k) + " must lie in [1, " +
                          std::to_string(m) + "]");
  }
}

std::vector<std::size_t> sorted_sample(Rng& rng, std::size_t n, std::size_t k) {
  auto idx = sample_indices(rng, n, k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

SamplingPattern SamplingPattern::intersection(std::size_t m1, std::size_t m2,
                                              std::vector<std::size_t> rows,
                                              std::vector<std::size_t> cols) {
  if (m1 == 0 || m2 == 0) throw DimensionError("signal dimensions must be positive");
  validate_indices(rows, m1, "row");
  validate_indices(cols, m2, "column");
  SamplingPattern p;
  p.kind_ = PatternKind::Intersection;
  p.m1_ = m1;
  p.m2_ = m2;
  p.rows_ = std::move(rows);
  p.cols_ = std::move(cols);
  return p;
}

SamplingPattern SamplingPattern::discrete(std::size_t m1, std::size_t m2, std::vector<bool> mask) {
  if (m1 == 0 || m2 == 0) throw DimensionError("signal dimensions must be positive");
  if (mask.size() != m1 * m2) {
    throw DimensionError("mask has " + std::to_string(mask.size()) + " cells, expected " +
                         std::to_string(m1 * m2));
  }
  if (std::find(mask.begin(), mask.end(), true) == mask.end()) {
    throw InvalidArgument("mask has no observed entries");
  }
  SamplingPattern p;
  p.kind_ = PatternKind::Discrete;
  p.m1_ = m1;
  p.m2_ = m2;
  p.mask_ = std::move(mask);
  return p;
}

SamplingPattern SamplingPattern::union_of(std::size_t m1, std::size_t m2,
                                          std::span<const std::size_t> rows,
                                          std::span<const std::size_t> cols) {
  std::vector<bool> mask(m1 * m2, false);
  for (std::size_t i : rows) {
    if (i >= m1) throw InvalidArgument("row index out of range");
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(i * m2), m2, true);
  }
  for (std::size_t j : cols) {
    if (j >= m2) throw InvalidArgument("column index out of range");
    for (std::size_t i = 0; i < m1; ++i) mask[i * m2 + j] = true;
  }
  return discrete(m1, m2, std::move(mask));
}

SamplingPattern SamplingPattern::full(std::size_t m1, std::size_t m2) {
  return discrete(m1, m2, std::vector<bool>(m1 * m2, true));
}

const std::vector<std::size_t>& SamplingPattern::row_indices() const {
  if (kind_ != PatternKind::Intersection) throw InvalidArgument("not an intersection pattern");
  return rows_;
}

const std::vector<std::size_t>& SamplingPattern::col_indices() const {
  if (kind_ != PatternKind::Intersection) throw InvalidArgument("not an intersection pattern");
  return cols_;
}

bool SamplingPattern::observed(std::size_t i, std::size_t j) const {
  if (i >= m1_ || j >= m2_) throw InvalidArgument("cell index out of range");
  if (kind_ == PatternKind::Discrete) return mask_[i * m2_ + j];
  return std::binary_search(rows_.begin(), rows_.end(), i) &&
         std::binary_search(cols_.begin(), cols_.end(), j);
}

std::vector<bool> SamplingPattern::mask() const {
  if (kind_ == PatternKind::Discrete) return mask_;
  std::vector<bool> out(m1_ * m2_, false);
  for (std::size_t i : rows_)
    for (std::size_t j : cols_) out[i * m2_ + j] = true;
  return out;
}

std::vector<std::size_t> SamplingPattern::observed_cells() const {
  std::vector<std::size_t> cells;
  if (kind_ == PatternKind::Intersection) {
    cells.reserve(rows_.size() * cols_.size());
    for (std::size_t i : rows_)
      for (std::size_t j : cols_) cells.push_back(i * m2_ + j);
    return cells;
  }
  for (std::size_t c = 0; c < mask_.size(); ++c)
    if (mask_[c]) cells.push_back(c);
  return cells;
}

Eigen::MatrixXd SamplingPattern::indicator() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m1_),
                                            static_cast<Eigen::Index>(m2_));
  for (std::size_t c : observed_cells()) {
    m(static_cast<Eigen::Index>(c / m2_), static_cast<Eigen::Index>(c % m2_)) = 1.0;
  }
  return m;
}

SampleCounts derive_counts(const SamplingPattern& p) {
  if (p.kind() == PatternKind::Intersection) {
    const std::size_t k1 = p.row_indices().size();
    const std::size_t k2 = p.col_indices().size();
    return {k1, k2, k1 * k2};
  }
  const auto mask = p.mask();
  std::vector<bool> row_missing(p.m1(), false);
  std::vector<bool> col_missing(p.m2(), false);
  std::size_t observed = 0;
  for (std::size_t i = 0; i < p.m1(); ++i) {
    for (std::size_t j = 0; j < p.m2(); ++j) {
      if (mask[i * p.m2() + j]) {
        ++observed;
      } else {
        row_missing[i] = true;
        col_missing[j] = true;
      }
    }
  }
  const auto missing_rows = static_cast<std::size_t>(std::count(row_missing.begin(), row_missing.end(), true));
  const auto missing_cols = static_cast<std::size_t>(std::count(col_missing.begin(), col_missing.end(), true));
  return {p.m1() - missing_rows, p.m2() - missing_cols, observed};
}

std::size_t union_cell_count(std::size_t m1, std::size_t m2, std::size_t k1, std::size_t k2) {
  return k1 * m2 + k2 * m1 - k1 * k2;
}

bool counts_diverge(const SamplingPattern& p, const SampleCounts& counts) {
  if (p.kind() == PatternKind::Intersection) return false;
  const double expected =
      static_cast<double>(union_cell_count(p.m1(), p.m2(), counts.k1, counts.k2));
  const double actual = static_cast<double>(counts.observed_cells);
  if (expected == 0.0) return actual > 0.0;
  return std::abs(actual - expected) > 0.1 * expected;
}

SamplingPattern sample_intersection(std::size_t m1, std::size_t m2, std::size_t k1,
                                    std::size_t k2, Rng& rng) {
  check_count(k1, m1, "k1");
  check_count(k2, m2, "k2");
  auto rows = sorted_sample(rng, m1, k1);
  auto cols = sorted_sample(rng, m2, k2);
  return SamplingPattern::intersection(m1, m2, std::move(rows), std::move(cols));
}

SamplingPattern sample_intersection(std::size_t m1, std::size_t m2, std::size_t k1,
                                    std::size_t k2, std::uint64_t seed) {
  Rng rng(seed);
  return sample_intersection(m1, m2, k1, k2, rng);
}

SamplingPattern sample_discrete(std::size_t m1, std::size_t m2, std::size_t n_observed, Rng& rng) {
  if (m1 == 0 || m2 == 0) throw DimensionError("signal dimensions must be positive");
  check_count(n_observed, m1 * m2, "n_observed");
  std::vector<bool> mask(m1 * m2, false);
  for (std::size_t c : sample_indices(rng, m1 * m2, n_observed)) mask[c] = true;
  return SamplingPattern::discrete(m1, m2, std::move(mask));
}

SamplingPattern sample_discrete(std::size_t m1, std::size_t m2, std::size_t n_observed,
                                std::uint64_t seed) {
  Rng rng(seed);
  return sample_discrete(m1, m2, n_observed, rng);
}

SamplingPattern sample_union(std::size_t m1, std::size_t m2, std::size_t k1, std::size_t k2,
                             Rng& rng) {
  check_count(k1, m1, "k1");
  check_count(k2, m2, "k2");
  const auto rows = sorted_sample(rng, m1, k1);
  const auto cols = sorted_sample(rng, m2, k2);
  return SamplingPattern::union_of(m1, m2, rows, cols);
}

DenseMatrix restrict_rows(const DenseMatrix& m, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("row index set is empty");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), m.eigen().cols());
  for (std::size_t t = 0; t < indices.size(); ++t) {
    if (indices[t] >= m.rows()) {
      throw InvalidArgument("row index " + std::to_string(indices[t]) + " out of range [0, " +
                            std::to_string(m.rows()) + ")");
    }
    if (t > 0 && indices[t] <= indices[t - 1]) {
      throw InvalidArgument("row indices must be strictly increasing");
    }
    out.row(static_cast<Eigen::Index>(t)) = m.eigen().row(static_cast<Eigen::Index>(indices[t]));
  }
  return DenseMatrix(std::move(out));
}

DenseMatrix restrict_signal(const DenseMatrix& y, const SamplingPattern& p) {
  if (y.rows() != p.m1() || y.cols() != p.m2()) {
    throw DimensionError("signal is " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                         " but pattern expects " + std::to_string(p.m1()) + "x" +
                         std::to_string(p.m2()));
  }
  if (p.kind() == PatternKind::Intersection) {
    const auto& rows = p.row_indices();
    const auto& cols = p.col_indices();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b)
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = y(rows[a], cols[b]);
    return DenseMatrix(std::move(out));
  }
  return DenseMatrix(Eigen::MatrixXd(y.eigen().cwiseProduct(p.indicator())));
}

SamplingPattern read_mask_csv(std::istream& in) {
  const auto grid = read_numeric_grid(in);
  const std::size_t m1 = grid.size();
  const std::size_t m2 = grid.front().size();
  std::vector<bool> mask(m1 * m2, false);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t j = 0; j < m2; ++j) {
      const double v = grid[i][j];
      if (v != 0.0 && v != 1.0) {
        throw ParseError("mask entries must be 0 or 1 (line " + std::to_string(i + 1) +
                             ", column " + std::to_string(j + 1) + ")",
                         i + 1, j + 1);
      }
      mask[i * m2 + j] = v == 1.0;
    }
  }
  return SamplingPattern::discrete(m1, m2, std::move(mask));
}

void write_mask_csv(std::ostream& out, const SamplingPattern& p) {
  const auto mask = p.mask();
  for (std::size_t i = 0; i < p.m1(); ++i) {
    for (std::size_t j = 0; j < p.m2(); ++j) {
      if (j) out << ',';
      out << (mask[i * p.m2() + j] ? '1' : '0');
    }
    out << '\n';
  }
}

std::vector<std::size_t> parse_index_list(std::string_view text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  std::size_t field_no = 1;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    auto field = text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw ParseError("invalid index '" + std::string(field) + "' in field " +
                           std::to_string(field_no),
                       1, field_no);
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
    ++field_no;
  }
  return out;
}

SamplingPattern read_intersection_pattern(std::istream& in, std::size_t m1, std::size_t m2) {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  bool have_rows = false;
  bool have_cols = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    while (!view.empty() && (view.front() == ' ' || view.front() == '\t')) view.remove_prefix(1);
    if (view.empty() || view == "\r") continue;
    auto parse = [&](std::string_view body) {
      try {
        return parse_index_list(body);
      } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " on line " + std::to_string(line_no), line_no,
                         e.column());
      }
    };
    if (view.starts_with("rows:")) {
      rows = parse(view.substr(5));
      have_rows = true;
    } else if (view.starts_with("cols:")) {
      cols = parse(view.substr(5));
      have_cols = true;
    } else {
      throw ParseError("expected 'rows:' or 'cols:' prefix on line " + std::to_string(line_no),
                       line_no, 1);
    }
  }
  if (!have_rows || !have_cols) throw ParseError("pattern needs both rows: and cols: lines", 0, 0);
  return SamplingPattern::intersection(m1, m2, std::move(rows), std::move(cols));
}

void write_intersection_pattern(std::ostream& out, const SamplingPattern& p) {
  auto emit = [&](const char* label, const std::vector<std::size_t>& idx) {
    out << label;
    for (std::size_t t = 0; t < idx.size(); ++t) out << (t ? "," : "") << idx[t];
    out << '\n';
  };
  emit("rows: ", p.row_indices());
  emit("cols: ", p.col_indices());
}

}  // namespace kssd
