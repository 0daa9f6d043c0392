#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "kssd/dense_matrix.hpp"

namespace kssd {

class Rng;

enum class PatternKind { Intersection, Discrete };

/// Which entries of an m1 x m2 signal are observed.
///
/// Intersection: whole rows and whole columns are kept; the observed signal
/// is the submatrix at row_indices x col_indices. Discrete: an arbitrary
/// boolean mask (true = observed). Missing entries are never encoded as
/// sentinel values in the data.
class SamplingPattern {
public:
  /// Indices must be strictly increasing and in range; both sets non-empty.
  static SamplingPattern intersection(std::size_t m1, std::size_t m2,
                                      std::vector<std::size_t> rows,
                                      std::vector<std::size_t> cols);

  /// Row-major m1 x m2 mask with at least one observed cell.
  static SamplingPattern discrete(std::size_t m1, std::size_t m2, std::vector<bool> mask);

  /// Discrete mask observing every cell in `rows` and every cell in `cols`
  /// (the union of k1 full rows and k2 full columns).
  static SamplingPattern union_of(std::size_t m1, std::size_t m2,
                                  std::span<const std::size_t> rows,
                                  std::span<const std::size_t> cols);

  static SamplingPattern full(std::size_t m1, std::size_t m2);

  PatternKind kind() const noexcept { return kind_; }
  std::size_t m1() const noexcept { return m1_; }
  std::size_t m2() const noexcept { return m2_; }

  /// Intersection only.
  const std::vector<std::size_t>& row_indices() const;
  const std::vector<std::size_t>& col_indices() const;

  /// Whether cell (i, j) is observed; valid for both kinds.
  bool observed(std::size_t i, std::size_t j) const;

  /// Row-major observation mask; materialized for intersection patterns.
  std::vector<bool> mask() const;

  /// Row-major indices i * m2 + j of the observed cells, ascending.
  std::vector<std::size_t> observed_cells() const;

  /// 0/1 indicator matrix of the observed cells.
  Eigen::MatrixXd indicator() const;

private:
  SamplingPattern() = default;

  PatternKind kind_ = PatternKind::Discrete;
  std::size_t m1_ = 0;
  std::size_t m2_ = 0;
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cols_;
  std::vector<bool> mask_;
};

struct SampleCounts {
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::size_t observed_cells = 0;

  friend bool operator==(const SampleCounts&, const SampleCounts&) = default;
};

/// Intersection: k1 = |rows|, k2 = |cols|. Discrete: k1 = m1 minus the number
/// of rows holding a missing entry, k2 likewise for columns.
SampleCounts derive_counts(const SamplingPattern& p);

/// k1 m2 + k2 m1 - k1 k2: cell count of the union of k1 rows and k2 columns.
std::size_t union_cell_count(std::size_t m1, std::size_t m2, std::size_t k1, std::size_t k2);

/// True when a discrete pattern's observed cell count differs from
/// union_cell_count(k1, k2) by more than 10 percent, i.e. (k1, k2) is a
/// poor summary of the mask.
bool counts_diverge(const SamplingPattern& p, const SampleCounts& counts);

/// Uniform k1-subset of rows and k2-subset of columns (partial Fisher-Yates).
SamplingPattern sample_intersection(std::size_t m1, std::size_t m2, std::size_t k1,
                                    std::size_t k2, std::uint64_t seed);
SamplingPattern sample_intersection(std::size_t m1, std::size_t m2, std::size_t k1,
                                    std::size_t k2, Rng& rng);

/// Uniform n_observed-subset of the m1 m2 cells.
SamplingPattern sample_discrete(std::size_t m1, std::size_t m2, std::size_t n_observed,
                                std::uint64_t seed);
SamplingPattern sample_discrete(std::size_t m1, std::size_t m2, std::size_t n_observed, Rng& rng);

/// Union of a uniform k1-subset of rows and a uniform k2-subset of columns.
SamplingPattern sample_union(std::size_t m1, std::size_t m2, std::size_t k1, std::size_t k2,
                             Rng& rng);

/// Selected rows of m, in the given (strictly increasing) order.
DenseMatrix restrict_rows(const DenseMatrix& m, std::span<const std::size_t> indices);

/// Intersection: the k1 x k2 submatrix. Discrete: same-shape copy of y with
/// unobserved entries zeroed.
DenseMatrix restrict_signal(const DenseMatrix& y, const SamplingPattern& p);

// Mask files use the matrix CSV grid with 0/1 entries. Intersection patterns
// serialize as two lines, "rows: i,j,..." and "cols: i,j,...".

SamplingPattern read_mask_csv(std::istream& in);
void write_mask_csv(std::ostream& out, const SamplingPattern& p);

/// Needs the signal shape, which the rows:/cols: format does not carry.
SamplingPattern read_intersection_pattern(std::istream& in, std::size_t m1, std::size_t m2);
void write_intersection_pattern(std::ostream& out, const SamplingPattern& p);

/// Parse "0,3,7" into indices.
std::vector<std::size_t> parse_index_list(std::string_view text);

}  // namespace kssd
