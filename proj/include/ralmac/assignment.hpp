#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ralmac/geometry.hpp"

namespace ralmac {

/// Dense row-major matrix of non-negative pairwise costs (mm).
class CostMatrix {
 public:
  CostMatrix() = default;
  /// Throws InvalidCost on NaN, negative or infinite entries.
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> costs);

  /// Euclidean distance between every pair of centroids.
  static CostMatrix pairwise_distances(std::span<const Point3> rows, std::span<const Point3> cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return costs_[r * cols_ + c]; }
  double max_cost() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> costs_;
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by row
  std::vector<std::size_t> unmatched_rows;                 // ascending
  std::vector<std::size_t> unmatched_cols;                 // ascending

  double total_cost(const CostMatrix& costs) const;
};

/// Minimum-cost matching of cardinality min(rows, cols) (Kuhn-Munkres with
/// shortest augmenting paths). The smaller side is padded with a constant
/// larger than every real cost, so the surplus elements of the larger side end
/// up unmatched. Ties resolve toward the lowest row/column index.
Assignment solve_assignment(const CostMatrix& costs);

/// Dissolves every pair whose cost is strictly greater than `threshold_mm`.
Assignment threshold_filter(const Assignment& a, const CostMatrix& costs, double threshold_mm);

}  // namespace ralmac
