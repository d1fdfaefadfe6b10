#include "ralmac/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ralmac/errors.hpp"

namespace ralmac {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> costs)
    : rows_(rows), cols_(cols), costs_(std::move(costs)) {
  if (costs_.size() != rows_ * cols_) throw InvalidCost("cost buffer size does not match matrix shape");
  for (double c : costs_) {
    if (std::isnan(c)) throw InvalidCost("NaN cost");
    if (!std::isfinite(c) || c < 0.0) throw InvalidCost("costs must be finite and non-negative");
  }
}

CostMatrix CostMatrix::pairwise_distances(std::span<const Point3> rows, std::span<const Point3> cols) {
  std::vector<double> costs;
  costs.reserve(rows.size() * cols.size());
  for (const auto& r : rows) {
    for (const auto& c : cols) costs.push_back(distance(r, c));
  }
  return CostMatrix(rows.size(), cols.size(), std::move(costs));
}

double CostMatrix::max_cost() const {
  return costs_.empty() ? 0.0 : *std::max_element(costs_.begin(), costs_.end());
}

double Assignment::total_cost(const CostMatrix& costs) const {
  double sum = 0.0;
  for (const auto& [r, c] : pairs) sum += costs(r, c);
  return sum;
}

Assignment solve_assignment(const CostMatrix& costs) {
  const std::size_t n_rows = costs.rows();
  const std::size_t n_cols = costs.cols();
  Assignment out;
  if (n_rows == 0 || n_cols == 0) {
    for (std::size_t r = 0; r < n_rows; ++r) out.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < n_cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }

  const std::size_t n = std::max(n_rows, n_cols);
  const double pad = 1.0 + costs.max_cost();
  const auto cost = [&](std::size_t r, std::size_t c) { return r < n_rows && c < n_cols ? costs(r, c) : pad; };

  // Potentials formulation, 1-based with a virtual column 0.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
  for (std::size_t r = 1; r <= n; ++r) {
    row_of_col[0] = r;
    std::size_t col0 = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t row0 = row_of_col[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double slack = cost(row0 - 1, c - 1) - u[row0] - v[c];
        if (slack < min_slack[c]) {
          min_slack[c] = slack;
          way[c] = col0;
        }
        if (min_slack[c] < delta) {
          delta = min_slack[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[row_of_col[c]] += delta;
          v[c] -= delta;
        } else {
          min_slack[c] -= delta;
        }
      }
      col0 = col1;
    } while (row_of_col[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      row_of_col[col0] = row_of_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<std::size_t> col_of_row(n_rows, n);
  for (std::size_t c = 1; c <= n; ++c) {
    const std::size_t r = row_of_col[c] - 1;
    if (r < n_rows && c - 1 < n_cols) col_of_row[r] = c - 1;
  }
  std::vector<char> col_used(n_cols, 0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (col_of_row[r] < n_cols) {
      out.pairs.emplace_back(r, col_of_row[r]);
      col_used[col_of_row[r]] = 1;
    } else {
      out.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

Assignment threshold_filter(const Assignment& a, const CostMatrix& costs, double threshold_mm) {
  Assignment out;
  out.unmatched_rows = a.unmatched_rows;
  out.unmatched_cols = a.unmatched_cols;
  for (const auto& [r, c] : a.pairs) {
    if (costs(r, c) > threshold_mm) {
      out.unmatched_rows.push_back(r);
      out.unmatched_cols.push_back(c);
    } else {
      out.pairs.emplace_back(r, c);
    }
  }
  std::sort(out.unmatched_rows.begin(), out.unmatched_rows.end());
  std::sort(out.unmatched_cols.begin(), out.unmatched_cols.end());
  return out;
}

}  // namespace ralmac
