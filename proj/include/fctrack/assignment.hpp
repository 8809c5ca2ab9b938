#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace fctrack {

using CostMatrix = Eigen::MatrixXd;

/// Entries holding this value are forbidden pairs.
inline constexpr double kGated = std::numeric_limits<double>::infinity();

namespace detail {

struct SquareSolution {
  std::vector<int> row_to_col;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Shortest-augmenting-path Hungarian method with potentials, O(n^3). Columns are scanned
// in ascending index order, so ties resolve towards lower column indices.
inline SquareSolution solve_square(const CostMatrix& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  SquareSolution s;
  s.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) s.row_to_col[p[j] - 1] = j - 1;
  }
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

inline double assignment_total(const CostMatrix& a, const std::vector<int>& row_to_col) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(row_to_col.size()); ++i) {
    if (row_to_col[i] >= 0) total += a(i, row_to_col[i]);
  }
  return total;
}

// Among all optimal assignments of the square matrix, pick the one whose (row, col) pairs
// are lexicographically smallest. Candidates are limited to zero reduced-cost edges, so
// matrices without ties cost one extra pass.
inline std::vector<int> lexicographic_optimum(const CostMatrix& a, SquareSolution s,
                                              double tol) {
  const int n = static_cast<int>(a.rows());
  const double best = assignment_total(a, s.row_to_col);
  std::vector<int> assign = s.row_to_col;
  std::vector<char> col_fixed(n, 0);
  double prefix = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (col_fixed[j]) continue;
      if (j == assign[i]) break;
      if (std::abs(a(i, j) - s.u[i] - s.v[j]) > tol) continue;
      // Rows i+1.. over the columns left after fixing (i, j).
      std::vector<int> rest_cols;
      for (int c = 0; c < n; ++c) {
        if (!col_fixed[c] && c != j) rest_cols.push_back(c);
      }
      const int r = n - i - 1;
      std::vector<int> sub_assign;
      double sub_total = 0.0;
      if (r > 0) {
        CostMatrix sub(r, r);
        for (int ri = 0; ri < r; ++ri) {
          for (int cj = 0; cj < r; ++cj) sub(ri, cj) = a(i + 1 + ri, rest_cols[cj]);
        }
        sub_assign = solve_square(sub).row_to_col;
        sub_total = assignment_total(sub, sub_assign);
      }
      if (std::abs(prefix + a(i, j) + sub_total - best) <= tol) {
        assign[i] = j;
        for (int ri = 0; ri < r; ++ri) assign[i + 1 + ri] = rest_cols[sub_assign[ri]];
        break;
      }
    }
    col_fixed[assign[i]] = 1;
    prefix += a(i, assign[i]);
  }
  return assign;
}

}  // namespace detail

/// Minimum-cost assignment of a rectangular matrix covering min(rows, cols) pairs.
/// Gated entries are only used when no alternative exists. Returns, per row, the assigned
/// column or -1. Among equal-cost optima the lexicographically smallest pairs win.
inline std::vector<int> solve_assignment(const CostMatrix& cost) {
  const auto rows = static_cast<int>(cost.rows());
  const auto cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  const int n = std::max(rows, cols);

  double max_abs = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (std::isfinite(cost(i, j))) max_abs = std::max(max_abs, std::abs(cost(i, j)));
    }
  }
  const double scale = max_abs + 1.0;
  const double gated = 2.0 * scale * (n + 1);
  CostMatrix square = CostMatrix::Zero(n, n);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      square(i, j) = std::isfinite(cost(i, j)) ? cost(i, j) : gated;
    }
  }
  const double tol = 1e-9 * scale * n;
  auto assign = detail::lexicographic_optimum(square, detail::solve_square(square), tol);

  std::vector<int> out(rows, -1);
  for (int i = 0; i < rows; ++i) {
    if (assign[i] < cols) out[i] = assign[i];
  }
  return out;
}

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), ascending by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

/// Solves the full assignment first, then drops gated pairs and pairs costing more than
/// max_cost.
inline Assignment hungarian_assign(const CostMatrix& cost, double max_cost) {
  const auto rows = static_cast<int>(cost.rows());
  const auto cols = static_cast<int>(cost.cols());
  const auto row_to_col = solve_assignment(cost);
  Assignment out;
  std::vector<char> col_used(cols, 0);
  for (int i = 0; i < rows; ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && std::isfinite(cost(i, j)) && cost(i, j) <= max_cost) {
      out.pairs.emplace_back(i, j);
      col_used[j] = 1;
    } else {
      out.unmatched_rows.push_back(i);
    }
  }
  for (int j = 0; j < cols; ++j) {
    if (!col_used[j]) out.unmatched_cols.push_back(j);
  }
  return out;
}

}  // namespace fctrack
