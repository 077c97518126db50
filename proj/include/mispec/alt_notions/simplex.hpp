#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/core/scalar.hpp"

namespace mispec::lp {

enum class Status { Optimal, Infeasible, Unbounded };

template <class T>
struct Result {
  Status status = Status::Infeasible;
  T objective{};
  std::vector<T> x;
};

namespace detail {

template <class T>
T pivot_tol() {
  if constexpr (is_exact_v<T>) {
    return T(0);
  } else {
    return 1e-12;
  }
}

template <class T>
struct Tableau {
  std::vector<std::vector<T>> rows;  // each row: coefficients..., rhs
  std::vector<std::size_t> basis;
  std::vector<T> obj;                // reduced costs..., -objective
  std::size_t cols = 0;              // number of structural + artificial columns

  void pivot(std::size_t r, std::size_t c) {
    T p = rows[r][c];
    for (auto& v : rows[r]) v /= p;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r) continue;
      T f = rows[i][c];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    T f = obj[c];
    if (f != 0)
      for (std::size_t j = 0; j <= cols; ++j) obj[j] -= f * rows[r][j];
    basis[r] = c;
  }

  void price(const std::vector<T>& cost) {
    obj.assign(cols + 1, T(0));
    for (std::size_t j = 0; j < cost.size(); ++j) obj[j] = cost[j];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      T cb = basis[i] < cost.size() ? cost[basis[i]] : T(0);
      if (cb == 0) continue;
      for (std::size_t j = 0; j <= cols; ++j) obj[j] -= cb * rows[i][j];
    }
  }

  /// Minimizes the priced objective over columns [0, allowed). Bland's rule.
  bool run(std::size_t allowed) {
    const T tol = pivot_tol<T>();
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < allowed; ++j)
        if (obj[j] < -tol) {
          enter = j;
          break;
        }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      T best{};
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!(rows[i][*enter] > tol)) continue;
        T ratio = rows[i][cols] / rows[i][*enter];
        if (!leave || ratio < best || (ratio == best && basis[i] < basis[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }
};

}  // namespace detail

/// Maximizes c.x subject to A x = b, x >= 0, by the two-phase simplex method
/// with Bland's anticycling rule. Rows of A that are linear combinations of
/// others are detected and dropped after phase one.
template <class T>
Result<T> maximize(const std::vector<T>& c, const std::vector<std::vector<T>>& A, std::vector<T> b) {
  const std::size_t m = A.size(), n = c.size();
  for (const auto& row : A)
    if (row.size() != n) throw Error(ErrorCode::InvalidArgument, "constraint row length differs from objective");
  if (b.size() != m) throw Error(ErrorCode::InvalidArgument, "right-hand side length differs from row count");
  const T tol = detail::pivot_tol<T>();
  detail::Tableau<T> tab;
  tab.cols = n + m;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<T> row(n + m + 1, T(0));
    T sign = b[i] < 0 ? T(-1) : T(1);
    for (std::size_t j = 0; j < n; ++j) row[j] = sign * A[i][j];
    row[n + i] = T(1);
    row[n + m] = sign * b[i];
    tab.rows.push_back(std::move(row));
    tab.basis.push_back(n + i);
  }
  // Phase one: minimize the sum of artificials.
  std::vector<T> phase1(n + m, T(0));
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = T(1);
  tab.price(phase1);
  tab.run(n + m);
  T infeas = -tab.obj[n + m];
  Result<T> res;
  T feas_tol;
  if constexpr (is_exact_v<T>) {
    feas_tol = T(0);
  } else {
    feas_tol = 1e-10;
  }
  if (infeas > feas_tol) {
    res.status = Status::Infeasible;
    return res;
  }
  // Drive artificials out of the basis; drop redundant rows.
  for (std::size_t i = 0; i < tab.rows.size();) {
    if (tab.basis[i] < n) {
      ++i;
      continue;
    }
    std::optional<std::size_t> col;
    for (std::size_t j = 0; j < n; ++j)
      if (abs_value(tab.rows[i][j]) > tol) {
        col = j;
        break;
      }
    if (col) {
      tab.pivot(i, *col);
      ++i;
    } else {
      tab.rows.erase(tab.rows.begin() + static_cast<std::ptrdiff_t>(i));
      tab.basis.erase(tab.basis.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  // Phase two on structural columns only.
  std::vector<T> cost(n);
  for (std::size_t j = 0; j < n; ++j) cost[j] = -c[j];
  tab.price(cost);
  if (!tab.run(n)) {
    res.status = Status::Unbounded;
    return res;
  }
  res.status = Status::Optimal;
  res.x.assign(n, T(0));
  for (std::size_t i = 0; i < tab.rows.size(); ++i)
    if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.rows[i][tab.cols];
  res.objective = T(0);
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

}  // namespace mispec::lp
