#pragma once

// Independent dense two-phase tableau simplex used as a reference for
// solve_lp. Deliberately naive (Bland's rule throughout) and kept apart from
// the production kernel.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "dnmg/model.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct TableauResult {
  enum { optimal, infeasible, unbounded } status = infeasible;
  double objective = 0.0;
};

namespace detail {

// Standard-form LP: min c.u  s.t.  A u = b, u >= 0, b >= 0.
inline TableauResult standard_form_simplex(std::vector<std::vector<double>> A,
                                           std::vector<double> b,
                                           std::vector<double> c) {
  const int m = static_cast<int>(A.size());
  const int n = m ? static_cast<int>(A[0].size()) : 0;

  // rhs nonnegative
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0) {
      b[i] = -b[i];
      for (auto& a : A[i]) a = -a;
    }
  }

  // tableau with artificials appended: columns [u | art | rhs]
  const int cols = n + m + 1;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols, 0.0));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][cols - 1] = b[i];
    basis[i] = n + i;
  }

  auto pivot = [&](int pr, int pc) {
    const double p = T[pr][pc];
    for (int j = 0; j < cols; ++j) T[pr][j] /= p;
    for (int i = 0; i <= m; ++i) {
      if (i == pr) continue;
      const double f = T[i][pc];
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j) T[i][j] -= f * T[pr][j];
    }
    basis[pr] = pc;
  };

  auto run = [&](int ncols_active) -> bool {  // returns false on unbounded
    for (long iter = 0; iter < 200000; ++iter) {
      int pc = -1;
      for (int j = 0; j < ncols_active; ++j) {
        if (T[m][j] < -1e-10) {  // Bland: first improving column
          pc = j;
          break;
        }
      }
      if (pc < 0) return true;
      int pr = -1;
      double best = kInf;
      for (int i = 0; i < m; ++i) {
        if (T[i][pc] > 1e-10) {
          const double r = T[i][cols - 1] / T[i][pc];
          if (r < best - 1e-12 ||
              (r < best + 1e-12 && (pr < 0 || basis[i] < basis[pr]))) {
            best = r;
            pr = i;
          }
        }
      }
      if (pr < 0) return false;
      pivot(pr, pc);
    }
    return true;
  };

  // phase 1
  for (int j = 0; j < cols; ++j) T[m][j] = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < cols; ++j) T[m][j] -= T[i][j];
  for (int i = 0; i < m; ++i) T[m][n + i] = 0.0;
  run(n + m);
  if (T[m][cols - 1] < -1e-7) return {TableauResult::infeasible, 0.0};

  // drive artificials out of the basis where possible
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n) {
      for (int j = 0; j < n; ++j) {
        if (std::abs(T[i][j]) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  // phase 2
  for (int j = 0; j < cols; ++j) T[m][j] = 0.0;
  for (int j = 0; j < n; ++j) T[m][j] = c[j];
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n && c[basis[i]] != 0.0) {
      const double f = c[basis[i]];
      for (int j = 0; j < cols; ++j) T[m][j] -= f * T[i][j];
    }
  }
  if (!run(n)) return {TableauResult::unbounded, 0.0};

  double z = 0.0;
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) z += c[basis[i]] * T[i][cols - 1];
  return {TableauResult::optimal, z};
}

}  // namespace detail

// Solve a dnmg::opt::Model with the reference tableau method.
inline TableauResult solve(const dnmg::opt::Model& model) {
  using dnmg::opt::Sense;
  const int nv = model.num_vars();

  // Variable transform to u >= 0: x = shift + sum(sign_k * u_k).
  struct Piece {
    int ucol;
    double sign;
  };
  std::vector<std::vector<Piece>> pieces(nv);
  std::vector<double> shift(nv, 0.0);
  int ncols = 0;
  std::vector<std::pair<int, double>> ubound_rows;  // (ucol, ub) extra rows

  for (int j = 0; j < nv; ++j) {
    const auto& v = model.var(j);
    if (v.lo != -kInf) {
      shift[j] = v.lo;
      pieces[j].push_back({ncols, 1.0});
      if (v.hi != kInf) ubound_rows.emplace_back(ncols, v.hi - v.lo);
      ++ncols;
    } else if (v.hi != kInf) {
      shift[j] = v.hi;
      pieces[j].push_back({ncols, -1.0});
      ++ncols;
    } else {
      pieces[j].push_back({ncols, 1.0});
      pieces[j].push_back({ncols + 1, -1.0});
      ncols += 2;
    }
  }

  std::vector<std::vector<double>> A;
  std::vector<double> b;

  auto add_eq_row = [&](const std::vector<double>& coef, double rhs, Sense s) {
    // appends slack columns later; here store with sense via slack sign
    std::vector<double> row(ncols, 0.0);
    for (int j = 0; j < ncols; ++j) row[j] = coef[j];
    if (s == Sense::le) {
      row.push_back(1.0);
      ++ncols;
    } else if (s == Sense::ge) {
      row.push_back(-1.0);
      ++ncols;
    }
    // grow previous rows
    for (auto& r : A) r.resize(ncols, 0.0);
    row.resize(ncols, 0.0);
    A.push_back(std::move(row));
    b.push_back(rhs);
  };

  for (int i = 0; i < model.num_rows(); ++i) {
    const auto& r = model.row(i);
    std::vector<double> coef(ncols, 0.0);
    double rhs = r.rhs;
    for (const auto& [v, c] : r.terms) {
      rhs -= c * shift[v];
      for (const auto& p : pieces[v]) coef[p.ucol] += c * p.sign;
    }
    add_eq_row(coef, rhs, r.sense);
  }
  for (const auto& [ucol, ub] : ubound_rows) {
    std::vector<double> coef(ncols, 0.0);
    coef[ucol] = 1.0;
    add_eq_row(coef, ub, Sense::le);
  }

  std::vector<double> c(ncols, 0.0);
  double cshift = 0.0;
  for (int j = 0; j < nv; ++j) {
    cshift += model.var(j).obj * shift[j];
    for (const auto& p : pieces[j]) c[p.ucol] += model.var(j).obj * p.sign;
  }
  for (auto& row : A) row.resize(ncols, 0.0);
  c.resize(ncols, 0.0);

  auto res = detail::standard_form_simplex(std::move(A), std::move(b), std::move(c));
  if (res.status == TableauResult::optimal) res.objective += cshift;
  return res;
}

}  // namespace oracle
