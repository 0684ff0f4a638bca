#include "dnmg/simplex.hpp"

#include <cmath>
#include <stdexcept>

#include "simplex_kernel.hpp"

namespace dnmg::opt {

namespace {

Solution run(const Model& m, const Tolerances& tol, const std::vector<int>* warm,
             const std::vector<signed char>* warm_state) {
  m.validate();
  internal::SimplexKernel k(m, tol);
  Solution out;
  out.status = k.solve(warm, warm_state);
  if (out.status == Status::optimal) {
    k.extract(out);
  } else {
    out.x.assign(m.num_vars(), 0.0);
    out.row_dual.assign(m.num_rows(), 0.0);
    out.reduced_cost.assign(m.num_vars(), 0.0);
    out.iterations = k.iterations();
  }
  return out;
}

}  // namespace

Solution solve_lp(const Model& m, const Tolerances& tol) {
  return run(m, tol, nullptr, nullptr);
}

Solution solve_lp_warm(const Model& m, const Solution& prev,
                       const Tolerances& tol) {
  return run(m, tol, &prev.basis, &prev.col_state);
}

KktReport check_kkt(const Model& m, const Solution& s) {
  KktReport rep;
  if (s.status != Status::optimal) return rep;
  const int n = m.num_vars();
  const int nr = m.num_rows();

  // primal residual
  for (int j = 0; j < n; ++j) {
    const auto& v = m.var(j);
    if (v.lo != -kInf) rep.primal_residual = std::max(rep.primal_residual, v.lo - s.x[j]);
    if (v.hi != kInf) rep.primal_residual = std::max(rep.primal_residual, s.x[j] - v.hi);
  }
  std::vector<double> act(nr, 0.0);
  for (int i = 0; i < nr; ++i) {
    const auto& r = m.row(i);
    double a = 0.0;
    for (const auto& [v, c] : r.terms) a += c * s.x[v];
    act[i] = a;
    double scale = 1.0 + std::abs(r.rhs);
    switch (r.sense) {
      case Sense::le: rep.primal_residual = std::max(rep.primal_residual, (a - r.rhs) / scale); break;
      case Sense::ge: rep.primal_residual = std::max(rep.primal_residual, (r.rhs - a) / scale); break;
      case Sense::eq: rep.primal_residual = std::max(rep.primal_residual, std::abs(a - r.rhs) / scale); break;
    }
  }

  // dual sign + complementary slackness on rows
  for (int i = 0; i < nr; ++i) {
    const auto& r = m.row(i);
    const double y = s.row_dual[i];
    const double slack = r.rhs - act[i];
    if (r.sense == Sense::le) {
      rep.dual_residual = std::max(rep.dual_residual, y);  // expect y <= 0
      rep.compl_slack = std::max(rep.compl_slack, std::abs(y * slack) / (1.0 + std::abs(y)));
    } else if (r.sense == Sense::ge) {
      rep.dual_residual = std::max(rep.dual_residual, -y);  // expect y >= 0
      rep.compl_slack = std::max(rep.compl_slack, std::abs(y * slack) / (1.0 + std::abs(y)));
    }
  }

  // stationarity: c - A^T y - d = 0, and d sign vs bound activity
  for (int j = 0; j < n; ++j) {
    const auto& v = m.var(j);
    double aty = 0.0;
    (void)aty;
    double d = v.obj;
    for (int i = 0; i < nr; ++i) {
      // (column scan; fine at test scale)
      for (const auto& [vv, c] : m.row(i).terms)
        if (vv == j) d -= c * s.row_dual[i];
    }
    rep.dual_residual = std::max(rep.dual_residual, std::abs(d - s.reduced_cost[j]) / (1.0 + std::abs(d)));
    const double dj = s.reduced_cost[j];
    const bool at_lo = v.lo != -kInf && std::abs(s.x[j] - v.lo) < 1e-7 * (1.0 + std::abs(v.lo));
    const bool at_hi = v.hi != kInf && std::abs(s.x[j] - v.hi) < 1e-7 * (1.0 + std::abs(v.hi));
    if (!at_lo && !at_hi) {
      rep.compl_slack = std::max(rep.compl_slack, std::abs(dj));
    } else if (at_lo && !at_hi) {
      rep.dual_residual = std::max(rep.dual_residual, -dj);
    } else if (at_hi && !at_lo) {
      rep.dual_residual = std::max(rep.dual_residual, dj);
    }
  }

  // strong duality: b^T y + bound terms vs c^T x
  double dual_obj = 0.0;
  for (int i = 0; i < nr; ++i) dual_obj += m.row(i).rhs * s.row_dual[i];
  for (int j = 0; j < n; ++j) {
    const auto& v = m.var(j);
    const double dj = s.reduced_cost[j];
    if (dj > 0 && v.lo != -kInf)
      dual_obj += dj * v.lo;
    else if (dj < 0 && v.hi != kInf)
      dual_obj += dj * v.hi;
    else if (std::abs(dj) > 0) {
      // reduced cost on a variable strictly between bounds: contributes via x
      dual_obj += dj * s.x[j];
    }
  }
  rep.duality_gap = std::abs(s.objective - dual_obj) / (1.0 + std::abs(s.objective));
  return rep;
}

std::vector<int> polygonize_magnitude(Model& m, int p_var, int q_var,
                                      double s_max, int K,
                                      const std::string& tag_prefix,
                                      int scale_var, const std::string& rhs_key) {
  if (K < 4 || K % 2 != 0)
    throw std::invalid_argument("polygonize_magnitude: K must be even and >= 4");
  std::vector<int> rows;
  rows.reserve(K);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (int k = 0; k < K; ++k) {
    const double ang = kTwoPi * k / K;
    double c = std::cos(ang);
    double s = std::sin(ang);
    if (std::abs(c) < 1e-15) c = 0.0;
    if (std::abs(s) < 1e-15) s = 0.0;
    const int r = m.add_row(tag_prefix + "#" + std::to_string(k), Sense::le,
                            scale_var >= 0 ? 0.0 : s_max);
    m.add_term(r, p_var, c);
    m.add_term(r, q_var, s);
    if (scale_var >= 0) m.add_term(r, scale_var, -s_max);
    if (scale_var < 0 && !rhs_key.empty()) {
      m.set_rhs(r, 0.0);  // caller bakes z* * s_max into rhs afterwards
      m.add_rhs_param(r, rhs_key, s_max);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dnmg::opt
