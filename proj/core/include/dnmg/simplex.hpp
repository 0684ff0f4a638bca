#pragma once

#include <string>
#include <vector>

#include "dnmg/model.hpp"

namespace dnmg::opt {

// Revised simplex (bounded variables, two-phase primal) with exact dual
// extraction. Deterministic: Dantzig pricing with lowest-index tie-breaks,
// switching to Bland's rule after a stall.
Solution solve_lp(const Model& m, const Tolerances& tol = {});

// Re-solve after bound or rhs changes, starting from a previous solution's
// basis and bound statuses. Falls back to a cold solve when unusable.
Solution solve_lp_warm(const Model& m, const Solution& prev,
                       const Tolerances& tol = {});

// Best-first branch and bound over the binary variables. Branches on the
// most fractional binary (ties: lowest variable id).
Solution solve_milp(const Model& m, const Tolerances& tol = {});

// KKT residuals of an optimal solution; all should be ~0 for Status::optimal.
struct KktReport {
  double primal_residual = 0.0;  // max row/bound violation
  double dual_residual = 0.0;    // max sign violation of duals/reduced costs
  double compl_slack = 0.0;      // max |y_i * slack_i|, |d_j * bound gap| (scaled)
  double duality_gap = 0.0;      // |primal obj - dual obj| / (1 + |obj|)
};
KktReport check_kkt(const Model& m, const Solution& s);

// K-sided outer polygon for |p + jq| <= s_max:
//   p cos(2 pi k / K) + q sin(2 pi k / K) <= s_max,  k = 0..K-1.
// When scale_var >= 0 the limit is s_max * that variable (on-off limits);
// otherwise when rhs_key is nonempty each row gets a parametric rhs term
// (key, s_max). Returns the row ids. Requires K >= 4 and even.
std::vector<int> polygonize_magnitude(Model& m, int p_var, int q_var,
                                      double s_max, int K,
                                      const std::string& tag_prefix,
                                      int scale_var = -1,
                                      const std::string& rhs_key = {});

}  // namespace dnmg::opt
