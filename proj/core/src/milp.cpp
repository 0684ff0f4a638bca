#include <algorithm>
#include <cmath>
#include <memory>
#include <cstdio>
#include <queue>
#include <stdexcept>
#include <vector>

#include "dnmg/simplex.hpp"
#include "simplex_kernel.hpp"

namespace dnmg::opt {

namespace {

struct Node {
  double bound = -kInf;
  long id = 0;
  std::vector<std::pair<int, char>> fixings;  // (var, 0/1)
  std::vector<int> basis;
  std::vector<signed char> col_state;
};

struct NodeOrder {
  bool operator()(const std::shared_ptr<Node>& a,
                  const std::shared_ptr<Node>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;  // min-heap on bound
    return a->id > b->id;
  }
};

}  // namespace

Solution solve_milp(const Model& m, const Tolerances& tol) {
  m.validate();
  std::vector<int> int_vars;
  for (int j = 0; j < m.num_vars(); ++j) {
    if (!m.var(j).integer) continue;
    if (m.var(j).lo < -tol.integrality || m.var(j).hi > 1.0 + tol.integrality)
      throw std::invalid_argument("solve_milp: integer variables must be binary");
    int_vars.push_back(j);
  }

  internal::SimplexKernel kernel(m, tol);

  auto solve_node = [&](const Node& nd, Solution& sol) -> Status {
    kernel.reset_var_bounds();
    for (const auto& [v, val] : nd.fixings)
      kernel.set_var_bounds(v, static_cast<double>(val), static_cast<double>(val));
    const Status st = kernel.solve(nd.basis.empty() ? nullptr : &nd.basis,
                                   nd.col_state.empty() ? nullptr : &nd.col_state);
    if (st == Status::optimal) kernel.extract(sol);
    sol.status = st;
#ifdef DNMG_MILP_DEBUG
    std::fprintf(stderr, "[milp] node id=%ld depth=%zu status=%d iters=%ld obj=%.6f\n",
                 nd.id, nd.fixings.size(), (int)st, kernel.iterations(),
                 st == Status::optimal ? sol.objective : 0.0);
#endif
    return st;
  };

  auto fractional = [&](const Solution& sol) -> int {
    int pick = -1;
    double best = tol.integrality;
    for (int j : int_vars) {
      const double f = std::abs(sol.x[j] - std::round(sol.x[j]));
      if (f > best + 1e-12) {
        best = f;
        pick = j;
      }
    }
    return pick;
  };

  std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>,
                      NodeOrder>
      open;
  long next_id = 0;
  long nodes = 0;
  long total_iters = 0;

  Solution incumbent;
  incumbent.status = Status::infeasible;
  double inc_obj = kInf;
  bool unbounded_root = false;

  {
    auto root = std::make_shared<Node>();
    root->id = next_id++;
    Solution sol;
    const Status st = solve_node(*root, sol);
    ++nodes;
    total_iters += sol.iterations;
    if (st == Status::unbounded) unbounded_root = true;
    if (st == Status::optimal) {
      root->bound = sol.objective;
      root->basis = sol.basis;
      root->col_state = sol.col_state;
      const int br = fractional(sol);
      if (br < 0) {
        incumbent = sol;
        inc_obj = sol.objective;
      } else {
        open.push(root);
      }
    } else if (st == Status::limit) {
      Solution out;
      out.status = Status::limit;
      out.nodes = nodes;
      out.iterations = total_iters;
      return out;
    }
  }

  if (unbounded_root) {
    Solution out;
    out.status = Status::unbounded;
    out.nodes = nodes;
    return out;
  }

  bool hit_node_limit = false;
  while (!open.empty()) {
    if (nodes >= tol.max_nodes) {
      hit_node_limit = true;
      break;
    }
    auto nd = open.top();
    open.pop();
    if (nd->bound >= inc_obj - tol.mip_gap_abs) break;  // proven within gap

    Solution sol;
    Status st = solve_node(*nd, sol);
    ++nodes;
    total_iters += sol.iterations;
    if (st == Status::limit && !nd->basis.empty()) {
      // warm start went nowhere: one cold retry before giving up
      Node cold = *nd;
      cold.basis.clear();
      st = solve_node(cold, sol);
    }
    if (st == Status::limit) {
      hit_node_limit = true;  // cannot certify anything below this node
      break;
    }
    if (st != Status::optimal) continue;  // infeasible child: prune
    if (sol.objective >= inc_obj - tol.mip_gap_abs) continue;

    const int br = fractional(sol);
    if (br < 0) {
      if (sol.objective < inc_obj - 1e-12) {
        incumbent = sol;
        inc_obj = sol.objective;
      }
      continue;
    }
    for (char v : {char(0), char(1)}) {
      auto child = std::make_shared<Node>();
      child->id = next_id++;
      child->fixings = nd->fixings;
      child->fixings.emplace_back(br, v);
      child->bound = sol.objective;
      child->basis = sol.basis;
      child->col_state = sol.col_state;
      open.push(child);
    }
  }

  Solution out = incumbent;
  out.nodes = nodes;
  out.iterations = total_iters;
  if (inc_obj < kInf) {
    out.status = hit_node_limit && !open.empty() ? Status::limit : Status::optimal;
    // snap binaries
    for (int j : int_vars) out.x[j] = std::round(out.x[j]);
  } else {
    out.status = hit_node_limit ? Status::limit : Status::infeasible;
    out.x.assign(m.num_vars(), 0.0);
    out.row_dual.assign(m.num_rows(), 0.0);
    out.reduced_cost.assign(m.num_vars(), 0.0);
  }
  return out;
}

}  // namespace dnmg::opt
