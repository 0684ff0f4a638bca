#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "dnmg/rng.hpp"
#include "dnmg/rpop.hpp"
#include "dnmg/simplex.hpp"

namespace dnmg::rpop {

using namespace dnmg::net;

Subproblem build_subproblem(const Network& n, const BlockGraph& bg,
                            const MasterSolution& x, const ScenarioVector& s,
                            const RPOPConfig& cfg, bool tag_master_rhs) {
  Subproblem sp;
  ldf::AdjustmentSpec spec;
  spec.beta_slack = cfg.resolved_beta_slack(n);
  spec.polygon_k = cfg.polygon_k;
  spec.tag_master_rhs = tag_master_rhs;
  const auto topo = x.topology();
  sp.handles = ldf::build_adjustment_lp(sp.model, n, bg, topo, x.setpoints, s, spec);
  return sp;
}

SubproblemSolution solve_subproblem(const Network& n, const Subproblem& sp,
                                    const opt::Tolerances& tol) {
  SubproblemSolution out;
  out.sol = opt::solve_lp(sp.model, tol);
  if (out.sol.status != opt::Status::optimal) {
    out.objective = opt::kInf;
    out.slack_sum = opt::kInf;
    return out;
  }
  out.objective = out.sol.objective;
  for (size_t b = 0; b < n.buses.size(); ++b) {
    for (Phase ph : n.buses[b].phases) {
      const int i = pidx(ph);
      out.slack_sum += out.sol.x[sp.handles.hp_plus[b][i]] +
                       out.sol.x[sp.handles.hp_minus[b][i]] +
                       out.sol.x[sp.handles.hq_plus[b][i]] +
                       out.sol.x[sp.handles.hq_minus[b][i]];
    }
  }
  return out;
}

WorstCase worst_case(const Network& n, const BlockGraph& bg,
                     const MasterSolution& x,
                     const std::vector<ScenarioVector>& scenarios,
                     const RPOPConfig& cfg) {
  const int ns = static_cast<int>(scenarios.size());
  std::vector<double> v2(ns, 0.0), slack(ns, 0.0);
  std::vector<SubproblemSolution> subs(ns);

  const int jobs = std::max(1, cfg.jobs);
  auto run_range = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const auto sp = build_subproblem(n, bg, x, scenarios[i], cfg, true);
      subs[i] = solve_subproblem(n, sp, cfg.solver);
      v2[i] = subs[i].objective;
      slack[i] = subs[i].slack_sum;
    }
  };
  if (jobs <= 1 || ns <= 1) {
    run_range(0, ns);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (ns + jobs - 1) / jobs;
    for (int t = 0; t < jobs && t * chunk < ns; ++t)
      pool.emplace_back(run_range, t * chunk, std::min(ns, (t + 1) * chunk));
    for (auto& th : pool) th.join();
  }

  WorstCase wc;
  wc.lp_solves = ns;
  for (int i = 0; i < ns; ++i) {
    if (wc.scenario_index < 0 || v2[i] > wc.v2 + 1e-12) {
      wc.scenario_index = i;
      wc.v2 = v2[i];
    }
  }
  wc.slack_sum = slack[wc.scenario_index];
  wc.sub = std::move(subs[wc.scenario_index]);
  return wc;
}

Cut make_cut(const opt::Model& sub_model, const opt::Solution& sub_sol,
             const std::map<std::string, double>& xstar, double v2,
             int scenario_index) {
  Cut cut;
  cut.v2 = v2;
  cut.xstar = xstar;
  cut.scenario_index = scenario_index;
  for (int r = 0; r < sub_model.num_rows(); ++r) {
    const auto& row = sub_model.row(r);
    if (row.rhs_params.empty()) continue;
    const double y = sub_sol.row_dual[r];
    cut.pi[row.tag] = y;
    auto& arow = cut.coupling[row.tag];
    for (const auto& p : row.rhs_params) {
      arow[p.key] = p.coef;
      if (y != 0.0) cut.terms[p.key] += y * p.coef;
    }
  }
  // drop dual-noise terms; they are far below the slack scale and only
  // widen the coefficient spread of the master row
  for (auto it = cut.terms.begin(); it != cut.terms.end();) {
    if (std::abs(it->second) < 1e-6)
      it = cut.terms.erase(it);
    else
      ++it;
  }
  return cut;
}

RPOPResult cutting_plane(const Network& n, const RPOPConfig& cfg) {
  const auto bg = compute_blocks(n);
  const auto u = UncertaintyModel::from_level(n, cfg.uncertainty);
  const auto scenarios = uncertainty_extremes(n, u, cfg.scenario_cap);

  RPOPResult res;
  res.uncertainty = cfg.uncertainty;

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    MasterVars mv;
    opt::Model master = build_master(n, bg, cfg, res.cuts, mv);
    const auto msol = opt::solve_milp(master, cfg.solver);
    if (msol.status != opt::Status::optimal) {
      // master infeasible/limited: report what we have
      res.converged = false;
      IterationLog lg;
      lg.iteration = k;
      lg.master_objective = std::nan("");
      res.log.push_back(lg);
      return res;
    }
    res.solution = extract_master(n, bg, mv, msol);

    const auto wc = worst_case(n, bg, res.solution, scenarios, cfg);
    IterationLog lg;
    lg.iteration = k;
    lg.master_objective = res.solution.objective;
    lg.worst_scenario = wc.scenario_index;
    lg.v2 = wc.v2;
    lg.slack_sum = wc.slack_sum;
    res.log.push_back(lg);

    if (wc.slack_sum <= cfg.eps) {
      res.converged = true;
      return res;
    }
    const auto sp = build_subproblem(n, bg, res.solution,
                                     scenarios[wc.scenario_index], cfg, true);
    res.cuts.push_back(make_cut(sp.model, wc.sub.sol, res.solution.flat(n, bg),
                                wc.v2, wc.scenario_index));
  }
  res.converged = false;
  return res;
}

std::vector<Violation> verify_topology(const Network& n, const BlockGraph& bg,
                                       const MasterSolution& x) {
  std::vector<Violation> out;
  const int nb = static_cast<int>(bg.blocks.size());

  // energization consistency across closed switches
  for (size_t s = 0; s < n.switches.size(); ++s) {
    if (!x.switch_closed[s]) continue;
    const auto [i, j] = bg.switch_ends[s];
    if (x.block_energized[i] != x.block_energized[j])
      out.push_back({"energization",
                     "switch " + n.switches[s].id +
                         " closed between energized and de-energized blocks"});
  }

  // forest check: union-find cycle detection over closed switches
  {
    std::vector<int> parent(nb);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (size_t s = 0; s < n.switches.size(); ++s) {
      if (!x.switch_closed[s]) continue;
      const auto [i, j] = bg.switch_ends[s];
      const int ri = find(i), rj = find(j);
      if (ri == rj) {
        out.push_back({"cycle", "closing switch " + n.switches[s].id +
                                    " creates a loop"});
      } else {
        parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }

  // per component: edge count, source count, phase coverage
  const auto topo = x.topology();
  const auto ccs = ldf::analyze_topology(n, bg, topo);
  const auto part = connected_components(bg, x.switch_closed);
  for (const auto& cc : ccs) {
    int closed_inside = 0;
    for (size_t s = 0; s < n.switches.size(); ++s) {
      if (!x.switch_closed[s]) continue;
      if (part.block_cc[bg.switch_ends[s].first] ==
          part.block_cc[bg.bus_block[cc.buses.front()]])
        ++closed_inside;
    }
    if (closed_inside != static_cast<int>(cc.blocks.size()) - 1)
      out.push_back({"tree-count",
                     cc.id + ": closed switches != blocks - 1 inside component"});

    int sources = 0;
    PhaseSet cc_union;
    bool energized_any = false;
    for (int b : cc.blocks) {
      energized_any |= x.block_energized[b];
      cc_union = cc_union.unite(bg.blocks[b].phase_union);
      for (int g : bg.blocks[b].generators) {
        if (x.gfm.size() > static_cast<size_t>(g) && x.gfm[g]) ++sources;
        if (n.generators[g].substation && x.substation_active) ++sources;
      }
    }
    if (energized_any) {
      if (sources != 1)
        out.push_back({"source-count",
                       cc.id + ": energized component has " +
                           std::to_string(sources) + " voltage sources"});
      if (cc.source_gen >= 0) {
        const auto& g = n.generators[cc.source_gen];
        const PhaseSet src_ph =
            g.substation ? n.buses[n.bus_index(g.bus)].phases : g.phases;
        if (!src_ph.covers(cc_union))
          out.push_back({"phase-cover",
                         cc.id + ": source " + g.id +
                             " does not cover the component phase union"});
      }
      // eligibility of the chosen source
      for (int b : cc.blocks) {
        for (int g : bg.blocks[b].generators) {
          if (x.gfm.size() <= static_cast<size_t>(g) || !x.gfm[g]) continue;
          if (!n.generators[g].phases.covers(bg.blocks[b].phase_union))
            out.push_back({"eligibility",
                           "grid-forming " + n.generators[g].id +
                               " does not cover its block phase union"});
        }
      }
    } else {
      if (sources != 0 && !cc.has_substation)
        out.push_back({"source-count",
                       cc.id + ": de-energized component carries a grid-forming DG"});
    }
  }
  return out;
}

SampleReport robust_feasibility_sample(const Network& n, const BlockGraph& bg,
                                       const MasterSolution& x, double level,
                                       bool clustered, int n_samples,
                                       std::uint64_t seed, ldf::Fidelity fidelity,
                                       const RPOPConfig& cfg, int jobs) {
  SampleReport rep;
  rep.total = n_samples;
  const auto topo = x.topology();
  std::vector<char> ok(n_samples, 0);
  auto run_range = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const auto scen =
          sample_scenario(n, level, clustered, derive_seed(seed, "sample", i));
      ldf::FeasOptions fo;
      fo.fidelity = fidelity;
      fo.eps_slack = cfg.eps;
      fo.beta_slack = cfg.resolved_beta_slack(n);
      fo.polygon_k = cfg.polygon_k;
      ok[i] = ldf::check_feasibility(n, bg, topo, x.setpoints, scen, fo).feasible;
    }
  };
  const int J = std::max(1, jobs);
  if (J <= 1) {
    run_range(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_samples + J - 1) / J;
    for (int t = 0; t < J && t * chunk < n_samples; ++t)
      pool.emplace_back(run_range, t * chunk, std::min(n_samples, (t + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < n_samples; ++i) rep.feasible += ok[i];
  return rep;
}

}  // namespace dnmg::rpop
