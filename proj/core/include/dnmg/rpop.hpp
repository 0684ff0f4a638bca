#pragma once

#include <map>
#include <string>
#include <vector>

#include "dnmg/lindistflow.hpp"
#include "dnmg/model.hpp"
#include "dnmg/network.hpp"
#include "dnmg/scenario.hpp"

namespace dnmg::rpop {

struct Contingency {
  enum class Kind { block, sw, substation };
  Kind kind = Kind::block;
  std::string id;  // block or switch id; empty for substation
};

struct RPOPConfig {
  double uncertainty = 0.0;
  double eps = 1e-3;           // Algorithm termination: slack sum <= eps (pu)
  double beta_slack = 0.0;     // 0 = auto: 1e4 * max cost_linear
  double block_weight_default = 10.0;
  std::map<std::string, double> block_weights;  // per block id overrides
  int max_iterations = 25;
  int polygon_k = 12;
  int scenario_cap = 12;
  enum class Representative { max, nominal, min };
  Representative representative = Representative::max;
  std::vector<Contingency> contingencies;
  opt::Tolerances solver;
  int jobs = 1;

  double resolved_beta_slack(const net::Network& n) const;
  double block_weight(const std::string& block_id) const;
};

struct MasterSolution {
  std::vector<bool> switch_closed;   // z^sw
  std::vector<bool> gfm;             // z^inv
  std::vector<bool> block_energized; // z^bl
  ldf::SetPoints setpoints;          // s*
  bool substation_active = true;
  double theta = 0.0;
  double objective = 0.0;  // includes the shed-weight constant

  ldf::Topology topology() const {
    return {block_energized, switch_closed, gfm, substation_active};
  }
  // flat view keyed like the subproblem rhs parametrization
  std::map<std::string, double> flat(const net::Network& n,
                                     const net::BlockGraph& bg) const;
};

// Feasibility cut: V2(x*) + pi^T A (x - x*) <= theta.
struct Cut {
  double v2 = 0.0;
  std::map<std::string, double> pi;  // row tag -> dual
  std::map<std::string, std::map<std::string, double>> coupling;  // A rows
  std::map<std::string, double> terms;  // pi^T A, per master key
  std::map<std::string, double> xstar;
  int scenario_index = -1;

  double eval(const std::map<std::string, double>& x) const;
};

struct SubproblemSolution {
  double objective = 0.0;  // V2
  double slack_sum = 0.0;
  opt::Solution sol;
};

struct IterationLog {
  int iteration = 0;
  double master_objective = 0.0;
  int worst_scenario = -1;
  double v2 = 0.0;
  double slack_sum = 0.0;
};

struct RPOPResult {
  MasterSolution solution;
  bool converged = false;
  std::vector<IterationLog> log;
  std::vector<Cut> cuts;
  double uncertainty = 0.0;
};

// --- constraint builders (master side) -----------------------------------------

struct MasterVars {
  std::vector<int> zbl;                       // per block
  std::vector<int> zsw;                       // per switch
  std::vector<int> zinv;                      // per generator (-1 for substation)
  std::vector<net::PerPhase<int>> sp, sq;     // per generator-phase
  int theta = -1;
  double obj_offset = 0.0;
  bool substation_active = true;
  std::vector<std::vector<int>> eligibility;  // per block
};

// Closed switches form a forest: orientation binaries, root indicators, and a
// single-commodity flow from a virtual root.
void radiality_constraints(opt::Model& m, const net::BlockGraph& bg,
                           const std::vector<int>& zsw);

// One voltage source per energized component: block color variables with
// switch-consistency rows and per-color commodity flows that force each
// component's color to originate at its own source block.
void coloring_constraints(opt::Model& m, const net::Network& n,
                          const net::BlockGraph& bg, const MasterVars& mv);

// Maximum-phase eligibility and the one-/two-hop topology rules.
void phase_eligibility_constraints(opt::Model& m, const net::Network& n,
                                   const net::BlockGraph& bg, const MasterVars& mv);

// Full first-stage MILP at the representative scenario, with cuts appended.
opt::Model build_master(const net::Network& n, const net::BlockGraph& bg,
                        const RPOPConfig& cfg, const std::vector<Cut>& cuts,
                        MasterVars& mv);

MasterSolution extract_master(const net::Network& n, const net::BlockGraph& bg,
                              const MasterVars& mv, const opt::Solution& sol);

// --- second stage ---------------------------------------------------------------

struct Subproblem {
  opt::Model model;
  ldf::AdjustmentHandles handles;
};

Subproblem build_subproblem(const net::Network& n, const net::BlockGraph& bg,
                            const MasterSolution& x, const net::ScenarioVector& s,
                            const RPOPConfig& cfg, bool tag_master_rhs = true);

SubproblemSolution solve_subproblem(const net::Network& n, const Subproblem& sp,
                                    const opt::Tolerances& tol);

struct WorstCase {
  int scenario_index = -1;
  double v2 = 0.0;
  double slack_sum = 0.0;
  SubproblemSolution sub;
  long lp_solves = 0;
};

WorstCase worst_case(const net::Network& n, const net::BlockGraph& bg,
                     const MasterSolution& x,
                     const std::vector<net::ScenarioVector>& scenarios,
                     const RPOPConfig& cfg);

Cut make_cut(const opt::Model& sub_model, const opt::Solution& sub_sol,
             const std::map<std::string, double>& xstar, double v2,
             int scenario_index);

RPOPResult cutting_plane(const net::Network& n, const RPOPConfig& cfg);

// --- verification ----------------------------------------------------------------

struct Violation {
  std::string kind;  // "cycle", "source-count", "phase-cover", ...
  std::string detail;
};

std::vector<Violation> verify_topology(const net::Network& n,
                                       const net::BlockGraph& bg,
                                       const MasterSolution& x);

struct SampleReport {
  int total = 0;
  int feasible = 0;
  double fraction() const { return total ? double(feasible) / total : 1.0; }
};

SampleReport robust_feasibility_sample(const net::Network& n,
                                       const net::BlockGraph& bg,
                                       const MasterSolution& x, double level,
                                       bool clustered, int n_samples,
                                       std::uint64_t seed, ldf::Fidelity fidelity,
                                       const RPOPConfig& cfg, int jobs = 1);

}  // namespace dnmg::rpop
