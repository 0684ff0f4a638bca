#pragma once

#include <string>
#include <vector>

#include "dnmg/model.hpp"
#include "dnmg/network.hpp"
#include "dnmg/scenario.hpp"

namespace dnmg::ldf {

// --- voltage sensitivity ------------------------------------------------------

// 3x3 real matrices mapping branch (p, q) to squared-voltage drop.
struct VoltageSensitivity {
  net::PerPhase<net::PerPhase<double>> mp{}, mq{};
};

// Closed form used throughout: diagonal 2r / 2x; off-diagonals
//   (a,b),(b,c),(c,a):  mp = -r + sqrt(3) x,  mq = -x - sqrt(3) r
//   (a,c),(b,a),(c,b):  mp = -r - sqrt(3) x,  mq = -x + sqrt(3) r
// with the sign convention pinned by the AC finite-difference test.
VoltageSensitivity voltage_sensitivity(const net::LineSegment& line);

// --- operating topology -------------------------------------------------------

struct Topology {
  std::vector<bool> block_energized;  // aligned with BlockGraph.blocks
  std::vector<bool> switch_closed;    // aligned with Network.switches
  std::vector<bool> gfm;              // aligned with Network.generators
  bool substation_active = true;
};

// Per-generator set-points (aligned with Network.generators).
struct SetPoints {
  std::vector<net::PerPhase<double>> p, q;
  static SetPoints zeros(const net::Network& n) {
    SetPoints s;
    s.p.assign(n.generators.size(), {});
    s.q.assign(n.generators.size(), {});
    return s;
  }
};

struct CCInfo {
  std::string id;           // "CC-S" (substation) or "CC-<source block>"
  std::vector<int> blocks;  // block positions
  std::vector<int> buses;   // bus indices
  bool energized = false;
  bool has_substation = false;
  int source_gen = -1;  // substation or GFM generator index, -1 if none
  int source_bus = -1;
};

// Resolves energization and the voltage source of each connected component.
std::vector<CCInfo> analyze_topology(const net::Network& net,
                                     const net::BlockGraph& bg,
                                     const Topology& topo);

// --- master variable keys (rhs parametrization for cuts) ----------------------

std::string key_zbl(const std::string& block_id);
std::string key_zsw(const std::string& switch_id);
std::string key_p(const std::string& gen_id, net::Phase ph);
std::string key_q(const std::string& gen_id, net::Phase ph);

// --- constraint emission ------------------------------------------------------

struct EmitOptions {
  int polygon_k = 12;
  bool fixed_topology = false;   // true: z values baked into the rhs
  bool tag_master_rhs = false;   // record rhs parametrization (subproblems)
};

// Binary variable handles for configuration-coupled emission.
struct CouplingVars {
  std::vector<int> zbl;  // per block
  std::vector<int> zsw;  // per switch
};

struct BranchVars {
  std::vector<net::PerPhase<int>> p_from, q_from, p_to, q_to;
};

struct NetVars {
  std::vector<net::PerPhase<int>> w;             // -1 on absent phases
  BranchVars lines, switches, xfmrs;             // lines/switches: from side only
  std::vector<net::PerPhase<int>> bal_p, bal_q;  // balance row ids per bus-phase
};

// Emits voltage bounds, voltage drop, polygonal flow limits, switch on/off
// coupling, transformer relations, and power-balance skeletons (load + shunt
// terms included; generator terms are added by the caller on the returned
// balance rows).
NetVars emit_flow_constraints(opt::Model& m, const net::Network& net,
                              const net::BlockGraph& bg,
                              const net::ScenarioVector& scenario,
                              const EmitOptions& opt,
                              const CouplingVars* coupled,
                              const Topology* fixed);

// --- plant evaluators ----------------------------------------------------------

struct LinearFlowResult {
  std::vector<net::PerPhase<double>> w, v;
  std::vector<net::PerPhase<double>> line_p, line_q;       // from-end, into branch
  std::vector<net::PerPhase<double>> switch_p, switch_q;   // from-end
  std::vector<net::PerPhase<double>> xf_p_from, xf_q_from; // into branch at both
  std::vector<net::PerPhase<double>> xf_p_to, xf_q_to;     // ends
  net::PerPhase<double> slack_p{}, slack_q{};
};

// Leaf-to-root aggregation of power balance, root-to-leaf voltage recovery.
// Throws std::invalid_argument when the component is not radial or has no
// slack bus.
LinearFlowResult solve_linear_power_flow(const net::Network& net,
                                         const net::BlockGraph& bg,
                                         const Topology& topo, const CCInfo& cc,
                                         const SetPoints& injections,
                                         const net::ScenarioVector& scenario,
                                         double slack_w0 = 1.0);

struct AcOptions {
  double tol = 1e-8;
  int max_iterations = 100;
  double slack_v = 1.0;
};

struct AcResult {
  bool converged = false;
  int iterations = 0;
  double max_mismatch = 0.0;
  std::vector<net::PerPhase<net::Complex>> voltage;  // per bus
  net::PerPhase<net::Complex> slack_power{};
};

// Backward/forward sweep on the complex system to 1e-8 (configurable).
AcResult solve_ac_fixed_point(const net::Network& net, const net::BlockGraph& bg,
                              const Topology& topo, const CCInfo& cc,
                              const SetPoints& injections,
                              const net::ScenarioVector& scenario,
                              const AcOptions& opt = {});

// --- second-stage LP assembly ---------------------------------------------------

struct AdjustmentSpec {
  double beta_slack = 1e4;
  int polygon_k = 12;
  bool tag_master_rhs = false;
};

struct AdjustmentHandles {
  NetVars vars;
  // per bus-phase slack variables, one pair per power component
  std::vector<net::PerPhase<int>> hp_plus, hp_minus, hq_plus, hq_minus;
  // per generator-phase adjustments
  std::vector<net::PerPhase<int>> op_plus, op_minus, oq_plus, oq_minus;
};

// The second-stage LP: lindistflow at fixed topology, power balance with
// slacks, set-point adjustments bounded by ramping and capacity. Row rhs
// parametrization (for cut assembly) is recorded when tag_master_rhs is set.
AdjustmentHandles build_adjustment_lp(opt::Model& m, const net::Network& net,
                                      const net::BlockGraph& bg,
                                      const Topology& topo,
                                      const SetPoints& setpoints,
                                      const net::ScenarioVector& scenario,
                                      const AdjustmentSpec& spec);

// --- feasibility checking --------------------------------------------------------

enum class Fidelity { linear, ac };

struct FeasOptions {
  Fidelity fidelity = Fidelity::linear;
  double eps_slack = 1e-3;   // per-unit slack-sum threshold (linear)
  double check_tol = 1e-5;   // bound-check tolerance (ac)
  double beta_slack = 1e4;
  int polygon_k = 12;
  AcOptions ac;
};

struct FeasReport {
  bool feasible = false;
  double slack_sum = 0.0;      // linear fidelity
  double max_violation = 0.0;  // ac fidelity (bound violations, per-unit)
};

// Fixed topology + set-points, one realized scenario. Linear fidelity solves
// the per-component second-stage LP; ac fidelity applies a deterministic
// headroom-proportional re-dispatch and checks all bounds on the AC solution.
FeasReport check_feasibility(const net::Network& net, const net::BlockGraph& bg,
                             const Topology& topo, const SetPoints& setpoints,
                             const net::ScenarioVector& scenario,
                             const FeasOptions& opt = {});

}  // namespace dnmg::ldf
