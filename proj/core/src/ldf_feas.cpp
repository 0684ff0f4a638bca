#include <algorithm>
#include <cmath>
#include <map>

#include "dnmg/lindistflow.hpp"
#include "dnmg/simplex.hpp"

namespace dnmg::ldf {

using namespace dnmg::net;
using opt::Model;
using opt::Sense;

AdjustmentHandles build_adjustment_lp(Model& m, const Network& net,
                                      const BlockGraph& bg, const Topology& topo,
                                      const SetPoints& sp,
                                      const ScenarioVector& scen,
                                      const AdjustmentSpec& spec) {
  EmitOptions eo;
  eo.polygon_k = spec.polygon_k;
  eo.fixed_topology = true;
  eo.tag_master_rhs = spec.tag_master_rhs;

  AdjustmentHandles h;
  h.vars = emit_flow_constraints(m, net, bg, scen, eo, nullptr, &topo);

  // slacks: one nonnegative pair per bus-phase and power component
  h.hp_plus.assign(net.buses.size(), {-1, -1, -1});
  h.hp_minus.assign(net.buses.size(), {-1, -1, -1});
  h.hq_plus.assign(net.buses.size(), {-1, -1, -1});
  h.hq_minus.assign(net.buses.size(), {-1, -1, -1});
  for (size_t b = 0; b < net.buses.size(); ++b) {
    const auto& bus = net.buses[b];
    for (Phase ph : bus.phases) {
      const int i = pidx(ph);
      const std::string sfx = "[" + bus.id + ":" + phase_char(ph) + "]";
      h.hp_plus[b][i] = m.add_var("hp+" + sfx, 0.0, opt::kInf);
      h.hp_minus[b][i] = m.add_var("hp-" + sfx, 0.0, opt::kInf);
      h.hq_plus[b][i] = m.add_var("hq+" + sfx, 0.0, opt::kInf);
      h.hq_minus[b][i] = m.add_var("hq-" + sfx, 0.0, opt::kInf);
      for (int v : {h.hp_plus[b][i], h.hp_minus[b][i], h.hq_plus[b][i],
                    h.hq_minus[b][i]})
        m.add_obj(v, spec.beta_slack);
      m.add_term(h.vars.bal_p[b][i], h.hp_plus[b][i], 1.0);
      m.add_term(h.vars.bal_p[b][i], h.hp_minus[b][i], -1.0);
      m.add_term(h.vars.bal_q[b][i], h.hq_plus[b][i], 1.0);
      m.add_term(h.vars.bal_q[b][i], h.hq_minus[b][i], -1.0);
    }
  }

  // set-point adjustments with ramp and capacity coupling
  const size_t ng = net.generators.size();
  h.op_plus.assign(ng, {-1, -1, -1});
  h.op_minus.assign(ng, {-1, -1, -1});
  h.oq_plus.assign(ng, {-1, -1, -1});
  h.oq_minus.assign(ng, {-1, -1, -1});
  for (size_t g = 0; g < ng; ++g) {
    const auto& gen = net.generators[g];
    const int b = net.bus_index(gen.bus);
    const int blk = bg.bus_block[b];
    const double z = topo.block_energized[blk] ? 1.0 : 0.0;
    const bool sub_off = gen.substation && !topo.substation_active;
    for (Phase ph : gen.phases) {
      const int i = pidx(ph);
      const std::string sfx = "[" + gen.id + ":" + phase_char(ph) + "]";
      const double ramp = gen.ramp_limit[i];
      h.op_plus[g][i] = m.add_var("op+" + sfx, 0.0, ramp);
      h.op_minus[g][i] = m.add_var("op-" + sfx, 0.0, ramp);
      h.oq_plus[g][i] = m.add_var("oq+" + sfx, 0.0, ramp);
      h.oq_minus[g][i] = m.add_var("oq-" + sfx, 0.0, ramp);
      // adjusted output feeds the balance rows: s* + o+ - o-
      m.add_term(h.vars.bal_p[b][i], h.op_plus[g][i], -1.0);
      m.add_term(h.vars.bal_p[b][i], h.op_minus[g][i], 1.0);
      m.add_term(h.vars.bal_q[b][i], h.oq_plus[g][i], -1.0);
      m.add_term(h.vars.bal_q[b][i], h.oq_minus[g][i], 1.0);
      const int rp = h.vars.bal_p[b][i];
      const int rq = h.vars.bal_q[b][i];
      m.set_rhs(rp, m.row(rp).rhs + sp.p[g][i]);
      m.set_rhs(rq, m.row(rq).rhs + sp.q[g][i]);
      if (spec.tag_master_rhs) {
        m.add_rhs_param(rp, key_p(gen.id, ph), 1.0);
        m.add_rhs_param(rq, key_q(gen.id, ph), 1.0);
      }
      m.add_obj(h.op_plus[g][i], gen.cost_linear);
      m.add_obj(h.op_minus[g][i], -gen.cost_linear);

      // capacity: o+ <= z*smax - s*, o- <= s* - z*smin (per component).
      // A disabled substation behaves like a de-energized generator.
      const double zp = sub_off ? 0.0 : z;
      const int cup = m.add_row("oplim+" + sfx, Sense::le, zp * gen.p_max[i] - sp.p[g][i]);
      m.add_term(cup, h.op_plus[g][i], 1.0);
      const int cdn = m.add_row("oplim-" + sfx, Sense::le, sp.p[g][i] - zp * gen.p_min[i]);
      m.add_term(cdn, h.op_minus[g][i], 1.0);
      const int cuq = m.add_row("oqlim+" + sfx, Sense::le, zp * gen.q_max[i] - sp.q[g][i]);
      m.add_term(cuq, h.oq_plus[g][i], 1.0);
      const int cdq = m.add_row("oqlim-" + sfx, Sense::le, sp.q[g][i] - zp * gen.q_min[i]);
      m.add_term(cdq, h.oq_minus[g][i], 1.0);
      if (spec.tag_master_rhs) {
        const std::string zkey = key_zbl(bg.blocks[blk].id);
        if (!sub_off) {
          m.add_rhs_param(cup, zkey, gen.p_max[i]);
          m.add_rhs_param(cdn, zkey, -gen.p_min[i]);
          m.add_rhs_param(cuq, zkey, gen.q_max[i]);
          m.add_rhs_param(cdq, zkey, -gen.q_min[i]);
        }
        m.add_rhs_param(cup, key_p(gen.id, ph), -1.0);
        m.add_rhs_param(cdn, key_p(gen.id, ph), 1.0);
        m.add_rhs_param(cuq, key_q(gen.id, ph), -1.0);
        m.add_rhs_param(cdq, key_q(gen.id, ph), 1.0);
      }
    }
  }
  return h;
}

namespace {

// Standalone copy of one component (plus its interior open switches), used to
// keep the per-sample feasibility LPs small.
struct SubNet {
  Network sub;
  BlockGraph bg;
  Topology topo;
  SetPoints sp;
  ScenarioVector scen;
};

SubNet extract_component(const Network& net, const Topology& topo,
                         const CCInfo& cc, const SetPoints& sp,
                         const ScenarioVector& scen) {
  SubNet s;
  std::vector<char> in_cc(net.buses.size(), 0);
  for (int b : cc.buses) in_cc[b] = 1;
  s.sub.name = net.name + ":" + cc.id;
  s.sub.base_power_va = net.base_power_va;
  s.sub.base_voltage_v = net.base_voltage_v;
  for (int b : cc.buses) s.sub.buses.push_back(net.buses[b]);
  auto keep = [&](const std::string& f, const std::string& t) {
    return in_cc[net.bus_index(f)] && in_cc[net.bus_index(t)];
  };
  for (const auto& l : net.lines)
    if (keep(l.from, l.to)) s.sub.lines.push_back(l);
  std::vector<int> sw_map;
  for (size_t i = 0; i < net.switches.size(); ++i)
    if (keep(net.switches[i].from, net.switches[i].to)) {
      s.sub.switches.push_back(net.switches[i]);
      sw_map.push_back(static_cast<int>(i));
    }
  for (const auto& t : net.transformers)
    if (keep(t.from, t.to)) s.sub.transformers.push_back(t);
  std::vector<int> gen_map, load_map;
  for (size_t g = 0; g < net.generators.size(); ++g)
    if (in_cc[net.bus_index(net.generators[g].bus)]) {
      s.sub.generators.push_back(net.generators[g]);
      gen_map.push_back(static_cast<int>(g));
    }
  for (size_t d = 0; d < net.loads.size(); ++d)
    if (in_cc[net.bus_index(net.loads[d].bus)]) {
      s.sub.loads.push_back(net.loads[d]);
      load_map.push_back(static_cast<int>(d));
    }
  s.sub.clusters = net.clusters;

  s.bg = compute_blocks(s.sub);
  s.topo.block_energized.assign(s.bg.blocks.size(), true);
  s.topo.switch_closed.resize(s.sub.switches.size());
  for (size_t i = 0; i < sw_map.size(); ++i)
    s.topo.switch_closed[i] = topo.switch_closed[sw_map[i]];
  s.topo.gfm.assign(s.sub.generators.size(), false);
  for (size_t g = 0; g < gen_map.size(); ++g)
    s.topo.gfm[g] = gen_map[g] < static_cast<int>(topo.gfm.size()) &&
                    topo.gfm[gen_map[g]];
  s.topo.substation_active = topo.substation_active;
  for (size_t g = 0; g < gen_map.size(); ++g) {
    s.sp.p.push_back(sp.p[gen_map[g]]);
    s.sp.q.push_back(sp.q[gen_map[g]]);
  }
  for (size_t d = 0; d < load_map.size(); ++d) {
    s.scen.p.push_back(scen.p[load_map[d]]);
    s.scen.q.push_back(scen.q[load_map[d]]);
  }
  return s;
}

FeasReport check_linear(const Network& net, const BlockGraph& bg,
                        const Topology& topo, const SetPoints& sp,
                        const ScenarioVector& scen, const FeasOptions& opt) {
  FeasReport rep;
  rep.feasible = true;
  const auto ccs = analyze_topology(net, bg, topo);
  for (const auto& cc : ccs) {
    if (!cc.energized) continue;
    SubNet sn = extract_component(net, topo, cc, sp, scen);
    Model m;
    AdjustmentSpec spec;
    spec.beta_slack = opt.beta_slack;
    spec.polygon_k = opt.polygon_k;
    auto h = build_adjustment_lp(m, sn.sub, sn.bg, sn.topo, sn.sp, sn.scen, spec);
    const auto sol = opt::solve_lp(m);
    if (sol.status != opt::Status::optimal) {
      // a second-stage LP with free slacks should never be infeasible
      rep.feasible = false;
      rep.slack_sum = opt::kInf;
      return rep;
    }
    double slack = 0.0;
    for (size_t b = 0; b < sn.sub.buses.size(); ++b)
      for (Phase ph : sn.sub.buses[b].phases) {
        const int i = pidx(ph);
        slack += sol.x[h.hp_plus[b][i]] + sol.x[h.hp_minus[b][i]] +
                 sol.x[h.hq_plus[b][i]] + sol.x[h.hq_minus[b][i]];
      }
    rep.slack_sum += slack;
  }
  rep.feasible = rep.slack_sum <= opt.eps_slack;
  rep.max_violation = rep.slack_sum;
  return rep;
}

FeasReport check_ac(const Network& net, const BlockGraph& bg, const Topology& topo,
                    const SetPoints& sp, const ScenarioVector& scen,
                    const FeasOptions& opt) {
  FeasReport rep;
  rep.feasible = true;
  const auto ccs = analyze_topology(net, bg, topo);

  for (const auto& cc : ccs) {
    if (!cc.energized) continue;
    // deterministic re-dispatch: spread the gap between realized load and the
    // set-point sum over controllable units, proportional to headroom and
    // clipped by ramp, so the source lands back near its own set-point
    SetPoints adj = sp;
    for (Phase phx : PhaseSet::all()) {
      const int i = pidx(phx);
      double load_cc = 0.0, setp_cc = 0.0;
      for (size_t d = 0; d < net.loads.size(); ++d) {
        const int b = net.bus_index(net.loads[d].bus);
        if (std::find(cc.buses.begin(), cc.buses.end(), b) == cc.buses.end())
          continue;
        if (!topo.block_energized[bg.bus_block[b]]) continue;
        load_cc += scen.p[d][i];
      }
      std::vector<int> ctrl;
      for (size_t g = 0; g < net.generators.size(); ++g) {
        const int b = net.bus_index(net.generators[g].bus);
        if (std::find(cc.buses.begin(), cc.buses.end(), b) == cc.buses.end())
          continue;
        if (!net.generators[g].phases.has(phx)) continue;
        setp_cc += sp.p[g][i];
        if (static_cast<int>(g) != cc.source_gen) ctrl.push_back(static_cast<int>(g));
      }
      double delta = load_cc - setp_cc;
      double room = 0.0;
      std::vector<double> head(ctrl.size(), 0.0);
      for (size_t k = 0; k < ctrl.size(); ++k) {
        const auto& g = net.generators[ctrl[k]];
        head[k] = delta > 0
                      ? std::min(g.ramp_limit[i], g.p_max[i] - sp.p[ctrl[k]][i])
                      : std::min(g.ramp_limit[i], sp.p[ctrl[k]][i] - g.p_min[i]);
        head[k] = std::max(0.0, head[k]);
        room += head[k];
      }
      if (room > 1e-12) {
        const double take = std::min(std::abs(delta), room);
        for (size_t k = 0; k < ctrl.size(); ++k)
          adj.p[ctrl[k]][i] += (delta > 0 ? 1.0 : -1.0) * take * head[k] / room;
      }
    }

    const auto ac = solve_ac_fixed_point(net, bg, topo, cc, adj, scen, opt.ac);
    if (!ac.converged) {
      rep.feasible = false;
      rep.max_violation = std::max(rep.max_violation, ac.max_mismatch);
      continue;
    }
    double viol = 0.0;
    for (int b : cc.buses) {
      const auto& bus = net.buses[b];
      for (Phase ph : bus.phases) {
        const double vm = std::abs(ac.voltage[b][pidx(ph)]);
        viol = std::max(viol, bus.v_min - vm);
        viol = std::max(viol, vm - bus.v_max);
      }
    }
    // element flow limits from a linear re-solve are close enough for bound
    // screening; use the ac slack for the source checks
    if (cc.source_gen >= 0) {
      const auto& g = net.generators[cc.source_gen];
      for (Phase ph : g.phases) {
        const int i = pidx(ph);
        const double pslack = ac.slack_power[i].real();
        const double qslack = ac.slack_power[i].imag();
        viol = std::max(viol, g.p_min[i] - pslack);
        viol = std::max(viol, pslack - g.p_max[i]);
        viol = std::max(viol, g.q_min[i] - qslack);
        viol = std::max(viol, qslack - g.q_max[i]);
        // source ramping mirrors the second-stage adjustment limits
        viol = std::max(viol, std::abs(pslack - sp.p[cc.source_gen][i]) -
                                  g.ramp_limit[i]);
      }
    }
    // branch apparent-power limits against the ac currents
    {
      const auto lin = solve_linear_power_flow(net, bg, topo, cc, adj, scen, 1.0);
      auto check_branch = [&](const PerPhase<double>& p, const PerPhase<double>& q,
                              const PerPhase<double>& lim, PhaseSet phs) {
        for (Phase ph : phs) {
          const int i = pidx(ph);
          viol = std::max(viol, std::hypot(p[i], q[i]) - lim[i]);
        }
      };
      for (size_t l = 0; l < net.lines.size(); ++l)
        check_branch(lin.line_p[l], lin.line_q[l], net.lines[l].flow_limit,
                     net.lines[l].phases);
      for (size_t s = 0; s < net.switches.size(); ++s)
        if (topo.switch_closed[s])
          check_branch(lin.switch_p[s], lin.switch_q[s], net.switches[s].flow_limit,
                       net.switches[s].phases);
      for (size_t t = 0; t < net.transformers.size(); ++t) {
        check_branch(lin.xf_p_from[t], lin.xf_q_from[t],
                     net.transformers[t].flow_limit, net.transformers[t].phases);
        check_branch(lin.xf_p_to[t], lin.xf_q_to[t],
                     net.transformers[t].flow_limit, net.transformers[t].phases);
      }
    }
    rep.max_violation = std::max(rep.max_violation, viol);
  }
  rep.feasible = rep.max_violation <= opt.check_tol;
  return rep;
}

}  // namespace

FeasReport check_feasibility(const Network& net, const BlockGraph& bg,
                             const Topology& topo, const SetPoints& sp,
                             const ScenarioVector& scen, const FeasOptions& opt) {
  return opt.fidelity == Fidelity::linear ? check_linear(net, bg, topo, sp, scen, opt)
                                          : check_ac(net, bg, topo, sp, scen, opt);
}

}  // namespace dnmg::ldf
