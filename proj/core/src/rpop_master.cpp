#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dnmg/rpop.hpp"
#include "dnmg/simplex.hpp"

namespace dnmg::rpop {

using namespace dnmg::net;
using opt::Model;
using opt::Sense;

double RPOPConfig::resolved_beta_slack(const Network& n) const {
  if (beta_slack > 0) return beta_slack;
  double cmax = 0.0;
  for (const auto& g : n.generators) cmax = std::max(cmax, g.cost_linear);
  return 1e4 * std::max(cmax, 1.0);
}

double RPOPConfig::block_weight(const std::string& block_id) const {
  const auto it = block_weights.find(block_id);
  return it == block_weights.end() ? block_weight_default : it->second;
}

std::map<std::string, double> MasterSolution::flat(const Network& n,
                                                   const BlockGraph& bg) const {
  std::map<std::string, double> x;
  for (size_t b = 0; b < bg.blocks.size(); ++b)
    x[ldf::key_zbl(bg.blocks[b].id)] = block_energized[b] ? 1.0 : 0.0;
  for (size_t s = 0; s < n.switches.size(); ++s)
    x[ldf::key_zsw(n.switches[s].id)] = switch_closed[s] ? 1.0 : 0.0;
  for (size_t g = 0; g < n.generators.size(); ++g) {
    for (Phase ph : n.generators[g].phases) {
      x[ldf::key_p(n.generators[g].id, ph)] = setpoints.p[g][pidx(ph)];
      x[ldf::key_q(n.generators[g].id, ph)] = setpoints.q[g][pidx(ph)];
    }
  }
  return x;
}

double Cut::eval(const std::map<std::string, double>& x) const {
  double v = v2;
  for (const auto& [key, coef] : terms) {
    const auto it = x.find(key);
    const double xv = it == x.end() ? 0.0 : it->second;
    const auto xs = xstar.find(key);
    const double x0 = xs == xstar.end() ? 0.0 : xs->second;
    v += coef * (xv - x0);
  }
  return v;
}

namespace {

bool substation_disabled(const RPOPConfig& cfg) {
  for (const auto& c : cfg.contingencies)
    if (c.kind == Contingency::Kind::substation) return true;
  return false;
}

}  // namespace

Model build_master(const Network& n, const BlockGraph& bg, const RPOPConfig& cfg,
                   const std::vector<Cut>& cuts, MasterVars& mv) {
  Model m;
  mv = MasterVars{};
  mv.substation_active = !substation_disabled(cfg);
  mv.eligibility = gfm_eligibility(n, bg);

  const int nb = static_cast<int>(bg.blocks.size());
  const int ns = static_cast<int>(n.switches.size());

  // first-stage binaries (decision variables first: branching prefers them)
  for (int b = 0; b < nb; ++b)
    mv.zbl.push_back(m.add_var(ldf::key_zbl(bg.blocks[b].id), 0, 1, true));
  for (int s = 0; s < ns; ++s)
    mv.zsw.push_back(m.add_var(ldf::key_zsw(n.switches[s].id), 0, 1, true));
  mv.zinv.assign(n.generators.size(), -1);
  for (size_t g = 0; g < n.generators.size(); ++g) {
    if (n.generators[g].substation) continue;
    mv.zinv[g] = m.add_var("zinv[" + n.generators[g].id + "]", 0, 1, true);
  }

  // set-points and their block-coupled capacity box
  mv.sp.assign(n.generators.size(), {-1, -1, -1});
  mv.sq.assign(n.generators.size(), {-1, -1, -1});
  for (size_t g = 0; g < n.generators.size(); ++g) {
    const auto& gen = n.generators[g];
    const int blk = bg.bus_block[n.bus_index(gen.bus)];
    const bool off = gen.substation && !mv.substation_active;
    for (Phase ph : gen.phases) {
      const int i = pidx(ph);
      const double plo = off ? 0.0 : std::min(gen.p_min[i], 0.0);
      const double phi = off ? 0.0 : std::max(gen.p_max[i], 0.0);
      const double qlo = off ? 0.0 : std::min(gen.q_min[i], 0.0);
      const double qhi = off ? 0.0 : std::max(gen.q_max[i], 0.0);
      mv.sp[g][i] = m.add_var(ldf::key_p(gen.id, ph), plo, phi);
      mv.sq[g][i] = m.add_var(ldf::key_q(gen.id, ph), qlo, qhi);
      if (off) continue;
      // z s_min <= s <= z s_max, per component
      const std::string sfx = "[" + gen.id + ":" + phase_char(ph) + "]";
      int r = m.add_row("genbox_p+" + sfx, Sense::le, 0.0);
      m.add_term(r, mv.sp[g][i], 1.0);
      m.add_term(r, mv.zbl[blk], -gen.p_max[i]);
      r = m.add_row("genbox_p-" + sfx, Sense::ge, 0.0);
      m.add_term(r, mv.sp[g][i], 1.0);
      m.add_term(r, mv.zbl[blk], -gen.p_min[i]);
      r = m.add_row("genbox_q+" + sfx, Sense::le, 0.0);
      m.add_term(r, mv.sq[g][i], 1.0);
      m.add_term(r, mv.zbl[blk], -gen.q_max[i]);
      r = m.add_row("genbox_q-" + sfx, Sense::ge, 0.0);
      m.add_term(r, mv.sq[g][i], 1.0);
      m.add_term(r, mv.zbl[blk], -gen.q_min[i]);
    }
  }

  // objective: sum beta (1 - zbl) + c1 p + c0 zbl_g + theta
  mv.obj_offset = 0.0;
  for (int b = 0; b < nb; ++b) {
    const double beta = cfg.block_weight(bg.blocks[b].id);
    mv.obj_offset += beta;
    m.add_obj(mv.zbl[b], -beta);
  }
  for (size_t g = 0; g < n.generators.size(); ++g) {
    const auto& gen = n.generators[g];
    for (Phase ph : gen.phases) m.add_obj(mv.sp[g][pidx(ph)], gen.cost_linear);
    const int blk = bg.bus_block[n.bus_index(gen.bus)];
    m.add_obj(mv.zbl[blk], gen.cost_fixed);
  }
  mv.theta = m.add_var("theta", 0.0, opt::kInf);
  m.add_obj(mv.theta, 1.0);

  // blocks joined by a closed switch share their energization state
  for (int s = 0; s < ns; ++s) {
    const auto [i, j] = bg.switch_ends[s];
    int r = m.add_row("zlink[" + n.switches[s].id + "+]", Sense::le, 1.0);
    m.add_term(r, mv.zbl[i], 1.0);
    m.add_term(r, mv.zbl[j], -1.0);
    m.add_term(r, mv.zsw[s], 1.0);
    r = m.add_row("zlink[" + n.switches[s].id + "-]", Sense::le, 1.0);
    m.add_term(r, mv.zbl[j], 1.0);
    m.add_term(r, mv.zbl[i], -1.0);
    m.add_term(r, mv.zsw[s], 1.0);
  }

  radiality_constraints(m, bg, mv.zsw);
  coloring_constraints(m, n, bg, mv);
  phase_eligibility_constraints(m, n, bg, mv);

  // contingencies
  for (const auto& c : cfg.contingencies) {
    switch (c.kind) {
      case Contingency::Kind::block: {
        const int b = bg.block_index(c.id);
        if (b < 0) throw std::invalid_argument("unknown block in contingency: " + c.id);
        m.set_bounds(mv.zbl[b], 0.0, 0.0);
        break;
      }
      case Contingency::Kind::sw: {
        const int s = n.switch_index(c.id);
        if (s < 0) throw std::invalid_argument("unknown switch in contingency: " + c.id);
        m.set_bounds(mv.zsw[s], 0.0, 0.0);
        break;
      }
      case Contingency::Kind::substation:
        break;  // handled via substation_active
    }
  }

  // lindistflow block at the representative scenario
  const auto u = UncertaintyModel::from_level(n, cfg.uncertainty);
  ScenarioVector rep;
  switch (cfg.representative) {
    case RPOPConfig::Representative::max: rep = max_corner(n, u); break;
    case RPOPConfig::Representative::nominal: rep = nominal_scenario(n); break;
    case RPOPConfig::Representative::min: {
      rep.p = u.p_lo;
      rep.q = u.q_lo;
      break;
    }
  }
  ldf::EmitOptions eo;
  eo.polygon_k = cfg.polygon_k;
  ldf::CouplingVars cv{mv.zbl, mv.zsw};
  const auto nv = ldf::emit_flow_constraints(m, n, bg, rep, eo, &cv, nullptr);
  for (size_t g = 0; g < n.generators.size(); ++g) {
    const int bus = n.bus_index(n.generators[g].bus);
    for (Phase ph : n.generators[g].phases) {
      const int i = pidx(ph);
      m.add_term(nv.bal_p[bus][i], mv.sp[g][i], -1.0);
      m.add_term(nv.bal_q[bus][i], mv.sq[g][i], -1.0);
    }
  }

  // accumulated feasibility cuts, normalized by their largest coefficient
  // (the inequality is scale-free; raw slack duals are beta_slack-sized)
  for (size_t k = 0; k < cuts.size(); ++k) {
    const auto& cut = cuts[k];
    double scale = 1.0;
    for (const auto& [key, coef] : cut.terms)
      scale = std::max(scale, std::abs(coef));
    double rhs = -cut.v2 / scale;
    const int r = m.add_row("cut[" + std::to_string(k) + "]", Sense::le, 0.0);
    for (const auto& [key, coef] : cut.terms) {
      const int v = m.find_var(key);
      if (v < 0) throw std::logic_error("cut references unknown master key " + key);
      m.add_term(r, v, coef / scale);
      const auto it = cut.xstar.find(key);
      rhs += (coef / scale) * (it == cut.xstar.end() ? 0.0 : it->second);
    }
    m.add_term(r, mv.theta, -1.0 / scale);
    m.set_rhs(r, rhs);
  }
  return m;
}

MasterSolution extract_master(const Network& n, const BlockGraph& bg,
                              const MasterVars& mv, const opt::Solution& sol) {
  MasterSolution x;
  x.substation_active = mv.substation_active;
  x.block_energized.resize(bg.blocks.size());
  for (size_t b = 0; b < bg.blocks.size(); ++b)
    x.block_energized[b] = sol.x[mv.zbl[b]] > 0.5;
  x.switch_closed.resize(n.switches.size());
  for (size_t s = 0; s < n.switches.size(); ++s)
    x.switch_closed[s] = sol.x[mv.zsw[s]] > 0.5;
  x.gfm.assign(n.generators.size(), false);
  for (size_t g = 0; g < n.generators.size(); ++g)
    if (mv.zinv[g] >= 0) x.gfm[g] = sol.x[mv.zinv[g]] > 0.5;
  x.setpoints = ldf::SetPoints::zeros(n);
  for (size_t g = 0; g < n.generators.size(); ++g) {
    for (Phase ph : n.generators[g].phases) {
      const int i = pidx(ph);
      x.setpoints.p[g][i] = sol.x[mv.sp[g][i]];
      x.setpoints.q[g][i] = sol.x[mv.sq[g][i]];
    }
  }
  x.theta = sol.x[mv.theta];
  x.objective = sol.objective + mv.obj_offset;
  return x;
}

}  // namespace dnmg::rpop
