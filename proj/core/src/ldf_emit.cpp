#include <cmath>
#include <stdexcept>

#include "dnmg/lindistflow.hpp"
#include "dnmg/simplex.hpp"

namespace dnmg::ldf {

using namespace dnmg::net;
using opt::Model;
using opt::Sense;

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

struct Emitter {
  Model& m;
  const Network& net;
  const BlockGraph& bg;
  const ScenarioVector& scen;
  const EmitOptions& opt;
  const CouplingVars* coupled;
  const Topology* fixed;
  NetVars out;
  double big_m_w = 1.21;

  double zbl_val(int block) const { return fixed->block_energized[block] ? 1.0 : 0.0; }
  double zsw_val(int sw) const { return fixed->switch_closed[sw] ? 1.0 : 0.0; }

  void voltage_vars_and_bounds() {
    out.w.assign(net.buses.size(), {-1, -1, -1});
    for (size_t b = 0; b < net.buses.size(); ++b) {
      const auto& bus = net.buses[b];
      big_m_w = std::max(big_m_w, bus.v_max * bus.v_max);
      const int blk = bg.bus_block[b];
      for (Phase ph : bus.phases) {
        const int i = pidx(ph);
        out.w[b][i] = m.add_var("w[" + bus.id + ":" + phase_char(ph) + "]", 0.0,
                                opt::kInf);
        const double wlo = bus.v_min * bus.v_min;
        const double whi = bus.v_max * bus.v_max;
        // z-coupled voltage box: z*vmin^2 <= w <= z*vmax^2
        const std::string tag = "vlim[" + bus.id + ":" + phase_char(ph) + "]";
        if (!opt.fixed_topology) {
          const int up = m.add_row(tag + "+", Sense::le, 0.0);
          m.add_term(up, out.w[b][i], 1.0);
          m.add_term(up, coupled->zbl[blk], -whi);
          const int dn = m.add_row(tag + "-", Sense::ge, 0.0);
          m.add_term(dn, out.w[b][i], 1.0);
          m.add_term(dn, coupled->zbl[blk], -wlo);
        } else {
          const double z = zbl_val(blk);
          const int up = m.add_row(tag + "+", Sense::le, whi * z);
          m.add_term(up, out.w[b][i], 1.0);
          const int dn = m.add_row(tag + "-", Sense::ge, wlo * z);
          m.add_term(dn, out.w[b][i], 1.0);
          if (opt.tag_master_rhs) {
            m.add_rhs_param(up, key_zbl(bg.blocks[blk].id), whi);
            m.add_rhs_param(dn, key_zbl(bg.blocks[blk].id), wlo);
          }
        }
      }
    }
  }

  void balance_skeleton() {
    out.bal_p.assign(net.buses.size(), {-1, -1, -1});
    out.bal_q.assign(net.buses.size(), {-1, -1, -1});
    for (size_t b = 0; b < net.buses.size(); ++b) {
      const auto& bus = net.buses[b];
      for (Phase ph : bus.phases) {
        const int i = pidx(ph);
        const int rp = m.add_row("balp[" + bus.id + ":" + phase_char(ph) + "]",
                                 Sense::eq, 0.0);
        const int rq = m.add_row("balq[" + bus.id + ":" + phase_char(ph) + "]",
                                 Sense::eq, 0.0);
        out.bal_p[b][i] = rp;
        out.bal_q[b][i] = rq;
        // shunt: consumes g*w active, -b*w reactive
        const double g = bus.shunt[i].real();
        const double susc = bus.shunt[i].imag();
        if (g != 0.0) m.add_term(rp, out.w[b][i], g);
        if (susc != 0.0) m.add_term(rq, out.w[b][i], -susc);
      }
    }
    // load terms, aggregated per bus-phase
    for (size_t d = 0; d < net.loads.size(); ++d) {
      const auto& ld = net.loads[d];
      const int b = net.bus_index(ld.bus);
      const int blk = bg.bus_block[b];
      for (Phase ph : ld.phases) {
        const int i = pidx(ph);
        const double lp = scen.p[d][i];
        const double lq = scen.q[d][i];
        if (!opt.fixed_topology) {
          m.add_term(out.bal_p[b][i], coupled->zbl[blk], lp);
          m.add_term(out.bal_q[b][i], coupled->zbl[blk], lq);
        } else {
          const double z = zbl_val(blk);
          m.set_rhs(out.bal_p[b][i], m.row(out.bal_p[b][i]).rhs - z * lp);
          m.set_rhs(out.bal_q[b][i], m.row(out.bal_q[b][i]).rhs - z * lq);
          if (opt.tag_master_rhs) {
            m.add_rhs_param(out.bal_p[b][i], key_zbl(bg.blocks[blk].id), -lp);
            m.add_rhs_param(out.bal_q[b][i], key_zbl(bg.blocks[blk].id), -lq);
          }
        }
      }
    }
  }

  // one (p, q) pair at the from end; to-end contribution is the negative
  void lines_section() {
    out.lines.p_from.assign(net.lines.size(), {-1, -1, -1});
    out.lines.q_from.assign(net.lines.size(), {-1, -1, -1});
    for (size_t l = 0; l < net.lines.size(); ++l) {
      const auto& ln = net.lines[l];
      const int fb = net.bus_index(ln.from);
      const int tb = net.bus_index(ln.to);
      for (Phase ph : ln.phases) {
        const int i = pidx(ph);
        out.lines.p_from[l][i] =
            m.add_var("p[" + ln.id + ":" + phase_char(ph) + "]", -opt::kInf, opt::kInf);
        out.lines.q_from[l][i] =
            m.add_var("q[" + ln.id + ":" + phase_char(ph) + "]", -opt::kInf, opt::kInf);
        m.add_term(out.bal_p[fb][i], out.lines.p_from[l][i], 1.0);
        m.add_term(out.bal_q[fb][i], out.lines.q_from[l][i], 1.0);
        m.add_term(out.bal_p[tb][i], out.lines.p_from[l][i], -1.0);
        m.add_term(out.bal_q[tb][i], out.lines.q_from[l][i], -1.0);
      }
      const auto sens = voltage_sensitivity(ln);
      for (Phase ph : ln.phases) {
        const int i = pidx(ph);
        const int r = m.add_row("vdrop[" + ln.id + ":" + phase_char(ph) + "]",
                                Sense::eq, 0.0);
        m.add_term(r, out.w[tb][i], 1.0);
        m.add_term(r, out.w[fb][i], -1.0);
        for (Phase ps : ln.phases) {
          const int j = pidx(ps);
          m.add_term(r, out.lines.p_from[l][j], sens.mp[i][j]);
          m.add_term(r, out.lines.q_from[l][j], sens.mq[i][j]);
        }
        opt::polygonize_magnitude(m, out.lines.p_from[l][i], out.lines.q_from[l][i],
                                  ln.flow_limit[i], opt.polygon_k,
                                  "slim[" + ln.id + ":" + phase_char(ph) + "]");
      }
    }
  }

  void switches_section() {
    out.switches.p_from.assign(net.switches.size(), {-1, -1, -1});
    out.switches.q_from.assign(net.switches.size(), {-1, -1, -1});
    for (size_t s = 0; s < net.switches.size(); ++s) {
      const auto& sw = net.switches[s];
      const int fb = net.bus_index(sw.from);
      const int tb = net.bus_index(sw.to);
      for (Phase ph : sw.phases) {
        const int i = pidx(ph);
        const int pv = m.add_var("p[" + sw.id + ":" + phase_char(ph) + "]",
                                 -opt::kInf, opt::kInf);
        const int qv = m.add_var("q[" + sw.id + ":" + phase_char(ph) + "]",
                                 -opt::kInf, opt::kInf);
        out.switches.p_from[s][i] = pv;
        out.switches.q_from[s][i] = qv;
        m.add_term(out.bal_p[fb][i], pv, 1.0);
        m.add_term(out.bal_q[fb][i], qv, 1.0);
        m.add_term(out.bal_p[tb][i], pv, -1.0);
        m.add_term(out.bal_q[tb][i], qv, -1.0);

        // flow limit scaled by the switch state
        const std::string ptag = "swlim[" + sw.id + ":" + phase_char(ph) + "]";
        if (!opt.fixed_topology) {
          opt::polygonize_magnitude(m, pv, qv, sw.flow_limit[i], opt.polygon_k,
                                    ptag, coupled->zsw[s]);
        } else {
          const auto rows = opt::polygonize_magnitude(
              m, pv, qv, sw.flow_limit[i], opt.polygon_k, ptag, -1,
              opt.tag_master_rhs ? key_zsw(sw.id) : std::string());
          const double z = zsw_val(static_cast<int>(s));
          for (int r : rows) m.set_rhs(r, sw.flow_limit[i] * z);
        }

        // closed switch ties squared voltages together
        const std::string wtag = "swv[" + sw.id + ":" + phase_char(ph) + "]";
        if (!opt.fixed_topology) {
          const int r1 = m.add_row(wtag + "+", Sense::le, big_m_w);
          m.add_term(r1, out.w[fb][i], 1.0);
          m.add_term(r1, out.w[tb][i], -1.0);
          m.add_term(r1, coupled->zsw[s], big_m_w);
          const int r2 = m.add_row(wtag + "-", Sense::le, big_m_w);
          m.add_term(r2, out.w[tb][i], 1.0);
          m.add_term(r2, out.w[fb][i], -1.0);
          m.add_term(r2, coupled->zsw[s], big_m_w);
        } else {
          const double z = zsw_val(static_cast<int>(s));
          const double rhs = big_m_w * (1.0 - z);
          const int r1 = m.add_row(wtag + "+", Sense::le, rhs);
          m.add_term(r1, out.w[fb][i], 1.0);
          m.add_term(r1, out.w[tb][i], -1.0);
          const int r2 = m.add_row(wtag + "-", Sense::le, rhs);
          m.add_term(r2, out.w[tb][i], 1.0);
          m.add_term(r2, out.w[fb][i], -1.0);
          if (opt.tag_master_rhs) {
            m.add_rhs_param(r1, key_zsw(sw.id), -big_m_w);
            m.add_rhs_param(r2, key_zsw(sw.id), -big_m_w);
          }
        }
      }
    }
  }

  void transformers_section() {
    const auto n = net.transformers.size();
    out.xfmrs.p_from.assign(n, {-1, -1, -1});
    out.xfmrs.q_from.assign(n, {-1, -1, -1});
    out.xfmrs.p_to.assign(n, {-1, -1, -1});
    out.xfmrs.q_to.assign(n, {-1, -1, -1});
    for (size_t t = 0; t < n; ++t) {
      const auto& xf = net.transformers[t];
      const int fb = net.bus_index(xf.from);
      const int tb = net.bus_index(xf.to);
      const double n2 = xf.tap_ratio * xf.tap_ratio;
      for (Phase ph : xf.phases) {
        const int i = pidx(ph);
        const int pf = m.add_var("pf[" + xf.id + ":" + phase_char(ph) + "]",
                                 -opt::kInf, opt::kInf);
        const int qf = m.add_var("qf[" + xf.id + ":" + phase_char(ph) + "]",
                                 -opt::kInf, opt::kInf);
        const int pt = m.add_var("pt[" + xf.id + ":" + phase_char(ph) + "]",
                                 -opt::kInf, opt::kInf);
        const int qt = m.add_var("qt[" + xf.id + ":" + phase_char(ph) + "]",
                                 -opt::kInf, opt::kInf);
        out.xfmrs.p_from[t][i] = pf;
        out.xfmrs.q_from[t][i] = qf;
        out.xfmrs.p_to[t][i] = pt;
        out.xfmrs.q_to[t][i] = qt;
        m.add_term(out.bal_p[fb][i], pf, 1.0);
        m.add_term(out.bal_q[fb][i], qf, 1.0);
        m.add_term(out.bal_p[tb][i], pt, 1.0);
        m.add_term(out.bal_q[tb][i], qt, 1.0);
        opt::polygonize_magnitude(m, pf, qf, xf.flow_limit[i], opt.polygon_k,
                                  "xlimf[" + xf.id + ":" + phase_char(ph) + "]");
        opt::polygonize_magnitude(m, pt, qt, xf.flow_limit[i], opt.polygon_k,
                                  "xlimt[" + xf.id + ":" + phase_char(ph) + "]");
      }
      if (xf.kind == XfmrKind::wye) {
        for (Phase ph : xf.phases) {
          const int i = pidx(ph);
          const int rv = m.add_row("xv[" + xf.id + ":" + phase_char(ph) + "]",
                                   Sense::eq, 0.0);
          m.add_term(rv, out.w[fb][i], 1.0);
          m.add_term(rv, out.w[tb][i], -n2);
          // through power measured into the branch at each end
          const int rp = m.add_row("xp[" + xf.id + ":" + phase_char(ph) + "]",
                                   Sense::eq, 0.0);
          m.add_term(rp, out.xfmrs.p_from[t][i], 1.0);
          m.add_term(rp, out.xfmrs.p_to[t][i], 1.0);
          const int rq = m.add_row("xq[" + xf.id + ":" + phase_char(ph) + "]",
                                   Sense::eq, 0.0);
          m.add_term(rq, out.xfmrs.q_from[t][i], 1.0);
          m.add_term(rq, out.xfmrs.q_to[t][i], 1.0);
        }
      } else {
        // delta primary (from side), wye secondary
        static constexpr int kVPairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};   // (a,b),(b,c),(c,a)
        static constexpr int kSPairs[3][2] = {{0, 2}, {1, 0}, {2, 1}};   // (a,c),(b,a),(c,b)
        for (const auto& pr : kVPairs) {
          const int i = pr[0], j = pr[1];
          const int rv = m.add_row(
              "xv[" + xf.id + ":" + std::string(1, "abc"[i]) + "]", Sense::eq, 0.0);
          m.add_term(rv, out.w[fb][i], 3.0);
          m.add_term(rv, out.w[fb][j], 3.0);
          m.add_term(rv, out.w[tb][i], -2.0 * n2);
        }
        for (const auto& pr : kSPairs) {
          const int i = pr[0], j = pr[1];
          const int rp = m.add_row(
              "xp[" + xf.id + ":" + std::string(1, "abc"[i]) + "]", Sense::eq, 0.0);
          m.add_term(rp, out.xfmrs.p_from[t][i], 2.0);
          m.add_term(rp, out.xfmrs.p_to[t][i], 1.0);
          m.add_term(rp, out.xfmrs.p_to[t][j], 1.0);
          m.add_term(rp, out.xfmrs.q_to[t][j], -1.0 / kSqrt3);
          m.add_term(rp, out.xfmrs.q_to[t][i], 1.0 / kSqrt3);
          const int rq = m.add_row(
              "xq[" + xf.id + ":" + std::string(1, "abc"[i]) + "]", Sense::eq, 0.0);
          m.add_term(rq, out.xfmrs.q_from[t][i], 2.0);
          m.add_term(rq, out.xfmrs.p_to[t][i], -1.0 / kSqrt3);
          m.add_term(rq, out.xfmrs.p_to[t][j], 1.0 / kSqrt3);
          m.add_term(rq, out.xfmrs.q_to[t][j], 1.0);
          m.add_term(rq, out.xfmrs.q_to[t][i], 1.0);
        }
      }
    }
  }
};

}  // namespace

NetVars emit_flow_constraints(Model& m, const Network& net, const BlockGraph& bg,
                              const ScenarioVector& scenario,
                              const EmitOptions& opt, const CouplingVars* coupled,
                              const Topology* fixed) {
  if (!opt.fixed_topology && coupled == nullptr)
    throw std::invalid_argument("configuration-coupled emission needs binaries");
  if (opt.fixed_topology && fixed == nullptr)
    throw std::invalid_argument("fixed-topology emission needs a Topology");
  Emitter e{m, net, bg, scenario, opt, coupled, fixed, {}, 1.21};
  e.voltage_vars_and_bounds();
  e.balance_skeleton();
  e.lines_section();
  e.switches_section();
  e.transformers_section();
  return std::move(e.out);
}

}  // namespace dnmg::ldf
