#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dnmg/lindistflow.hpp"

namespace dnmg::ldf {

using namespace dnmg::net;

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

// branch kinds in the spanning structure
enum class Kind { line, sw, xfmr };

struct Edge {
  Kind kind;
  int index;   // into the respective network vector
  int from, to;  // bus indices as stored in the network element
};

struct TreeNode {
  int parent_bus = -1;
  int edge = -1;       // index into edges, connecting to parent
  bool edge_fwd = true;  // true: element's from-side faces the parent
};

// Distribution sweep over one radial component.
struct Sweep {
  const Network& net;
  const CCInfo& cc;
  std::vector<Edge> edges;
  std::vector<int> order;  // buses, root first (BFS)
  std::vector<TreeNode> tree;  // indexed by bus

  Sweep(const Network& n, const Topology& topo, const CCInfo& c)
      : net(n), cc(c), tree(n.buses.size()) {
    std::vector<char> in_cc(net.buses.size(), 0);
    for (int b : cc.buses) in_cc[b] = 1;
    auto add_edge = [&](Kind k, int idx, const std::string& f, const std::string& t) {
      const int fb = net.bus_index(f), tb = net.bus_index(t);
      if (in_cc[fb] && in_cc[tb]) edges.push_back({k, idx, fb, tb});
    };
    for (size_t i = 0; i < net.lines.size(); ++i)
      add_edge(Kind::line, static_cast<int>(i), net.lines[i].from, net.lines[i].to);
    for (size_t i = 0; i < net.switches.size(); ++i)
      if (topo.switch_closed[i])
        add_edge(Kind::sw, static_cast<int>(i), net.switches[i].from,
                 net.switches[i].to);
    for (size_t i = 0; i < net.transformers.size(); ++i)
      add_edge(Kind::xfmr, static_cast<int>(i), net.transformers[i].from,
               net.transformers[i].to);

    if (cc.source_bus < 0)
      throw std::invalid_argument("component " + cc.id + " has no slack bus");

    // BFS from the slack bus
    std::vector<char> seen(net.buses.size(), 0);
    order.push_back(cc.source_bus);
    seen[cc.source_bus] = 1;
    std::vector<std::vector<int>> adj(net.buses.size());
    for (size_t e = 0; e < edges.size(); ++e) {
      adj[edges[e].from].push_back(static_cast<int>(e));
      adj[edges[e].to].push_back(static_cast<int>(e));
    }
    size_t head = 0;
    while (head < order.size()) {
      const int u = order[head++];
      for (int ei : adj[u]) {
        const auto& e = edges[ei];
        const int v = e.from == u ? e.to : e.from;
        if (seen[v]) {
          if (tree[u].edge != ei) {
            throw std::invalid_argument("component " + cc.id + " is not radial");
          }
          continue;
        }
        seen[v] = 1;
        tree[v] = {u, ei, e.from == u};
        order.push_back(v);
      }
    }
    if (order.size() != cc.buses.size())
      throw std::invalid_argument("component " + cc.id + " is internally disconnected");
  }
};

}  // namespace

LinearFlowResult solve_linear_power_flow(const Network& net, const BlockGraph& bg,
                                         const Topology& topo, const CCInfo& cc,
                                         const SetPoints& inj,
                                         const ScenarioVector& scen,
                                         double slack_w0) {
  Sweep sweep(net, topo, cc);

  LinearFlowResult res;
  res.w.assign(net.buses.size(), {});
  res.v.assign(net.buses.size(), {});
  res.line_p.assign(net.lines.size(), {});
  res.line_q.assign(net.lines.size(), {});
  res.switch_p.assign(net.switches.size(), {});
  res.switch_q.assign(net.switches.size(), {});
  res.xf_p_from.assign(net.transformers.size(), {});
  res.xf_q_from.assign(net.transformers.size(), {});
  res.xf_p_to.assign(net.transformers.size(), {});
  res.xf_q_to.assign(net.transformers.size(), {});

  // per-bus local net demand (load - generation), phase-wise
  std::vector<PerPhase<double>> dem_p(net.buses.size(), PerPhase<double>{});
  std::vector<PerPhase<double>> dem_q(net.buses.size(), PerPhase<double>{});
  for (size_t d = 0; d < net.loads.size(); ++d) {
    const int b = net.bus_index(net.loads[d].bus);
    if (!topo.block_energized[bg.bus_block[b]]) continue;
    for (Phase ph : net.loads[d].phases) {
      dem_p[b][pidx(ph)] += scen.p[d][pidx(ph)];
      dem_q[b][pidx(ph)] += scen.q[d][pidx(ph)];
    }
  }
  for (size_t g = 0; g < net.generators.size(); ++g) {
    if (static_cast<int>(g) == cc.source_gen) continue;  // slack output implicit
    const int b = net.bus_index(net.generators[g].bus);
    for (Phase ph : net.generators[g].phases) {
      dem_p[b][pidx(ph)] -= inj.p[g][pidx(ph)];
      dem_q[b][pidx(ph)] -= inj.q[g][pidx(ph)];
    }
  }

  // initialize w at the slack value, transformer-scaled below during the
  // forward pass; shunt terms couple w back into demand, so iterate.
  for (int b : sweep.order)
    for (Phase ph : net.buses[b].phases) res.w[b][pidx(ph)] = slack_w0;

  PerPhase<double> slack_p{}, slack_q{};
  for (int pass = 0; pass < 50; ++pass) {
    // --- backward: accumulate into-branch power at each element's ends
    std::vector<PerPhase<double>> down_p(net.buses.size(), PerPhase<double>{});
    std::vector<PerPhase<double>> down_q(net.buses.size(), PerPhase<double>{});
    for (int b : sweep.order) {
      for (Phase ph : net.buses[b].phases) {
        const int i = pidx(ph);
        down_p[b][i] = dem_p[b][i] + net.buses[b].shunt[i].real() * res.w[b][i];
        down_q[b][i] = dem_q[b][i] - net.buses[b].shunt[i].imag() * res.w[b][i];
      }
    }
    for (auto it = sweep.order.rbegin(); it != sweep.order.rend(); ++it) {
      const int b = *it;
      if (b == cc.source_bus) continue;
      const auto& tn = sweep.tree[b];
      const auto& e = sweep.edges[tn.edge];
      // power delivered into bus b from its parent edge
      PerPhase<double> need_p = down_p[b], need_q = down_q[b];
      PerPhase<double> up_p{}, up_q{};  // into-branch at the parent end
      switch (e.kind) {
        case Kind::line: {
          const auto& ln = net.lines[e.index];
          for (Phase ph : ln.phases) {
            const int i = pidx(ph);
            // stored at the element's from end, oriented into the branch
            res.line_p[e.index][i] = tn.edge_fwd ? need_p[i] : -need_p[i];
            res.line_q[e.index][i] = tn.edge_fwd ? need_q[i] : -need_q[i];
            up_p[i] = need_p[i];
            up_q[i] = need_q[i];
          }
          break;
        }
        case Kind::sw: {
          const auto& sw = net.switches[e.index];
          for (Phase ph : sw.phases) {
            const int i = pidx(ph);
            res.switch_p[e.index][i] = tn.edge_fwd ? need_p[i] : -need_p[i];
            res.switch_q[e.index][i] = tn.edge_fwd ? need_q[i] : -need_q[i];
            up_p[i] = need_p[i];
            up_q[i] = need_q[i];
          }
          break;
        }
        case Kind::xfmr: {
          const auto& xf = net.transformers[e.index];
          if (tn.edge_fwd) {
            // parent on the from side; b is the to side:
            // into-branch at to = -need
            for (Phase ph : xf.phases) {
              const int i = pidx(ph);
              res.xf_p_to[e.index][i] = -need_p[i];
              res.xf_q_to[e.index][i] = -need_q[i];
            }
            if (xf.kind == XfmrKind::wye) {
              for (Phase ph : xf.phases) {
                const int i = pidx(ph);
                res.xf_p_from[e.index][i] = need_p[i];
                res.xf_q_from[e.index][i] = need_q[i];
                up_p[i] = need_p[i];
                up_q[i] = need_q[i];
              }
            } else {
              static constexpr int kSPairs[3][2] = {{0, 2}, {1, 0}, {2, 1}};
              for (const auto& pr : kSPairs) {
                const int i = pr[0], j = pr[1];
                const double ptoi = res.xf_p_to[e.index][i];
                const double ptoj = res.xf_p_to[e.index][j];
                const double qtoi = res.xf_q_to[e.index][i];
                const double qtoj = res.xf_q_to[e.index][j];
                res.xf_p_from[e.index][i] =
                    0.5 * (-(ptoi + ptoj) + (qtoj - qtoi) / kSqrt3);
                res.xf_q_from[e.index][i] =
                    0.5 * ((ptoi - ptoj) / kSqrt3 - (qtoj + qtoi));
                up_p[i] = res.xf_p_from[e.index][i];
                up_q[i] = res.xf_q_from[e.index][i];
              }
            }
          } else {
            // parent on the to side (secondary feeds upstream)
            if (xf.kind == XfmrKind::wye) {
              for (Phase ph : xf.phases) {
                const int i = pidx(ph);
                res.xf_p_from[e.index][i] = -need_p[i];
                res.xf_q_from[e.index][i] = -need_q[i];
                res.xf_p_to[e.index][i] = need_p[i];
                res.xf_q_to[e.index][i] = need_q[i];
                up_p[i] = need_p[i];
                up_q[i] = need_q[i];
              }
            } else {
              throw std::invalid_argument(
                  "delta transformer fed from its secondary is unsupported");
            }
          }
          break;
        }
      }
      const int parent = tn.parent_bus;
      for (int i = 0; i < 3; ++i) {
        down_p[parent][i] += up_p[i];
        down_q[parent][i] += up_q[i];
      }
    }

    // --- forward: voltages from the root
    std::vector<PerPhase<double>> w_new(net.buses.size(), PerPhase<double>{});
    for (Phase ph : net.buses[cc.source_bus].phases)
      w_new[cc.source_bus][pidx(ph)] = slack_w0;
    for (int b : sweep.order) {
      if (b == cc.source_bus) continue;
      const auto& tn = sweep.tree[b];
      const auto& e = sweep.edges[tn.edge];
      const int parent = tn.parent_bus;
      switch (e.kind) {
        case Kind::line: {
          const auto& ln = net.lines[e.index];
          const auto sens = voltage_sensitivity(ln);
          // w_to = w_from - (Mp p + Mq q) with (p, q) into-branch at from
          for (Phase ph : ln.phases) {
            const int i = pidx(ph);
            double drop = 0.0;
            for (Phase ps : ln.phases) {
              const int j = pidx(ps);
              drop += sens.mp[i][j] * res.line_p[e.index][j] +
                      sens.mq[i][j] * res.line_q[e.index][j];
            }
            // res.line_* is at the element's from end; flip when the parent is
            // at the element's to side
            w_new[b][i] = tn.edge_fwd ? w_new[parent][i] - drop
                                      : w_new[parent][i] + drop;
          }
          break;
        }
        case Kind::sw: {
          for (Phase ph : net.switches[e.index].phases)
            w_new[b][pidx(ph)] = w_new[parent][pidx(ph)];
          break;
        }
        case Kind::xfmr: {
          const auto& xf = net.transformers[e.index];
          const double n2 = xf.tap_ratio * xf.tap_ratio;
          if (xf.kind == XfmrKind::wye) {
            for (Phase ph : xf.phases) {
              const int i = pidx(ph);
              w_new[b][i] = tn.edge_fwd ? w_new[parent][i] / n2
                                        : w_new[parent][i] * n2;
            }
          } else {
            static constexpr int kVPairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
            if (!tn.edge_fwd)
              throw std::invalid_argument(
                  "delta transformer fed from its secondary is unsupported");
            for (const auto& pr : kVPairs) {
              const int i = pr[0], j = pr[1];
              w_new[b][i] = 3.0 * (w_new[parent][i] + w_new[parent][j]) / (2.0 * n2);
            }
          }
          break;
        }
      }
    }

    double delta = 0.0;
    for (int b : sweep.order)
      for (Phase ph : net.buses[b].phases)
        delta = std::max(delta, std::abs(w_new[b][pidx(ph)] - res.w[b][pidx(ph)]));
    for (int b : sweep.order) res.w[b] = w_new[b];
    slack_p = down_p[cc.source_bus];
    slack_q = down_q[cc.source_bus];
    if (delta < 1e-13) break;
  }

  res.slack_p = slack_p;
  res.slack_q = slack_q;
  for (int b : sweep.order)
    for (Phase ph : net.buses[b].phases)
      res.v[b][pidx(ph)] = std::sqrt(std::max(0.0, res.w[b][pidx(ph)]));
  return res;
}

AcResult solve_ac_fixed_point(const Network& net, const BlockGraph& bg,
                              const Topology& topo, const CCInfo& cc,
                              const SetPoints& inj, const ScenarioVector& scen,
                              const AcOptions& opt) {
  Sweep sweep(net, topo, cc);
  constexpr Complex kRot120(-0.5, 0.86602540378443864676);  // e^{+j120}

  AcResult res;
  res.voltage.assign(net.buses.size(), {});

  // balanced slack reference: a at 0, b at -120, c at +120 degrees
  PerPhase<Complex> vref{Complex(opt.slack_v, 0.0),
                         opt.slack_v * std::conj(kRot120),
                         opt.slack_v * kRot120};

  // net complex injection per bus-phase (generation - load), slack excluded
  std::vector<PerPhase<Complex>> s_inj(net.buses.size(), PerPhase<Complex>{});
  for (size_t d = 0; d < net.loads.size(); ++d) {
    const int b = net.bus_index(net.loads[d].bus);
    if (!topo.block_energized[bg.bus_block[b]]) continue;
    for (Phase ph : net.loads[d].phases)
      s_inj[b][pidx(ph)] -= Complex(scen.p[d][pidx(ph)], scen.q[d][pidx(ph)]);
  }
  for (size_t g = 0; g < net.generators.size(); ++g) {
    if (static_cast<int>(g) == cc.source_gen) continue;
    const int b = net.bus_index(net.generators[g].bus);
    for (Phase ph : net.generators[g].phases)
      s_inj[b][pidx(ph)] += Complex(inj.p[g][pidx(ph)], inj.q[g][pidx(ph)]);
  }

  // flat start propagated through transformer ratios on the forward pass
  std::vector<PerPhase<Complex>> v(net.buses.size(), PerPhase<Complex>{});
  for (int b : sweep.order)
    for (Phase ph : net.buses[b].phases) v[b][pidx(ph)] = vref[pidx(ph)];

  std::vector<PerPhase<Complex>> cur(net.buses.size(), PerPhase<Complex>{});
  int it = 0;
  double delta = 0.0;
  const double pi6 = 0.52359877559829887308;  // 30 degrees
  const Complex shift = std::polar(1.0, -pi6);

  for (it = 1; it <= opt.max_iterations; ++it) {
    // nodal currents: conj(S/V) injections plus shunt draw y*V
    for (int b : sweep.order) {
      for (Phase ph : net.buses[b].phases) {
        const int i = pidx(ph);
        Complex ii(0.0, 0.0);
        const Complex vv = v[b][i];
        if (std::abs(vv) > 1e-9) ii = std::conj(s_inj[b][i] / vv);
        ii -= net.buses[b].shunt[i] * vv;  // shunt consumes
        cur[b][i] = ii;  // current INTO the network from the bus (injection)
      }
    }

    // backward: accumulate branch currents toward the root
    std::vector<PerPhase<Complex>> need(net.buses.size(), PerPhase<Complex>{});
    for (int b : sweep.order)
      for (int i = 0; i < 3; ++i) need[b][i] = -cur[b][i];  // demand current
    std::vector<PerPhase<Complex>> branch_cur(sweep.edges.size(), PerPhase<Complex>{});
    for (auto itb = sweep.order.rbegin(); itb != sweep.order.rend(); ++itb) {
      const int b = *itb;
      if (b == cc.source_bus) continue;
      const auto& tn = sweep.tree[b];
      const auto& e = sweep.edges[tn.edge];
      // current delivered to b through the edge, oriented parent -> b
      PerPhase<Complex> ib = need[b];
      branch_cur[tn.edge] = ib;
      PerPhase<Complex> up{};
      if (e.kind == Kind::xfmr) {
        const auto& xf = net.transformers[e.index];
        if (!tn.edge_fwd)
          throw std::invalid_argument(
              "delta/wye transformer fed from its secondary is unsupported in ac");
        if (xf.kind == XfmrKind::wye) {
          for (Phase ph : xf.phases) up[pidx(ph)] = ib[pidx(ph)] / xf.tap_ratio;
        } else {
          // winding currents i_w = e^{+j30} I_out / n; terminal a: i_ab - i_ca
          PerPhase<Complex> iw{};
          static constexpr int kVPairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
          for (int wpair = 0; wpair < 3; ++wpair) {
            const int i = kVPairs[wpair][0];
            iw[wpair] = std::conj(shift) * ib[i] / xf.tap_ratio;
          }
          // terminal phi: winding starting at phi minus winding ending at phi
          up[0] = iw[0] - iw[2];
          up[1] = iw[1] - iw[0];
          up[2] = iw[2] - iw[1];
        }
      } else {
        up = ib;
      }
      for (int i = 0; i < 3; ++i) need[tn.parent_bus][i] += up[i];
    }

    // forward: voltages from the slack
    std::vector<PerPhase<Complex>> v_new(net.buses.size(), PerPhase<Complex>{});
    for (Phase ph : net.buses[cc.source_bus].phases)
      v_new[cc.source_bus][pidx(ph)] = vref[pidx(ph)];
    for (int b : sweep.order) {
      if (b == cc.source_bus) continue;
      const auto& tn = sweep.tree[b];
      const auto& e = sweep.edges[tn.edge];
      const int parent = tn.parent_bus;
      switch (e.kind) {
        case Kind::line: {
          const auto& ln = net.lines[e.index];
          for (Phase ph : ln.phases) {
            const int i = pidx(ph);
            Complex drop(0.0, 0.0);
            for (Phase ps : ln.phases)
              drop += ln.z[i][pidx(ps)] * branch_cur[tn.edge][pidx(ps)];
            v_new[b][i] = v_new[parent][i] - drop;
          }
          break;
        }
        case Kind::sw: {
          for (Phase ph : net.switches[e.index].phases)
            v_new[b][pidx(ph)] = v_new[parent][pidx(ph)];
          break;
        }
        case Kind::xfmr: {
          const auto& xf = net.transformers[e.index];
          if (xf.kind == XfmrKind::wye) {
            for (Phase ph : xf.phases)
              v_new[b][pidx(ph)] = v_new[parent][pidx(ph)] / xf.tap_ratio;
          } else {
            static constexpr int kVPairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
            for (const auto& pr : kVPairs) {
              const int i = pr[0], j = pr[1];
              v_new[b][i] =
                  (v_new[parent][i] - v_new[parent][j]) * shift / xf.tap_ratio;
            }
          }
          break;
        }
      }
    }

    delta = 0.0;
    for (int b : sweep.order)
      for (Phase ph : net.buses[b].phases)
        delta = std::max(delta, std::abs(v_new[b][pidx(ph)] - v[b][pidx(ph)]));
    for (int b : sweep.order) v[b] = v_new[b];
    if (delta < opt.tol) break;
  }

  res.iterations = std::min(it, opt.max_iterations);
  res.converged = delta < opt.tol;
  res.max_mismatch = delta;
  res.voltage = v;

  // slack power: sum of sent currents on root-incident edges + local demand
  {
    PerPhase<Complex> s{};
    // recompute need at root by one more backward accumulation
    std::vector<PerPhase<Complex>> need(net.buses.size(), PerPhase<Complex>{});
    for (int b : sweep.order) {
      for (Phase ph : net.buses[b].phases) {
        const int i = pidx(ph);
        Complex ii(0.0, 0.0);
        if (std::abs(v[b][i]) > 1e-9) ii = std::conj(s_inj[b][i] / v[b][i]);
        ii -= net.buses[b].shunt[i] * v[b][i];
        need[b][i] = -ii;
      }
    }
    std::vector<PerPhase<Complex>> branch_cur(sweep.edges.size(), PerPhase<Complex>{});
    for (auto itb = sweep.order.rbegin(); itb != sweep.order.rend(); ++itb) {
      const int b = *itb;
      if (b == cc.source_bus) continue;
      const auto& tn = sweep.tree[b];
      const auto& e = sweep.edges[tn.edge];
      PerPhase<Complex> ib = need[b];
      branch_cur[tn.edge] = ib;
      PerPhase<Complex> up{};
      if (e.kind == Kind::xfmr) {
        const auto& xf = net.transformers[e.index];
        if (xf.kind == XfmrKind::wye) {
          for (Phase ph : xf.phases) up[pidx(ph)] = ib[pidx(ph)] / xf.tap_ratio;
        } else {
          PerPhase<Complex> iw{};
          static constexpr int kVPairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
          for (int wpair = 0; wpair < 3; ++wpair)
            iw[wpair] = std::conj(shift) * ib[kVPairs[wpair][0]] / xf.tap_ratio;
          up[0] = iw[0] - iw[2];
          up[1] = iw[1] - iw[0];
          up[2] = iw[2] - iw[1];
        }
      } else {
        // line voltage drop already reflected in v; through-current identical
        up = ib;
      }
      for (int i = 0; i < 3; ++i) need[tn.parent_bus][i] += up[i];
    }
    for (Phase ph : net.buses[cc.source_bus].phases) {
      const int i = pidx(ph);
      s[i] = v[cc.source_bus][i] * std::conj(need[cc.source_bus][i]);
    }
    res.slack_power = s;
  }
  return res;
}

}  // namespace dnmg::ldf
