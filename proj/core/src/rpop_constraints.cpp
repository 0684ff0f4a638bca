#include <string>

#include "dnmg/rpop.hpp"

namespace dnmg::rpop {

using namespace dnmg::net;
using opt::Model;
using opt::Sense;

void radiality_constraints(Model& m, const BlockGraph& bg,
                           const std::vector<int>& zsw) {
  const int nb = static_cast<int>(bg.blocks.size());
  const int ns = static_cast<int>(bg.switch_ends.size());
  const double cap = nb;

  // orientation binaries per switch direction, root indicator per block
  std::vector<int> fwd(ns), rev(ns), root(nb);
  for (int s = 0; s < ns; ++s) {
    fwd[s] = m.add_var("rad_d[" + std::to_string(s) + ":f]", 0, 1, true);
    rev[s] = m.add_var("rad_d[" + std::to_string(s) + ":r]", 0, 1, true);
    const int r = m.add_row("rad_orient[" + std::to_string(s) + "]", Sense::eq, 0.0);
    m.add_term(r, fwd[s], 1.0);
    m.add_term(r, rev[s], 1.0);
    m.add_term(r, zsw[s], -1.0);
  }
  for (int b = 0; b < nb; ++b)
    root[b] = m.add_var("rad_root[" + bg.blocks[b].id + "]", 0, 1, true);

  // every block has exactly one parent arc or is a root
  for (int b = 0; b < nb; ++b) {
    const int r = m.add_row("rad_parent[" + bg.blocks[b].id + "]", Sense::eq, 1.0);
    m.add_term(r, root[b], 1.0);
    for (int s = 0; s < ns; ++s) {
      if (bg.switch_ends[s].second == b) m.add_term(r, fwd[s], 1.0);
      if (bg.switch_ends[s].first == b) m.add_term(r, rev[s], 1.0);
    }
  }

  // one unit of demand per block, shipped from a virtual root; arcs only
  // carry flow along chosen orientations, which rules out cycles
  std::vector<int> fflow(ns), rflow(ns), rootflow(nb);
  for (int s = 0; s < ns; ++s) {
    fflow[s] = m.add_var("rad_f[" + std::to_string(s) + ":f]", 0.0, cap);
    rflow[s] = m.add_var("rad_f[" + std::to_string(s) + ":r]", 0.0, cap);
    int r = m.add_row("rad_cap[" + std::to_string(s) + ":f]", Sense::le, 0.0);
    m.add_term(r, fflow[s], 1.0);
    m.add_term(r, fwd[s], -cap);
    r = m.add_row("rad_cap[" + std::to_string(s) + ":r]", Sense::le, 0.0);
    m.add_term(r, rflow[s], 1.0);
    m.add_term(r, rev[s], -cap);
  }
  for (int b = 0; b < nb; ++b) {
    rootflow[b] = m.add_var("rad_f0[" + bg.blocks[b].id + "]", 0.0, cap);
    const int r = m.add_row("rad_cap0[" + bg.blocks[b].id + "]", Sense::le, 0.0);
    m.add_term(r, rootflow[b], 1.0);
    m.add_term(r, root[b], -cap);
  }
  for (int b = 0; b < nb; ++b) {
    const int r = m.add_row("rad_flow[" + bg.blocks[b].id + "]", Sense::eq, 1.0);
    m.add_term(r, rootflow[b], 1.0);
    for (int s = 0; s < ns; ++s) {
      if (bg.switch_ends[s].second == b) {
        m.add_term(r, fflow[s], 1.0);   // in along forward
        m.add_term(r, rflow[s], -1.0);  // out along reverse
      }
      if (bg.switch_ends[s].first == b) {
        m.add_term(r, rflow[s], 1.0);
        m.add_term(r, fflow[s], -1.0);
      }
    }
  }
}

void coloring_constraints(Model& m, const Network& n, const BlockGraph& bg,
                          const MasterVars& mv) {
  const int nb = static_cast<int>(bg.blocks.size());
  const int ns = static_cast<int>(bg.switch_ends.size());

  // candidate source blocks: hosting an eligible DG, or the active substation
  std::vector<int> candidates;
  for (int b = 0; b < nb; ++b) {
    const bool sub = bg.blocks[b].has_substation && mv.substation_active;
    if (!mv.eligibility[b].empty() || sub) candidates.push_back(b);
  }

  std::vector<std::vector<int>> u(nb);  // u[l][ci]
  for (int l = 0; l < nb; ++l) {
    u[l].resize(candidates.size());
    for (size_t ci = 0; ci < candidates.size(); ++ci)
      u[l][ci] = m.add_var("col_u[" + bg.blocks[l].id + ":" +
                               bg.blocks[candidates[ci]].id + "]",
                           0.0, 1.0);
  }

  // each energized block carries exactly one source color
  for (int l = 0; l < nb; ++l) {
    const int r = m.add_row("col_one[" + bg.blocks[l].id + "]", Sense::eq, 0.0);
    for (size_t ci = 0; ci < candidates.size(); ++ci) m.add_term(r, u[l][ci], 1.0);
    m.add_term(r, mv.zbl[l], -1.0);
  }

  // closed switches force equal colors at both ends
  for (int s = 0; s < ns; ++s) {
    const auto [i, j] = bg.switch_ends[s];
    for (size_t ci = 0; ci < candidates.size(); ++ci) {
      int r = m.add_row("col_eq[" + std::to_string(s) + ":" +
                            bg.blocks[candidates[ci]].id + "+]",
                        Sense::le, 1.0);
      m.add_term(r, u[i][ci], 1.0);
      m.add_term(r, u[j][ci], -1.0);
      m.add_term(r, mv.zsw[s], 1.0);
      r = m.add_row("col_eq[" + std::to_string(s) + ":" +
                        bg.blocks[candidates[ci]].id + "-]",
                    Sense::le, 1.0);
      m.add_term(r, u[j][ci], 1.0);
      m.add_term(r, u[i][ci], -1.0);
      m.add_term(r, mv.zsw[s], 1.0);
    }
  }

  // a block wears its own color iff it hosts the component's source
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const int c = candidates[ci];
    const int r = m.add_row("col_own[" + bg.blocks[c].id + "]", Sense::eq, 0.0);
    m.add_term(r, u[c][ci], 1.0);
    if (bg.blocks[c].has_substation && mv.substation_active) {
      // substation block: always its own source when energized
      m.add_term(r, mv.zbl[c], -1.0);
    } else {
      for (int g : mv.eligibility[c]) m.add_term(r, mv.zinv[g], -1.0);
    }
  }
  // an active substation's component never hosts a grid-forming DG
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const int c = candidates[ci];
    if (!(bg.blocks[c].has_substation && mv.substation_active)) continue;
    for (int l = 0; l < nb; ++l) {
      bool any = false;
      for (int g : bg.blocks[l].generators)
        any |= mv.zinv[g] >= 0;
      if (!any) continue;
      const int r = m.add_row("col_nosub_gfm[" + bg.blocks[l].id + ":" +
                                  bg.blocks[c].id + "]",
                              Sense::le, 1.0);
      for (int g : bg.blocks[l].generators)
        if (mv.zinv[g] >= 0) m.add_term(r, mv.zinv[g], 1.0);
      m.add_term(r, u[l][ci], 1.0);
    }
  }

  // color originates at its source block: per-color commodity flow over
  // closed switches
  const double cap = nb - 1 > 0 ? nb - 1 : 1;
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const int c = candidates[ci];
    std::vector<int> ff(ns), fr(ns);
    for (int s = 0; s < ns; ++s) {
      const std::string sfx =
          "[" + std::to_string(s) + ":" + bg.blocks[c].id + "]";
      ff[s] = m.add_var("col_f" + sfx + "f", 0.0, cap);
      fr[s] = m.add_var("col_f" + sfx + "r", 0.0, cap);
      int r = m.add_row("col_cap" + sfx + "f", Sense::le, 0.0);
      m.add_term(r, ff[s], 1.0);
      m.add_term(r, mv.zsw[s], -cap);
      r = m.add_row("col_cap" + sfx + "r", Sense::le, 0.0);
      m.add_term(r, fr[s], 1.0);
      m.add_term(r, mv.zsw[s], -cap);
    }
    for (int l = 0; l < nb; ++l) {
      if (l == c) continue;  // source side unconstrained
      const int r = m.add_row(
          "col_flow[" + bg.blocks[l].id + ":" + bg.blocks[c].id + "]", Sense::eq,
          0.0);
      for (int s = 0; s < ns; ++s) {
        const auto [i, j] = bg.switch_ends[s];
        if (j == l) {
          m.add_term(r, ff[s], 1.0);
          m.add_term(r, fr[s], -1.0);
        }
        if (i == l) {
          m.add_term(r, fr[s], 1.0);
          m.add_term(r, ff[s], -1.0);
        }
      }
      m.add_term(r, u[l][ci], -1.0);
    }
  }

  // paper's per-block source-count box: isolated energized blocks must host
  // their own source; the active substation block is exempt from the lower
  // bound (the substation is its source)
  for (int l = 0; l < nb; ++l) {
    bool has_zinv = false;
    for (int g : bg.blocks[l].generators) has_zinv |= mv.zinv[g] >= 0;
    const bool sub_block = bg.blocks[l].has_substation && mv.substation_active;
    // upper: sum zinv <= zbl
    if (has_zinv) {
      const int r = m.add_row("srcbox_up[" + bg.blocks[l].id + "]", Sense::le, 0.0);
      for (int g : bg.blocks[l].generators)
        if (mv.zinv[g] >= 0) m.add_term(r, mv.zinv[g], 1.0);
      m.add_term(r, mv.zbl[l], -1.0);
    }
    // lower: zbl - sum zsw <= sum zinv
    if (!sub_block) {
      const int r = m.add_row("srcbox_lo[" + bg.blocks[l].id + "]", Sense::ge, 0.0);
      for (int g : bg.blocks[l].generators)
        if (mv.zinv[g] >= 0) m.add_term(r, mv.zinv[g], 1.0);
      m.add_term(r, mv.zbl[l], -1.0);
      for (int s = 0; s < ns; ++s)
        if (bg.switch_ends[s].first == l || bg.switch_ends[s].second == l)
          m.add_term(r, mv.zsw[s], 1.0);
    }
  }
  (void)n;
}

void phase_eligibility_constraints(Model& m, const Network& n,
                                   const BlockGraph& bg, const MasterVars& mv) {
  const int nb = static_cast<int>(bg.blocks.size());
  const int ns = static_cast<int>(bg.switch_ends.size());

  // ineligible DGs are grid-following
  for (int l = 0; l < nb; ++l) {
    for (int g : bg.blocks[l].generators) {
      if (mv.zinv[g] < 0) continue;
      bool eligible = false;
      for (int e : mv.eligibility[l]) eligible |= e == g;
      if (!eligible) m.set_bounds(mv.zinv[g], 0.0, 0.0);
    }
  }

  auto larger = [&](int from, int to) {
    return bg.blocks[to].phi_max > bg.blocks[from].phi_max;
  };
  auto other = [&](int s, int l) {
    return bg.switch_ends[s].first == l ? bg.switch_ends[s].second
                                        : bg.switch_ends[s].first;
  };
  auto incident = [&](int s, int l) {
    return bg.switch_ends[s].first == l || bg.switch_ends[s].second == l;
  };

  for (int l = 0; l < nb; ++l) {
    for (int s = 0; s < ns; ++s) {
      if (!incident(s, l)) continue;
      const int j = other(s, l);
      if (larger(l, j)) {
        // one-hop: a closed switch toward a higher-phase block forbids GFM
        for (int g : bg.blocks[l].generators) {
          if (mv.zinv[g] < 0) continue;
          const int r = m.add_row("onehop[" + n.generators[g].id + ":" +
                                      std::to_string(s) + "]",
                                  Sense::le, 1.0);
          m.add_term(r, mv.zinv[g], 1.0);
          m.add_term(r, mv.zsw[s], 1.0);
        }
      } else {
        // two-hop through a not-larger neighbor j into a larger k
        for (int s2 = 0; s2 < ns; ++s2) {
          if (s2 == s || !incident(s2, j)) continue;
          const int k = other(s2, j);
          if (!larger(j, k)) continue;
          for (int g : bg.blocks[l].generators) {
            if (mv.zinv[g] < 0) continue;
            const int r = m.add_row("twohop[" + n.generators[g].id + ":" +
                                        std::to_string(s) + ":" +
                                        std::to_string(s2) + "]",
                                    Sense::le, 2.0);
            m.add_term(r, mv.zinv[g], 1.0);
            m.add_term(r, mv.zsw[s], 1.0);
            m.add_term(r, mv.zsw[s2], 1.0);
          }
        }
      }
    }
  }
}

}  // namespace dnmg::rpop
