#include "dnmg/network.hpp"

#include <algorithm>
#include <numeric>

namespace dnmg::net {

namespace {

int find_by_id(const auto& vec, std::string_view id) {
  for (size_t i = 0; i < vec.size(); ++i)
    if (vec[i].id == id) return static_cast<int>(i);
  return -1;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

int Network::bus_index(std::string_view id) const { return find_by_id(buses, id); }
int Network::switch_index(std::string_view id) const { return find_by_id(switches, id); }
int Network::generator_index(std::string_view id) const { return find_by_id(generators, id); }

int BlockGraph::block_index(std::string_view id) const {
  for (size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].id == id) return static_cast<int>(i);
  return -1;
}

void Network::validate() const {
  auto check_unique = [](const auto& vec, const char* what) {
    for (size_t i = 0; i < vec.size(); ++i)
      for (size_t j = i + 1; j < vec.size(); ++j)
        if (vec[i].id == vec[j].id)
          throw SchemaError(std::string("duplicate ") + what + " id: " + vec[i].id);
  };
  check_unique(buses, "bus");
  check_unique(lines, "line");
  check_unique(switches, "switch");
  check_unique(transformers, "transformer");
  check_unique(generators, "generator");
  check_unique(loads, "load");

  if (base_power_va <= 0) throw SchemaError("base_power_va must be positive");

  for (const auto& b : buses) {
    if (b.phases.empty()) throw SchemaError("bus " + b.id + " has no phases");
    if (!(0 < b.v_min && b.v_min < b.v_max))
      throw SchemaError("bus " + b.id + ": need 0 < v_min < v_max");
    if (!b.voltage_level.empty() && !base_voltage_v.count(b.voltage_level))
      throw SchemaError("bus " + b.id + ": unknown voltage level " + b.voltage_level);
  }

  auto endpoint = [&](const std::string& owner, const std::string& id,
                      PhaseSet ph) -> int {
    const int i = bus_index(id);
    if (i < 0) throw ReferenceError(owner + " references missing bus " + id);
    if (!buses[i].phases.covers(ph))
      throw SchemaError(owner + ": phases not a subset of bus " + id);
    return i;
  };

  for (const auto& l : lines) {
    endpoint("line " + l.id, l.from, l.phases);
    endpoint("line " + l.id, l.to, l.phases);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const bool present = l.phases.has(static_cast<Phase>(i)) &&
                             l.phases.has(static_cast<Phase>(j));
        if (!present && l.z[i][j] != Complex{})
          throw SchemaError("line " + l.id + ": impedance on absent phase pair");
      }
      if (l.phases.has(static_cast<Phase>(i))) {
        if (l.z[i][i].real() < 0)
          throw SchemaError("line " + l.id + ": negative self resistance");
        if (l.flow_limit[i] <= 0)
          throw SchemaError("line " + l.id + ": flow_limit must be positive");
      }
    }
  }
  for (const auto& s : switches) {
    endpoint("switch " + s.id, s.from, s.phases);
    endpoint("switch " + s.id, s.to, s.phases);
    for (Phase p : s.phases)
      if (s.flow_limit[pidx(p)] <= 0)
        throw SchemaError("switch " + s.id + ": flow_limit must be positive");
  }
  for (const auto& t : transformers) {
    const int fi = endpoint("transformer " + t.id, t.from, t.phases);
    const int ti = endpoint("transformer " + t.id, t.to, t.phases);
    if (t.tap_ratio <= 0)
      throw SchemaError("transformer " + t.id + ": tap_ratio must be positive");
    if (t.kind == XfmrKind::delta &&
        (buses[fi].phases.count() != 3 || buses[ti].phases.count() != 3))
      throw SchemaError("transformer " + t.id + ": delta requires 3-phase endpoints");
  }
  for (const auto& g : generators) {
    endpoint("generator " + g.id, g.bus, g.phases);
    for (Phase p : g.phases) {
      const int i = pidx(p);
      if (g.p_min[i] > g.p_max[i] || g.q_min[i] > g.q_max[i])
        throw SchemaError("generator " + g.id + ": lower bound above upper");
      if (g.ramp_limit[i] < 0)
        throw SchemaError("generator " + g.id + ": negative ramp limit");
    }
  }
  for (const auto& d : loads) {
    endpoint("load " + d.id, d.bus, d.phases);
    if (std::find(clusters.begin(), clusters.end(), d.cluster) == clusters.end())
      throw ReferenceError("load " + d.id + " references missing cluster " + d.cluster);
    for (Phase p : d.phases) {
      const int i = pidx(p);
      if (d.p_min && d.p_max && !((*d.p_min)[i] <= d.p[i] && d.p[i] <= (*d.p_max)[i]))
        throw SchemaError("load " + d.id + ": nominal p outside explicit bounds");
      if (d.q_min && d.q_max && !((*d.q_min)[i] <= d.q[i] && d.q[i] <= (*d.q_max)[i]))
        throw SchemaError("load " + d.id + ": nominal q outside explicit bounds");
    }
  }

  // connectivity with every switch closed
  if (!buses.empty()) {
    UnionFind uf(static_cast<int>(buses.size()));
    for (const auto& l : lines) uf.unite(bus_index(l.from), bus_index(l.to));
    for (const auto& t : transformers) uf.unite(bus_index(t.from), bus_index(t.to));
    for (const auto& s : switches) uf.unite(bus_index(s.from), bus_index(s.to));
    const int root = uf.find(0);
    for (size_t i = 1; i < buses.size(); ++i)
      if (uf.find(static_cast<int>(i)) != root)
        throw ConnectivityError("bus " + buses[i].id +
                                " unreachable with all switches closed");
  }

  // switch endpoints must sit in different blocks: checked in compute_blocks,
  // but a self-loop switch is always wrong.
  for (const auto& s : switches)
    if (s.from == s.to) throw SchemaError("switch " + s.id + " is a self loop");
}

BlockGraph compute_blocks(const Network& net) {
  const int nb = static_cast<int>(net.buses.size());
  UnionFind uf(nb);
  for (const auto& l : net.lines) uf.unite(net.bus_index(l.from), net.bus_index(l.to));
  for (const auto& t : net.transformers)
    uf.unite(net.bus_index(t.from), net.bus_index(t.to));

  // group by root, order components by lowest member bus index
  std::vector<std::vector<int>> groups;
  std::vector<int> root_group(nb, -1);
  for (int i = 0; i < nb; ++i) {
    const int r = uf.find(i);
    if (root_group[r] < 0) {
      root_group[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[root_group[r]].push_back(i);
  }
  // groups are already ordered by lowest bus index because roots are minima
  // and buses are scanned in ascending order.

  BlockGraph bg;
  bg.bus_block.assign(nb, -1);
  for (size_t g = 0; g < groups.size(); ++g) {
    Block blk;
    blk.id = "B" + std::to_string(g + 1);
    blk.buses = groups[g];
    for (int bi : blk.buses) {
      bg.bus_block[bi] = static_cast<int>(g);
      blk.phase_union = blk.phase_union.unite(net.buses[bi].phases);
      blk.phi_max = std::max(blk.phi_max, net.buses[bi].phases.count());
    }
    bg.blocks.push_back(std::move(blk));
  }

  for (size_t gi = 0; gi < net.generators.size(); ++gi) {
    const auto& g = net.generators[gi];
    Block& blk = bg.blocks[bg.bus_block[net.bus_index(g.bus)]];
    blk.generators.push_back(static_cast<int>(gi));
    if (g.substation) blk.has_substation = true;
  }
  for (size_t di = 0; di < net.loads.size(); ++di) {
    const auto& d = net.loads[di];
    Block& blk = bg.blocks[bg.bus_block[net.bus_index(d.bus)]];
    blk.loads.push_back(static_cast<int>(di));
    if (blk.cluster.empty()) {
      blk.cluster = d.cluster;
    } else if (blk.cluster != d.cluster) {
      throw SchemaError("block " + blk.id + " mixes clusters " + blk.cluster +
                        " and " + d.cluster);
    }
  }

  bg.switch_ends.reserve(net.switches.size());
  for (const auto& s : net.switches) {
    const int bi = bg.bus_block[net.bus_index(s.from)];
    const int bj = bg.bus_block[net.bus_index(s.to)];
    if (bi == bj)
      throw SchemaError("switch " + s.id + " endpoints are in the same block");
    bg.switch_ends.emplace_back(bi, bj);
  }
  return bg;
}

int max_phases(const Block& b) { return b.phi_max; }

std::vector<std::vector<int>> gfm_eligibility(const Network& net,
                                              const BlockGraph& bg,
                                              std::vector<std::string>* diagnostics) {
  std::vector<std::vector<int>> out(bg.blocks.size());
  for (size_t b = 0; b < bg.blocks.size(); ++b) {
    const Block& blk = bg.blocks[b];
    for (int gi : blk.generators) {
      const auto& g = net.generators[gi];
      if (g.substation) continue;  // voltage source in its own right
      if (g.phases.covers(blk.phase_union)) out[b].push_back(gi);
    }
    if (diagnostics && out[b].empty() && !blk.has_substation && !blk.loads.empty())
      diagnostics->push_back("block " + blk.id +
                             " has loads but no eligible grid-forming source");
  }
  return out;
}

CCPartition connected_components(const BlockGraph& bg,
                                 const std::vector<bool>& switch_closed) {
  const int nb = static_cast<int>(bg.blocks.size());
  UnionFind uf(nb);
  for (size_t s = 0; s < bg.switch_ends.size(); ++s)
    if (s < switch_closed.size() && switch_closed[s])
      uf.unite(bg.switch_ends[s].first, bg.switch_ends[s].second);

  CCPartition part;
  part.block_cc.assign(nb, -1);
  for (int b = 0; b < nb; ++b) {
    const int r = uf.find(b);
    if (part.block_cc[r] < 0) {
      part.block_cc[r] = static_cast<int>(part.cc_blocks.size());
      part.cc_blocks.emplace_back();
    }
    part.block_cc[b] = part.block_cc[r];
    part.cc_blocks[part.block_cc[b]].push_back(b);
  }
  return part;
}

}  // namespace dnmg::net
