#include <algorithm>
#include <cmath>

#include "dnmg/lindistflow.hpp"

namespace dnmg::ldf {

using namespace dnmg::net;

VoltageSensitivity voltage_sensitivity(const LineSegment& line) {
  constexpr double kSqrt3 = 1.7320508075688772935;
  VoltageSensitivity s;
  // first set: (a,b), (b,c), (c,a); the reversed pairs flip the sqrt(3) term
  auto first_set = [](int i, int j) {
    return (i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 0);
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (!line.phases.has(static_cast<Phase>(i)) ||
          !line.phases.has(static_cast<Phase>(j)))
        continue;
      const double r = line.z[i][j].real();
      const double x = line.z[i][j].imag();
      if (i == j) {
        s.mp[i][j] = 2.0 * r;
        s.mq[i][j] = 2.0 * x;
      } else if (first_set(i, j)) {
        s.mp[i][j] = -r + kSqrt3 * x;
        s.mq[i][j] = -x - kSqrt3 * r;
      } else {
        s.mp[i][j] = -r - kSqrt3 * x;
        s.mq[i][j] = -x + kSqrt3 * r;
      }
    }
  }
  return s;
}

std::string key_zbl(const std::string& block_id) { return "zbl[" + block_id + "]"; }
std::string key_zsw(const std::string& switch_id) { return "zsw[" + switch_id + "]"; }
std::string key_p(const std::string& gen_id, Phase ph) {
  return std::string("p[") + gen_id + ":" + phase_char(ph) + "]";
}
std::string key_q(const std::string& gen_id, Phase ph) {
  return std::string("q[") + gen_id + ":" + phase_char(ph) + "]";
}

std::vector<CCInfo> analyze_topology(const Network& net, const BlockGraph& bg,
                                     const Topology& topo) {
  const auto part = connected_components(bg, topo.switch_closed);
  std::vector<CCInfo> out(part.count());
  for (int c = 0; c < part.count(); ++c) {
    CCInfo& cc = out[c];
    cc.blocks = part.cc_blocks[c];
    bool all_on = true, any_on = false;
    for (int b : cc.blocks) {
      for (int bus : bg.blocks[b].buses) cc.buses.push_back(bus);
      const bool on = topo.block_energized[b];
      all_on &= on;
      any_on |= on;
      if (bg.blocks[b].has_substation && topo.substation_active) {
        cc.has_substation = true;
        for (int gi : bg.blocks[b].generators)
          if (net.generators[gi].substation) {
            cc.source_gen = gi;
            cc.source_bus = net.bus_index(net.generators[gi].bus);
          }
      }
    }
    std::sort(cc.buses.begin(), cc.buses.end());
    cc.energized = all_on && any_on;
    if (!cc.has_substation) {
      for (int b : cc.blocks) {
        for (int gi : bg.blocks[b].generators) {
          if (gi < static_cast<int>(topo.gfm.size()) && topo.gfm[gi]) {
            cc.source_gen = gi;
            cc.source_bus = net.bus_index(net.generators[gi].bus);
            cc.id = "CC-" + bg.blocks[bg.bus_block[cc.source_bus]].id;
          }
        }
      }
      if (cc.id.empty())
        cc.id = "CC-" + bg.blocks[cc.blocks.front()].id + "-unsourced";
    } else {
      cc.id = "CC-S";
    }
  }
  return out;
}

}  // namespace dnmg::ldf
