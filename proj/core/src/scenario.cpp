#include "dnmg/scenario.hpp"

#include <algorithm>
#include <stdexcept>

#include "dnmg/rng.hpp"

namespace dnmg::net {

UncertaintyModel UncertaintyModel::from_level(const Network& net, double level) {
  if (level < 0) throw std::invalid_argument("uncertainty level must be >= 0");
  UncertaintyModel u;
  u.clusters = net.clusters;  // already sorted
  const size_t nd = net.loads.size();
  u.p_lo.resize(nd);
  u.p_hi.resize(nd);
  u.q_lo.resize(nd);
  u.q_hi.resize(nd);
  for (size_t d = 0; d < nd; ++d) {
    const auto& ld = net.loads[d];
    for (Phase ph : ld.phases) {
      const int i = pidx(ph);
      const double pa = ld.p[i] * (1.0 - level), pb = ld.p[i] * (1.0 + level);
      const double qa = ld.q[i] * (1.0 - level), qb = ld.q[i] * (1.0 + level);
      u.p_lo[d][i] = std::min(pa, pb);
      u.p_hi[d][i] = std::max(pa, pb);
      u.q_lo[d][i] = std::min(qa, qb);
      u.q_hi[d][i] = std::max(qa, qb);
      if (ld.p_min) u.p_lo[d][i] = (*ld.p_min)[i];
      if (ld.p_max) u.p_hi[d][i] = (*ld.p_max)[i];
      if (ld.q_min) u.q_lo[d][i] = (*ld.q_min)[i];
      if (ld.q_max) u.q_hi[d][i] = (*ld.q_max)[i];
    }
  }
  return u;
}

ScenarioVector nominal_scenario(const Network& net) {
  ScenarioVector s;
  s.p.reserve(net.loads.size());
  s.q.reserve(net.loads.size());
  for (const auto& ld : net.loads) {
    s.p.push_back(ld.p);
    s.q.push_back(ld.q);
  }
  return s;
}

std::vector<ScenarioVector> uncertainty_extremes(const Network& net,
                                                 const UncertaintyModel& u,
                                                 int cap) {
  const int nc = static_cast<int>(u.clusters.size());
  if (nc > cap)
    throw std::invalid_argument(
        "uncertainty_extremes: " + std::to_string(nc) + " clusters would need " +
        std::to_string(1ull << nc) + " scenarios, above the cap of 2^" +
        std::to_string(cap) + "; raise the cap only if that blowup is intended");

  std::vector<int> load_cluster(net.loads.size(), -1);
  for (size_t d = 0; d < net.loads.size(); ++d) {
    const auto it = std::find(u.clusters.begin(), u.clusters.end(), net.loads[d].cluster);
    load_cluster[d] = static_cast<int>(it - u.clusters.begin());
  }

  std::vector<ScenarioVector> out;
  const std::uint64_t total = 1ull << nc;
  out.reserve(total);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    ScenarioVector s;
    s.p.resize(net.loads.size());
    s.q.resize(net.loads.size());
    s.cluster_max.resize(nc);
    for (int g = 0; g < nc; ++g) s.cluster_max[g] = (mask >> g) & 1;
    for (size_t d = 0; d < net.loads.size(); ++d) {
      const bool hi = s.cluster_max[load_cluster[d]];
      s.p[d] = hi ? u.p_hi[d] : u.p_lo[d];
      s.q[d] = hi ? u.q_hi[d] : u.q_lo[d];
    }
    out.push_back(std::move(s));
  }
  return out;
}

ScenarioVector max_corner(const Network& net, const UncertaintyModel& u) {
  ScenarioVector s;
  s.p = u.p_hi;
  s.q = u.q_hi;
  s.cluster_max.assign(u.clusters.size(), true);
  (void)net;
  return s;
}

ScenarioVector sample_scenario(const Network& net, double level, bool clustered,
                               std::uint64_t seed) {
  Rng rng(seed);
  ScenarioVector s;
  s.p.resize(net.loads.size());
  s.q.resize(net.loads.size());

  if (clustered) {
    std::vector<double> factor(net.clusters.size());
    for (auto& f : factor) f = rng.uniform(-level, level);
    for (size_t d = 0; d < net.loads.size(); ++d) {
      const auto it =
          std::find(net.clusters.begin(), net.clusters.end(), net.loads[d].cluster);
      const double f = factor[it - net.clusters.begin()];
      for (int i = 0; i < 3; ++i) {
        s.p[d][i] = net.loads[d].p[i] * (1.0 + f);
        s.q[d][i] = net.loads[d].q[i] * (1.0 + f);
      }
    }
  } else {
    for (size_t d = 0; d < net.loads.size(); ++d) {
      const double f = rng.uniform(-level, level);
      for (int i = 0; i < 3; ++i) {
        s.p[d][i] = net.loads[d].p[i] * (1.0 + f);
        s.q[d][i] = net.loads[d].q[i] * (1.0 + f);
      }
    }
  }
  return s;
}

}  // namespace dnmg::net
