#pragma once

#include <cstdint>
#include <vector>

#include "dnmg/network.hpp"

namespace dnmg::net {

// One realization of every uncertain load power.
struct ScenarioVector {
  std::vector<PerPhase<double>> p, q;       // per load
  std::vector<bool> cluster_max;            // zeta+ per cluster; empty unless extreme
  bool has_indicators() const { return !cluster_max.empty(); }
};

// Box bounds per load-phase plus the cluster structure.
struct UncertaintyModel {
  std::vector<std::string> clusters;  // sorted by id
  std::vector<PerPhase<double>> p_lo, p_hi, q_lo, q_hi;

  // Bounds default to s0(1 -+ level); explicit per-load file bounds override.
  static UncertaintyModel from_level(const Network& net, double level);
};

ScenarioVector nominal_scenario(const Network& net);

// All cluster-wise min/max corners, ordered by binary counting over clusters
// sorted by id (bit g set = cluster g at its maximum). Throws
// std::invalid_argument when |clusters| exceeds cap.
std::vector<ScenarioVector> uncertainty_extremes(const Network& net,
                                                 const UncertaintyModel& u,
                                                 int cap = 12);

// The all-maximum corner (default master representative scenario).
ScenarioVector max_corner(const Network& net, const UncertaintyModel& u);

// Random sample per the evaluation protocol: factor drawn uniformly from
// [-level, level], one per cluster (clustered) or one per load, applied as
// s = s0 * (1 + factor) to both power components.
ScenarioVector sample_scenario(const Network& net, double level, bool clustered,
                               std::uint64_t seed);

}  // namespace dnmg::net
