#pragma once

#include <string>

#include "dnmg/network.hpp"
#include "dnmg/network_io.hpp"

namespace testsup {

inline std::string fixture_path(const std::string& name) {
  return std::string(DNMG_FIXTURE_DIR) + "/" + name;
}

inline dnmg::net::Network load_fixture(const std::string& name) {
  return dnmg::net::load_network_file(fixture_path(name));
}

// Smallest valid network: substation bus, one line, one load, one generator.
inline const char* kTwoBusDoc = R"({
  "name": "twobus",
  "base_power_va": 1e6,
  "base_voltage_v": {"mv": 12470.0},
  "buses": [
    {"id": "n1", "phases": ["a"], "v_min": 0.9, "v_max": 1.1},
    {"id": "n2", "phases": ["a"], "v_min": 0.9, "v_max": 1.1}
  ],
  "lines": [
    {"id": "ln", "from": "n1", "to": "n2", "phases": ["a"],
     "impedance": [[[0.1, 0.05], [0,0], [0,0]], [[0,0],[0,0],[0,0]], [[0,0],[0,0],[0,0]]],
     "flow_limit": 1.0}
  ],
  "generators": [
    {"id": "gen", "bus": "n1", "phases": ["a"], "p_min": 0.0, "p_max": 1.0,
     "q_min": -0.5, "q_max": 0.5, "cost_linear": 1.0, "ramp_limit": 0.5,
     "substation": true}
  ],
  "loads": [
    {"id": "ld", "bus": "n2", "phases": ["a"], "p": 0.2, "q": 0.05, "cluster": "k1"}
  ],
  "clusters": ["k1"]
})";

}  // namespace testsup
