#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dnmg::net {

using Complex = std::complex<double>;

enum class Phase : int { a = 0, b = 1, c = 2 };

inline char phase_char(Phase p) { return "abc"[static_cast<int>(p)]; }

// Small bitmask over {a, b, c}.
class PhaseSet {
 public:
  PhaseSet() = default;
  static PhaseSet all() {
    PhaseSet s;
    s.mask_ = 7;
    return s;
  }
  void add(Phase p) { mask_ |= 1u << static_cast<int>(p); }
  bool has(Phase p) const { return mask_ & (1u << static_cast<int>(p)); }
  int count() const { return __builtin_popcount(mask_); }
  bool empty() const { return mask_ == 0; }
  bool covers(PhaseSet o) const { return (mask_ & o.mask_) == o.mask_; }
  PhaseSet unite(PhaseSet o) const {
    PhaseSet s;
    s.mask_ = mask_ | o.mask_;
    return s;
  }
  bool operator==(const PhaseSet&) const = default;

  struct iterator {
    unsigned mask;
    int pos;
    Phase operator*() const { return static_cast<Phase>(pos); }
    iterator& operator++() {
      ++pos;
      while (pos < 3 && !(mask & (1u << pos))) ++pos;
      return *this;
    }
    bool operator!=(const iterator& o) const { return pos != o.pos; }
  };
  iterator begin() const {
    int p = 0;
    while (p < 3 && !(mask_ & (1u << p))) ++p;
    return {mask_, p};
  }
  iterator end() const { return {mask_, 3}; }

  std::string to_string() const {
    std::string s;
    for (Phase p : *this) s += phase_char(p);
    return s;
  }

 private:
  unsigned mask_ = 0;
};

template <typename T>
using PerPhase = std::array<T, 3>;

inline int pidx(Phase p) { return static_cast<int>(p); }

// --- errors -----------------------------------------------------------------

struct NetworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : NetworkError {
  using NetworkError::NetworkError;
};
struct ReferenceError : NetworkError {
  using NetworkError::NetworkError;
};
struct ConnectivityError : NetworkError {
  using NetworkError::NetworkError;
};

// --- elements ----------------------------------------------------------------

struct Bus {
  std::string id;
  PhaseSet phases;
  double v_min = 0.9;
  double v_max = 1.1;
  PerPhase<Complex> shunt{};  // per-unit admittance g + jb
  std::string voltage_level;
};

struct LineSegment {
  std::string id;
  std::string from, to;
  PhaseSet phases;
  PerPhase<PerPhase<Complex>> z{};  // r + jx, zero on absent pairs
  PerPhase<double> flow_limit{};    // per-unit apparent power
};

struct Switch {
  std::string id;
  std::string from, to;
  PhaseSet phases;
  PerPhase<double> flow_limit{};
};

enum class XfmrKind { wye, delta };

struct Transformer {
  std::string id;
  XfmrKind kind = XfmrKind::wye;
  std::string from, to;
  PhaseSet phases;
  double tap_ratio = 1.0;
  PerPhase<double> flow_limit{};
};

struct Generator {
  std::string id;
  std::string bus;
  PhaseSet phases;
  PerPhase<double> p_min{}, p_max{}, q_min{}, q_max{};
  double cost_linear = 0.0;  // $ / per-unit
  double cost_fixed = 0.0;   // $
  PerPhase<double> ramp_limit{};
  bool substation = false;
};

struct LoadPoint {
  std::string id;
  std::string bus;
  PhaseSet phases;
  PerPhase<double> p{}, q{};  // nominal
  std::string cluster;
  // explicit bounds override the level-derived s0(1 +- x) defaults
  std::optional<PerPhase<double>> p_min, p_max, q_min, q_max;
};

struct Network {
  std::string name;
  double base_power_va = 1e6;
  std::map<std::string, double> base_voltage_v;
  std::vector<Bus> buses;
  std::vector<LineSegment> lines;
  std::vector<Switch> switches;
  std::vector<Transformer> transformers;
  std::vector<Generator> generators;
  std::vector<LoadPoint> loads;
  std::vector<std::string> clusters;  // sorted on load

  int bus_index(std::string_view id) const;  // -1 when absent
  int switch_index(std::string_view id) const;
  int generator_index(std::string_view id) const;
  const Bus& bus(int i) const { return buses[i]; }

  // Checks every structural invariant; throws on violation.
  void validate() const;
};

// --- block decomposition ------------------------------------------------------

struct Block {
  std::string id;          // "B1", "B2", ... in deterministic order
  std::vector<int> buses;  // bus indices, ascending
  PhaseSet phase_union;
  int phi_max = 1;
  double weight = 1.0;  // beta^B, filled from RPOPConfig
  std::string cluster;  // cluster shared by the block's loads ("" if none)
  bool has_substation = false;
  std::vector<int> generators;  // indices into net.generators
  std::vector<int> loads;
};

struct BlockGraph {
  std::vector<Block> blocks;
  std::vector<int> bus_block;                    // bus index -> block position
  std::vector<std::pair<int, int>> switch_ends;  // per switch: block positions

  int block_of_bus(int bus) const { return bus_block[bus]; }
  int block_index(std::string_view id) const;
};

// Connected components of the all-switches-open graph, ordered by lowest
// member bus index. Throws when a block's loads span clusters.
BlockGraph compute_blocks(const Network& net);

int max_phases(const Block& b);

// Per block: generators connected to every phase present in the block.
// diagnostics gets a note for energizable blocks with no eligible source.
std::vector<std::vector<int>> gfm_eligibility(const Network& net,
                                              const BlockGraph& bg,
                                              std::vector<std::string>* diagnostics = nullptr);

struct CCPartition {
  std::vector<int> block_cc;               // block position -> cc index
  std::vector<std::vector<int>> cc_blocks; // cc index -> block positions
  int count() const { return static_cast<int>(cc_blocks.size()); }
};

// Union-find over the block graph restricted to closed switches. CC ids are
// assigned in order of each component's lowest block position.
CCPartition connected_components(const BlockGraph& bg,
                                 const std::vector<bool>& switch_closed);

}  // namespace dnmg::net
