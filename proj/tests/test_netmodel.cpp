#include <algorithm>
#include <set>

#include "dnmg/network.hpp"
#include "dnmg/network_io.hpp"
#include "dnmg/rng.hpp"
#include "dnmg/scenario.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dnmg;
using namespace dnmg::net;

TEST_CASE("load_network: minimal two-bus document") {
  const Network net = load_network(testsup::kTwoBusDoc);
  CHECK(net.buses.size() == 2);
  CHECK(net.lines.size() == 1);
  const auto bg = compute_blocks(net);
  CHECK(bg.blocks.size() == 1);
  CHECK(bg.blocks[0].buses.size() == 2);
}

TEST_CASE("load_network: dangling switch endpoint is a referential error") {
  std::string doc = testsup::kTwoBusDoc;
  const auto pos = doc.find("\"lines\":");
  doc.insert(pos, R"("switches": [
    {"id": "sw", "from": "n1", "to": "missing", "phases": ["a"], "flow_limit": 1.0}
  ],
  )");
  CHECK_THROWS_AS(load_network(doc), ReferenceError);
}

TEST_CASE("load_network: schema violations") {
  CHECK_THROWS_AS(load_network("{\"buses\": []}"), SchemaError);  // no units
  CHECK_THROWS_AS(load_network("not json"), SchemaError);
  // disconnected graph
  std::string doc = R"({
    "base_power_va": 1e6, "base_voltage_v": {"mv": 1.0},
    "buses": [
      {"id": "n1", "phases": ["a"], "v_min": 0.9, "v_max": 1.1},
      {"id": "n2", "phases": ["a"], "v_min": 0.9, "v_max": 1.1}
    ],
    "generators": [], "loads": [], "clusters": []
  })";
  CHECK_THROWS_AS(load_network(doc), ConnectivityError);
}

TEST_CASE("toybay fixture passes validation with expected structure") {
  const Network net = testsup::load_fixture("toybay.json");
  CHECK(net.buses.size() == 12);
  CHECK(net.switches.size() == 6);
  CHECK(net.generators.size() == 5);  // substation + 4 DGs
  CHECK(net.loads.size() == 6);
  CHECK(net.clusters.size() == 2);

  const auto bg = compute_blocks(net);
  REQUIRE(bg.blocks.size() == 5);

  // hand-enumerated components of the all-open graph
  auto block_bus_ids = [&](int b) {
    std::set<std::string> ids;
    for (int i : bg.blocks[b].buses) ids.insert(net.buses[i].id);
    return ids;
  };
  CHECK(block_bus_ids(0) == std::set<std::string>{"b01", "b02", "b03", "b10"});
  CHECK(block_bus_ids(1) == std::set<std::string>{"b04", "b05"});
  CHECK(block_bus_ids(2) == std::set<std::string>{"b06", "b07"});
  CHECK(block_bus_ids(3) == std::set<std::string>{"b08", "b09"});
  CHECK(block_bus_ids(4) == std::set<std::string>{"b11", "b12"});
  CHECK(bg.blocks[0].id == "B1");
  CHECK(bg.blocks[4].id == "B5");
  CHECK(bg.blocks[0].has_substation);

  // blocks partition the bus set
  std::vector<int> seen(net.buses.size(), 0);
  for (const auto& b : bg.blocks)
    for (int i : b.buses) seen[i]++;
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

  // per-block max phases from per-bus data
  CHECK(bg.blocks[0].phi_max == 3);
  CHECK(bg.blocks[1].phi_max == 3);
  CHECK(bg.blocks[2].phi_max == 1);
  CHECK(bg.blocks[3].phi_max == 1);
  CHECK(bg.blocks[4].phi_max == 3);

  // block/cluster association
  CHECK(bg.blocks[2].cluster == "c2");
  CHECK(bg.blocks[1].cluster == "c1");
}

TEST_CASE("compute_blocks: no switches yields one block") {
  const Network net = load_network(testsup::kTwoBusDoc);
  const auto bg = compute_blocks(net);
  CHECK(bg.blocks.size() == 1);
  CHECK(max_phases(bg.blocks[0]) == 1);
}

TEST_CASE("validator rejects mixed clusters within a block") {
  std::string doc = testsup::kTwoBusDoc;
  // second load on the same block with a different cluster
  const auto pos = doc.find(R"({"id": "ld")");
  doc.insert(pos, R"({"id": "ld2", "bus": "n1", "phases": ["a"], "p": 0.1, "q": 0.0, "cluster": "k2"},
  )");
  doc.replace(doc.find("[\"k1\"]"), 6, "[\"k1\", \"k2\"]");
  CHECK_THROWS_AS(load_network(doc), SchemaError);
}

TEST_CASE("gfm_eligibility: phase coverage rules") {
  const Network net = testsup::load_fixture("toybay.json");
  const auto bg = compute_blocks(net);
  std::vector<std::string> diag;
  const auto elig = gfm_eligibility(net, bg, &diag);

  const int g1 = net.generator_index("g1");
  const int g2 = net.generator_index("g2");
  const int g3 = net.generator_index("g3");
  const int g4 = net.generator_index("g4");

  // 3-phase DG in a 3-phase block: eligible
  CHECK(elig[1] == std::vector<int>{g1});
  // single-phase DG in a single-phase {a} block: covers the union
  CHECK(elig[2] == std::vector<int>{g2});
  CHECK(elig[3] == std::vector<int>{g3});
  CHECK(elig[4] == std::vector<int>{g4});
  // substation does not appear as a GFM candidate
  CHECK(elig[0].empty());

  // brute-force cross-check: eligible iff phases cover the block union
  for (size_t b = 0; b < bg.blocks.size(); ++b) {
    for (int gi : bg.blocks[b].generators) {
      const auto& g = net.generators[gi];
      if (g.substation) continue;
      const bool in = std::find(elig[b].begin(), elig[b].end(), gi) != elig[b].end();
      CHECK(in == g.phases.covers(bg.blocks[b].phase_union));
    }
  }
}

TEST_CASE("gfm_eligibility: single-phase DG in a 3-phase block is ineligible, "
          "and adding phases is monotone") {
  std::string doc = R"({
    "base_power_va": 1e6, "base_voltage_v": {"mv": 1.0},
    "buses": [
      {"id": "n1", "phases": ["a", "b", "c"], "v_min": 0.9, "v_max": 1.1},
      {"id": "n2", "phases": ["a"], "v_min": 0.9, "v_max": 1.1}
    ],
    "lines": [
      {"id": "ln", "from": "n1", "to": "n2", "phases": ["a"],
       "impedance": [[[0.1, 0.05], [0,0], [0,0]], [[0,0],[0,0],[0,0]], [[0,0],[0,0],[0,0]]],
       "flow_limit": 1.0}
    ],
    "generators": [
      {"id": "dg", "bus": "n2", "phases": ["a"], "p_min": 0, "p_max": 1,
       "q_min": -1, "q_max": 1, "cost_linear": 1.0}
    ],
    "loads": [{"id": "ld", "bus": "n1", "phases": ["a"], "p": 0.1, "q": 0.0, "cluster": "k"}],
    "clusters": ["k"]
  })";
  Network net = load_network(doc);
  auto bg = compute_blocks(net);
  std::vector<std::string> diag;
  auto elig = gfm_eligibility(net, bg, &diag);
  CHECK(elig[0].empty());
  CHECK(diag.size() == 1);  // loads present, no eligible source, no substation

  // monotone: growing the DG's phase set never removes eligibility
  net.generators[0].phases = PhaseSet::all();
  elig = gfm_eligibility(net, bg);
  CHECK(elig[0] == std::vector<int>{0});
}

TEST_CASE("connected_components: all open / all closed / partial") {
  const Network net = testsup::load_fixture("toybay.json");
  const auto bg = compute_blocks(net);

  const auto all_open = connected_components(bg, std::vector<bool>(6, false));
  CHECK(all_open.count() == 5);

  const auto all_closed = connected_components(bg, std::vector<bool>(6, true));
  CHECK(all_closed.count() == 1);

  // s2 (B2-B5) and s5 (B3-B4) closed
  std::vector<bool> closed(6, false);
  closed[net.switch_index("s2")] = true;
  closed[net.switch_index("s5")] = true;
  const auto part = connected_components(bg, closed);
  REQUIRE(part.count() == 3);
  CHECK(part.block_cc[0] == 0);                  // B1 alone
  CHECK(part.block_cc[1] == part.block_cc[4]);   // B2+B5
  CHECK(part.block_cc[2] == part.block_cc[3]);   // B3+B4
  CHECK(part.block_cc[1] != part.block_cc[0]);
  CHECK(part.block_cc[1] != part.block_cc[2]);
}

TEST_CASE("uncertainty_extremes: sizes, ordering, bounds") {
  const Network net = testsup::load_fixture("toybay.json");
  const auto u = UncertaintyModel::from_level(net, 0.2);
  REQUIRE(u.clusters == std::vector<std::string>{"c1", "c2"});

  const auto ext = uncertainty_extremes(net, u);
  REQUIRE(ext.size() == 4);  // 2^2

  // ordering: scenario index counts in binary, bit g = cluster g at max
  CHECK(ext[0].cluster_max == std::vector<bool>{false, false});
  CHECK(ext[1].cluster_max == std::vector<bool>{true, false});
  CHECK(ext[2].cluster_max == std::vector<bool>{false, true});
  CHECK(ext[3].cluster_max == std::vector<bool>{true, true});

  // every load value sits exactly at its cluster's bound
  for (size_t d = 0; d < net.loads.size(); ++d) {
    const bool c1 = net.loads[d].cluster == "c1";
    for (Phase ph : net.loads[d].phases) {
      const int i = pidx(ph);
      CHECK(ext[0].p[d][i] == doctest::Approx(u.p_lo[d][i]));
      CHECK(ext[3].p[d][i] == doctest::Approx(u.p_hi[d][i]));
      CHECK(ext[1].p[d][i] == doctest::Approx(c1 ? u.p_hi[d][i] : u.p_lo[d][i]));
    }
  }

  // no duplicates at nonzero width
  for (size_t i = 0; i < ext.size(); ++i)
    for (size_t j = i + 1; j < ext.size(); ++j)
      CHECK(ext[i].p != ext[j].p);

  // single cluster: exactly all-min and all-max
  const Network two = load_network(testsup::kTwoBusDoc);
  const auto u1 = UncertaintyModel::from_level(two, 0.1);
  const auto e1 = uncertainty_extremes(two, u1);
  REQUIRE(e1.size() == 2);
  CHECK(e1[0].p[0][0] == doctest::Approx(0.18));
  CHECK(e1[1].p[0][0] == doctest::Approx(0.22));
}

TEST_CASE("uncertainty_extremes: cluster cap refusal") {
  const Network net = testsup::load_fixture("toybay.json");
  const auto u = UncertaintyModel::from_level(net, 0.1);
  CHECK_THROWS_AS(uncertainty_extremes(net, u, 1), std::invalid_argument);
}

TEST_CASE("explicit per-load bounds override the level defaults") {
  std::string doc = testsup::kTwoBusDoc;
  doc.replace(doc.find("\"p\": 0.2"), 8, "\"p\": 0.2, \"p_min\": 0.19, \"p_max\": 0.3");
  const Network net = load_network(doc);
  const auto u = UncertaintyModel::from_level(net, 0.1);
  CHECK(u.p_lo[0][0] == doctest::Approx(0.19));
  CHECK(u.p_hi[0][0] == doctest::Approx(0.3));
  CHECK(u.q_lo[0][0] == doctest::Approx(0.045));  // level-derived
}

TEST_CASE("sample_scenario: nominal at level zero, determinism, clustering") {
  const Network net = testsup::load_fixture("toybay.json");

  const auto s0 = sample_scenario(net, 0.0, false, 42);
  const auto nom = nominal_scenario(net);
  CHECK(s0.p == nom.p);
  CHECK(s0.q == nom.q);

  const auto a = sample_scenario(net, 0.2, true, 7);
  const auto b = sample_scenario(net, 0.2, true, 7);
  CHECK(a.p == b.p);  // identical across calls with one seed

  const auto c = sample_scenario(net, 0.2, true, 8);
  CHECK(a.p != c.p);

  // clustered: every load in a cluster shares its factor
  auto factor_of = [&](const net::ScenarioVector& s, size_t d) {
    const Phase ph = *net.loads[d].phases.begin();
    return s.p[d][pidx(ph)] / net.loads[d].p[pidx(ph)] - 1.0;
  };
  double fc1 = 0, fc2 = 0;
  bool first1 = true, first2 = true;
  for (size_t d = 0; d < net.loads.size(); ++d) {
    const double f = factor_of(a, d);
    CHECK(std::abs(f) <= 0.2);
    if (net.loads[d].cluster == "c1") {
      if (first1) fc1 = f, first1 = false;
      CHECK(f == doctest::Approx(fc1).epsilon(1e-12));
    } else {
      if (first2) fc2 = f, first2 = false;
      CHECK(f == doctest::Approx(fc2).epsilon(1e-12));
    }
  }
  CHECK(fc1 != fc2);

  // non-clustered: factors differ across loads (independent draws)
  const auto nc = sample_scenario(net, 0.2, false, 7);
  std::set<long long> distinct;
  for (size_t d = 0; d < net.loads.size(); ++d)
    distinct.insert(llround(factor_of(nc, d) * 1e12));
  CHECK(distinct.size() == net.loads.size());
}
