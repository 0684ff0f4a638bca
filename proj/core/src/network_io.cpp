#include "dnmg/network_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dnmg::net {

namespace {

using nlohmann::json;

PhaseSet parse_phases(const json& j, const std::string& owner) {
  if (!j.is_array()) throw SchemaError(owner + ": phases must be an array");
  PhaseSet s;
  for (const auto& e : j) {
    const std::string v = e.get<std::string>();
    if (v == "a")
      s.add(Phase::a);
    else if (v == "b")
      s.add(Phase::b);
    else if (v == "c")
      s.add(Phase::c);
    else
      throw SchemaError(owner + ": unknown phase \"" + v + "\"");
  }
  if (s.empty()) throw SchemaError(owner + ": empty phase set");
  return s;
}

// Scalar applied to all present phases, or {"a": ..} per phase.
PerPhase<double> parse_per_phase(const json& j, PhaseSet phases,
                                 const std::string& owner) {
  PerPhase<double> out{};
  if (j.is_number()) {
    for (Phase p : phases) out[pidx(p)] = j.get<double>();
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k.size() != 1 || (k[0] != 'a' && k[0] != 'b' && k[0] != 'c'))
        throw SchemaError(owner + ": bad phase key " + k);
      const Phase p = static_cast<Phase>(k[0] - 'a');
      if (!phases.has(p)) throw SchemaError(owner + ": value on absent phase " + k);
      out[pidx(p)] = it->get<double>();
    }
  } else {
    throw SchemaError(owner + ": expected number or per-phase object");
  }
  return out;
}

double require_number(const json& j, const char* field, const std::string& owner) {
  if (!j.contains(field) || !j[field].is_number())
    throw SchemaError(owner + ": missing numeric field \"" + field + "\"");
  return j[field].get<double>();
}

std::string require_string(const json& j, const char* field, const std::string& owner) {
  if (!j.contains(field) || !j[field].is_string())
    throw SchemaError(owner + ": missing string field \"" + field + "\"");
  return j[field].get<std::string>();
}

}  // namespace

Network load_network(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("network document is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("network document must be an object");

  Network net;
  net.name = root.value("name", "");
  if (!root.contains("base_power_va"))
    throw SchemaError("missing base_power_va (units must be declared)");
  net.base_power_va = root["base_power_va"].get<double>();
  if (!root.contains("base_voltage_v") || !root["base_voltage_v"].is_object())
    throw SchemaError("missing base_voltage_v map (units must be declared)");
  for (auto it = root["base_voltage_v"].begin(); it != root["base_voltage_v"].end(); ++it)
    net.base_voltage_v[it.key()] = it->get<double>();

  for (const auto& j : root.value("buses", json::array())) {
    Bus b;
    b.id = require_string(j, "id", "bus");
    const std::string owner = "bus " + b.id;
    b.phases = parse_phases(j.at("phases"), owner);
    b.v_min = require_number(j, "v_min", owner);
    b.v_max = require_number(j, "v_max", owner);
    b.voltage_level = j.value("voltage_level", "");
    if (j.contains("shunt")) {
      const auto& sh = j["shunt"];
      if (!sh.is_object()) throw SchemaError(owner + ": shunt must map phase -> [g, b]");
      for (auto it = sh.begin(); it != sh.end(); ++it) {
        const Phase p = static_cast<Phase>(it.key()[0] - 'a');
        if (!b.phases.has(p)) throw SchemaError(owner + ": shunt on absent phase");
        if (!it->is_array() || it->size() != 2)
          throw SchemaError(owner + ": shunt entries are [g, b]");
        b.shunt[pidx(p)] = Complex((*it)[0].get<double>(), (*it)[1].get<double>());
      }
    }
    net.buses.push_back(std::move(b));
  }

  for (const auto& j : root.value("lines", json::array())) {
    LineSegment l;
    l.id = require_string(j, "id", "line");
    const std::string owner = "line " + l.id;
    l.from = require_string(j, "from", owner);
    l.to = require_string(j, "to", owner);
    l.phases = parse_phases(j.at("phases"), owner);
    const auto& z = j.at("impedance");
    if (!z.is_array() || z.size() != 3)
      throw SchemaError(owner + ": impedance must be a 3x3 array of [r, x]");
    for (int a = 0; a < 3; ++a) {
      if (!z[a].is_array() || z[a].size() != 3)
        throw SchemaError(owner + ": impedance must be a 3x3 array of [r, x]");
      for (int b = 0; b < 3; ++b) {
        if (!z[a][b].is_array() || z[a][b].size() != 2)
          throw SchemaError(owner + ": impedance entries are [r, x]");
        l.z[a][b] = Complex(z[a][b][0].get<double>(), z[a][b][1].get<double>());
      }
    }
    l.flow_limit = parse_per_phase(j.at("flow_limit"), l.phases, owner);
    net.lines.push_back(std::move(l));
  }

  for (const auto& j : root.value("switches", json::array())) {
    Switch s;
    s.id = require_string(j, "id", "switch");
    const std::string owner = "switch " + s.id;
    s.from = require_string(j, "from", owner);
    s.to = require_string(j, "to", owner);
    s.phases = parse_phases(j.at("phases"), owner);
    s.flow_limit = parse_per_phase(j.at("flow_limit"), s.phases, owner);
    net.switches.push_back(std::move(s));
  }

  for (const auto& j : root.value("transformers", json::array())) {
    Transformer t;
    t.id = require_string(j, "id", "transformer");
    const std::string owner = "transformer " + t.id;
    const std::string kind = require_string(j, "kind", owner);
    if (kind == "wye")
      t.kind = XfmrKind::wye;
    else if (kind == "delta")
      t.kind = XfmrKind::delta;
    else
      throw SchemaError(owner + ": kind must be wye or delta");
    t.from = require_string(j, "from", owner);
    t.to = require_string(j, "to", owner);
    t.phases = parse_phases(j.at("phases"), owner);
    t.tap_ratio = require_number(j, "tap_ratio", owner);
    t.flow_limit = parse_per_phase(j.at("flow_limit"), t.phases, owner);
    net.transformers.push_back(std::move(t));
  }

  for (const auto& j : root.value("generators", json::array())) {
    Generator g;
    g.id = require_string(j, "id", "generator");
    const std::string owner = "generator " + g.id;
    g.bus = require_string(j, "bus", owner);
    g.phases = parse_phases(j.at("phases"), owner);
    g.p_min = parse_per_phase(j.at("p_min"), g.phases, owner);
    g.p_max = parse_per_phase(j.at("p_max"), g.phases, owner);
    g.q_min = parse_per_phase(j.at("q_min"), g.phases, owner);
    g.q_max = parse_per_phase(j.at("q_max"), g.phases, owner);
    g.cost_linear = require_number(j, "cost_linear", owner);
    g.cost_fixed = j.value("cost_fixed", 0.0);
    g.ramp_limit = j.contains("ramp_limit")
                       ? parse_per_phase(j["ramp_limit"], g.phases, owner)
                       : PerPhase<double>{};
    g.substation = j.value("substation", false);
    net.generators.push_back(std::move(g));
  }

  for (const auto& j : root.value("loads", json::array())) {
    LoadPoint d;
    d.id = require_string(j, "id", "load");
    const std::string owner = "load " + d.id;
    d.bus = require_string(j, "bus", owner);
    d.phases = parse_phases(j.at("phases"), owner);
    d.p = parse_per_phase(j.at("p"), d.phases, owner);
    d.q = parse_per_phase(j.at("q"), d.phases, owner);
    d.cluster = require_string(j, "cluster", owner);
    if (j.contains("p_min")) d.p_min = parse_per_phase(j["p_min"], d.phases, owner);
    if (j.contains("p_max")) d.p_max = parse_per_phase(j["p_max"], d.phases, owner);
    if (j.contains("q_min")) d.q_min = parse_per_phase(j["q_min"], d.phases, owner);
    if (j.contains("q_max")) d.q_max = parse_per_phase(j["q_max"], d.phases, owner);
    net.loads.push_back(std::move(d));
  }

  for (const auto& j : root.value("clusters", json::array())) {
    if (j.is_object())
      net.clusters.push_back(j.at("id").get<std::string>());
    else
      net.clusters.push_back(j.get<std::string>());
  }
  std::sort(net.clusters.begin(), net.clusters.end());
  net.clusters.erase(std::unique(net.clusters.begin(), net.clusters.end()),
                     net.clusters.end());

  net.validate();
  compute_blocks(net);  // enforces block/cluster and switch-endpoint invariants
  return net;
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open network file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_network(ss.str());
}

}  // namespace dnmg::net
