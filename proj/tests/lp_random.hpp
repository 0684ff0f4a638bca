#pragma once

// Random feasible LP / binary MILP instances shared by the unit and
// acceptance suites.

#include <string>
#include <vector>

#include "dnmg/model.hpp"
#include "dnmg/rng.hpp"

namespace testgen {

// Feasible by construction: b is derived from a known interior point.
inline dnmg::opt::Model random_lp(dnmg::Rng& rng, int m, int n) {
  using namespace dnmg::opt;
  Model mod;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double pick = rng.uniform();
    double lo = 0.0, hi = kInf;
    if (pick < 0.7) {
      lo = 0.0;
      hi = rng.uniform(2.0, 6.0);
    } else if (pick < 0.9) {
      lo = 0.0;
      hi = kInf;
    } else {
      lo = -kInf;
      hi = kInf;
    }
    mod.add_var("x" + std::to_string(j), lo, hi);
    const double span = (hi == kInf ? 3.0 : hi - lo);
    const double base = (lo == -kInf ? -1.5 : lo);
    x0[j] = base + rng.uniform(0.0, span);
    // cost bias keeps most instances bounded: push toward a finite bound
    double c = rng.uniform(-1.0, 1.0);
    if (lo == -kInf && hi == kInf)
      c = 0.0;  // free: rows decide
    else if (hi == kInf)
      c = std::abs(c) + 0.05;  // bounded below only
    mod.add_obj(j, c);
  }
  for (int i = 0; i < m; ++i) {
    double act = 0.0;
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < 0.3) {
        const double a = rng.uniform(-2.0, 2.0);
        terms.emplace_back(j, a);
        act += a * x0[j];
      }
    }
    if (terms.empty()) continue;
    const double pick = rng.uniform();
    int r;
    if (pick < 0.5) {
      r = mod.add_row("r" + std::to_string(i), Sense::le, act + rng.uniform(0.1, 1.0));
    } else if (pick < 0.8) {
      r = mod.add_row("r" + std::to_string(i), Sense::ge, act - rng.uniform(0.1, 1.0));
    } else {
      r = mod.add_row("r" + std::to_string(i), Sense::eq, act);
    }
    for (auto [j, a] : terms) mod.add_term(r, j, a);
  }
  return mod;
}

// Pure-binary MILP with <= rows; always feasible (all-zero works when rhs >= 0
// is forced for a subset of rows) -- feasibility not guaranteed, which is
// part of what the enumeration cross-check exercises.
inline dnmg::opt::Model random_binary_milp(dnmg::Rng& rng, int nb, int m) {
  using namespace dnmg::opt;
  Model mod;
  for (int j = 0; j < nb; ++j) {
    mod.add_var("z" + std::to_string(j), 0.0, 1.0, true);
    mod.add_obj(j, rng.uniform(-2.0, 2.0));
  }
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < nb; ++j)
      if (rng.uniform() < 0.5) terms.emplace_back(j, rng.uniform(-3.0, 3.0));
    if (terms.empty()) continue;
    const double pick = rng.uniform();
    const Sense s = pick < 0.6 ? Sense::le : (pick < 0.9 ? Sense::ge : Sense::eq);
    double rhs;
    if (s == Sense::eq) {
      // rhs reachable by some assignment so equality rows are not hopeless
      double acc = 0.0;
      for (auto [j, a] : terms)
        if (rng.uniform() < 0.5) acc += a;
      rhs = acc;
    } else {
      rhs = rng.uniform(-2.0, 4.0);
    }
    const int r = mod.add_row("r" + std::to_string(i), s, rhs);
    for (auto [j, a] : terms) mod.add_term(r, j, a);
  }
  return mod;
}

// Exhaustive evaluation of a pure-binary model. Returns +inf objective when
// infeasible.
inline double enumerate_binary(const dnmg::opt::Model& mod) {
  using namespace dnmg::opt;
  const int nb = mod.num_vars();
  double best = kInf;
  for (unsigned mask = 0; mask < (1u << nb); ++mask) {
    bool ok = true;
    for (int i = 0; i < mod.num_rows() && ok; ++i) {
      const auto& r = mod.row(i);
      double a = 0.0;
      for (const auto& [v, c] : r.terms)
        if (mask & (1u << v)) a += c;
      switch (r.sense) {
        case Sense::le: ok = a <= r.rhs + 1e-9; break;
        case Sense::ge: ok = a >= r.rhs - 1e-9; break;
        case Sense::eq: ok = std::abs(a - r.rhs) <= 1e-9; break;
      }
    }
    if (!ok) continue;
    double z = 0.0;
    for (int j = 0; j < nb; ++j)
      if (mask & (1u << j)) z += mod.var(j).obj;
    best = std::min(best, z);
  }
  return best;
}

}  // namespace testgen
