#include <cmath>
#include <sstream>

#include "dnmg/model.hpp"
#include "dnmg/rng.hpp"
#include "dnmg/simplex.hpp"
#include "doctest.h"
#include "lp_random.hpp"
#include "oracle_tableau.hpp"

using namespace dnmg;
using namespace dnmg::opt;

TEST_CASE("lp: min x subject to x >= 3") {
  Model m;
  const int x = m.add_var("x", 0.0, kInf);
  m.add_obj(x, 1.0);
  const int r = m.add_row("c0", Sense::ge, 3.0);
  m.add_term(r, x, 1.0);
  const auto s = solve_lp(m);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x[x] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(s.row_dual[r] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("lp: degenerate with redundant rows terminates") {
  Model m;
  const int x = m.add_var("x", 0.0, 10.0);
  const int y = m.add_var("y", 0.0, 10.0);
  m.add_obj(x, -1.0);
  m.add_obj(y, -1.0);
  for (int k = 0; k < 6; ++k) {
    const int r = m.add_row("dup" + std::to_string(k), Sense::le, 4.0);
    m.add_term(r, x, 1.0);
    m.add_term(r, y, 1.0);
  }
  // extra degenerate rows through the same vertex
  const int r2 = m.add_row("deg", Sense::le, 4.0);
  m.add_term(r2, x, 1.0);
  m.add_term(r2, y, 1.0);
  const auto s = solve_lp(m);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective == doctest::Approx(-4.0).epsilon(1e-9));
}

TEST_CASE("lp: infeasible and unbounded detection") {
  {
    Model m;
    const int x = m.add_var("x", 0.0, 1.0);
    const int r = m.add_row("c", Sense::ge, 3.0);
    m.add_term(r, x, 1.0);
    CHECK(solve_lp(m).status == Status::infeasible);
  }
  {
    Model m;
    const int x = m.add_var("x", -kInf, kInf);
    m.add_obj(x, -1.0);
    const int r = m.add_row("c", Sense::ge, 0.0);
    m.add_term(r, x, 1.0);
    CHECK(solve_lp(m).status == Status::unbounded);
  }
}

TEST_CASE("lp: equality system with free variables") {
  // x + y = 2, x - y = 0 -> x = y = 1
  Model m;
  const int x = m.add_var("x", -kInf, kInf);
  const int y = m.add_var("y", -kInf, kInf);
  m.add_obj(x, 1.0);
  int r1 = m.add_row("e1", Sense::eq, 2.0);
  m.add_term(r1, x, 1.0);
  m.add_term(r1, y, 1.0);
  int r2 = m.add_row("e2", Sense::eq, 0.0);
  m.add_term(r2, x, 1.0);
  m.add_term(r2, y, -1.0);
  const auto s = solve_lp(m);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x[x] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.x[y] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("lp: random instances match tableau oracle") {
  Rng rng(derive_seed(20260301, "lp-oracle"));
  int solved = 0;
  for (int t = 0; t < 120; ++t) {
    const int m = 5 + static_cast<int>(rng.below(16));
    const int n = m + static_cast<int>(rng.below(21));
    Model mod = testgen::random_lp(rng, m, n);
    const auto mine = solve_lp(mod);
    const auto ref = oracle::solve(mod);
    if (ref.status == oracle::TableauResult::optimal) {
      REQUIRE_MESSAGE(mine.status == Status::optimal, "instance ", t);
      CHECK_MESSAGE(
          std::abs(mine.objective - ref.objective) <= 1e-8 * (1.0 + std::abs(ref.objective)),
          "objective mismatch on instance ", t, ": ", mine.objective, " vs ",
          ref.objective);
      ++solved;
    } else if (ref.status == oracle::TableauResult::unbounded) {
      CHECK(mine.status == Status::unbounded);
    } else {
      CHECK(mine.status == Status::infeasible);
    }
  }
  CHECK(solved >= 100);  // the generator should produce mostly solvable LPs
}

TEST_CASE("lp: kkt invariants on random instances") {
  Rng rng(derive_seed(20260301, "lp-kkt"));
  for (int t = 0; t < 60; ++t) {
    Model mod = testgen::random_lp(rng, 8 + static_cast<int>(rng.below(10)),
                                   12 + static_cast<int>(rng.below(16)));
    const auto s = solve_lp(mod);
    if (s.status != Status::optimal) continue;
    const auto rep = check_kkt(mod, s);
    CHECK(rep.primal_residual <= 1e-9);
    CHECK(rep.dual_residual <= 1e-8);
    CHECK(rep.compl_slack <= 1e-8);
    CHECK(rep.duality_gap <= 1e-8);
  }
}

TEST_CASE("lp: deterministic resolve") {
  Rng rng(derive_seed(7, "det"));
  Model mod = testgen::random_lp(rng, 14, 22);
  const auto a = solve_lp(mod);
  const auto b = solve_lp(mod);
  REQUIRE(a.status == b.status);
  CHECK(a.objective == b.objective);  // bit-identical
  CHECK(a.x == b.x);
  CHECK(a.row_dual == b.row_dual);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("lp: warm restart after rhs change") {
  Rng rng(derive_seed(11, "warm"));
  Model mod = testgen::random_lp(rng, 12, 18);
  auto s0 = solve_lp(mod);
  if (s0.status != Status::optimal) return;
  // perturb every rhs slightly and re-solve warm
  for (int i = 0; i < mod.num_rows(); ++i)
    mod.set_rhs(i, mod.row(i).rhs + 0.01);
  const auto cold = solve_lp(mod);
  const auto warm = solve_lp_warm(mod, s0);
  REQUIRE(warm.status == cold.status);
  if (cold.status == Status::optimal)
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
}

TEST_CASE("milp: lp-integral relaxation solved at root") {
  Model m;
  const int z = m.add_var("z", 0.0, 1.0, true);
  m.add_obj(z, -1.0);
  const auto s = solve_milp(m);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x[z] == 1.0);
  CHECK(s.nodes == 1);
}

TEST_CASE("milp: 0/1 knapsack matches exhaustive enumeration") {
  // 8 items; maximize value subject to weight -> minimize -value
  const double w[8] = {2, 3, 4, 5, 9, 7, 1, 3};
  const double v[8] = {3, 4, 5, 8, 10, 7, 2, 5};
  const double cap = 15;
  Model m;
  for (int j = 0; j < 8; ++j) {
    m.add_var("z" + std::to_string(j), 0.0, 1.0, true);
    m.add_obj(j, -v[j]);
  }
  const int r = m.add_row("cap", Sense::le, cap);
  for (int j = 0; j < 8; ++j) m.add_term(r, j, w[j]);
  const auto s = solve_milp(m);
  REQUIRE(s.status == Status::optimal);

  double best = 0.0;
  for (unsigned mask = 0; mask < 256; ++mask) {
    double ww = 0, vv = 0;
    for (int j = 0; j < 8; ++j)
      if (mask & (1u << j)) {
        ww += w[j];
        vv += v[j];
      }
    if (ww <= cap) best = std::max(best, vv);
  }
  CHECK(s.objective == doctest::Approx(-best).epsilon(1e-9));
}

TEST_CASE("milp: infeasible binary system") {
  Model m;
  const int a = m.add_var("a", 0.0, 0.0, true);  // fixed 0
  const int b = m.add_var("b", 0.0, 0.0, true);  // fixed 0
  const int r = m.add_row("sum", Sense::eq, 1.0);
  m.add_term(r, a, 1.0);
  m.add_term(r, b, 1.0);
  CHECK(solve_milp(m).status == Status::infeasible);
}

TEST_CASE("milp: random binary instances match enumeration") {
  Rng rng(derive_seed(20260301, "milp-enum"));
  for (int t = 0; t < 40; ++t) {
    const int nb = 6 + static_cast<int>(rng.below(5));  // 6..10 binaries
    Model mod = testgen::random_binary_milp(rng, nb, 4 + static_cast<int>(rng.below(6)));
    const double ref = testgen::enumerate_binary(mod);
    const auto s = solve_milp(mod);
    if (ref == kInf) {
      CHECK_MESSAGE(s.status == Status::infeasible, "instance ", t);
    } else {
      REQUIRE_MESSAGE(s.status == Status::optimal, "instance ", t);
      CHECK_MESSAGE(std::abs(s.objective - ref) <= 1e-6, "instance ", t, ": ",
                    s.objective, " vs ", ref);
    }
  }
}

TEST_CASE("polygon: K=4 axis rows") {
  Model m;
  const int p = m.add_var("p", -kInf, kInf);
  const int q = m.add_var("q", -kInf, kInf);
  const auto rows = polygonize_magnitude(m, p, q, 1.0, 4, "poly");
  REQUIRE(rows.size() == 4);
  // rows: p<=1, q<=1, -p<=1, -q<=1
  CHECK(m.row(rows[0]).terms == std::vector<std::pair<int, double>>{{p, 1.0}});
  CHECK(m.row(rows[1]).terms == std::vector<std::pair<int, double>>{{q, 1.0}});
  CHECK(m.row(rows[2]).terms == std::vector<std::pair<int, double>>{{p, -1.0}});
  CHECK(m.row(rows[3]).terms == std::vector<std::pair<int, double>>{{q, -1.0}});
  for (int r : rows) CHECK(m.row(r).rhs == 1.0);

  // (0.8, 0.8) has magnitude ~1.131 but satisfies all four rows
  CHECK(0.8 <= 1.0);
  for (int r : rows) {
    double a = 0.0;
    for (auto [v, c] : m.row(r).terms) a += c * 0.8;
    CHECK(a <= 1.0 + 1e-12);
  }
}

TEST_CASE("polygon: K=12 outer approximation bound via grid sweep") {
  Model m;
  const int p = m.add_var("p", -kInf, kInf);
  const int q = m.add_var("q", -kInf, kInf);
  const int K = 12;
  const auto rows = polygonize_magnitude(m, p, q, 1.0, K, "poly");
  const double bound = 1.0 / std::cos(3.14159265358979323846 / K);

  auto accepted = [&](double pp, double qq) {
    for (int r : rows) {
      double a = 0.0;
      for (auto [v, c] : m.row(r).terms) a += c * (v == p ? pp : qq);
      if (a > 1.0 + 1e-12) return false;
    }
    return true;
  };

  for (int i = -60; i <= 60; ++i) {
    for (int j = -60; j <= 60; ++j) {
      const double pp = i / 50.0, qq = j / 50.0;
      const double mag = std::hypot(pp, qq);
      if (mag <= 1.0) CHECK(accepted(pp, qq));        // outer: never cuts the disk
      if (accepted(pp, qq)) CHECK(mag <= bound + 1e-9);
    }
  }
}

TEST_CASE("model: validation failures") {
  Model m;
  m.add_var("x", 1.0, 0.0);
  CHECK_THROWS(m.validate());
  Model m2;
  m2.add_row("r", Sense::le, 1.0);
  CHECK_THROWS(m2.add_row("r", Sense::le, 2.0));  // duplicate tag
}

TEST_CASE("model: lp format export") {
  Model m;
  const int x = m.add_var("x", 0.0, 2.0);
  const int y = m.add_var("y", -kInf, kInf);
  m.add_obj(x, 1.5);
  m.add_obj(y, -1.0);
  const int r = m.add_row("bal", Sense::eq, 1.0);
  m.add_term(r, x, 1.0);
  m.add_term(r, y, 2.0);
  std::ostringstream os;
  write_lp_format(m, os);
  const std::string txt = os.str();
  CHECK(txt.find("Minimize") != std::string::npos);
  CHECK(txt.find("bal:") != std::string::npos);
  CHECK(txt.find("y free") != std::string::npos);
}
