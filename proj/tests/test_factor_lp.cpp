#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "adwords/factor_lp.hpp"
#include "adwords/params.hpp"

#include <cmath>
#include <map>

using namespace adwords;

TEST_CASE("closed form hits the published ratios") {
  BasicTable t = BasicTable::closed_form(frozen_large_gamma());
  CHECK(t.big_gamma() == Rat(38786, 76929));
  CHECK(t.big_gamma() > Rat(5041, 10000));
  CHECK(t.big_gamma() < Rat(5042, 10000));
  CHECK(BasicTable::closed_form(Rat(1)).big_gamma() == Rat(5, 9));
  CHECK(BasicTable::closed_form(Rat(0)).big_gamma() == Rat(1, 2));
}

TEST_CASE("closed form certifies with equality where the lemma says") {
  BasicTable t = BasicTable::closed_form(frozen_large_gamma());
  CHECK(certify_basic_table(t, 64) == Rat(0));
  CHECK(closed_form_equality_residual(t, 64) == Rat(0));
  // dbeta(1) = (3+2g)/(6+3g) * 1/2, the first randomized offer density.
  Rat g = frozen_large_gamma();
  CHECK(t.dbeta(1) == (Rat(3) + Rat(2) * g) / (Rat(6) + Rat(3) * g) * Rat(1, 2));
  CHECK(t.dbeta(1).to_double() == doctest::Approx(0.25209).epsilon(1e-4));
}

TEST_CASE("tail identity: sum_{l>k} dx(l) <= dx(k), equality at k=1") {
  BasicTable t = BasicTable::closed_form(frozen_large_gamma());
  CHECK(t.dx_tail(2) == t.dx(1));
  for (int k = 2; k <= 64; ++k) CHECK(t.dx_tail(k + 1) <= t.dx(k));
}

TEST_CASE("dbeta decreases strictly in the closed form") {
  BasicTable t = BasicTable::closed_form(frozen_large_gamma());
  for (int k = 1; k <= 64; ++k) CHECK(t.dbeta(k) > t.dbeta(k + 1));
}

TEST_CASE("truncated closed-form Gamma degrades monotonically in kmax") {
  Rat g = frozen_large_gamma();
  Rat previous(0);
  for (int kmax : {2, 5, 10, 20, 40}) {
    Rat value = BasicTable::closed_form_truncated(g, kmax).big_gamma();
    CHECK(value > previous);
    previous = value;
  }
  CHECK(previous < BasicTable::closed_form(g).big_gamma());
}

TEST_CASE("truncated general table beats 0.50005 at kmax 18") {
  Rat gamma = Rat(1245, 100000) / Rat(18);
  BasicTable t = BasicTable::closed_form_truncated(gamma, 18);
  CHECK(t.big_gamma() - Rat(50005, 100000) > Rat(1, 10000000));
  CHECK(certify_basic_table(t, 18) == Rat(0));
  // The penalty equals the dropped dx tail.
  BasicTable closed = BasicTable::closed_form(gamma);
  CHECK(closed.big_gamma() - t.big_gamma() == closed.dx_tail(19));
}

TEST_CASE("toy LPs solve to their known optima") {
  LinearProgram lp;
  int g = lp.add_var("G", Rat(1));
  lp.add_row("c1", {{g, Rat(1)}}, Sense::kLe, Rat(7, 10));
  lp.add_row("c2", {{g, Rat(1)}}, Sense::kLe, Rat(3, 5));
  LpSolution sol = solve(lp);
  REQUIRE(sol.status == LpSolution::Status::kOptimal);
  CHECK(sol.objective == Rat(3, 5));
  CHECK(sol.exact_vertex);
  CHECK(sol.max_violation == Rat(0));
}

TEST_CASE("infeasible and unbounded toys are detected") {
  LinearProgram bad;
  int x = bad.add_var("x", Rat(1));
  bad.add_row("lo", {{x, Rat(1)}}, Sense::kGe, Rat(2));
  bad.add_row("hi", {{x, Rat(1)}}, Sense::kLe, Rat(1));
  CHECK(solve(bad).status == LpSolution::Status::kInfeasible);

  LinearProgram unbounded;
  int y = unbounded.add_var("y", Rat(1));
  unbounded.add_row("lo", {{y, Rat(1)}}, Sense::kGe, Rat(0));
  CHECK(solve(unbounded).status == LpSolution::Status::kUnbounded);
}

TEST_CASE("the basic LP tracks its closed form as kmax grows") {
  Rat g = frozen_large_gamma();
  LpSolution sol = solve(build_basic_lp(g, 40));
  REQUIRE(sol.status == LpSolution::Status::kOptimal);
  REQUIRE(sol.max_violation * Rat(1000000000) <= Rat(1));  // <= 1e-9
  Rat closed = BasicTable::closed_form(g).big_gamma();
  CHECK(std::fabs((closed - sol.objective).to_double()) < 1e-6);

  LpSolution at18 = solve(build_basic_lp(g, 18));
  REQUIRE(at18.exact_vertex);
  CHECK(at18.objective <= closed);
  BasicTable exported = export_basic_table(g, 18, at18);
  CHECK(certify_basic_table(exported, 18) == Rat(0));
  CHECK(exported.big_gamma() <= at18.objective);
}

TEST_CASE("solver is deterministic") {
  LinearProgram lp = build_basic_lp(frozen_large_gamma(), 10);
  LpSolution a = solve(lp);
  LpSolution b = solve(lp);
  CHECK(a.objective == b.objective);
  CHECK(a.pivots == b.pivots);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("hybrid LP objective is nondecreasing in kmax and tops 0.5016") {
  Rat g = frozen_large_gamma();
  // Frozen regression values (certified exact vertices, not ground truth).
  const std::map<int, double> regression = {{2, 0.445873333333},
                                            {5, 0.499754075202},
                                            {10, 0.501664432233},
                                            {20, 0.501671667}};
  Rat previous(0);
  for (auto [kmax, expected] : regression) {
    LpSolution sol = solve(build_hybrid_lp(g, kmax));
    REQUIRE(sol.status == LpSolution::Status::kOptimal);
    REQUIRE(sol.exact_vertex);
    CHECK(sol.objective >= previous);
    CHECK(sol.objective.to_double() == doctest::Approx(expected).epsilon(1e-6));
    previous = sol.objective;
    if (kmax == 20) CHECK(sol.objective >= Rat(5016, 10000));
  }
}

TEST_CASE("hybrid export re-certifies exactly and round trips") {
  Rat g = frozen_large_gamma();
  LpSolution sol = solve(build_hybrid_lp(g, 5));
  HybridTable table = export_hybrid_table(g, 5, sol);
  CHECK(certify_hybrid_table(table) == Rat(0));
  CHECK(table.big_gamma <= sol.objective);
  CHECK(table.big_gamma > Rat(49, 100));
  // beta = dx - alpha by construction.
  for (int k = 1; k <= 5; ++k) {
    CHECK(table.db_l_r[static_cast<std::size_t>(k)] ==
          HybridTable::dx_left_semi(k) - table.da_l_r[static_cast<std::size_t>(k)]);
    CHECK(table.db_r_rl[static_cast<std::size_t>(k)] ==
          HybridTable::dx_right_semi_large(g, k) -
              table.da_r_r[static_cast<std::size_t>(k)]);
  }
  HybridTable again = hybrid_table_from_json(table_to_json(table));
  CHECK(again.big_gamma == table.big_gamma);
  CHECK(again.da_r_d == table.da_r_d);
  CHECK(again.db_r_rs == table.db_r_rs);
}

TEST_CASE("hybrid large-vs-small beta ordering holds pointwise") {
  Rat g = frozen_large_gamma();
  LpSolution sol = solve(build_hybrid_lp(g, 6));
  HybridTable table = export_hybrid_table(g, 6, sol);
  for (int k = 1; k <= 6; ++k)
    CHECK(table.db_r_rl[static_cast<std::size_t>(k)] >=
          table.db_r_rs[static_cast<std::size_t>(k)]);
}

TEST_CASE("hybrid primal-increment constants match the lemmas") {
  Rat g = frozen_large_gamma();
  CHECK(HybridTable::dx_left_semi(3) == Rat(1, 8));
  CHECK(HybridTable::dx_left_det(3) == Rat(1, 4));
  CHECK(HybridTable::dx_right_semi_small(g, 1) == Rat(1, 2) - g / Rat(4));
  CHECK(HybridTable::dx_right_semi_large(g, 1) == Rat(1, 2));
  CHECK(HybridTable::dx_right_semi_large(g, 2) == (Rat(1) + g) / Rat(4));
  CHECK(HybridTable::dx_right_det(g, 1) == Rat(1));
  CHECK(HybridTable::dx_right_det(g, 2) == Rat(1, 2));
  // Small-then-large on the same right-half point: the two increments sum to
  // the independent two-semi coverage 3/4.
  CHECK(HybridTable::dx_right_semi_small(g, 1) +
            HybridTable::dx_right_semi_large(g, 2) ==
        Rat(3, 4));
}

TEST_CASE("basic table json round trips bit-exactly") {
  BasicTable closed = BasicTable::closed_form(frozen_large_gamma());
  BasicTable c2 = basic_table_from_json(table_to_json(closed));
  CHECK(c2.infinite());
  CHECK(c2.big_gamma() == closed.big_gamma());
  CHECK(c2.dbeta(17) == closed.dbeta(17));

  BasicTable trunc = BasicTable::closed_form_truncated(frozen_large_gamma(), 9);
  BasicTable t2 = basic_table_from_json(table_to_json(trunc));
  CHECK(t2.kmax() == 9);
  CHECK(t2.big_gamma() == trunc.big_gamma());
  for (int k = 1; k <= 10; ++k) {
    CHECK(t2.dalpha(k) == trunc.dalpha(k));
    CHECK(t2.dbeta_tail(k) == trunc.dbeta_tail(k));
  }
}

TEST_CASE("lp text export lists every row") {
  LinearProgram lp = build_basic_lp(frozen_large_gamma(), 3);
  std::string text = lp.to_text();
  CHECK(text.find("maximize") != std::string::npos);
  CHECK(text.find("bound_at_limit") != std::string::npos);
  CHECK(text.find("not_to_a_k0") != std::string::npos);
}
