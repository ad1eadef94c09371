#include <doctest.h>

#include <cmath>
#include <numbers>

#include "detloop/closedform.hpp"
#include "detloop/errors.hpp"
#include "gen.hpp"

using namespace detloop;
using detloop::testing::Gen;

TEST_CASE("critical efficiency constants") {
  CHECK(eberhard_sym() == 2.0 / 3.0);
  CHECK(larsson_cabello_asym() == 0.5);
  CHECK(std::abs(bc_chain_sym(2) - 2.0 * (std::numbers::sqrt2 - 1.0)) < 1e-15);
  CHECK(std::abs(bc_chain_asym(2) - 1.0 / std::numbers::sqrt2) < 1e-15);
  // Chained thresholds approach 2/(N+1) and (N-1)/N for many settings.
  CHECK(bc_chain_sym(200) == doctest::Approx(2.0 / 201).epsilon(1e-4));
  CHECK(bc_chain_asym(200) == doctest::Approx(199.0 / 200).epsilon(1e-4));
}

TEST_CASE("the CHSH feasibility region ends at the Eberhard and one-sided thresholds") {
  const double s = eberhard_sym();
  CHECK_FALSE(branciard_feasible(s, s));
  CHECK(branciard_feasible(s + 1e-6, s + 1e-6));
  const double a = larsson_cabello_asym();
  CHECK_FALSE(branciard_feasible(1.0, a));
  CHECK(branciard_feasible(1.0, a + 1e-6));
}

TEST_CASE("setting-dependent condition reduces to the setting-independent one") {
  Gen g(51);
  for (int k = 0; k < 2000; ++k) {
    double e1 = g.uniform(), e2 = g.uniform();
    CHECK(quintino_feasible(e1, e1, e2, e2) == branciard_feasible(e1, e2));
  }
  CHECK(quintino_feasible(1.0, 0.9, 1.0, 0.9));
  CHECK_FALSE(quintino_feasible(0.5, 0.5, 0.5, 0.5));
}

TEST_CASE("multipartite thresholds decrease with the number of parties") {
  for (int n = 2; n < 12; ++n) {
    CHECK(ch_nsite_threshold(n + 1) < ch_nsite_threshold(n));
    CHECK(mermin_threshold(n + 1) < mermin_threshold(n));
    CHECK(ch_nsite_threshold(n) > 0.5);
    CHECK(mermin_threshold(n) > 0.5);
  }
  CHECK(ch_nsite_threshold(2) == doctest::Approx(2.0 / 3.0));
  CHECK(mermin_threshold(2) == 1.0);
  CHECK(mermin_threshold(3) == 0.75);
  CHECK(mermin_classical_bound(3) == doctest::Approx(2.0));
  CHECK(mermin_classical_bound(4) == doctest::Approx(4.0));
}

TEST_CASE("Hardy probability peaks near nine percent") {
  double best = 0.0;
  for (int k = 1; k < 100000; ++k) best = std::max(best, hardy_prob(k / 100000.0));
  CHECK(best == doctest::Approx((5.0 * std::sqrt(5.0) - 11.0) / 2.0).epsilon(1e-6));
  CHECK_THROWS_AS(hardy_prob(1.0), DomainError);
}

TEST_CASE("prepare-and-measure efficiencies") {
  auto [lo, hi] = istar_bounds(3);
  CHECK(lo == doctest::Approx(1.0 + std::numbers::sqrt2));
  CHECK(hi == 3.0);
  CHECK(pam_eta_qc(2, std::numbers::sqrt2) == doctest::Approx(1.0 / std::numbers::sqrt2));
  CHECK(pam_eta_dim(2, 2.0) == 1.0);
  CHECK(bilocal_scaling(0.5, 0.5, std::numbers::sqrt2) == doctest::Approx(std::numbers::sqrt2 / 2));
  CHECK(garbarino_feasible(0.9, 0.9, 0.9));
  CHECK_FALSE(garbarino_feasible(0.1, 0.5, 0.5));
}

TEST_CASE("formula dispatcher") {
  auto r = formula("ch_nsite_threshold", {{"n", 3}});
  REQUIRE(r.values.size() == 1);
  CHECK(r.values[0] == doctest::Approx(0.6));
  CHECK_FALSE(r.description.empty());
  auto f = formula("branciard_feasible", {{"eta1", 0.9}, {"eta2", 0.9}});
  REQUIRE(f.flag.has_value());
  CHECK(*f.flag);
  auto iv = formula("istar_bounds", {{"d", 2}});
  CHECK(iv.values.size() == 2);
  CHECK_THROWS_AS(formula("nope", {}), DomainError);
  CHECK_THROWS_AS(formula("eberhard_sym", {{"x", 1}}), DomainError);
  CHECK_THROWS_AS(formula("bc_chain_sym", {{"N", 1}}), DomainError);
  CHECK(formula_catalog().size() == 15);
}
