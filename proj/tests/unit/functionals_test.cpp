#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "detloop/closedform.hpp"
#include "detloop/errors.hpp"
#include "detloop/functionals.hpp"
#include "detloop/strategy.hpp"
#include "gen.hpp"

using namespace detloop;
using detloop::testing::Gen;

namespace {

// Calls fn for every function {0..n-1} -> {0..k-1}.
void for_each_function(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> f(n, 0);
  while (true) {
    fn(f);
    int i = 0;
    while (i < n && ++f[i] == k) f[i++] = 0;
    if (i == n) return;
  }
}

// Largest violation over deterministic classical strategies, enumerated directly
// from the scenario definitions.
double worst_classical_violation(const Functional& f, int pam_dim) {
  const auto& e = f.shape.ext;
  double worst = -1e300;
  auto score = [&](const Behavior& b) { worst = std::max(worst, violation(f, evaluate(f, b))); };
  switch (f.shape.kind) {
    case Scenario::Bell:
      for_each_function(e[0], e[2], [&](const std::vector<int>& fa) {
        for_each_function(e[1], e[3], [&](const std::vector<int>& gb) {
          score(deterministic_bell(e[0], e[1], e[2], e[3], fa, gb));
        });
      });
      break;
    case Scenario::Instrumental:
      for_each_function(e[0], e[1], [&](const std::vector<int>& fa) {
        for_each_function(e[1], e[2], [&](const std::vector<int>& gb) {
          auto b = InstrumentalBehavior::zeros(e[0], e[1], e[2]);
          for (int x = 0; x < e[0]; ++x) b.p_at(fa[x], gb[fa[x]], x) = 1.0;
          for (int a = 0; a < e[1]; ++a) b.pdo_at(gb[a], a) = 1.0;
          score(b);
        });
      });
      break;
    case Scenario::Pam: {
      // For a fixed decoder the best message can be chosen independently per preparation.
      const int nx = e[0], ny = e[1], nb = e[2];
      for_each_function(pam_dim * ny, nb, [&](const std::vector<int>& dec) {
        auto b = PamBehavior::zeros(nx, ny, nb);
        for (int x = 0; x < nx; ++x) {
          double best = -1e300;
          int best_m = 0;
          for (int m = 0; m < pam_dim; ++m) {
            double v = 0.0;
            for (int y = 0; y < ny; ++y) v += f.coeffs[b.index(dec[m * ny + y], x, y)];
            if (f.direction == Direction::Below) v = -v;
            if (v > best) best = v, best_m = m;
          }
          for (int y = 0; y < ny; ++y) b.at(dec[best_m * ny + y], x, y) = 1.0;
        }
        score(b);
      });
      break;
    }
    case Scenario::NParty: {
      const int n = e[0], s = e[1], o = e[2];
      for_each_function(n * s, o, [&](const std::vector<int>& out) {
        auto b = NPartyBehavior::zeros(n, s, o);
        for (int st = 0; st < b.setting_tuples(); ++st) {
          int ot = 0, rem = st;
          std::vector<int> settings(n);
          for (int k = n - 1; k >= 0; --k) settings[k] = rem % s, rem /= s;
          for (int k = 0; k < n; ++k) ot = ot * o + out[k * s + settings[k]];
          b.p[b.index(ot, st)] = 1.0;
        }
        score(b);
      });
      break;
    }
    case Scenario::Bilocal: break;
  }
  return worst;
}

}  // namespace

TEST_CASE("classical bounds are the exact extremes over deterministic strategies") {
  std::vector<std::pair<std::string, Params>> cases{
      {"chsh", {}},        {"chsh", {{"orientation", "plus"}}}, {"chsh", {{"orientation", "minus"}}},
      {"eberhard", {}},    {"cglmp3", {}},                      {"mermin3", {}},
      {"mermin", {{"n", "2"}}}, {"mermin", {{"n", "4"}}},       {"svetlichny3", {}},
      {"ch_nsite", {{"n", "2"}}}, {"ch_nsite", {{"n", "3"}}},   {"ch_nsite", {{"n", "4"}}},
      {"pearl", {}},       {"pearl", {{"a", "1"}, {"b", "0"}, {"x", "1"}}},
      {"bonet", {}},       {"bonet", {{"b", "0"}, {"perm", "3"}}},
      {"kedagni", {}},     {"kedagni", {{"a", "1"}, {"perm", "17"}}},
      {"i222", {}},        {"i223", {}},                        {"i233", {}},
      {"ace_lb", {}},      {"ace_lb_eta", {{"eta", "0.8"}}},
      {"s3", {}},          {"tn", {{"n", "2"}}},                {"tn", {{"n", "3"}}},
      {"id_witness", {{"d", "2"}}}, {"id_witness", {{"d", "3"}}}};
  for (const auto& [name, params] : cases) {
    Functional f = build(name, params);
    CAPTURE(f.name);
    int dim = 2;
    if (name == "id_witness") dim = std::stoi(params.at("d"));
    CHECK(std::abs(worst_classical_violation(f, dim)) < 1e-12);
  }
}

TEST_CASE("Mermin local bounds match enumeration") {
  for (int n = 2; n <= 4; ++n) {
    Functional f = build("mermin", {{"n", std::to_string(n)}});
    CHECK(f.classical_bound == doctest::Approx(mermin_classical_bound(n)));
  }
}

TEST_CASE("tn classical bounds for three to five bits") {
  // One-bit messages, computed by the vertex enumeration inside the library.
  CHECK(build("tn", {{"n", "3"}}).classical_bound == doctest::Approx(6.0));
  CHECK(build("tn", {{"n", "4"}}).classical_bound == doctest::Approx(12.0));
  CHECK(build("tn", {{"n", "5"}}).classical_bound == doctest::Approx(30.0));
  CHECK(pam_dimension_bound(build("tn", {{"n", "4"}}), 2) == doctest::Approx(12.0));
  CHECK(pam_dimension_bound(build("s3"), 2) == doctest::Approx(3.0));
}

TEST_CASE("CHSH reaches Tsirelson's bound on the optimal qubit strategy") {
  // Maximally entangled state; Alice along Z and X, Bob along the diagonals.
  const double pi = std::numbers::pi;
  std::vector<double> x{pi / 4, 0, 0, pi / 2, 0, pi / 4, 0, pi / 4, pi};
  Behavior b = StrategySpace::bell_qubit().behavior(x);
  double s = evaluate(build("chsh"), b);
  CHECK(std::abs(std::abs(s) - 2 * std::numbers::sqrt2) < 1e-12);
}

TEST_CASE("ideal entanglement swapping gives sqrt(2) for the bilocal quantity") {
  const double pi = std::numbers::pi;
  // Both sources maximally entangled; Alice and Charlie both on the diagonals of the Z-X plane.
  std::vector<double> x{pi / 4, pi / 4, pi / 4, 0, pi / 4, pi, pi / 4, 0, pi / 4, pi};
  auto b = std::get<BilocalBehavior>(StrategySpace::bilocal_qubit().behavior(x));
  CHECK(evaluate_ij(b) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-12));
  auto parts = ij_parts(b);
  CHECK(std::abs(parts.i) == doctest::Approx(0.5));
  CHECK(std::abs(parts.j) == doctest::Approx(0.5));
}

TEST_CASE("extending a functional leaves values of padded behaviors unchanged") {
  Gen g(41);
  Functional f = build("chsh");
  Shape big{Scenario::Bell, {2, 2, 3, 3}};
  Functional ext = extend_to(f, big);
  auto space = StrategySpace::bell_qubit();
  for (int k = 0; k < 20; ++k) {
    Behavior b = space.behavior(g.params(space));
    CHECK(evaluate(ext, pad_to(b, big)) == doctest::Approx(evaluate(f, b)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(extend_to(f, {Scenario::Bell, {3, 2, 2, 2}}), DimensionError);
  CHECK(embed_index(f.shape, big, 1) == 1);
  CHECK(embed_index(f.shape, {Scenario::Pam, {2, 2, 2}}, 0) == -1);
}

TEST_CASE("builders validate their parameters") {
  CHECK_THROWS_AS(build("nonesuch"), DomainError);
  CHECK_THROWS_AS(build("pearl", {{"a", "2"}}), DomainError);
  CHECK_THROWS_AS(build("tn", {{"n", "six"}}), DomainError);
  CHECK_THROWS_AS(build("mermin", {{"n", "9"}}), DomainError);
  CHECK_THROWS_AS(evaluate(build("chsh"), Behavior(PamBehavior::zeros(3, 2, 2))), DimensionError);
}

TEST_CASE("canonical text and catalog") {
  auto text = build("chsh", {{"orientation", "plus"}}).to_text();
  CHECK(text.find("p(00|00)") != std::string::npos);
  CHECK(text.find("<= 2") != std::string::npos);
  bool seen_ij = false;
  for (const auto& info : list_functionals()) {
    CHECK_NOTHROW(build(info.name));
    seen_ij |= info.name == "ij";
  }
  CHECK(seen_ij);
}

TEST_CASE("Pearl holds for random quantum strategies") {
  Gen g(42);
  Functional f = build("pearl");
  auto space = StrategySpace::instrumental_qubit(2, 2, 2);
  double worst = -1e300;
  for (int k = 0; k < 500; ++k) worst = std::max(worst, violation(f, evaluate(f, space.behavior(g.params(space)))));
  CHECK(worst <= 1e-12);
}

TEST_CASE("Bonet and Kedagni admit quantum violations") {
  // The classical bound is 0 (checked by enumeration above); a qubit
  // strategy reaches (sqrt2 - 1)/2 on Bonet.
  Gen g(43);
  auto bonet = build("bonet");
  auto space = StrategySpace::instrumental_qubit(3, 2, 2);
  double best = -1e300;
  for (int k = 0; k < 20000; ++k) best = std::max(best, evaluate(bonet, space.behavior(g.params(space))));
  CHECK(best <= (std::numbers::sqrt2 - 1) / 2 + 1e-12);

  auto kedagni = build("kedagni");
  auto space4 = StrategySpace::instrumental_qubit(4, 2, 2);
  double worst = -1e300;
  for (int k = 0; k < 2000; ++k) worst = std::max(worst, violation(kedagni, evaluate(kedagni, space4.behavior(g.params(space4)))));
  CHECK(worst > 0.0);
}
