#include <doctest.h>

#include <cmath>

#include "detloop/behaviors.hpp"
#include "detloop/errors.hpp"
#include "detloop/strategy.hpp"
#include "gen.hpp"

using namespace detloop;
using detloop::testing::Gen;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
  return w;
}

std::vector<StrategySpace> all_spaces() {
  return {StrategySpace::bell_qubit(),
          StrategySpace::bell_qubit(3, 2),
          StrategySpace::bell_qutrit(),
          StrategySpace::instrumental_qubit(),
          StrategySpace::instrumental_qubit(2, 3, 3),
          StrategySpace::instrumental_qubit(3, 2, 2),
          StrategySpace::pam_qubit(3, 2),
          StrategySpace::pam_qubit(4, 2, true),
          StrategySpace::bilocal_qubit()};
}

}  // namespace

TEST_CASE("fast behaviors agree with the general Born-rule builders") {
  Gen g(21);
  for (const auto& s : all_spaces()) {
    CAPTURE(s.describe());
    for (int trial = 0; trial < 25; ++trial) {
      auto x = g.params(s);
      auto fast = flatten(s.behavior(x));
      auto slow = flatten(s.behavior_from_decoded(x));
      CHECK(max_diff(fast, slow) < 1e-12);
    }
  }
}

TEST_CASE("strategy behaviors are normalized and quantum Bell behaviors are no-signaling") {
  Gen g(22);
  for (const auto& s : all_spaces()) {
    for (int trial = 0; trial < 25; ++trial) {
      Behavior b = s.behavior(g.params(s));
      Shape sh = shape_of(b);
      auto flat = flatten(b);
      for (const auto& grp : sh.groups()) {
        double sum = 0.0;
        for (int i : grp) {
          CHECK(flat[i] >= 0.0);
          sum += flat[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
      }
      if (auto* bell = std::get_if<BellBehavior>(&b)) CHECK(no_signaling_report(*bell).max_deviation < 1e-12);
    }
  }
}

TEST_CASE("parameter count mismatches are dimension errors") {
  auto s = StrategySpace::bell_qubit();
  CHECK_THROWS_AS(s.behavior(std::vector<double>(s.num_params() + 1, 0.0)), DimensionError);
}

TEST_CASE("flatten and unflatten are inverse") {
  Gen g(23);
  for (const auto& s : all_spaces()) {
    Behavior b = s.behavior(g.params(s));
    auto flat = flatten(b);
    CHECK(flatten(unflatten(shape_of(b), flat)) == flat);
    CHECK(flat.size() == shape_of(b).flat_size());
  }
}

TEST_CASE("check_behavior clamps tiny negatives and rejects real ones") {
  auto b = deterministic_bell(2, 2, 2, 2, {0, 1}, {1, 0});
  long before = clamp_count();
  b.at(1, 1, 0, 0) = -5e-10;
  b.at(0, 1, 0, 0) = 1.0 + 5e-10;
  check_behavior(b);
  CHECK(b(1, 1, 0, 0) == 0.0);
  CHECK(clamp_count() == before + 1);
  b.at(1, 1, 0, 0) = -1e-3;
  CHECK_THROWS_AS(check_behavior(b), NumericalError);
  auto c = deterministic_bell(2, 2, 2, 2, {0, 1}, {1, 0});
  c.at(0, 0, 1, 1) = 0.5;
  CHECK_THROWS_AS(check_behavior(c), NumericalError);
}

TEST_CASE("no-signaling report names the offending marginal") {
  auto b = BellBehavior::zeros(2, 2, 2, 2);
  // Alice outputs Bob's setting: signaling from Bob to Alice.
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) b.at(y, 0, x, y) = 1.0;
  auto r = no_signaling_report(b);
  CHECK_FALSE(r.pass);
  CHECK(r.max_deviation == doctest::Approx(1.0));
  CHECK(r.worst().find("p_A") != std::string::npos);
  CHECK_THROWS_AS(instrumental_from_bell(b), SignalingError);
}

TEST_CASE("instrumental from Bell reads Bob's setting off Alice's outcome") {
  Gen g(24);
  auto s = StrategySpace::bell_qubit();
  auto b = std::get<BellBehavior>(s.behavior(g.params(s)));
  auto ins = instrumental_from_bell(b);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      for (int bb = 0; bb < 2; ++bb) CHECK(ins.p(a, bb, x) == b(a, bb, x, a));
  for (int a = 0; a < 2; ++a)
    for (int bb = 0; bb < 2; ++bb) CHECK(ins.pdo(bb, a) == doctest::Approx(b(0, bb, 0, a) + b(1, bb, 0, a)));
  CHECK_THROWS_AS(instrumental_from_bell(BellBehavior::zeros(2, 3, 2, 2)), DimensionError);
}

TEST_CASE("average causal effect") {
  auto b = InstrumentalBehavior::zeros(2, 2, 2);
  b.pdo_at(0, 0) = 0.9;
  b.pdo_at(1, 0) = 0.1;
  b.pdo_at(0, 1) = 0.3;
  b.pdo_at(1, 1) = 0.7;
  CHECK(ace(b) == doctest::Approx(0.6));
}

TEST_CASE("untrusted detector predicate") {
  const double eta = 0.8;
  auto b = InstrumentalBehavior::zeros(2, 3, 3);
  for (int x = 0; x < 2; ++x) {
    b.p_at(0, 0, x) = eta * eta;
    b.p_at(2, 2, x) = 1 - eta * eta;
  }
  CHECK(untrusted_detector_consistent(b, eta, 2, 2));
  CHECK_FALSE(untrusted_detector_consistent(b, 0.7, 2, 2));
  CHECK(untrusted_detector_consistent(b, 0.7, 2, 2, 0.2));
  CHECK_THROWS_AS(untrusted_detector_consistent(b, eta, 4, 2), DimensionError);
}

TEST_CASE("probability labels") {
  Shape bell{Scenario::Bell, {2, 2, 2, 2}};
  CHECK(bell.label(0) == "p(00|00)");
  CHECK(bell.label(static_cast<int>(BellBehavior::zeros(2, 2, 2, 2).index(0, 1, 1, 0))) == "p(01|10)");
  Shape ins{Scenario::Instrumental, {2, 2, 2}};
  CHECK(ins.label(8) == "p(0|do(0))");
  CHECK(ins.label(11) == "p(1|do(1))");
  CHECK(scenario_from_name("pam") == Scenario::Pam);
  CHECK_THROWS_AS(scenario_from_name("tripartite"), DomainError);
}
