#include <doctest.h>

#include <cmath>

#include "detloop/errors.hpp"
#include "detloop/functionals.hpp"
#include "detloop/loss.hpp"
#include "detloop/optimize.hpp"
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

LossSpec spec(LossModel m, double e1, double e2, int sa = 1, int sb = 0) {
  LossSpec s;
  s.model = m;
  s.eta = {e1, e2};
  s.sink_a = sa;
  s.sink_b = sb;
  return s;
}

}  // namespace

TEST_CASE("every loss model is the identity at unit efficiency") {
  Gen g(31);
  auto bell = std::get<BellBehavior>(StrategySpace::bell_qubit().behavior(g.params(StrategySpace::bell_qubit())));
  CHECK(max_diff(bell_absorb(bell, 1, 1, 1, 0).p, bell.p) == 0.0);
  CHECK(max_diff(flatten(bell_extra_outcome(bell, 1, 1)), flatten(pad_to(bell, {Scenario::Bell, {2, 2, 3, 3}}))) ==
        0.0);

  auto is = StrategySpace::instrumental_qubit();
  auto ins = std::get<InstrumentalBehavior>(is.behavior(g.params(is)));
  CHECK(max_diff(flatten(instrumental_absorb(ins, 1, 1, 0, 1)), flatten(ins)) == 0.0);
  Shape padded{Scenario::Instrumental, {2, 2, 3}};
  CHECK(max_diff(flatten(instrumental_perfect_alice(ins, 1)), flatten(pad_to(ins, padded))) < 1e-15);
  CHECK(max_diff(flatten(instrumental_hybrid(ins, 1, 1, 1)), flatten(pad_to(ins, padded))) < 1e-15);

  auto ps = StrategySpace::pam_qubit(3, 2);
  auto pam = std::get<PamBehavior>(ps.behavior(g.params(ps)));
  CHECK(max_diff(pam_absorb(pam, {1.0}, 0).p, pam.p) == 0.0);
  CHECK(max_diff(flatten(pam_extra_outcome(pam, {1.0})), flatten(pad_to(pam, {Scenario::Pam, {3, 2, 3}}))) == 0.0);

  auto bs = StrategySpace::bilocal_qubit();
  auto bil = std::get<BilocalBehavior>(bs.behavior(g.params(bs)));
  CHECK(max_diff(flatten(bilocal_end_loss(bil, 1, 1)), flatten(pad_to(bil, {Scenario::Bilocal, {2, 2, 3, 3}}))) ==
        0.0);
}

TEST_CASE("lossy behaviors stay normalized") {
  Gen g(32);
  std::vector<std::pair<StrategySpace, LossSpec>> cases{
      {StrategySpace::bell_qubit(), spec(LossModel::Absorption, 0.7, 0.4, 1, 1)},
      {StrategySpace::bell_qubit(), spec(LossModel::ExtraOutcome, 0.3, 0.9)},
      {StrategySpace::bell_qutrit(), spec(LossModel::Absorption, 0.8, 0.6, 2, 2)},
      {StrategySpace::instrumental_qubit(), spec(LossModel::Absorption, 0.6, 0.5, 1, 0)},
      {StrategySpace::instrumental_qubit(2, 3, 3), spec(LossModel::Absorption, 0.6, 0.5, 2, 2)},
      {StrategySpace::instrumental_qubit(), spec(LossModel::PerfectAlice, 1.0, 0.55)},
      {StrategySpace::instrumental_qubit(), spec(LossModel::Hybrid, 0.45, 0.8, 1)},
      {StrategySpace::pam_qubit(3, 2), spec(LossModel::ExtraOutcome, 0.8, 0.8)},
      {StrategySpace::bilocal_qubit(), spec(LossModel::ExtraOutcome, 0.8, 0.6)}};
  for (auto& [space, loss] : cases) {
    CAPTURE(space.describe());
    for (int trial = 0; trial < 20; ++trial) {
      Behavior b = apply_loss(space.behavior(g.params(space)), loss);
      CHECK_NOTHROW(check_behavior(b, 1e-12));
    }
  }
}

TEST_CASE("Bell loss models preserve no-signaling") {
  Gen g(33);
  for (const auto& space : {StrategySpace::bell_qubit(), StrategySpace::bell_qubit(3, 3), StrategySpace::bell_qutrit()}) {
    const int na = space.outcomes_a, nb = space.outcomes_b;
    for (int trial = 0; trial < 50; ++trial) {
      auto b = std::get<BellBehavior>(space.behavior(g.params(space)));
      double e1 = g.uniform(), e2 = g.uniform();
      CHECK(no_signaling_report(bell_absorb(b, e1, e2, g.integer(0, na - 1), g.integer(0, nb - 1))).max_deviation <
            1e-12);
      CHECK(no_signaling_report(bell_extra_outcome(b, e1, e2)).max_deviation < 1e-12);
    }
  }
}

TEST_CASE("linear functionals are affine in each efficiency under every loss model") {
  Gen g(34);
  const std::vector<LossModel> models{LossModel::Absorption, LossModel::ExtraOutcome, LossModel::PerfectAlice,
                                      LossModel::Hybrid};
  int combos = 0;
  double worst = 0.0;
  for (const auto& info : list_functionals()) {
    Functional f = build(info.name);
    if (f.mode == ValueMode::Ij || f.shape.kind == Scenario::NParty) continue;
    for (LossModel m : models) {
      LossSpec base;
      base.model = m;
      base.eta = f.shape.kind == Scenario::Pam ? std::vector<double>{1.0} : std::vector<double>{1.0, 1.0};
      const int last_a = f.shape.kind == Scenario::Bell ? f.shape.ext[2] - 1 : f.shape.ext[1] - 1;
      base.sink_a = m == LossModel::Absorption ? last_a : std::min(1, last_a);
      base.sink_b = f.shape.ext.back() - 1;
      std::optional<StrategySpace> space;
      try {
        space = default_space(f, base);
        Objective probe(f, *space, base);
      } catch (const Error&) {
        continue;
      }
      ++combos;
      for (int trial = 0; trial < 10; ++trial) {
        auto x = g.params(*space);
        for (int axis = 0; axis < (f.shape.kind == Scenario::Pam ? 1 : 2); ++axis) {
          double fixed = g.uniform(), lo = g.uniform(), hi = g.uniform();
          auto at = [&](double e) {
            LossSpec s = base;
            if (f.shape.kind == Scenario::Pam)
              s.eta = {e};
            else
              s.eta = axis == 0 ? std::vector<double>{e, fixed} : std::vector<double>{fixed, e};
            return Objective(f, *space, s).value(x);
          };
          double lam = g.uniform();
          double mid = at(lam * lo + (1 - lam) * hi);
          worst = std::max(worst, std::abs(mid - (lam * at(lo) + (1 - lam) * at(hi))));
        }
      }
    }
  }
  CHECK(combos >= 15);
  CHECK(worst < 1e-12);
}

TEST_CASE("loss arguments are validated") {
  auto b = BellBehavior::zeros(2, 2, 2, 2);
  CHECK_THROWS_AS(bell_absorb(b, 1.2, 1.0, 1, 0), DomainError);
  CHECK_THROWS_AS(bell_absorb(b, 0.9, 1.0, 2, 0), DomainError);
  CHECK_THROWS_AS(pam_absorb(PamBehavior::zeros(3, 2, 2), {0.9, 0.8, 0.7}, 0), DimensionError);
  CHECK_THROWS_AS(apply_loss(Behavior(b), spec(LossModel::Hybrid, 0.9, 0.9)), DomainError);
  CHECK(loss_model_from_name("perfect_alice") == LossModel::PerfectAlice);
  CHECK_THROWS_AS(loss_model_from_name("lossy"), DomainError);
}

TEST_CASE("absorption into (1,1) transforms correlators as expected") {
  // Outcome 1 is the -1 eigenvalue, so E' = e1 e2 E - e1(1-e2)<A> - (1-e1)e2<B> + (1-e1)(1-e2).
  auto space = StrategySpace::bell_qubit();
  Gen g(35);
  auto x = g.params(space);
  auto b = std::get<BellBehavior>(space.behavior(x));
  double e1 = 0.83, e2 = 0.61;
  auto lossy = bell_absorb(b, e1, e2, 1, 1);
  for (int sx = 0; sx < 2; ++sx)
    for (int sy = 0; sy < 2; ++sy) {
      auto corr = [&](const BellBehavior& p) {
        double c = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int bb = 0; bb < 2; ++bb) c += ((a + bb) % 2 ? -1.0 : 1.0) * p(a, bb, sx, sy);
        return c;
      };
      auto mean_a = b.marginal_a(0, sx, sy) - b.marginal_a(1, sx, sy);
      auto mean_b = b.marginal_b(0, sx, sy) - b.marginal_b(1, sx, sy);
      double expect = e1 * e2 * corr(b) - e1 * (1 - e2) * mean_a - (1 - e1) * e2 * mean_b + (1 - e1) * (1 - e2);
      CHECK(std::abs(corr(lossy) - expect) < 1e-12);
    }
}
