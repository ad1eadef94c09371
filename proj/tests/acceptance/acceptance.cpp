// Acceptance run: one PASS/FAIL line per criterion.
//
//   detloop_acceptance [--extended] [criterion...]
//
// Without arguments every criterion runs except 13 (the long facet enumeration),
// which needs --extended.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "detloop/closedform.hpp"
#include "detloop/errors.hpp"
#include "detloop/functionals.hpp"
#include "detloop/loss.hpp"
#include "detloop/optimize.hpp"
#include "detloop/polytope.hpp"
#include "detloop/serialize.hpp"
#include "gen.hpp"

using namespace detloop;
using detloop::testing::Gen;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

struct Report {
  bool pass = true;
  std::vector<std::string> lines;

  void check(const std::string& what, double measured, double expected, double tol) {
    const bool ok = std::abs(measured - expected) <= tol;
    pass &= ok;
    lines.push_back(fmt::format("{:<44} {:.7f} expected {:.7f} +- {:g} {}", what, measured, expected, tol,
                                ok ? "ok" : "MISS"));
  }
  void require(const std::string& what, bool ok, const std::string& detail = "") {
    pass &= ok;
    lines.push_back(fmt::format("{:<44} {} {}", what, detail, ok ? "ok" : "MISS"));
  }
};

OptimizerConfig opt(int restarts) {
  OptimizerConfig c;
  c.restarts = restarts;
  return c;
}

LossSpec loss(LossModel m, int sa = 1, int sb = 0, std::vector<double> eta = {1.0, 1.0}) {
  LossSpec l;
  l.model = m;
  l.eta = std::move(eta);
  l.sink_a = sa;
  l.sink_b = sb;
  return l;
}

double threshold(const Functional& f, const LossSpec& base, EtaFamily fam, int restarts,
                 std::optional<StrategySpace> space = std::nullopt) {
  StrategySpace s = space ? *space : default_space(f, base);
  auto r = critical_efficiency(f, s, {base, fam, 1.0}, opt(restarts));
  if (r.status != ThresholdStatus::Crossing) return std::nan("");
  return r.star;
}

Functional chsh_minus() { return build("chsh", {{"orientation", "minus"}}); }

// ---------------------------------------------------------------------------

Report c1() {
  Report r;
  auto m = maximize(build("chsh"), StrategySpace::bell_qubit(), {}, opt(16));
  r.check("CHSH quantum maximum", std::abs(m.value), 2 * kSqrt2, 1e-6);
  return r;
}

Report c2() {
  Report r;
  auto base = loss(LossModel::Absorption, 1, 0);
  r.check("symmetric threshold, sinks (1,0)", threshold(chsh_minus(), base, EtaFamily::Symmetric, 32), 0.667, 0.005);
  r.check("eta2 threshold at eta1 = 1, sinks (1,0)", threshold(chsh_minus(), base, EtaFamily::FreeEta2, 32), 0.500,
          0.005);
  return r;
}

Report c3() {
  Report r;
  r.check("symmetric threshold, sinks (1,1)",
          threshold(chsh_minus(), loss(LossModel::Absorption, 1, 1), EtaFamily::Symmetric, 32), 0.84, 0.01);
  return r;
}

Report c4() {
  Report r;
  const double chsh = threshold(chsh_minus(), loss(LossModel::Absorption, 1, 0), EtaFamily::Symmetric, 32);
  const double eb = threshold(build("eberhard"), loss(LossModel::ExtraOutcome), EtaFamily::Symmetric, 32);
  r.lines.push_back(fmt::format("{:<44} {:.7f}", "CHSH absorption threshold", chsh));
  r.check("Eberhard extra-outcome threshold", eb, chsh, 0.005);
  return r;
}

Report c5() {
  Report r;
  auto f = build("cglmp3");
  auto base = loss(LossModel::Absorption, 2, 2);
  r.check("CGLMP symmetric threshold", threshold(f, base, EtaFamily::Symmetric, 200), 0.81, 0.01);
  r.check("CGLMP eta2 threshold at eta1 = 1", threshold(f, base, EtaFamily::FreeEta2, 200), 0.68, 0.01);
  return r;
}

Report c6() {
  Report r;
  auto f = build("i222");
  auto b10 = loss(LossModel::Absorption, 1, 0);
  r.check("I222 symmetric threshold, sinks (1,0)", threshold(f, b10, EtaFamily::Symmetric, 32), 0.67, 0.01);
  r.check("I222 eta2 threshold at eta1 = 1, sinks (1,0)", threshold(f, b10, EtaFamily::FreeEta2, 32), 0.50, 0.01);
  r.check("I222 symmetric threshold, sinks (1,1)",
          threshold(f, loss(LossModel::Absorption, 1, 1), EtaFamily::Symmetric, 32), 0.84, 0.01);
  return r;
}

Report c7() {
  Report r;
  r.check("I223 perfect-Alice eta2 threshold",
          threshold(build("i223"), loss(LossModel::PerfectAlice), EtaFamily::FreeEta2, 32), 0.50, 0.01);
  return r;
}

Report c8() {
  Report r;
  auto f = build("i233");
  auto base = loss(LossModel::Absorption, 2, 2);
  auto space = StrategySpace::instrumental_qubit(2, 3, 3);
  r.check("I233 symmetric threshold", threshold(f, base, EtaFamily::Symmetric, 32, space), 0.9052, 0.01);
  r.check("I233 eta2 threshold at eta1 = 1", threshold(f, base, EtaFamily::FreeEta2, 32, space), 0.51, 0.01);
  r.check("I233 eta1 threshold at eta2 = 1", threshold(f, base, EtaFamily::FreeEta1, 32, space), 0.875, 0.01);
  return r;
}

Report c9() {
  Report r;
  auto s3 = build("s3");
  auto t2 = build("tn", {{"n", "2"}});
  auto ms3 = maximize(s3, StrategySpace::pam_qubit(3, 2), {}, opt(16));
  auto mt2 = maximize(t2, StrategySpace::pam_qubit(4, 2), {}, opt(16));
  r.check("S3 quantum maximum", ms3.value, 1 + 2 * kSqrt2, 1e-6);
  r.check("T2 quantum maximum", mt2.value, 2 * kSqrt2, 1e-6);
  // Under the extra-outcome model the witness scales with eta, so the threshold is W_C / W_max.
  auto extra = loss(LossModel::ExtraOutcome, 1, 0, {1.0});
  const double ts3 = threshold(s3, extra, EtaFamily::Symmetric, 16, StrategySpace::pam_qubit(3, 2));
  const double tt2 = threshold(t2, extra, EtaFamily::Symmetric, 16, StrategySpace::pam_qubit(4, 2));
  r.check("S3 extra-outcome threshold", ts3, 3 / (1 + 2 * kSqrt2), 1e-3);
  r.check("S3 threshold vs classical/quantum ratio", ts3, s3.classical_bound / ms3.value, 1e-3);
  r.check("T2 extra-outcome threshold", tt2, 1 / kSqrt2, 1e-3);
  r.check("T2 threshold vs classical/quantum ratio", tt2, t2.classical_bound / mt2.value, 1e-3);
  return r;
}

Report c10() {
  Report r;
  auto s3 = build("s3");
  auto space = StrategySpace::pam_qubit(3, 2);
  auto ad = noise_threshold(s3, space, ChannelFamily::AmplitudeDamping, opt(32));
  auto dp = noise_threshold(s3, space, ChannelFamily::Depolarizing, opt(32));
  r.check("S3 amplitude damping t_c", ad.status == ThresholdStatus::Crossing ? ad.star : std::nan(""), 0.433, 0.01);
  r.check("S3 depolarizing q_c", dp.status == ThresholdStatus::Crossing ? dp.star : std::nan(""), 0.216, 0.01);

  auto t2 = build("tn", {{"n", "2"}});
  auto t2space = StrategySpace::pam_qubit(4, 2);
  auto best = maximize(t2, t2space, {}, opt(16));
  NoiseOptions fixed;
  fixed.fixed_params = best.params;
  auto ft = noise_threshold(t2, t2space, ChannelFamily::Depolarizing, opt(1), {}, fixed);
  r.check("T2 fixed-state depolarizing q_c", ft.status == ThresholdStatus::Crossing ? ft.star : std::nan(""),
          1 - kSqrt2 / 2, 1e-3);
  return r;
}

Report c11() {
  Report r;
  const double pi = std::numbers::pi;
  // Both sources maximally entangled; Alice and Charlie both on the diagonals of the Z-X plane.
  std::vector<double> x{pi / 4, pi / 4, pi / 4, 0, pi / 4, pi, pi / 4, 0, pi / 4, pi};
  auto ideal = std::get<BilocalBehavior>(StrategySpace::bilocal_qubit().behavior(x));
  const double v = evaluate_ij(ideal);
  r.check("IJ value of ideal swapping", v, kSqrt2, 1e-6);

  // Bisection on the lossy behavior itself; the scaling law predicts sqrt(eta1 eta2) * sqrt(2).
  auto crossing = [&](std::function<std::pair<double, double>(double)> etas) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      auto [e1, e2] = etas(mid);
      (evaluate_ij(bilocal_end_loss(ideal, e1, e2)) > 1.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double sym = crossing([](double e) { return std::pair{e, e}; });
  const double asym = crossing([](double e) { return std::pair{1.0, e}; });
  r.check("symmetric IJ threshold", sym, 1 / kSqrt2, 1e-3);
  r.check("eta2 IJ threshold at eta1 = 1", asym, 0.5, 1e-3);
  double worst = 0.0;
  for (double e1 : {0.3, 0.6, 0.9})
    for (double e2 : {0.2, 0.5, 1.0})
      worst = std::max(worst, std::abs(evaluate_ij(bilocal_end_loss(ideal, e1, e2)) - bilocal_scaling(e1, e2, v)));
  r.check("lossy value vs sqrt(eta1 eta2) scaling", worst, 0.0, 1e-9);
  return r;
}

Report c12() {
  Report r;
  auto one = [&](const std::string& name, const Params& p, const VertexSet& vs, double expected) {
    Functional f = build(name, p);
    auto v = validate_functional(f, vs);
    r.check(name + " extreme over " + vs.description, v.extreme, expected, 0.0);
    r.require(name + " stored bound matches", v.matches, fmt::format("{:g}", f.classical_bound));
  };
  one("chsh", {}, bell_vertices(2, 2, 2, 2), 2);
  one("pearl", {}, instrumental_vertices(2, 2, 2, InstrumentalSet::Observational), 1);
  one("i222", {}, instrumental_vertices(2, 2, 2, InstrumentalSet::Hybrid), 0);
  one("i223", {}, instrumental_vertices(2, 2, 3, InstrumentalSet::Hybrid), 0);
  one("i233", {}, instrumental_vertices(2, 3, 3, InstrumentalSet::Hybrid), 0);
  one("s3", {}, pam_vertices(3, 2, 2, 2), 3);
  return r;
}

Report c13() {
  Report r;
  auto vs = instrumental_vertices(2, 3, 3, InstrumentalSet::Hybrid);
  auto facets = facet_enumeration(vs);
  std::size_t nonneg = 0;
  for (const auto& f : facets) nonneg += is_nonnegativity_facet(f, vs);
  r.lines.push_back(fmt::format("{:<44} {} total, {} nonnegativity", "hybrid (2,3,3) facets", facets.size(), nonneg));
  r.require("nontrivial facets > 900", facets.size() - nonneg > 900, std::to_string(facets.size() - nonneg));
  return r;
}

Report c14() {
  Report r;
  r.check("eberhard_sym", eberhard_sym(), 2.0 / 3.0, 0.0);
  r.check("larsson_cabello_asym", larsson_cabello_asym(), 0.5, 0.0);
  r.check("bc_chain_sym(2)", bc_chain_sym(2), 2 * (kSqrt2 - 1), 1e-15);
  bool mono = true;
  for (int n = 2; n < 30; ++n)
    mono &= ch_nsite_threshold(n + 1) < ch_nsite_threshold(n) && mermin_threshold(n + 1) < mermin_threshold(n);
  r.require("CH and Mermin thresholds decrease in n", mono, "n = 2..30");
  bool reduces = true;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      const double e1 = i / 200.0, e2 = j / 200.0;
      reduces &= quintino_feasible(e1, e1, e2, e2) == branciard_feasible(e1, e2);
    }
  r.require("setting-dependent condition reduces", reduces, "201 x 201 grid");
  return r;
}

Report c15() {
  Report r;
  Gen g(2024);

  // No-signaling under every Bell loss model.
  double ns = 0.0;
  for (const auto& space : {StrategySpace::bell_qubit(), StrategySpace::bell_qubit(3, 3), StrategySpace::bell_qutrit()})
    for (int k = 0; k < 300; ++k) {
      auto b = std::get<BellBehavior>(space.behavior(g.params(space)));
      const double e1 = g.uniform(), e2 = g.uniform();
      ns = std::max(ns, no_signaling_report(bell_absorb(b, e1, e2, g.integer(0, b.na - 1), g.integer(0, b.nb - 1)))
                            .max_deviation);
      ns = std::max(ns, no_signaling_report(bell_extra_outcome(b, e1, e2)).max_deviation);
    }
  r.check("no-signaling deviation under loss", ns, 0.0, 1e-12);

  // Affinity in each efficiency of every linear functional under every applicable model.
  double aff = 0.0;
  int combos = 0;
  for (const auto& info : list_functionals()) {
    Functional f = build(info.name);
    if (f.mode == ValueMode::Ij || f.shape.kind == Scenario::NParty) continue;
    const bool pam = f.shape.kind == Scenario::Pam;
    for (LossModel m : {LossModel::Absorption, LossModel::ExtraOutcome, LossModel::PerfectAlice, LossModel::Hybrid}) {
      const int na = f.shape.kind == Scenario::Bell ? f.shape.ext[2] : f.shape.ext[1];
      LossSpec base = loss(m, m == LossModel::Absorption ? na - 1 : std::min(1, na - 1), f.shape.ext.back() - 1,
                           pam ? std::vector<double>{1.0} : std::vector<double>{1.0, 1.0});
      StrategySpace space;
      try {
        space = default_space(f, base);
        Objective probe(f, space, base);
      } catch (const Error&) {
        continue;
      }
      ++combos;
      for (int k = 0; k < 20; ++k) {
        auto x = g.params(space);
        for (int axis = 0; axis < (pam ? 1 : 2); ++axis) {
          const double other = g.uniform(), lo = g.uniform(), hi = g.uniform(), lam = g.uniform();
          auto at = [&](double e) {
            LossSpec s = base;
            s.eta = pam ? std::vector<double>{e} : (axis == 0 ? std::vector<double>{e, other}
                                                               : std::vector<double>{other, e});
            return Objective(f, space, s).value(x);
          };
          aff = std::max(aff, std::abs(at(lam * lo + (1 - lam) * hi) - (lam * at(lo) + (1 - lam) * at(hi))));
        }
      }
    }
  }
  r.check(fmt::format("affinity defect ({} functional/model pairs)", combos), aff, 0.0, 1e-12);

  // Byte identity of optimizer output for a fixed seed, across repeats and thread counts.
  auto render = [](const MaximizeResult& m) {
    std::string s = format_double(m.value);
    for (double p : m.params) s += "," + format_double(p);
    return s;
  };
  auto cfg = opt(8);
  cfg.seed = 31337;
  const std::string first = render(maximize(build("i222"), StrategySpace::instrumental_qubit(), {}, cfg));
  const std::string again = render(maximize(build("i222"), StrategySpace::instrumental_qubit(), {}, cfg));
  cfg.threads = 4;
  const std::string threaded = render(maximize(build("i222"), StrategySpace::instrumental_qubit(), {}, cfg));
  r.require("seeded runs byte-identical", first == again && first == threaded, "1 and 4 threads");

  // Channel duality Tr[E(rho) M] = Tr[rho E*(M)].
  double dual = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int d = g.integer(2, 4);
    KrausChannel ch = k % 3 == 0 ? depolarizing(g.uniform(), d)
                      : k % 3 == 1 ? amplitude_damping_fock(g.uniform(), d)
                                   : g.channel(d, g.integer(1, 4));
    CMatrix rho = g.density(d), m = g.hermitian(d);
    dual = std::max(dual, std::abs((apply_channel(ch, rho) * m).trace().real() -
                                   (rho * dual_apply(ch, m)).trace().real()));
  }
  r.check("channel duality defect", dual, 0.0, 1e-9);

  // Pearl, Bonet and Kedagni inequalities over random quantum instrumental strategies.
  for (const char* name : {"pearl", "bonet", "kedagni"}) {
    Functional f = build(name);
    auto space = StrategySpace::instrumental_qubit(f.shape.ext[0], 2, 2);
    double worst = -1e300;
    for (int k = 0; k < 10000; ++k) worst = std::max(worst, violation(f, evaluate(f, space.behavior(g.params(space)))));
    r.require(fmt::format("{} never violated (10^4 strategies)", name), worst <= 1e-12,
              fmt::format("max violation {:.3g}", worst));
  }
  return r;
}

struct Criterion {
  int id;
  const char* title;
  Report (*run)();
  bool extended = false;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "CHSH quantum maximum", c1},
      {2, "CHSH absorption, sinks (1,0)", c2},
      {3, "CHSH absorption, sinks (1,1)", c3},
      {4, "Eberhard extra-outcome model", c4},
      {5, "CGLMP qutrits, sinks (2,2)", c5},
      {6, "instrumental I222 absorption", c6},
      {7, "instrumental I223 perfect Alice", c7},
      {8, "instrumental I233", c8},
      {9, "prepare-and-measure witnesses", c9},
      {10, "prepare-and-measure noise", c10},
      {11, "bilocal IJ scaling", c11},
      {12, "classical bounds against vertex sets", c12},
      {13, "hybrid (2,3,3) facet count", c13, true},
      {14, "closed-form suite", c14},
      {15, "property suite", c15},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  bool extended = std::getenv("DETLOOP_EXTENDED_TESTS") != nullptr;
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--extended") {
      extended = true;
      continue;
    }
    try {
      wanted.insert(std::stoi(a));
    } catch (const std::exception&) {
      std::fprintf(stderr, "usage: %s [--extended] [criterion...]\n", argv[0]);
      return 2;
    }
  }

  int failed = 0;
  std::vector<std::string> summary;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    if (c.extended && !extended) {
      summary.push_back(fmt::format("criterion {:>2}: SKIP  {} (extended job; pass --extended)", c.id, c.title));
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    try {
      rep = c.run();
    } catch (const std::exception& e) {
      rep.pass = false;
      rep.lines.push_back(std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& l : rep.lines) fmt::print("  [{:>2}] {}\n", c.id, l);
    std::fflush(stdout);
    failed += !rep.pass;
    summary.push_back(
        fmt::format("criterion {:>2}: {}  {} ({:.1f} s)", c.id, rep.pass ? "PASS" : "FAIL", c.title, secs));
  }
  fmt::print("\n");
  for (const auto& s : summary) fmt::print("{}\n", s);
  return failed ? 1 : 0;
}
