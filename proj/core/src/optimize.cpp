#include "detloop/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "detloop/errors.hpp"

namespace detloop {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double reflect_into(double v, double lo, double hi) {
  if (hi <= lo) return lo;
  const double w = hi - lo;
  double t = std::fmod(v - lo, 2 * w);
  if (t < 0) t += 2 * w;
  return t <= w ? lo + t : hi - (t - w);
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void OptimizerConfig::validate() const {
  if (restarts < 1) throw DomainError("optimizer: restarts must be at least 1");
  if (max_evals < 10) throw DomainError("optimizer: max_evals must be at least 10");
  if (!(xtol > 0) || !(ftol > 0)) throw DomainError("optimizer: tolerances must be positive");
  if (threads < 1) throw DomainError("optimizer: threads must be at least 1");
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  return splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(restart));
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x0,
                             const std::vector<std::pair<double, double>>& bounds, int max_evals, double xtol,
                             double ftol) {
  const std::size_t n = x0.size();
  if (bounds.size() != n) throw DimensionError("nelder_mead: bounds and start point differ in size");
  const double dn = static_cast<double>(std::max<std::size_t>(n, 1));
  const double alpha = 1.0, beta = 1.0 + 2.0 / dn, gamma = 0.75 - 0.5 / dn, delta = 1.0 - 1.0 / dn;

  NelderMeadResult res;
  auto eval = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = reflect_into(x[i], bounds[i].first, bounds[i].second);
    ++res.evals;
    double v = fn(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  for (std::size_t i = 0; i < n; ++i) x0[i] = reflect_into(x0[i], bounds[i].first, bounds[i].second);
  res.x = x0;
  res.f = eval(res.x);
  double step = 0.25;
  bool first = true;
  while (res.evals < max_evals) {
    std::vector<std::vector<double>> sx(n + 1, res.x);
    std::vector<double> fx(n + 1, res.f);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = bounds[i].second - bounds[i].first;
      sx[i + 1][i] += (sx[i + 1][i] + step * w > bounds[i].second ? -1.0 : 1.0) * step * w;
      fx[i + 1] = eval(sx[i + 1]);
    }
    std::vector<std::size_t> ord(n + 1);
    bool tol_hit = false;
    while (res.evals < max_evals) {
      std::iota(ord.begin(), ord.end(), 0);
      std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
      const auto& best = sx[ord[0]];
      double fspread = fx[ord[n]] - fx[ord[0]];
      double xspread = 0.0;
      for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t i = 0; i < n; ++i) xspread = std::max(xspread, std::abs(sx[ord[k]][i] - best[i]));
      if (fspread <= ftol && xspread <= xtol) {
        tol_hit = true;
        break;
      }
      if (fspread <= ftol * 1e-3 && std::isfinite(fx[ord[0]])) {
        tol_hit = true;
        break;
      }
      std::vector<double> c(n, 0.0);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) c[i] += sx[ord[k]][i] / dn;
      const auto& worst = sx[ord[n]];
      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = c[i] + t * (worst[i] - c[i]);
        return p;
      };
      auto xr = along(-alpha);
      double fr = eval(xr);
      if (fr < fx[ord[0]]) {
        auto xe = along(-alpha * beta);
        double fe = eval(xe);
        if (fe < fr) {
          sx[ord[n]] = xe;
          fx[ord[n]] = fe;
        } else {
          sx[ord[n]] = xr;
          fx[ord[n]] = fr;
        }
      } else if (fr < fx[ord[n - 1]]) {
        sx[ord[n]] = xr;
        fx[ord[n]] = fr;
      } else {
        const bool outside = fr < fx[ord[n]];
        auto xc = along(outside ? -alpha * gamma : gamma);
        double fc = eval(xc);
        if (fc < (outside ? fr : fx[ord[n]])) {
          sx[ord[n]] = xc;
          fx[ord[n]] = fc;
        } else {
          for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i) sx[ord[k]][i] = best[i] + delta * (sx[ord[k]][i] - best[i]);
            fx[ord[k]] = eval(sx[ord[k]]);
          }
        }
      }
    }
    std::size_t ib = std::min_element(fx.begin(), fx.end()) - fx.begin();
    const double improvement = res.f - fx[ib];
    if (fx[ib] <= res.f) {
      res.x = sx[ib];
      res.f = fx[ib];
    }
    // A fresh simplex around the best point escapes premature collapse.
    if (!first && tol_hit && improvement <= ftol) {
      res.converged = true;
      break;
    }
    first = false;
    step = std::max(step * 0.5, 1e-3);
  }
  return res;
}

Objective::Objective(Functional f, StrategySpace space, LossSpec loss)
    : f_(std::move(f)), space_(std::move(space)), loss_(std::move(loss)) {
  loss_.validate();
  std::vector<double> mid;
  for (auto [lo, hi] : space_.bounds()) mid.push_back(0.5 * (lo + hi));
  Shape s = shape_of(apply_loss(space_.behavior(mid), loss_));
  if (s == f_.shape) return;
  try {
    f_ = extend_to(f_, s);
  } catch (const DimensionError&) {
    pad_to(unflatten(s, std::vector<double>(s.flat_size(), 0.0)), f_.shape);  // throws if impossible
    pad_ = f_.shape;
  }
}

double Objective::value(const std::vector<double>& params) const {
  Behavior b = apply_loss(space_.behavior(params), loss_);
  if (pad_) b = pad_to(b, *pad_);
  return evaluate(f_, b);
}

double Objective::score(const std::vector<double>& params) const { return violation(f_, value(params)); }

StrategySpace default_space(const Functional& f, const LossSpec& loss) {
  const auto& e = f.shape.ext;
  // Models that append a no-click label leave one fewer ideal outcome.
  const bool extra_a = loss.model == LossModel::ExtraOutcome;
  const bool extra_b = extra_a || loss.model == LossModel::PerfectAlice || loss.model == LossModel::Hybrid;
  switch (f.shape.kind) {
    case Scenario::Bell: {
      const int na = e[2] - extra_a, nb = e[3] - extra_b;
      if (na <= 2 && nb <= 2) {
        auto s = StrategySpace::bell_qubit(e[0], e[1]);
        s.outcomes_a = std::max(na, 2);
        s.outcomes_b = std::max(nb, 2);
        return s;
      }
      if (na == 3 && nb == 3 && e[0] == 2 && e[1] == 2) return StrategySpace::bell_qutrit();
      break;
    }
    case Scenario::Instrumental:
      return StrategySpace::instrumental_qubit(e[0], std::max(e[1] - (loss.model == LossModel::ExtraOutcome), 2),
                                               std::max(e[2] - extra_b, 2));
    case Scenario::Pam: return StrategySpace::pam_qubit(e[0], e[1]);
    case Scenario::Bilocal: return StrategySpace::bilocal_qubit();
    case Scenario::NParty: break;
  }
  throw DomainError(fmt::format("no built-in strategy space for {} on {}", f.name, f.shape.describe()));
}

MaximizeResult maximize(const Functional& f, const StrategySpace& space, const LossSpec& loss,
                        const OptimizerConfig& cfg) {
  return maximize(Objective(f, space, loss), cfg);
}

MaximizeResult maximize(const Objective& obj, const OptimizerConfig& cfg) {
  cfg.validate();
  const auto bounds = obj.space().bounds();
  const int n = static_cast<int>(bounds.size());
  for (const auto& w : cfg.warm_starts)
    if (static_cast<int>(w.size()) != n)
      throw DimensionError(fmt::format("maximize: warm start has {} parameters, space expects {}", w.size(), n));

  std::vector<NelderMeadResult> runs(cfg.restarts);
  std::vector<char> failed(cfg.restarts, 0);
  auto run_one = [&](int r) {
    std::vector<double> x0(n);
    if (r < static_cast<int>(cfg.warm_starts.size())) {
      x0 = cfg.warm_starts[r];
    } else {
      std::mt19937_64 rng(restart_seed(cfg.seed, r));
      for (int i = 0; i < n; ++i)
        x0[i] = std::uniform_real_distribution<double>(bounds[i].first, bounds[i].second)(rng);
    }
    try {
      runs[r] = nelder_mead([&](const std::vector<double>& x) { return -obj.score(x); }, x0, bounds, cfg.max_evals,
                            cfg.xtol, cfg.ftol);
    } catch (const NumericalError&) {
      failed[r] = 1;
    }
  };
  const int workers = std::min(cfg.threads, cfg.restarts);
  if (workers <= 1) {
    for (int r = 0; r < cfg.restarts; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (int r; (r = next.fetch_add(1)) < cfg.restarts;) run_one(r);
      });
    for (auto& th : pool) th.join();
  }

  MaximizeResult out;
  int best = -1;
  for (int r = 0; r < cfg.restarts; ++r) {
    out.evaluations += runs[r].evals;
    if (failed[r] || !std::isfinite(runs[r].f)) continue;
    if (best < 0 || runs[r].f < runs[best].f) best = r;
  }
  if (best < 0) throw NumericalError("maximize: no restart produced a finite value");
  out.params = runs[best].x;
  out.score = -runs[best].f;
  out.value = obj.value(out.params);
  out.converged = runs[best].converged;
  out.best_restart = best;
  return out;
}

const char* eta_family_name(EtaFamily f) {
  switch (f) {
    case EtaFamily::Symmetric: return "symmetric";
    case EtaFamily::FreeEta2: return "free_eta2";
    case EtaFamily::FreeEta1: return "free_eta1";
  }
  return "?";
}

EtaFamily eta_family_from_name(const std::string& name) {
  for (EtaFamily f : {EtaFamily::Symmetric, EtaFamily::FreeEta2, EtaFamily::FreeEta1})
    if (name == eta_family_name(f)) return f;
  throw DomainError("unknown efficiency family '" + name + "'");
}

LossSpec LossFamily::at(double eta) const {
  LossSpec s = base;
  switch (family) {
    case EtaFamily::Symmetric:
      s.eta = base.eta.size() <= 1 ? std::vector<double>{eta} : std::vector<double>(base.eta.size(), eta);
      break;
    case EtaFamily::FreeEta2: s.eta = {fixed, eta}; break;
    case EtaFamily::FreeEta1: s.eta = {eta, fixed}; break;
  }
  return s;
}

namespace {

struct ProbeOutcome {
  double score = 0.0;
  std::vector<double> params;
  long evals = 0;
};

// Bisection on a parameter where violation holds on one side. `violated_above`
// means the violation holds for parameters above the crossing.
ThresholdResult bisect(const std::function<ProbeOutcome(double, const std::vector<double>&)>& probe,
                       const std::function<double(double, const std::vector<double>&)>& value_at,
                       bool violated_above, const ThresholdConfig& tcfg) {
  if (!(tcfg.lo < tcfg.hi) || !(tcfg.bisect_tol > 0)) throw DomainError("threshold: invalid bracket or tolerance");
  ThresholdResult res;
  auto run = [&](double p, const std::vector<double>& warm) {
    ProbeOutcome o = probe(p, warm);
    res.evaluations += o.evals;
    res.probes.push_back({p, o.score});
    return o;
  };
  const double good_end = violated_above ? tcfg.hi : tcfg.lo;
  const double bad_end = violated_above ? tcfg.lo : tcfg.hi;
  ProbeOutcome g = run(good_end, {});
  if (g.score <= tcfg.value_tol) {
    res.status = ThresholdStatus::NoViolationBelowOne;
    res.star = good_end;
    res.lo = tcfg.lo;
    res.hi = tcfg.hi;
    res.best_params = g.params;
    res.value_at_star = value_at(good_end, g.params);
    return res;
  }
  ProbeOutcome b = run(bad_end, g.params);
  if (b.score > tcfg.value_tol)
    throw NoCrossingError(fmt::format("violation persists across the whole range [{}, {}]", tcfg.lo, tcfg.hi));

  auto search = [&](double lo, double hi, std::vector<double> best) {
    // Invariant: the violating end is hi when violated_above, lo otherwise.
    while (hi - lo > tcfg.bisect_tol) {
      const double mid = 0.5 * (lo + hi);
      ProbeOutcome o = run(mid, best);
      const bool v = o.score > tcfg.value_tol;
      if (v) best = o.params;
      if (v == violated_above) hi = mid;
      else lo = mid;
    }
    res.lo = lo;
    res.hi = hi;
    res.best_params = best;
  };
  search(tcfg.lo, tcfg.hi, g.params);

  // Maximal violation should move monotonically with the parameter.
  auto sorted = res.probes;
  std::sort(sorted.begin(), sorted.end(), [](const Probe& a, const Probe& b) { return a.param < b.param; });
  bool monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double d = sorted[i].score - sorted[i - 1].score;
    if (violated_above ? d < -1e-6 : d > 1e-6) monotone = false;
  }
  if (!monotone) {
    res.warnings.push_back("probe scores are not monotone in the parameter; falling back to scan and refine");
    const int n = 21;
    std::vector<ProbeOutcome> grid;
    std::vector<double> ps;
    for (int i = 0; i < n; ++i) {
      ps.push_back(tcfg.lo + (tcfg.hi - tcfg.lo) * i / (n - 1));
      grid.push_back(run(ps.back(), res.best_params));
    }
    // Last sign change seen from the violating end.
    int edge = -1;
    if (violated_above) {
      for (int i = n - 1; i >= 0 && grid[i].score > tcfg.value_tol; --i) edge = i;
      if (edge > 0) search(ps[edge - 1], ps[edge], grid[edge].params);
    } else {
      for (int i = 0; i < n && grid[i].score > tcfg.value_tol; ++i) edge = i;
      if (edge >= 0 && edge < n - 1) search(ps[edge], ps[edge + 1], grid[edge].params);
    }
  }
  res.star = 0.5 * (res.lo + res.hi);
  res.value_at_star = value_at(res.star, res.best_params);
  return res;
}

}  // namespace

ThresholdResult critical_efficiency(const Functional& f, const StrategySpace& space, const LossFamily& family,
                                    const OptimizerConfig& cfg, const ThresholdConfig& tcfg) {
  auto probe = [&](double eta, const std::vector<double>& warm) {
    OptimizerConfig c = cfg;
    if (!warm.empty()) c.warm_starts.insert(c.warm_starts.begin(), warm);
    if (static_cast<int>(c.warm_starts.size()) > c.restarts) c.warm_starts.resize(c.restarts);
    MaximizeResult m = maximize(f, space, family.at(eta), c);
    return ProbeOutcome{m.score, m.params, m.evaluations};
  };
  auto value_at = [&](double eta, const std::vector<double>& p) {
    return Objective(f, space, family.at(eta)).value(p);
  };
  return bisect(probe, value_at, true, tcfg);
}

const char* curve_mode_name(CurveMode m) { return m == CurveMode::Fixed ? "fixed" : "reoptimize"; }

CurveMode curve_mode_from_name(const std::string& name) {
  if (name == "fixed") return CurveMode::Fixed;
  if (name == "reoptimize") return CurveMode::Reoptimize;
  throw DomainError("unknown curve mode '" + name + "'");
}

CurveResult boundary_curve(const Functional& f, const StrategySpace& space, const LossSpec& base, CurveMode mode,
                           const std::vector<double>& fixed_params, const std::vector<double>& grid,
                           const OptimizerConfig& cfg, const ThresholdConfig& tcfg) {
  for (double g : grid)
    if (!(g >= 0.0 && g <= 1.0)) throw DomainError(fmt::format("boundary_curve: grid value {} outside [0,1]", g));
  CurveResult out;
  LossFamily fam{base, EtaFamily::FreeEta2, 1.0};
  for (double e1 : grid) {
    fam.fixed = e1;
    CurvePoint pt{e1, kNaN, false};
    if (mode == CurveMode::Fixed) {
      auto score = [&](double e2) { return Objective(f, space, fam.at(e2)).score(fixed_params); };
      if (f.mode == ValueMode::Linear) {
        auto val = [&](double e2) { return Objective(f, space, fam.at(e2)).value(fixed_params); };
        const double v0 = val(0.0), v1 = val(1.0), vm = val(0.5);
        if (std::abs(vm - 0.5 * (v0 + v1)) > 1e-8)
          out.warnings.push_back(fmt::format("value is not affine in eta2 at eta1={}", e1));
        const double s0 = violation(f, v0), s1 = violation(f, v1);
        if (s1 > tcfg.value_tol) {
          pt.crossing = true;
          pt.eta2 = s0 > 0 ? 0.0 : s0 / (s0 - s1);
        }
      } else {
        if (score(1.0) > tcfg.value_tol) {
          double lo = 0.0, hi = 1.0;
          if (score(0.0) > 0) hi = 0.0;
          while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            (score(mid) > 0 ? hi : lo) = mid;
          }
          pt.crossing = true;
          pt.eta2 = hi;
        }
      }
    } else {
      try {
        ThresholdResult r = critical_efficiency(f, space, fam, cfg, tcfg);
        if (r.status == ThresholdStatus::Crossing) {
          pt.crossing = true;
          pt.eta2 = r.star;
        }
        for (auto& w : r.warnings) out.warnings.push_back(fmt::format("eta1={}: {}", e1, w));
      } catch (const NoCrossingError&) {
        pt.crossing = true;
        pt.eta2 = 0.0;
      }
    }
    out.points.push_back(pt);
  }
  if (mode == CurveMode::Fixed) {
    const CurvePoint* prev = nullptr;
    for (const auto& p : out.points) {
      if (!p.crossing) continue;
      if (prev && ((p.eta1 - prev->eta1) * (p.eta2 - prev->eta2) > 1e-9))
        out.warnings.push_back(fmt::format("curve is not monotone nonincreasing near eta1={}", p.eta1));
      prev = &p;
    }
  }
  return out;
}

const char* channel_family_name(ChannelFamily c) {
  return c == ChannelFamily::AmplitudeDamping ? "amplitude_damping" : "depolarizing";
}

ChannelFamily channel_family_from_name(const std::string& name) {
  if (name == "amplitude_damping") return ChannelFamily::AmplitudeDamping;
  if (name == "depolarizing") return ChannelFamily::Depolarizing;
  throw DomainError("unknown channel family '" + name + "'");
}

StrategySpace with_channel(StrategySpace space, ChannelFamily family, double p) {
  if (space.kind != SpaceKind::PamQubit) throw DomainError("noise channels apply to prepare-and-measure spaces only");
  space.bloch_map = bloch_affine(family == ChannelFamily::AmplitudeDamping ? amplitude_damping(p) : depolarizing(p, 2));
  return space;
}

ThresholdResult noise_threshold(const Functional& witness, const StrategySpace& space, ChannelFamily family,
                                const OptimizerConfig& cfg, const ThresholdConfig& tcfg, const NoiseOptions& opts) {
  if (witness.shape.kind != Scenario::Pam) throw DomainError("noise_threshold: witness must be prepare-and-measure");
  const LossSpec none{};
  auto probe = [&](double p, const std::vector<double>& warm) {
    StrategySpace s = with_channel(space, family, p);
    if (opts.fixed_params) return ProbeOutcome{Objective(witness, s, none).score(*opts.fixed_params), *opts.fixed_params, 1};
    OptimizerConfig c = cfg;
    if (!warm.empty()) c.warm_starts.insert(c.warm_starts.begin(), warm);
    if (static_cast<int>(c.warm_starts.size()) > c.restarts) c.warm_starts.resize(c.restarts);
    MaximizeResult m = maximize(witness, s, none, c);
    return ProbeOutcome{m.score, m.params, m.evaluations};
  };
  auto value_at = [&](double p, const std::vector<double>& x) {
    return Objective(witness, with_channel(space, family, p), none).value(x);
  };
  return bisect(probe, value_at, false, tcfg);
}

}  // namespace detloop
