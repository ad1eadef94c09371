#include "detloop/behaviors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "detloop/errors.hpp"

namespace detloop {
namespace {

std::atomic<long> g_clamped{0};

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::string digits(const std::vector<int>& v) {
  bool compact = std::all_of(v.begin(), v.end(), [](int d) { return d < 10; });
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!compact && i > 0) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

// Decomposes `t` into `n` base-`base` digits, most significant first.
std::vector<int> tuple_digits(int t, int n, int base) {
  std::vector<int> d(n);
  for (int i = n - 1; i >= 0; --i) {
    d[i] = t % base;
    t /= base;
  }
  return d;
}

void require_positive(const std::vector<int>& ext) {
  for (int e : ext)
    if (e < 1) throw DimensionError("behavior cardinalities must be positive");
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Bell: return "bell";
    case Scenario::Instrumental: return "instrumental";
    case Scenario::Pam: return "pam";
    case Scenario::Bilocal: return "bilocal";
    case Scenario::NParty: return "nparty";
  }
  return "?";
}

Scenario scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::Bell, Scenario::Instrumental, Scenario::Pam, Scenario::Bilocal, Scenario::NParty})
    if (name == scenario_name(s)) return s;
  throw DomainError("unknown scenario '" + name + "'");
}

std::size_t Shape::flat_size() const {
  switch (kind) {
    case Scenario::Bell: return std::size_t(ext[0]) * ext[1] * ext[2] * ext[3];
    case Scenario::Instrumental: return std::size_t(ext[0]) * ext[1] * ext[2] + std::size_t(ext[1]) * ext[2];
    case Scenario::Pam: return std::size_t(ext[0]) * ext[1] * ext[2];
    case Scenario::Bilocal: return std::size_t(ext[0]) * ext[1] * ext[2] * ext[3] * 4;
    case Scenario::NParty: return std::size_t(ipow(ext[1], ext[0])) * ipow(ext[2], ext[0]);
  }
  return 0;
}

std::vector<std::vector<int>> Shape::groups() const {
  std::vector<std::vector<int>> g;
  auto contiguous = [&](int count, int size, int offset) {
    for (int k = 0; k < count; ++k) {
      std::vector<int> idx(size);
      for (int i = 0; i < size; ++i) idx[i] = offset + k * size + i;
      g.push_back(std::move(idx));
    }
  };
  switch (kind) {
    case Scenario::Bell: contiguous(ext[0] * ext[1], ext[2] * ext[3], 0); break;
    case Scenario::Instrumental:
      contiguous(ext[0], ext[1] * ext[2], 0);
      contiguous(ext[1], ext[2], ext[0] * ext[1] * ext[2]);
      break;
    case Scenario::Pam: contiguous(ext[0] * ext[1], ext[2], 0); break;
    case Scenario::Bilocal: contiguous(ext[0] * ext[1], ext[2] * ext[3] * 4, 0); break;
    case Scenario::NParty: contiguous(ipow(ext[1], ext[0]), ipow(ext[2], ext[0]), 0); break;
  }
  return g;
}

std::string Shape::label(int flat) const {
  switch (kind) {
    case Scenario::Bell: {
      int b = flat % ext[3], a = (flat / ext[3]) % ext[2];
      int s = flat / (ext[2] * ext[3]);
      return "p(" + digits({a, b}) + "|" + digits({s / ext[1], s % ext[1]}) + ")";
    }
    case Scenario::Instrumental: {
      int nobs = ext[0] * ext[1] * ext[2];
      if (flat >= nobs) {
        int k = flat - nobs;
        return fmt::format("p({}|do({}))", k % ext[2], k / ext[2]);
      }
      int b = flat % ext[2], a = (flat / ext[2]) % ext[1], x = flat / (ext[1] * ext[2]);
      return "p(" + digits({a, b}) + "|" + std::to_string(x) + ")";
    }
    case Scenario::Pam: {
      int b = flat % ext[2], s = flat / ext[2];
      return "p(" + std::to_string(b) + "|" + digits({s / ext[1], s % ext[1]}) + ")";
    }
    case Scenario::Bilocal: {
      int c = flat % ext[3];
      int r = flat / ext[3];
      int b1 = r % 2, b0 = (r / 2) % 2;
      r /= 4;
      int a = r % ext[2], s = r / ext[2];
      return fmt::format("p({},{}{},{}|{},{})", a, b0, b1, c, s / ext[1], s % ext[1]);
    }
    case Scenario::NParty: {
      int no = ipow(ext[2], ext[0]);
      return "p(" + digits(tuple_digits(flat % no, ext[0], ext[2])) + "|" +
             digits(tuple_digits(flat / no, ext[0], ext[1])) + ")";
    }
  }
  return "?";
}

std::string Shape::describe() const {
  std::string s = scenario_name(kind);
  s += "(";
  for (std::size_t i = 0; i < ext.size(); ++i) s += (i ? "," : "") + std::to_string(ext[i]);
  return s + ")";
}

BellBehavior BellBehavior::zeros(int nx, int ny, int na, int nb) {
  require_positive({nx, ny, na, nb});
  BellBehavior b{nx, ny, na, nb, {}};
  b.p.assign(std::size_t(nx) * ny * na * nb, 0.0);
  return b;
}

double BellBehavior::marginal_a(int a, int x, int y) const {
  double s = 0.0;
  for (int b = 0; b < nb; ++b) s += (*this)(a, b, x, y);
  return s;
}

double BellBehavior::marginal_b(int b, int x, int y) const {
  double s = 0.0;
  for (int a = 0; a < na; ++a) s += (*this)(a, b, x, y);
  return s;
}

InstrumentalBehavior InstrumentalBehavior::zeros(int nx, int na, int nb) {
  require_positive({nx, na, nb});
  InstrumentalBehavior b{nx, na, nb, {}, {}};
  b.obs.assign(std::size_t(nx) * na * nb, 0.0);
  b.do_.assign(std::size_t(na) * nb, 0.0);
  return b;
}

double InstrumentalBehavior::marginal_a(int a, int x) const {
  double s = 0.0;
  for (int b = 0; b < nb; ++b) s += p(a, b, x);
  return s;
}

PamBehavior PamBehavior::zeros(int nx, int ny, int nb) {
  require_positive({nx, ny, nb});
  PamBehavior b{nx, ny, nb, {}};
  b.p.assign(std::size_t(nx) * ny * nb, 0.0);
  return b;
}

BilocalBehavior BilocalBehavior::zeros(int nx, int nz, int na, int nc) {
  require_positive({nx, nz, na, nc});
  BilocalBehavior b{nx, nz, na, nc, {}};
  b.p.assign(std::size_t(nx) * nz * na * nc * 4, 0.0);
  return b;
}

NPartyBehavior NPartyBehavior::zeros(int n, int settings, int outcomes) {
  require_positive({n, settings, outcomes});
  if (n > 4) throw DomainError("NPartyBehavior: at most 4 parties");
  NPartyBehavior b{n, settings, outcomes, {}};
  b.p.assign(std::size_t(ipow(settings, n)) * ipow(outcomes, n), 0.0);
  return b;
}

int NPartyBehavior::outcome_tuples() const { return ipow(outcomes, n); }
int NPartyBehavior::setting_tuples() const { return ipow(settings, n); }

Shape shape_of(const Behavior& b) {
  return std::visit([](const auto& v) { return v.shape(); }, b);
}

std::vector<double> flatten(const Behavior& b) {
  return std::visit(
      [](const auto& v) -> std::vector<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, InstrumentalBehavior>) {
          std::vector<double> out = v.obs;
          out.insert(out.end(), v.do_.begin(), v.do_.end());
          return out;
        } else {
          return v.p;
        }
      },
      b);
}

Behavior unflatten(const Shape& s, std::vector<double> values) {
  if (values.size() != s.flat_size())
    throw DimensionError("unflatten: expected " + std::to_string(s.flat_size()) + " values for " +
                         s.describe() + ", got " + std::to_string(values.size()));
  const auto& e = s.ext;
  switch (s.kind) {
    case Scenario::Bell: return BellBehavior{e[0], e[1], e[2], e[3], std::move(values)};
    case Scenario::Instrumental: {
      std::size_t nobs = std::size_t(e[0]) * e[1] * e[2];
      std::vector<double> obs(values.begin(), values.begin() + nobs);
      std::vector<double> dov(values.begin() + nobs, values.end());
      return InstrumentalBehavior{e[0], e[1], e[2], std::move(obs), std::move(dov)};
    }
    case Scenario::Pam: return PamBehavior{e[0], e[1], e[2], std::move(values)};
    case Scenario::Bilocal: return BilocalBehavior{e[0], e[1], e[2], e[3], std::move(values)};
    case Scenario::NParty: return NPartyBehavior{e[0], e[1], e[2], std::move(values)};
  }
  throw DomainError("unflatten: unknown scenario");
}

void check_behavior(Behavior& b, double tol) {
  Shape s = shape_of(b);
  std::vector<double> v = flatten(b);
  bool changed = false;
  for (double& x : v) {
    if (!std::isfinite(x)) throw NumericalError("behavior entry is not finite");
    if (x < -kTol) throw NumericalError(fmt::format("behavior entry {} is negative", x));
    if (x < 0.0) {
      x = 0.0;
      changed = true;
      g_clamped.fetch_add(1, std::memory_order_relaxed);
    }
  }
  for (const auto& g : s.groups()) {
    double sum = 0.0;
    for (int i : g) sum += v[i];
    if (std::abs(sum - 1.0) > tol)
      throw NumericalError(fmt::format("behavior group starting at {} sums to {}", s.label(g.front()), sum));
  }
  if (changed) b = unflatten(s, std::move(v));
}

long clamp_count() { return g_clamped.load(); }

BellBehavior bell_from_quantum(const QuantumState& state, const std::vector<Povm>& alice,
                               const std::vector<Povm>& bob) {
  if (alice.empty() || bob.empty()) throw DimensionError("bell_from_quantum: need at least one setting per party");
  const int na = static_cast<int>(alice.front().size());
  const int nb = static_cast<int>(bob.front().size());
  for (const auto& m : alice)
    if (static_cast<int>(m.size()) != na) throw DimensionError("bell_from_quantum: Alice outcome counts differ");
  for (const auto& m : bob)
    if (static_cast<int>(m.size()) != nb) throw DimensionError("bell_from_quantum: Bob outcome counts differ");
  auto out = BellBehavior::zeros(static_cast<int>(alice.size()), static_cast<int>(bob.size()), na, nb);
  for (int x = 0; x < out.nx; ++x)
    for (int y = 0; y < out.ny; ++y)
      for (int a = 0; a < na; ++a)
        for (int b = 0; b < nb; ++b) {
          const CMatrix eff[2] = {alice[x][a], bob[y][b]};
          out.at(a, b, x, y) = born_joint(state, eff);
        }
  check_behavior(out);
  return out;
}

InstrumentalBehavior instrumental_from_quantum(const QuantumState& state, const std::vector<Povm>& alice,
                                               const std::vector<Povm>& bob_per_a) {
  if (alice.empty()) throw DimensionError("instrumental_from_quantum: Alice needs a setting");
  const int na = static_cast<int>(alice.front().size());
  for (const auto& m : alice)
    if (static_cast<int>(m.size()) != na) throw DimensionError("instrumental_from_quantum: Alice outcome counts differ");
  if (static_cast<int>(bob_per_a.size()) < na)
    throw DimensionError(fmt::format("instrumental_from_quantum: Bob has {} measurements but Alice has {} outcomes",
                                     bob_per_a.size(), na));
  const int nb = static_cast<int>(bob_per_a.front().size());
  for (const auto& m : bob_per_a)
    if (static_cast<int>(m.size()) != nb) throw DimensionError("instrumental_from_quantum: Bob outcome counts differ");
  auto out = InstrumentalBehavior::zeros(static_cast<int>(alice.size()), na, nb);
  const CMatrix id_a = identity(static_cast<int>(alice.front().dim()));
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b) {
      for (int x = 0; x < out.nx; ++x) {
        const CMatrix eff[2] = {alice[x][a], bob_per_a[a][b]};
        out.p_at(a, b, x) = born_joint(state, eff);
      }
      const CMatrix eff[2] = {id_a, bob_per_a[a][b]};
      out.pdo_at(b, a) = born_joint(state, eff);
    }
  check_behavior(out);
  return out;
}

InstrumentalBehavior instrumental_from_bell(const BellBehavior& b, double tol) {
  if (b.ny != b.na)
    throw DimensionError(fmt::format("instrumental_from_bell: Bob has {} settings but Alice has {} outcomes", b.ny, b.na));
  auto report = no_signaling_report(b, tol);
  if (!report.pass) throw SignalingError("instrumental_from_bell: input is signaling: " + report.worst());
  auto out = InstrumentalBehavior::zeros(b.nx, b.na, b.nb);
  for (int x = 0; x < b.nx; ++x)
    for (int a = 0; a < b.na; ++a)
      for (int bb = 0; bb < b.nb; ++bb) out.p_at(a, bb, x) = b(a, bb, x, a);
  for (int a = 0; a < b.na; ++a)
    for (int bb = 0; bb < b.nb; ++bb) out.pdo_at(bb, a) = b.marginal_b(bb, 0, a);
  return out;
}

PamBehavior pam_from_quantum(const std::vector<QuantumState>& states, const std::vector<Povm>& povms) {
  if (states.empty() || povms.empty()) throw DimensionError("pam_from_quantum: need states and measurements");
  const int nb = static_cast<int>(povms.front().size());
  for (const auto& m : povms)
    if (static_cast<int>(m.size()) != nb) throw DimensionError("pam_from_quantum: outcome counts differ");
  auto out = PamBehavior::zeros(static_cast<int>(states.size()), static_cast<int>(povms.size()), nb);
  for (int x = 0; x < out.nx; ++x)
    for (int y = 0; y < out.ny; ++y)
      for (int b = 0; b < nb; ++b) {
        const CMatrix eff[1] = {povms[y][b]};
        out.at(b, x, y) = born_joint(states[x], eff);
      }
  check_behavior(out);
  return out;
}

BilocalBehavior bilocal_from_quantum(const QuantumState& rho1, const QuantumState& rho2,
                                     const std::vector<Povm>& alice, const Povm& bsm,
                                     const std::vector<Povm>& charlie) {
  if (rho1.dim() != 4 || rho2.dim() != 4) throw DimensionError("bilocal_from_quantum: sources must be two-qubit states");
  if (bsm.size() != 4 || bsm.dim() != 4) throw DimensionError("bilocal_from_quantum: middle measurement must be 4-outcome on two qubits");
  if (alice.empty() || charlie.empty()) throw DimensionError("bilocal_from_quantum: need settings for both ends");
  const int na = static_cast<int>(alice.front().size());
  const int nc = static_cast<int>(charlie.front().size());
  QuantumState joint(tensor(rho1.mat(), rho2.mat()));
  auto out = BilocalBehavior::zeros(static_cast<int>(alice.size()), static_cast<int>(charlie.size()), na, nc);
  for (int x = 0; x < out.nx; ++x)
    for (int z = 0; z < out.nz; ++z)
      for (int a = 0; a < na; ++a)
        for (int k = 0; k < 4; ++k)
          for (int c = 0; c < nc; ++c) {
            const CMatrix eff[3] = {alice[x][a], bsm[k], charlie[z][c]};
            out.at(a, k >> 1, k & 1, c, x, z) = born_joint(joint, eff);
          }
  check_behavior(out);
  return out;
}

NPartyBehavior npartite_from_quantum(const QuantumState& state,
                                     const std::vector<std::vector<Povm>>& povms_per_party) {
  const int n = static_cast<int>(povms_per_party.size());
  if (n < 1) throw DimensionError("npartite_from_quantum: no parties");
  const int ns = static_cast<int>(povms_per_party.front().size());
  const int no = static_cast<int>(povms_per_party.front().front().size());
  for (const auto& party : povms_per_party) {
    if (static_cast<int>(party.size()) != ns) throw DimensionError("npartite_from_quantum: setting counts differ");
    for (const auto& m : party)
      if (static_cast<int>(m.size()) != no) throw DimensionError("npartite_from_quantum: outcome counts differ");
  }
  auto out = NPartyBehavior::zeros(n, ns, no);
  std::vector<CMatrix> eff(n);
  for (int st = 0; st < out.setting_tuples(); ++st) {
    auto s = tuple_digits(st, n, ns);
    for (int ot = 0; ot < out.outcome_tuples(); ++ot) {
      auto o = tuple_digits(ot, n, no);
      for (int k = 0; k < n; ++k) eff[k] = povms_per_party[k][s[k]][o[k]];
      out.p[out.index(ot, st)] = born_joint(state, eff);
    }
  }
  check_behavior(out);
  return out;
}

double ace(const InstrumentalBehavior& b) {
  double best = 0.0;
  for (int bb = 0; bb < b.nb; ++bb)
    for (int a = 0; a < b.na; ++a)
      for (int a2 = a + 1; a2 < b.na; ++a2) best = std::max(best, std::abs(b.pdo(bb, a) - b.pdo(bb, a2)));
  return best;
}

std::string NoSignalingReport::worst() const {
  const MarginalDeviation* w = nullptr;
  for (const auto& d : deviations)
    if (!w || d.deviation > w->deviation) w = &d;
  if (!w) return "no marginals";
  return fmt::format("marginal p_{}({}|{}) varies by {:.3g} across the other party's settings", w->party,
                     w->outcome, w->setting, w->deviation);
}

NoSignalingReport no_signaling_report(const BellBehavior& b, double tol) {
  NoSignalingReport r;
  for (int x = 0; x < b.nx; ++x)
    for (int a = 0; a < b.na; ++a) {
      double lo = 1e300, hi = -1e300;
      for (int y = 0; y < b.ny; ++y) {
        double m = b.marginal_a(a, x, y);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      r.deviations.push_back({"A", a, x, hi - lo});
    }
  for (int y = 0; y < b.ny; ++y)
    for (int bb = 0; bb < b.nb; ++bb) {
      double lo = 1e300, hi = -1e300;
      for (int x = 0; x < b.nx; ++x) {
        double m = b.marginal_b(bb, x, y);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      r.deviations.push_back({"B", bb, y, hi - lo});
    }
  for (const auto& d : r.deviations) r.max_deviation = std::max(r.max_deviation, d.deviation);
  r.pass = r.max_deviation < tol;
  return r;
}

bool untrusted_detector_consistent(const InstrumentalBehavior& b, double eta, int conclusive_a,
                                   int conclusive_b, double tol) {
  if (conclusive_a > b.na || conclusive_b > b.nb)
    throw DimensionError("untrusted_detector_consistent: conclusive outcome counts exceed cardinalities");
  for (int x = 0; x < b.nx; ++x) {
    double s = 0.0;
    for (int a = 0; a < conclusive_a; ++a)
      for (int bb = 0; bb < conclusive_b; ++bb) s += b.p(a, bb, x);
    if (std::abs(s - eta * eta) > tol) return false;
  }
  return true;
}

BellBehavior deterministic_bell(int nx, int ny, int na, int nb, const std::vector<int>& fa,
                                const std::vector<int>& gb) {
  auto out = BellBehavior::zeros(nx, ny, na, nb);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) out.at(fa.at(x), gb.at(y), x, y) = 1.0;
  return out;
}

}  // namespace detloop
