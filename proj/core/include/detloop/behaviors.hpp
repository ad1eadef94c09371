#pragma once

#include <string>
#include <variant>
#include <vector>

#include "detloop/qcore.hpp"

namespace detloop {

enum class Scenario { Bell, Instrumental, Pam, Bilocal, NParty };

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

// Scenario kind plus the index extents of its flat layout.
//   Bell         {nx, ny, na, nb}        p(a,b|x,y) at ((x*ny+y)*na+a)*nb+b
//   Instrumental {nx, na, nb}            obs(a,b|x) at (x*na+a)*nb+b, then do(b|a) at a*nb+b
//   Pam          {nx, ny, nb}            p(b|x,y)  at (x*ny+y)*nb+b
//   Bilocal      {nx, nz, na, nc}        p(a,b0,b1,c|x,z), b0/b1 binary
//   NParty       {n, settings, outcomes} settings tuple major, outcome tuple minor
struct Shape {
  Scenario kind = Scenario::Bell;
  std::vector<int> ext;

  bool operator==(const Shape&) const = default;
  std::size_t flat_size() const;
  // Normalization groups: each entry lists flat indices that must sum to one.
  std::vector<std::vector<int>> groups() const;
  // Human-readable probability label for a flat index, e.g. "p(01|10)" or "p(1|do(0))".
  std::string label(int flat) const;
  std::string describe() const;
};

struct BellBehavior {
  int nx = 2, ny = 2, na = 2, nb = 2;
  std::vector<double> p;

  static BellBehavior zeros(int nx, int ny, int na, int nb);
  std::size_t index(int a, int b, int x, int y) const { return ((x * ny + y) * na + a) * nb + b; }
  double operator()(int a, int b, int x, int y) const { return p[index(a, b, x, y)]; }
  double& at(int a, int b, int x, int y) { return p[index(a, b, x, y)]; }
  double marginal_a(int a, int x, int y) const;
  double marginal_b(int b, int x, int y) const;
  Shape shape() const { return {Scenario::Bell, {nx, ny, na, nb}}; }
};

struct InstrumentalBehavior {
  int nx = 2, na = 2, nb = 2;
  std::vector<double> obs;  // obs(a,b|x)
  std::vector<double> do_;  // p(b|do(a))

  static InstrumentalBehavior zeros(int nx, int na, int nb);
  std::size_t obs_index(int a, int b, int x) const { return (x * na + a) * nb + b; }
  std::size_t do_index(int b, int a) const { return a * nb + b; }
  double p(int a, int b, int x) const { return obs[obs_index(a, b, x)]; }
  double& p_at(int a, int b, int x) { return obs[obs_index(a, b, x)]; }
  double pdo(int b, int a) const { return do_[do_index(b, a)]; }
  double& pdo_at(int b, int a) { return do_[do_index(b, a)]; }
  double marginal_a(int a, int x) const;
  Shape shape() const { return {Scenario::Instrumental, {nx, na, nb}}; }
};

struct PamBehavior {
  int nx = 3, ny = 2, nb = 2;
  std::vector<double> p;

  static PamBehavior zeros(int nx, int ny, int nb);
  std::size_t index(int b, int x, int y) const { return (x * ny + y) * nb + b; }
  double operator()(int b, int x, int y) const { return p[index(b, x, y)]; }
  double& at(int b, int x, int y) { return p[index(b, x, y)]; }
  Shape shape() const { return {Scenario::Pam, {nx, ny, nb}}; }
};

// Entanglement-swapping network: Alice (x) and Charlie (z) at the ends, Bob's
// four-outcome joint measurement stored as two binary labels (b0, b1). Ends may
// carry a third "no click" outcome.
struct BilocalBehavior {
  int nx = 2, nz = 2, na = 2, nc = 2;
  std::vector<double> p;

  static BilocalBehavior zeros(int nx, int nz, int na, int nc);
  std::size_t index(int a, int b0, int b1, int c, int x, int z) const {
    return ((((x * nz + z) * na + a) * 2 + b0) * 2 + b1) * nc + c;
  }
  double operator()(int a, int b0, int b1, int c, int x, int z) const { return p[index(a, b0, b1, c, x, z)]; }
  double& at(int a, int b0, int b1, int c, int x, int z) { return p[index(a, b0, b1, c, x, z)]; }
  Shape shape() const { return {Scenario::Bilocal, {nx, nz, na, nc}}; }
};

// n parties with `settings` inputs and `outcomes` outputs each. Tuples are
// encoded with party 0 as the most significant digit.
struct NPartyBehavior {
  int n = 3, settings = 2, outcomes = 2;
  std::vector<double> p;

  static NPartyBehavior zeros(int n, int settings, int outcomes);
  int outcome_tuples() const;
  int setting_tuples() const;
  std::size_t index(int outcome_tuple, int setting_tuple) const {
    return static_cast<std::size_t>(setting_tuple) * outcome_tuples() + outcome_tuple;
  }
  double operator()(int outcome_tuple, int setting_tuple) const { return p[index(outcome_tuple, setting_tuple)]; }
  Shape shape() const { return {Scenario::NParty, {n, settings, outcomes}}; }
};

using Behavior = std::variant<BellBehavior, InstrumentalBehavior, PamBehavior, BilocalBehavior, NPartyBehavior>;

Shape shape_of(const Behavior& b);
std::vector<double> flatten(const Behavior& b);
Behavior unflatten(const Shape& s, std::vector<double> values);

// Checks nonnegativity and normalization. Entries in [-1e-9, 0) are clamped to
// zero and counted; anything more negative, or a group sum off by more than
// tol, throws NumericalError.
void check_behavior(Behavior& b, double tol = kTol);
template <class T>
void check_behavior(T& b, double tol = kTol) {
  Behavior v = std::move(b);
  check_behavior(v, tol);
  b = std::get<T>(std::move(v));
}
long clamp_count();

BellBehavior bell_from_quantum(const QuantumState& state, const std::vector<Povm>& alice,
                               const std::vector<Povm>& bob);
InstrumentalBehavior instrumental_from_quantum(const QuantumState& state, const std::vector<Povm>& alice,
                                               const std::vector<Povm>& bob_per_a);
InstrumentalBehavior instrumental_from_bell(const BellBehavior& b, double tol = 1e-6);
PamBehavior pam_from_quantum(const std::vector<QuantumState>& states, const std::vector<Povm>& povms);
BilocalBehavior bilocal_from_quantum(const QuantumState& rho1, const QuantumState& rho2,
                                     const std::vector<Povm>& alice, const Povm& bsm,
                                     const std::vector<Povm>& charlie);
NPartyBehavior npartite_from_quantum(const QuantumState& state,
                                     const std::vector<std::vector<Povm>>& povms_per_party);

// Largest |p(b|do(a)) - p(b|do(a'))|.
double ace(const InstrumentalBehavior& b);

struct MarginalDeviation {
  std::string party;  // "A" or "B"
  int outcome = 0;
  int setting = 0;
  double deviation = 0.0;
};

struct NoSignalingReport {
  std::vector<MarginalDeviation> deviations;  // one per (party, outcome, own setting)
  double max_deviation = 0.0;
  bool pass = true;
  std::string worst() const;
};

NoSignalingReport no_signaling_report(const BellBehavior& b, double tol = 1e-6);

// Sum over conclusive (a, b) of p(a,b|x) equals eta^2 for every x, within tol.
bool untrusted_detector_consistent(const InstrumentalBehavior& b, double eta, int conclusive_a,
                                   int conclusive_b, double tol = 1e-6);

// Local deterministic Bell point: Alice answers fa[x], Bob answers gb[y].
BellBehavior deterministic_bell(int nx, int ny, int na, int nb, const std::vector<int>& fa,
                                const std::vector<int>& gb);

}  // namespace detloop
