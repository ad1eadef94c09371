#include "detloop/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "detloop/errors.hpp"

namespace detloop {
namespace {

constexpr double kStrict = 1e-12;

void require_eta(double eta, const char* what) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError(fmt::format("{}: efficiency {} outside [0,1]", what, eta));
}

void require_at_least(int v, int lo, const char* what) {
  if (v < lo) throw DomainError(fmt::format("{}: argument {} must be at least {}", what, v, lo));
}

bool strictly_greater(double lhs, double rhs) { return lhs - rhs > kStrict; }

}  // namespace

bool branciard_feasible(double eta1, double eta2) {
  require_eta(eta1, "branciard_feasible");
  require_eta(eta2, "branciard_feasible");
  return strictly_greater(3.0 * eta1 * eta2, eta1 + eta2);
}

double eberhard_sym() { return 2.0 / 3.0; }

double larsson_cabello_asym() { return 0.5; }

double hardy_prob(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("hardy_prob: alpha must lie in (0,1)");
  double a2 = alpha * alpha;
  return (1.0 - a2) * (1.0 - a2) * a2 / (2.0 - a2);
}

bool garbarino_feasible(double eta1, double eta2, double alpha) {
  require_eta(eta1, "garbarino_feasible");
  require_eta(eta2, "garbarino_feasible");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("garbarino_feasible: alpha must lie in (0,1)");
  return strictly_greater(eta1, 2.0 * (1.0 - eta2) / (alpha * alpha));
}

double bc_chain_sym(int n) {
  require_at_least(n, 2, "bc_chain_sym");
  return 2.0 / (n * std::cos(std::numbers::pi / (2.0 * n)) + 1.0);
}

double bc_chain_asym(int n) {
  require_at_least(n, 2, "bc_chain_asym");
  return (n - 1.0) / (n * std::cos(std::numbers::pi / (2.0 * n)));
}

bool quintino_feasible(double e10, double e11, double e20, double e21) {
  for (double e : {e10, e11, e20, e21}) require_eta(e, "quintino_feasible");
  // The four conditions are one template under swapping the settings of either party.
  auto cond = [](double a, double a_other, double b, double b_other) {
    return strictly_greater(a * b + a * b_other + a_other * b, a + b);
  };
  return cond(e10, e11, e20, e21) || cond(e10, e11, e21, e20) || cond(e11, e10, e20, e21) ||
         cond(e11, e10, e21, e20);
}

double ch_nsite_threshold(int n) {
  require_at_least(n, 2, "ch_nsite_threshold");
  return n / (2.0 * n - 1.0);
}

double mermin_threshold(int n) {
  require_at_least(n, 2, "mermin_threshold");
  return n / (2.0 * n - 2.0);
}

double mermin_classical_bound(int n) {
  require_at_least(n, 2, "mermin_classical_bound");
  return n % 2 ? std::pow(2.0, (n - 1) / 2.0) : std::pow(2.0, n / 2.0);
}

double pam_eta_qc(int d, double istar) {
  require_at_least(d, 2, "pam_eta_qc");
  if (!(istar > 0.0)) throw DomainError("pam_eta_qc: maximal quantum value must be positive");
  return (d - 1.0) / istar;
}

double pam_eta_dim(int d, double istar) {
  require_at_least(d, 2, "pam_eta_dim");
  if (!(istar > 0.0)) throw DomainError("pam_eta_dim: maximal quantum value must be positive");
  return istar / d;
}

std::pair<double, double> istar_bounds(int d) {
  require_at_least(d, 2, "istar_bounds");
  return {d - 2.0 + std::numbers::sqrt2, static_cast<double>(d)};
}

double bilocal_scaling(double eta1, double eta2, double ideal) {
  require_eta(eta1, "bilocal_scaling");
  require_eta(eta2, "bilocal_scaling");
  return std::sqrt(eta1 * eta2) * ideal;
}

const std::vector<FormulaInfo>& formula_catalog() {
  static const std::vector<FormulaInfo> cat = {
      {"branciard_feasible", {"eta1", "eta2"}, "necessary condition eta1 + eta2 < 3 eta1 eta2 for a CHSH-type violation"},
      {"eberhard_sym", {}, "symmetric critical efficiency with partially entangled states"},
      {"larsson_cabello_asym", {}, "critical efficiency of the lossy side when the other detector is perfect"},
      {"hardy_prob", {"alpha"}, "probability of the Hardy event (1-a^2)^2 a^2 / (2-a^2)"},
      {"garbarino_feasible", {"eta1", "eta2", "alpha"}, "observable-specific condition eta1 > 2(1-eta2)/alpha^2"},
      {"bc_chain_sym", {"N"}, "symmetric threshold 2/[N cos(pi/2N) + 1] for the N-setting chained inequality"},
      {"bc_chain_asym", {"N"}, "one-sided threshold (N-1)/[N cos(pi/2N)] for the chained inequality"},
      {"quintino_feasible", {"eta1_0", "eta1_1", "eta2_0", "eta2_1"}, "setting-dependent efficiencies: any of four conditions"},
      {"ch_nsite_threshold", {"n"}, "n-party Clauser-Horne critical efficiency n/(2n-1)"},
      {"mermin_threshold", {"n"}, "Mermin critical efficiency n/(2n-2) with GHZ states"},
      {"mermin_classical_bound", {"n"}, "local bound of the Mermin operator"},
      {"pam_eta_qc", {"d", "istar"}, "efficiency certifying quantumness, (d-1)/I*"},
      {"pam_eta_dim", {"d", "istar"}, "efficiency certifying dimension d+1, I*/d"},
      {"istar_bounds", {"d"}, "interval [d-2+sqrt2, d] for the maximal quantum witness value"},
      {"bilocal_scaling", {"eta1", "eta2", "B"}, "lossy bilocal value sqrt(eta1 eta2) B"},
  };
  return cat;
}

FormulaResult formula(const std::string& name, const std::map<std::string, double>& args) {
  const FormulaInfo* info = nullptr;
  for (const auto& f : formula_catalog())
    if (f.name == name) info = &f;
  if (!info) throw DomainError("unknown formula '" + name + "'");
  for (const auto& [k, v] : args) {
    (void)v;
    if (std::find(info->args.begin(), info->args.end(), k) == info->args.end())
      throw DomainError(fmt::format("formula {}: unexpected argument '{}'", name, k));
  }
  auto arg = [&](const std::string& k) {
    auto it = args.find(k);
    if (it == args.end()) throw DomainError(fmt::format("formula {}: missing argument '{}'", name, k));
    return it->second;
  };
  auto iarg = [&](const std::string& k) {
    double v = arg(k);
    if (v != std::floor(v)) throw DomainError(fmt::format("formula {}: argument '{}' must be an integer", name, k));
    return static_cast<int>(v);
  };
  FormulaResult r{name, args, std::nullopt, {}, info->description};
  if (name == "branciard_feasible") r.flag = branciard_feasible(arg("eta1"), arg("eta2"));
  else if (name == "eberhard_sym") r.values = {eberhard_sym()};
  else if (name == "larsson_cabello_asym") r.values = {larsson_cabello_asym()};
  else if (name == "hardy_prob") r.values = {hardy_prob(arg("alpha"))};
  else if (name == "garbarino_feasible") r.flag = garbarino_feasible(arg("eta1"), arg("eta2"), arg("alpha"));
  else if (name == "bc_chain_sym") r.values = {bc_chain_sym(iarg("N"))};
  else if (name == "bc_chain_asym") r.values = {bc_chain_asym(iarg("N"))};
  else if (name == "quintino_feasible")
    r.flag = quintino_feasible(arg("eta1_0"), arg("eta1_1"), arg("eta2_0"), arg("eta2_1"));
  else if (name == "ch_nsite_threshold") r.values = {ch_nsite_threshold(iarg("n"))};
  else if (name == "mermin_threshold") r.values = {mermin_threshold(iarg("n"))};
  else if (name == "mermin_classical_bound") r.values = {mermin_classical_bound(iarg("n"))};
  else if (name == "pam_eta_qc") r.values = {pam_eta_qc(iarg("d"), arg("istar"))};
  else if (name == "pam_eta_dim") r.values = {pam_eta_dim(iarg("d"), arg("istar"))};
  else if (name == "istar_bounds") {
    auto [lo, hi] = istar_bounds(iarg("d"));
    r.values = {lo, hi};
  } else if (name == "bilocal_scaling") r.values = {bilocal_scaling(arg("eta1"), arg("eta2"), arg("B"))};
  return r;
}

}  // namespace detloop
