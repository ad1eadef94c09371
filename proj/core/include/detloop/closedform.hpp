#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace detloop {

// Strict inequalities treat |lhs - rhs| <= 1e-12 as equality (infeasible).
bool branciard_feasible(double eta1, double eta2);
double eberhard_sym();
double larsson_cabello_asym();
double hardy_prob(double alpha);
bool garbarino_feasible(double eta1, double eta2, double alpha);
double bc_chain_sym(int n_settings);
double bc_chain_asym(int n_settings);
// Setting-dependent efficiencies eta_party^setting.
bool quintino_feasible(double eta1_0, double eta1_1, double eta2_0, double eta2_1);
double ch_nsite_threshold(int n);
double mermin_threshold(int n);
double mermin_classical_bound(int n);
double pam_eta_qc(int d, double istar);
double pam_eta_dim(int d, double istar);
std::pair<double, double> istar_bounds(int d);
double bilocal_scaling(double eta1, double eta2, double ideal);

struct FormulaResult {
  std::string name;
  std::map<std::string, double> inputs;
  std::optional<bool> flag;   // predicates
  std::vector<double> values; // numeric results (one, or two for intervals)
  std::string description;
};

struct FormulaInfo {
  std::string name;
  std::vector<std::string> args;
  std::string description;
};

const std::vector<FormulaInfo>& formula_catalog();
FormulaResult formula(const std::string& name, const std::map<std::string, double>& args);

}  // namespace detloop
