#pragma once

#include <string>
#include <vector>

#include "detloop/behaviors.hpp"
#include "detloop/polytope.hpp"

namespace detloop {

// Numbers are written with 17 significant digits so doubles round-trip exactly.
std::string format_double(double v);

std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_field(const std::string& s);

// One row per flat entry: "scenario,<index columns>,value".
std::string behavior_to_csv(const Behavior& b);
Behavior behavior_from_csv(const std::string& text);

std::string behavior_to_json(const Behavior& b);
Behavior behavior_from_json(const std::string& text);

struct ResultRow {
  std::string task;
  std::string functional;
  std::string loss_model;
  double eta1 = 1.0;
  double eta2 = 1.0;
  double value = 0.0;
  double classical_bound = 0.0;
  bool converged = false;
};

inline const char* kResultsHeader = "task,functional,loss_model,eta1,eta2,value,classical_bound,converged";
std::string results_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> results_from_csv(const std::string& text);

// Coefficient columns named by probability labels, then "offset".
std::string facets_to_csv(const std::vector<Facet>& facets, const VertexSet& vs);
std::vector<Facet> facets_from_csv(const std::string& text);

}  // namespace detloop
