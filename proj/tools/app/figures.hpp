#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "app/jobs.hpp"
#include "app/tables.hpp"
#include "detloop/optimize.hpp"

namespace detloop::app {

struct FigureOutput {
  std::string id;
  std::string title;
  Table curve;  // first column is the x axis
  std::string x_label, y_label;
  std::vector<SummaryRow> summary;
  nlohmann::ordered_json details;

  bool all_pass() const;
};

// fig1, fig2, fig3, fig4, fig5, fig9, fig10, fig11, fig12.
const std::vector<std::string>& figure_ids();

// `base` supplies seed, budget and threads; figures that need a larger
// multistart raise the restart count themselves.
FigureOutput reproduce(const std::string& id, const OptimizerConfig& base, const LogFn& log);

// <id>_curve.csv, <id>_summary.csv, <id>_details.json, <id>_manifest.json.
std::vector<std::string> write_figure(const std::string& dir, const FigureOutput& fig);

}  // namespace detloop::app
