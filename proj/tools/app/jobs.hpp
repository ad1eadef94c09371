#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "app/config.hpp"
#include "app/tables.hpp"
#include "detloop/serialize.hpp"

namespace detloop::app {

using LogFn = std::function<void(const std::string&)>;

struct JobOutput {
  std::vector<ResultRow> rows;
  nlohmann::ordered_json mirror;  // rows plus best parameters and run details
  std::optional<Table> curve;     // plot data; first column is the x axis
  std::optional<std::string> facets_csv;
  std::vector<std::string> lines;  // human-readable summary
  std::vector<std::string> warnings;
  bool no_crossing = false;
};

JobOutput execute(const RunConfig& cfg, const LogFn& log);

// Writes <prefix>_results.csv/.json, _curve.csv, _facets.csv and _manifest.json
// into cfg.out_dir; returns the paths written.
std::vector<std::string> write_job(const RunConfig& cfg, const JobOutput& out);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace detloop::app
