#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "detloop/functionals.hpp"
#include "detloop/loss.hpp"
#include "detloop/optimize.hpp"
#include "detloop/polytope.hpp"
#include "detloop/strategy.hpp"

namespace detloop::app {

// A malformed config; `path` is the offending field, e.g. "loss.sink_a".
struct ConfigError : std::runtime_error {
  ConfigError(std::string path, const std::string& msg)
      : std::runtime_error(path + ": " + msg), path(std::move(path)) {}
  std::string path;
};

enum class Task { Maximize, Threshold, Curve, Noise, Polytope, Formulas };
const char* task_name(Task t);

struct PolytopeJob {
  std::string scenario = "bell";  // bell | instrumental | pam
  std::vector<int> cards;         // bell {nx,ny,na,nb}; instrumental {nx,na,nb}; pam {nx,ny,nb}
  InstrumentalSet set = InstrumentalSet::Hybrid;
  int d = 2;                      // pam message dimension
  bool facets = false;
};

struct RunConfig {
  Task task = Task::Maximize;
  std::string functional;
  Params params;
  LossSpec loss;
  EtaFamily family = EtaFamily::Symmetric;
  double fixed_eta = 1.0;
  std::optional<StrategySpace> space;
  OptimizerConfig optimizer;
  ThresholdConfig threshold;
  std::vector<double> grid;
  CurveMode curve_mode = CurveMode::Fixed;
  std::optional<std::vector<double>> fixed_params;
  ChannelFamily channel = ChannelFamily::Depolarizing;
  std::string formula;
  std::map<std::string, double> formula_args;
  PolytopeJob polytope;
  std::string out_dir = "detloop_out";
  std::string prefix = "run";

  // Space used by optimizing tasks: the override if given, else the default for the functional.
  StrategySpace resolved_space() const;
};

// Parses and validates; throws ConfigError naming the field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Seed from the DETLOOP_SEED environment value, if set; throws ConfigError when malformed.
std::optional<std::uint64_t> seed_from_env(const char* value);

nlohmann::json to_json(const OptimizerConfig& c);

}  // namespace detloop::app
