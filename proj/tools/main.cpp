#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "app/config.hpp"
#include "app/figures.hpp"
#include "app/jobs.hpp"
#include "detloop/closedform.hpp"
#include "detloop/errors.hpp"
#include "detloop/polytope.hpp"
#include "detloop/serialize.hpp"

namespace {

using namespace detloop;
using namespace detloop::app;

constexpr int kOk = 0, kFailed = 1, kInvalid = 2, kNoCrossing = 3;

std::string versions() {
  return fmt::format("detloop {}, Eigen {}.{}.{}, compiler {}", DETLOOP_VERSION, EIGEN_WORLD_VERSION,
                     EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION, __VERSION__);
}

// Console gets bare messages; the log file carries timestamps so result files stay reproducible.
std::shared_ptr<spdlog::logger> make_logger(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  auto console = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
  console->set_pattern("%v");
  auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>((std::filesystem::path(dir) / name).string(), true);
  file->set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
  auto log = std::make_shared<spdlog::logger>("detloop", spdlog::sinks_init_list{console, file});
  log->flush_on(spdlog::level::info);
  return log;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const std::string& path, int threads) {
  RunConfig cfg = load_config(path);
  if (auto s = seed_from_env(std::getenv("DETLOOP_SEED"))) cfg.optimizer.seed = *s;
  if (threads > 0) cfg.optimizer.threads = threads;
  auto log = make_logger(cfg.out_dir, cfg.prefix + ".log");
  const auto t0 = std::chrono::steady_clock::now();
  log->info("{}", versions());
  log->info("config {}, task {}, seed {}, threads {}", path, task_name(cfg.task), cfg.optimizer.seed,
            cfg.optimizer.threads);
  int code = kOk;
  JobOutput out;
  try {
    out = execute(cfg, [&](const std::string& m) { log->info("{}", m); });
  } catch (const NoCrossingError& e) {
    log->error("no crossing: {}", e.what());
    log->info("wall time {:.2f} s", seconds_since(t0));
    return kNoCrossing;
  }
  for (const auto& w : out.warnings) log->warn("{}", w);
  for (const auto& l : out.lines) std::cout << l << "\n";
  for (const auto& f : write_job(cfg, out)) log->info("wrote {}", f);
  if (out.no_crossing) {
    log->error("no crossing found");
    code = kNoCrossing;
  }
  log->info("wall time {:.2f} s", seconds_since(t0));
  return code;
}

int cmd_reproduce(const std::vector<std::string>& ids, const std::string& dir, int restarts, int threads) {
  OptimizerConfig base;
  base.restarts = restarts;
  if (auto s = seed_from_env(std::getenv("DETLOOP_SEED"))) base.seed = *s;
  if (threads > 0) base.threads = threads;
  std::vector<std::string> todo = ids;
  if (todo.size() == 1 && todo[0] == "all") todo = figure_ids();
  for (const auto& id : todo)
    if (std::find(figure_ids().begin(), figure_ids().end(), id) == figure_ids().end())
      throw DomainError("unknown figure '" + id + "'");
  auto log = make_logger(dir, "reproduce.log");
  log->info("{}", versions());
  bool all = true;
  for (const auto& id : todo) {
    const auto t0 = std::chrono::steady_clock::now();
    log->info("{}: seed {}, {} restarts", id, base.seed, base.restarts);
    FigureOutput fig = reproduce(id, base, [&](const std::string& m) { log->info("{}", m); });
    for (const auto& f : write_figure(dir, fig)) log->info("wrote {}", f);
    for (const auto& r : fig.summary)
      std::cout << fmt::format("{} {:<48} measured {:.4f} expected {} +- {}  {}\n", id, r.quantity, r.measured,
                               r.expected, r.tolerance, r.pass ? "pass" : "FAIL");
    log->info("{}: wall time {:.1f} s", id, seconds_since(t0));
    all = all && fig.all_pass();
  }
  return all ? kOk : kFailed;
}

int cmd_formulas(const std::string& name, const std::vector<std::string>& kv) {
  if (name.empty()) {
    for (const auto& f : formula_catalog()) {
      std::string args;
      for (const auto& a : f.args) args += (args.empty() ? "" : ",") + a;
      std::cout << fmt::format("{:<24} ({})  {}\n", f.name, args, f.description);
    }
    return kOk;
  }
  std::map<std::string, double> args;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--arg", "expected key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq), val = s.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != val.size()) throw ConfigError("--arg " + key, "not a number: '" + val + "'");
    args[key] = v;
  }
  const FormulaResult r = formula(name, args);
  std::string in;
  for (const auto& [k, v] : r.inputs) in += fmt::format("{}{}={}", in.empty() ? "" : ", ", k, v);
  std::string value;
  if (r.flag) value = *r.flag ? "true" : "false";
  else
    for (double v : r.values) value += (value.empty() ? "" : ", ") + format_double(v);
  std::cout << "name:  " << r.name << "\nargs:  " << in << "\nvalue: " << value << "\nabout: " << r.description << "\n";
  return kOk;
}

int cmd_list_functionals() {
  std::cout << fmt::format("{:<12} {:<13} {:<34} {:>10}  {}\n", "name", "scenario", "cardinalities", "bound", "params");
  for (const auto& f : list_functionals())
    std::cout << fmt::format("{:<12} {:<13} {:<34} {:>10.6g}  {}\n", f.name, f.scenario, f.shape, f.classical_bound,
                             f.params);
  return kOk;
}

int cmd_polytope(const std::string& scenario, const std::vector<int>& cards, const std::string& set, int d,
                 bool facets, const std::string& functional, const std::string& dir) {
  nlohmann::json j = {{"task", "polytope"},
                      {"polytope", {{"scenario", scenario}, {"set", set}, {"d", d}, {"facets", facets}}},
                      {"output", {{"dir", dir}, {"prefix", scenario}}}};
  if (!cards.empty()) j["polytope"]["cards"] = cards;
  if (!functional.empty()) j["functional"] = functional;
  RunConfig cfg = parse_config(j);
  JobOutput out = execute(cfg, [](const std::string& m) { std::cerr << m << "\n"; });
  for (const auto& l : out.lines) std::cout << l << "\n";
  if (facets || !functional.empty())
    for (const auto& f : write_job(cfg, out)) std::cerr << "wrote " << f << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection-efficiency and noise thresholds for nonclassicality tests"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on optimizer worker threads")->check(CLI::PositiveNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "Run a job described by a JSON config");
  run->add_option("config", config, "Path to the config file")->required();

  std::vector<std::string> figs;
  std::string fig_dir = "figures";
  int restarts = 32;
  auto* rep = app.add_subcommand("reproduce", "Recompute a published figure (fig1..fig12, or all)");
  rep->add_option("figure", figs, "Figure ids")->required();
  rep->add_option("--out", fig_dir, "Output directory");
  rep->add_option("--restarts", restarts, "Multistart restarts per maximization")->check(CLI::PositiveNumber);

  std::string fname;
  std::vector<std::string> fargs;
  auto* form = app.add_subcommand("formulas", "Evaluate a closed-form threshold formula (no name: list them)");
  form->add_option("name", fname, "Formula name");
  form->add_option("--arg", fargs, "Argument as key=value (repeatable)");

  auto* lf = app.add_subcommand("list-functionals", "List the built-in functionals");

  std::string scen, pset = "hybrid", pfun, pdir = "polytope_out";
  std::vector<int> pcards;
  int pd = 2;
  bool pfacets = false;
  auto* poly = app.add_subcommand("polytope", "Enumerate a classical polytope (bell, instrumental, pam)");
  poly->add_option("scenario", scen, "bell | instrumental | pam")->required();
  poly->add_option("--cards", pcards, "Cardinalities, e.g. 2,3,3")->delimiter(',');
  poly->add_option("--set", pset, "hybrid | observational (instrumental only)");
  poly->add_option("--d", pd, "Message dimension (pam only)");
  poly->add_flag("--facets", pfacets, "Enumerate facets and write them as CSV");
  poly->add_option("--validate", pfun, "Check a functional's bound against the vertices");
  poly->add_option("--out", pdir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(config, threads);
    if (*rep) return cmd_reproduce(figs, fig_dir, restarts, threads);
    if (*form) return cmd_formulas(fname, fargs);
    if (*lf) return cmd_list_functionals();
    if (*poly) return cmd_polytope(scen, pcards, pset, pd, pfacets, pfun, pdir);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kInvalid;
  } catch (const NoCrossingError& e) {
    std::cerr << "no crossing: " << e.what() << "\n";
    return kNoCrossing;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const DimensionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const GuardError& e) {
    std::cerr << "request too large: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kFailed;
}
