#include "app/jobs.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "detloop/closedform.hpp"
#include "detloop/errors.hpp"
#include "detloop/polytope.hpp"

namespace detloop::app {
namespace {

using ojson = nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ojson loss_json(const LossSpec& l) {
  return {{"model", loss_model_name(l.model)}, {"eta", l.eta}, {"sink_a", l.sink_a}, {"sink_b", l.sink_b}};
}

ojson row_json(const ResultRow& r) {
  return {{"task", r.task},   {"functional", r.functional}, {"loss_model", r.loss_model},
          {"eta1", r.eta1},   {"eta2", r.eta2},             {"value", r.value},
          {"classical_bound", r.classical_bound},           {"converged", r.converged}};
}

ojson threshold_json(const ThresholdResult& r) {
  ojson probes = ojson::array();
  for (const auto& p : r.probes) probes.push_back({p.param, p.score});
  return {{"status", r.status == ThresholdStatus::Crossing ? "crossing" : "no_violation_below_one"},
          {"star", r.star},
          {"value_at_star", r.value_at_star},
          {"bracket", {r.lo, r.hi}},
          {"evaluations", r.evaluations},
          {"best_params", r.best_params},
          {"probes", probes},
          {"warnings", r.warnings}};
}

ojson header(const RunConfig& c) {
  ojson j;
  j["task"] = task_name(c.task);
  if (!c.functional.empty()) {
    j["functional"] = c.functional;
    j["params"] = c.params;
  }
  return j;
}

Table probe_table(const ThresholdResult& r, const std::string& x, const std::string& y) {
  auto probes = r.probes;
  std::stable_sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.param < b.param; });
  Table t{{x, y}, {}};
  for (const auto& p : probes) t.rows.push_back({p.param, p.score});
  return t;
}

JobOutput run_maximize(const RunConfig& c, const LogFn& log) {
  const Functional f = build(c.functional, c.params);
  const StrategySpace space = c.resolved_space();
  log(fmt::format("maximizing {} over {} ({} restarts)", f.name, space.describe(), c.optimizer.restarts));
  MaximizeResult m = maximize(f, space, c.loss, c.optimizer);
  JobOutput out;
  ResultRow row{"maximize", f.name, loss_model_name(c.loss.model), c.loss.eta1(), c.loss.eta2(), m.value,
                f.classical_bound, m.converged};
  out.rows.push_back(row);
  out.mirror = header(c);
  out.mirror["loss"] = loss_json(c.loss);
  out.mirror["space"] = space.describe();
  out.mirror["optimizer"] = to_json(c.optimizer);
  auto r = row_json(row);
  r["score"] = m.score;
  r["evaluations"] = m.evaluations;
  r["best_restart"] = m.best_restart;
  r["best_params"] = m.params;
  out.mirror["results"] = ojson::array({r});
  out.lines.push_back(fmt::format("{}: value {:.10f}, classical bound {}, violation {:.3e}", f.name, m.value,
                                  f.classical_bound, m.score));
  return out;
}

JobOutput run_threshold(const RunConfig& c, const LogFn& log) {
  const Functional f = build(c.functional, c.params);
  const StrategySpace space = c.resolved_space();
  const LossFamily fam{c.loss, c.family, c.fixed_eta};
  log(fmt::format("critical efficiency of {} under {} ({}), space {}", f.name, loss_model_name(c.loss.model),
                  eta_family_name(c.family), space.describe()));
  ThresholdResult r = critical_efficiency(f, space, fam, c.optimizer, c.threshold);
  const LossSpec at = fam.at(r.star);
  JobOutput out;
  ResultRow row{"threshold", f.name, loss_model_name(c.loss.model), at.eta1(), at.eta2(), r.value_at_star,
                f.classical_bound, r.status == ThresholdStatus::Crossing};
  out.rows.push_back(row);
  out.warnings = r.warnings;
  out.no_crossing = r.status != ThresholdStatus::Crossing;
  out.curve = probe_table(r, "eta", "max_violation");
  out.mirror = header(c);
  out.mirror["loss"] = loss_json(c.loss);
  out.mirror["family"] = eta_family_name(c.family);
  out.mirror["fixed_eta"] = c.fixed_eta;
  out.mirror["space"] = space.describe();
  out.mirror["optimizer"] = to_json(c.optimizer);
  auto j = row_json(row);
  j["threshold"] = threshold_json(r);
  j["best_params"] = r.best_params;
  out.mirror["results"] = ojson::array({j});
  if (out.no_crossing)
    out.lines.push_back(fmt::format("{}: no violation below efficiency 1", f.name));
  else
    out.lines.push_back(fmt::format("{}: critical efficiency {:.4f} (bracket [{:.6f}, {:.6f}]), eta1 {:.4f}, eta2 {:.4f}",
                                    f.name, r.star, r.lo, r.hi, at.eta1(), at.eta2()));
  return out;
}

JobOutput run_curve(const RunConfig& c, const LogFn& log) {
  const Functional f = build(c.functional, c.params);
  const StrategySpace space = c.resolved_space();
  JobOutput out;
  out.mirror = header(c);
  std::vector<double> params;
  if (c.curve_mode == CurveMode::Fixed) {
    if (c.fixed_params) {
      params = *c.fixed_params;
    } else {
      log("no fixed_params given; using the strategy optimal at the symmetric threshold");
      ThresholdResult sym = critical_efficiency(f, space, {c.loss, EtaFamily::Symmetric, 1.0}, c.optimizer, c.threshold);
      params = sym.best_params;
      out.mirror["strategy_source"] = threshold_json(sym);
    }
  }
  CurveResult cr = boundary_curve(f, space, c.loss, c.curve_mode, params, c.grid, c.optimizer, c.threshold);
  out.warnings = cr.warnings;
  Table t{{"eta1", "eta2", "crossing"}, {}};
  ojson rows = ojson::array();
  bool any = false;
  for (const auto& p : cr.points) {
    double value = kNaN;
    if (p.crossing && c.curve_mode == CurveMode::Fixed) {
      LossSpec l = c.loss;
      l.eta = {p.eta1, p.eta2};
      value = Objective(f, space, l).value(params);
    }
    ResultRow row{"curve", f.name, loss_model_name(c.loss.model), p.eta1, p.eta2, value, f.classical_bound, p.crossing};
    out.rows.push_back(row);
    rows.push_back(row_json(row));
    t.rows.push_back({p.eta1, p.eta2, p.crossing ? 1.0 : 0.0});
    any = any || p.crossing;
  }
  out.no_crossing = !any;
  out.curve = t;
  out.mirror["loss"] = loss_json(c.loss);
  out.mirror["curve_mode"] = curve_mode_name(c.curve_mode);
  out.mirror["space"] = space.describe();
  out.mirror["optimizer"] = to_json(c.optimizer);
  if (!params.empty()) out.mirror["best_params"] = params;
  out.mirror["results"] = rows;
  out.lines.push_back(fmt::format("{}: {} of {} grid points cross the bound", f.name,
                                  std::count_if(cr.points.begin(), cr.points.end(),
                                                [](const CurvePoint& p) { return p.crossing; }),
                                  cr.points.size()));
  return out;
}

JobOutput run_noise(const RunConfig& c, const LogFn& log) {
  const Functional f = build(c.functional, c.params);
  const StrategySpace space = c.resolved_space();
  log(fmt::format("noise threshold of {} under {} on {}", f.name, channel_family_name(c.channel), space.describe()));
  NoiseOptions opts{c.fixed_params};
  ThresholdResult r = noise_threshold(f, space, c.channel, c.optimizer, c.threshold, opts);
  JobOutput out;
  ResultRow row{"noise", f.name, loss_model_name(LossModel::None), 1.0, 1.0, r.value_at_star, f.classical_bound,
                r.status == ThresholdStatus::Crossing};
  out.rows.push_back(row);
  out.warnings = r.warnings;
  out.no_crossing = r.status != ThresholdStatus::Crossing;
  const char* axis = c.channel == ChannelFamily::AmplitudeDamping ? "t" : "q";
  if (!c.grid.empty()) {
    Table t{{axis, "max_value"}, {}};
    for (double p : c.grid) {
      const StrategySpace s = with_channel(space, c.channel, p);
      const double v = c.fixed_params ? Objective(f, s, LossSpec{}).value(*c.fixed_params)
                                      : maximize(f, s, LossSpec{}, c.optimizer).value;
      t.rows.push_back({p, v});
    }
    out.curve = t;
  } else {
    out.curve = probe_table(r, axis, "max_violation");
  }
  out.mirror = header(c);
  out.mirror["channel"] = channel_family_name(c.channel);
  out.mirror["space"] = space.describe();
  out.mirror["optimizer"] = to_json(c.optimizer);
  auto j = row_json(row);
  j["threshold"] = threshold_json(r);
  j["best_params"] = r.best_params;
  out.mirror["results"] = ojson::array({j});
  out.lines.push_back(fmt::format("{}: critical {} parameter {} = {:.4f}", f.name, channel_family_name(c.channel),
                                  axis, r.star));
  return out;
}

VertexSet vertex_set(const PolytopeJob& p) {
  const auto& k = p.cards;
  if (p.scenario == "bell") return bell_vertices(k[0], k[1], k[2], k[3]);
  if (p.scenario == "instrumental") return instrumental_vertices(k[0], k[1], k[2], p.set);
  return pam_vertices(k[0], k[1], k[2], p.d);
}

JobOutput run_polytope_job(const RunConfig& c, const LogFn& log) {
  const VertexSet vs = vertex_set(c.polytope);
  JobOutput out;
  out.mirror = header(c);
  out.mirror["polytope"] = {{"description", vs.description},
                            {"dimension", vs.dim},
                            {"raw_strategies", vs.raw_count},
                            {"vertices", vs.vertices.size()}};
  out.lines.push_back(fmt::format("{}: {} vertices ({} strategies), dimension {}", vs.description, vs.vertices.size(),
                                  vs.raw_count, vs.dim));
  if (c.polytope.facets) {
    log(fmt::format("enumerating facets of {}", vs.description));
    const auto facets = facet_enumeration(vs);
    const auto nonneg = std::count_if(facets.begin(), facets.end(),
                                      [&](const Facet& f) { return is_nonnegativity_facet(f, vs); });
    out.facets_csv = facets_to_csv(facets, vs);
    out.mirror["polytope"]["facets"] = facets.size();
    out.mirror["polytope"]["nonnegativity_facets"] = nonneg;
    out.lines.push_back(fmt::format("{} facets, {} of them nonnegativity", facets.size(), nonneg));
  }
  if (!c.functional.empty()) {
    const Functional f = build(c.functional, c.params);
    const ValidationReport r = validate_functional(f, vs);
    ResultRow row{"polytope", f.name, loss_model_name(LossModel::None), 1.0, 1.0, r.extreme, f.classical_bound,
                  r.matches};
    out.rows.push_back(row);
    auto j = row_json(row);
    j["attaining_vertices"] = r.attaining;
    out.mirror["results"] = ojson::array({j});
    out.lines.push_back(fmt::format("{}: extreme over vertices {}, stated bound {} ({})", f.name, r.extreme,
                                    f.classical_bound, r.matches ? "match" : "MISMATCH"));
  }
  return out;
}

JobOutput run_formula(const RunConfig& c) {
  const FormulaResult r = formula(c.formula, c.formula_args);
  JobOutput out;
  out.mirror = header(c);
  out.mirror["formula"] = r.name;
  out.mirror["args"] = r.inputs;
  if (r.flag) out.mirror["value"] = *r.flag;
  else out.mirror["value"] = r.values.size() == 1 ? ojson(r.values[0]) : ojson(r.values);
  out.mirror["description"] = r.description;
  std::string args;
  for (const auto& [k, v] : r.inputs) args += fmt::format("{}{}={}", args.empty() ? "" : ", ", k, v);
  std::string value;
  if (r.flag) value = *r.flag ? "true" : "false";
  else
    for (double v : r.values) value += (value.empty() ? "" : ", ") + format_double(v);
  out.lines.push_back(fmt::format("{}({}) = {}", r.name, args, value));
  out.lines.push_back(r.description);
  return out;
}

}  // namespace

JobOutput execute(const RunConfig& cfg, const LogFn& log) {
  switch (cfg.task) {
    case Task::Maximize: return run_maximize(cfg, log);
    case Task::Threshold: return run_threshold(cfg, log);
    case Task::Curve: return run_curve(cfg, log);
    case Task::Noise: return run_noise(cfg, log);
    case Task::Polytope: return run_polytope_job(cfg, log);
    case Task::Formulas: return run_formula(cfg);
  }
  throw DomainError("unknown task");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> write_job(const RunConfig& cfg, const JobOutput& out) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  std::vector<std::string> written;
  ojson files;
  auto put = [&](const std::string& key, const std::string& suffix, const std::string& text) {
    const std::string name = cfg.prefix + suffix;
    write_text((dir / name).string(), text);
    written.push_back((dir / name).string());
    files[key] = name;
  };
  if (cfg.task != Task::Formulas) put("results", "_results.csv", results_to_csv(out.rows));
  put("results_json", "_results.json", out.mirror.dump(2) + "\n");
  ojson axes;
  if (out.curve) {
    put("curve", "_curve.csv", table_to_csv(*out.curve));
    axes["x"] = out.curve->columns.front();
    axes["y"] = std::vector<std::string>(out.curve->columns.begin() + 1, out.curve->columns.end());
  }
  if (out.facets_csv) put("facets", "_facets.csv", *out.facets_csv);
  ojson manifest = {{"task", task_name(cfg.task)}, {"files", files}};
  if (!axes.empty()) manifest["axes"] = axes;
  if (cfg.task != Task::Formulas && cfg.task != Task::Polytope) manifest["seed"] = cfg.optimizer.seed;
  manifest["log"] = cfg.prefix + ".log";
  put("manifest", "_manifest.json", manifest.dump(2) + "\n");
  return written;
}

}  // namespace detloop::app
