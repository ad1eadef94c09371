#include "app/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "detloop/closedform.hpp"
#include "detloop/errors.hpp"

namespace detloop::app {
namespace {

using nlohmann::json;

// A JSON object together with its dotted path, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError(at(k), "unknown field");
  }

  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  const json& raw(const std::string& k) const { return j_.at(k); }
  std::string at(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  Node child(const std::string& k) const { return Node(j_.at(k), at(k)); }

  double num(const std::string& k, double def) const {
    if (!has(k)) return def;
    if (!raw(k).is_number()) throw ConfigError(at(k), "expected a number");
    return raw(k).get<double>();
  }
  long long integer(const std::string& k, long long def) const {
    if (!has(k)) return def;
    if (!raw(k).is_number_integer()) throw ConfigError(at(k), "expected an integer");
    return raw(k).get<long long>();
  }
  std::string str(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    if (!raw(k).is_string()) throw ConfigError(at(k), "expected a string");
    return raw(k).get<std::string>();
  }
  bool boolean(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!raw(k).is_boolean()) throw ConfigError(at(k), "expected true or false");
    return raw(k).get<bool>();
  }
  std::vector<double> numbers(const std::string& k) const {
    const json& v = raw(k);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(at(k), "expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(fmt::format("{}[{}]", at(k), i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  std::vector<int> integers(const std::string& k) const {
    const json& v = raw(k);
    if (!v.is_array()) throw ConfigError(at(k), "expected a list of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) throw ConfigError(fmt::format("{}[{}]", at(k), i), "expected an integer");
      out.push_back(v[i].get<int>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

template <class F>
auto named(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

Task task_from_name(const Node& n) {
  const std::string s = n.str("task", "");
  for (Task t : {Task::Maximize, Task::Threshold, Task::Curve, Task::Noise, Task::Polytope, Task::Formulas})
    if (s == task_name(t)) return t;
  throw ConfigError("task", s.empty() ? "missing" : "unknown task '" + s + "'");
}

Params parse_params(const Node& n) {
  Params p;
  if (!n.has("params")) return p;
  const json& v = n.raw("params");
  if (!v.is_object()) throw ConfigError("params", "expected an object");
  for (const auto& [k, x] : v.items()) {
    if (x.is_string()) p[k] = x.get<std::string>();
    else if (x.is_number() || x.is_boolean()) p[k] = x.dump();
    else throw ConfigError("params." + k, "expected a string or a number");
  }
  return p;
}

LossSpec parse_loss(const Node& root, Scenario kind) {
  LossSpec s;
  const bool pam = kind == Scenario::Pam;
  s.eta = pam ? std::vector<double>{1.0} : std::vector<double>{1.0, 1.0};
  if (!root.has("loss")) return s;
  Node n = root.child("loss");
  n.allow({"model", "eta", "eta_y", "sink_a", "sink_b", "sink"});
  s.model = named(n.at("model"), [&] { return loss_model_from_name(n.str("model", "none")); });
  if (n.has("eta") && n.has("eta_y")) throw ConfigError(n.at("eta_y"), "give either eta or eta_y");
  if (n.has("eta")) s.eta = n.numbers("eta");
  if (n.has("eta_y")) {
    if (!pam) throw ConfigError(n.at("eta_y"), "per-setting efficiencies apply to prepare-and-measure only");
    s.eta = n.numbers("eta_y");
  }
  if (!pam && s.eta.size() != 2) throw ConfigError(n.at("eta"), "expected [eta1, eta2]");
  if (n.has("sink") && n.has("sink_b")) throw ConfigError(n.at("sink"), "give either sink or sink_b");
  s.sink_a = static_cast<int>(n.integer("sink_a", s.sink_a));
  s.sink_b = static_cast<int>(n.integer("sink_b", n.integer("sink", s.sink_b)));
  if (s.model == LossModel::Absorption) {
    // The threshold depends on the sink choice, so it is never defaulted.
    if (pam) {
      if (!n.has("sink") && !n.has("sink_b")) throw ConfigError(n.at("sink"), "absorption needs an explicit sink");
    } else {
      if (!n.has("sink_a")) throw ConfigError(n.at("sink_a"), "absorption needs an explicit sink");
      if (!n.has("sink_b")) throw ConfigError(n.at("sink_b"), "absorption needs an explicit sink");
    }
  }
  if (s.model == LossModel::Hybrid && !n.has("sink_a"))
    throw ConfigError(n.at("sink_a"), "the hybrid model needs an explicit sink for Alice");
  named("loss", [&] {
    s.validate();
    return 0;
  });
  return s;
}

StrategySpace parse_space(const Node& n) {
  n.allow({"kind", "nx", "ny", "outcomes_a", "outcomes_b", "mixed"});
  const SpaceKind kind = named(n.at("kind"), [&] { return space_kind_from_name(n.str("kind", "")); });
  const int nx = static_cast<int>(n.integer("nx", 2));
  const int ny = static_cast<int>(n.integer("ny", 2));
  const int oa = static_cast<int>(n.integer("outcomes_a", 2));
  const int ob = static_cast<int>(n.integer("outcomes_b", 2));
  if (nx < 1) throw ConfigError(n.at("nx"), "must be at least 1");
  if (ny < 1) throw ConfigError(n.at("ny"), "must be at least 1");
  if (oa < 2) throw ConfigError(n.at("outcomes_a"), "must be at least 2");
  if (ob < 2) throw ConfigError(n.at("outcomes_b"), "must be at least 2");
  switch (kind) {
    case SpaceKind::BellQubit: {
      auto s = StrategySpace::bell_qubit(nx, ny);
      s.outcomes_a = oa;
      s.outcomes_b = ob;
      return s;
    }
    case SpaceKind::BellQutrit: return StrategySpace::bell_qutrit();
    case SpaceKind::InstrumentalQubit: return StrategySpace::instrumental_qubit(nx, oa, ob);
    case SpaceKind::PamQubit: return StrategySpace::pam_qubit(nx, ny, n.boolean("mixed", false));
    case SpaceKind::BilocalQubit: return StrategySpace::bilocal_qubit();
  }
  throw ConfigError(n.at("kind"), "unsupported");
}

OptimizerConfig parse_optimizer(const Node& root) {
  OptimizerConfig c;
  if (!root.has("optimizer")) return c;
  Node n = root.child("optimizer");
  n.allow({"restarts", "seed", "max_evals", "xtol", "ftol", "threads"});
  c.restarts = static_cast<int>(n.integer("restarts", c.restarts));
  if (n.has("seed")) {
    const json& s = n.raw("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
      throw ConfigError(n.at("seed"), "expected a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.max_evals = static_cast<int>(n.integer("max_evals", c.max_evals));
  c.xtol = n.num("xtol", c.xtol);
  c.ftol = n.num("ftol", c.ftol);
  c.threads = static_cast<int>(n.integer("threads", c.threads));
  if (c.restarts < 1) throw ConfigError(n.at("restarts"), "must be at least 1");
  if (c.max_evals < 10) throw ConfigError(n.at("max_evals"), "must be at least 10");
  if (!(c.xtol > 0)) throw ConfigError(n.at("xtol"), "must be positive");
  if (!(c.ftol > 0)) throw ConfigError(n.at("ftol"), "must be positive");
  if (c.threads < 1) throw ConfigError(n.at("threads"), "must be at least 1");
  named("optimizer", [&] {
    c.validate();
    return 0;
  });
  return c;
}

ThresholdConfig parse_threshold(const Node& root) {
  ThresholdConfig t;
  if (!root.has("threshold")) return t;
  Node n = root.child("threshold");
  n.allow({"bisect_tol", "value_tol", "lo", "hi"});
  t.bisect_tol = n.num("bisect_tol", t.bisect_tol);
  t.value_tol = n.num("value_tol", t.value_tol);
  t.lo = n.num("lo", t.lo);
  t.hi = n.num("hi", t.hi);
  if (!(t.bisect_tol > 0)) throw ConfigError(n.at("bisect_tol"), "must be positive");
  if (!(t.value_tol >= 0)) throw ConfigError(n.at("value_tol"), "must be nonnegative");
  if (!(t.lo >= 0 && t.lo < t.hi && t.hi <= 1)) throw ConfigError(n.at("lo"), "need 0 <= lo < hi <= 1");
  return t;
}

std::vector<double> parse_grid(const Node& root) {
  const json& g = root.raw("grid");
  std::vector<double> out;
  if (g.is_object()) {
    Node n = root.child("grid");
    n.allow({"start", "stop", "count"});
    const double a = n.num("start", 0.0), b = n.num("stop", 1.0);
    const long long c = n.integer("count", 11);
    if (c < 2) throw ConfigError(n.at("count"), "must be at least 2");
    for (long long i = 0; i < c; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(c - 1));
  } else {
    out = root.numbers("grid");
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!(out[i] >= 0.0 && out[i] <= 1.0)) throw ConfigError(fmt::format("grid[{}]", i), "outside [0, 1]");
  if (out.empty()) throw ConfigError("grid", "empty");
  return out;
}

PolytopeJob parse_polytope(const Node& root) {
  if (!root.has("polytope")) throw ConfigError("polytope", "missing");
  Node n = root.child("polytope");
  n.allow({"scenario", "cards", "set", "d", "facets"});
  PolytopeJob p;
  p.scenario = n.str("scenario", "");
  std::size_t want = 0;
  if (p.scenario == "bell") {
    p.cards = {2, 2, 2, 2};
    want = 4;
  } else if (p.scenario == "instrumental") {
    p.cards = {2, 2, 2};
    want = 3;
  } else if (p.scenario == "pam") {
    p.cards = {3, 2, 2};
    want = 3;
  } else {
    throw ConfigError(n.at("scenario"), "expected bell, instrumental or pam");
  }
  if (n.has("cards")) p.cards = n.integers("cards");
  if (p.cards.size() != want) throw ConfigError(n.at("cards"), fmt::format("expected {} entries", want));
  for (int c : p.cards)
    if (c < 1) throw ConfigError(n.at("cards"), "entries must be positive");
  const std::string set = n.str("set", "hybrid");
  if (set == "hybrid") p.set = InstrumentalSet::Hybrid;
  else if (set == "observational") p.set = InstrumentalSet::Observational;
  else throw ConfigError(n.at("set"), "expected hybrid or observational");
  p.d = static_cast<int>(n.integer("d", 2));
  if (p.d < 1) throw ConfigError(n.at("d"), "must be positive");
  p.facets = n.boolean("facets", false);
  return p;
}

void parse_formula(const Node& root, RunConfig& c) {
  // Either {"formula": {"name", "args"}} or the flat {"name": ..., <arg>: value} form.
  if (root.has("formula")) {
    Node n = root.child("formula");
    n.allow({"name", "args"});
    c.formula = n.str("name", "");
    if (n.has("args")) {
      Node a = n.child("args");
      for (const auto& [k, v] : n.raw("args").items()) c.formula_args[k] = a.num(k, 0.0);
    }
  } else {
    c.formula = root.str("name", "");
  }
  const auto& cat = formula_catalog();
  auto it = std::find_if(cat.begin(), cat.end(), [&](const FormulaInfo& f) { return f.name == c.formula; });
  if (it == cat.end()) throw ConfigError(root.has("formula") ? "formula.name" : "name", "unknown formula '" + c.formula + "'");
  for (const auto& a : it->args)
    if (!c.formula_args.count(a)) {
      if (root.has("formula") || !root.has(a)) throw ConfigError(root.has("formula") ? "formula.args." + a : a, "missing");
      c.formula_args[a] = root.num(a, 0.0);
    }
}

}  // namespace

const char* task_name(Task t) {
  switch (t) {
    case Task::Maximize: return "maximize";
    case Task::Threshold: return "threshold";
    case Task::Curve: return "curve";
    case Task::Noise: return "noise";
    case Task::Polytope: return "polytope";
    case Task::Formulas: return "formulas";
  }
  return "?";
}

StrategySpace RunConfig::resolved_space() const {
  return space ? *space : default_space(build(functional, params), loss);
}

RunConfig parse_config(const nlohmann::json& j) {
  Node root(j, "");
  RunConfig c;
  c.task = task_from_name(root);

  if (root.has("output")) {
    Node o = root.child("output");
    o.allow({"dir", "prefix"});
    c.out_dir = o.str("dir", c.out_dir);
    c.prefix = o.str("prefix", c.prefix);
    if (c.out_dir.empty()) throw ConfigError("output.dir", "empty");
    if (c.prefix.empty() || c.prefix.find('/') != std::string::npos)
      throw ConfigError("output.prefix", "must be a nonempty file name");
  }

  if (c.task == Task::Formulas) {
    root.allow({"task", "formula", "name", "output", "eta1", "eta2", "alpha", "N", "eta1_0", "eta1_1", "eta2_0",
                "eta2_1", "n", "d", "istar", "B"});
    parse_formula(root, c);
    return c;
  }
  if (c.task == Task::Polytope) {
    root.allow({"task", "polytope", "functional", "params", "output"});
    c.polytope = parse_polytope(root);
    if (root.has("functional")) {
      c.functional = root.str("functional", "");
      c.params = parse_params(root);
      named("functional", [&] { return build(c.functional, c.params); });
    }
    return c;
  }

  root.allow({"task", "functional", "params", "loss", "family", "fixed_eta", "space", "optimizer", "threshold", "grid",
              "curve_mode", "fixed_params", "channel", "output"});
  if (!root.has("functional")) throw ConfigError("functional", "missing");
  c.functional = root.str("functional", "");
  c.params = parse_params(root);
  const Functional f = named(root.has("params") ? "params" : "functional", [&] {
    try {
      return build(c.functional, c.params);
    } catch (const DomainError& e) {
      // Distinguish an unknown name from bad parameters for the path.
      try {
        build(c.functional);
      } catch (const DomainError&) {
        throw ConfigError("functional", e.what());
      }
      throw;
    }
  });
  const Scenario kind = f.shape.kind;
  c.loss = parse_loss(root, kind);
  c.family = named("family", [&] { return eta_family_from_name(root.str("family", "symmetric")); });
  c.fixed_eta = root.num("fixed_eta", 1.0);
  if (!(c.fixed_eta >= 0.0 && c.fixed_eta <= 1.0)) throw ConfigError("fixed_eta", "outside [0, 1]");
  if (root.has("space")) c.space = parse_space(root.child("space"));
  c.optimizer = parse_optimizer(root);
  c.threshold = parse_threshold(root);
  if (root.has("curve_mode"))
    c.curve_mode = named("curve_mode", [&] { return curve_mode_from_name(root.str("curve_mode", "")); });
  if (root.has("channel"))
    c.channel = named("channel", [&] { return channel_family_from_name(root.str("channel", "")); });

  if (kind == Scenario::NParty) throw ConfigError("functional", "no strategy space for n-party functionals");
  const StrategySpace space = named(root.has("space") ? "space" : "functional", [&] { return c.resolved_space(); });
  // Compatibility of functional, space and loss model, checked once before running.
  named(root.has("space") ? "space" : "loss", [&] { return Objective(f, space, c.loss).functional().name; });

  if (root.has("fixed_params")) {
    auto p = root.numbers("fixed_params");
    if (static_cast<int>(p.size()) != space.num_params())
      throw ConfigError("fixed_params", fmt::format("expected {} values for {}", space.num_params(), space.describe()));
    c.fixed_params = std::move(p);
  }

  switch (c.task) {
    case Task::Threshold:
      if (c.loss.model == LossModel::None) throw ConfigError("loss.model", "a threshold needs a loss model");
      break;
    case Task::Curve:
      if (c.loss.model == LossModel::None) throw ConfigError("loss.model", "a curve needs a loss model");
      if (kind == Scenario::Pam) throw ConfigError("functional", "curves need two lossy parties");
      if (!root.has("grid")) throw ConfigError("grid", "missing");
      c.grid = parse_grid(root);
      break;
    case Task::Noise:
      if (kind != Scenario::Pam) throw ConfigError("functional", "noise thresholds need a prepare-and-measure witness");
      if (!root.has("channel")) throw ConfigError("channel", "missing");
      if (c.loss.model != LossModel::None) throw ConfigError("loss.model", "noise runs are lossless");
      if (root.has("grid")) c.grid = parse_grid(root);
      break;
    default: break;
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(j);
}

std::optional<std::uint64_t> seed_from_env(const char* value) {
  if (!value || !*value) return std::nullopt;
  const std::string s(value);
  if (s.find_first_not_of("0123456789") != std::string::npos) throw ConfigError("DETLOOP_SEED", "expected a nonnegative integer");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError("DETLOOP_SEED", "out of range");
  }
}

nlohmann::json to_json(const OptimizerConfig& c) {
  // Thread count is left out: it never changes results.
  return {{"restarts", c.restarts}, {"seed", c.seed}, {"max_evals", c.max_evals}, {"xtol", c.xtol}, {"ftol", c.ftol}};
}

}  // namespace detloop::app
