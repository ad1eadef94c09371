#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include "app/config.hpp"
#include "app/figures.hpp"
#include "app/jobs.hpp"
#include "app/tables.hpp"

using namespace detloop;
using namespace detloop::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path;
  }
  return "<accepted>";
}

json chsh_threshold() {
  return json::parse(R"({"task":"threshold","functional":"chsh","params":{"orientation":"minus"},
    "loss":{"model":"absorption","sink_a":1,"sink_b":0},"optimizer":{"restarts":4,"seed":99}})");
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("detloop_app_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("a valid threshold config parses") {
  RunConfig c = parse_config(chsh_threshold());
  CHECK(c.task == Task::Threshold);
  CHECK(c.functional == "chsh");
  CHECK(c.params.at("orientation") == "minus");
  CHECK(c.loss.model == LossModel::Absorption);
  CHECK(c.loss.eta == std::vector<double>{1.0, 1.0});
  CHECK(c.optimizer.restarts == 4);
  CHECK(c.optimizer.seed == 99u);
  CHECK(c.resolved_space().kind == SpaceKind::BellQubit);
}

TEST_CASE("config errors name the offending field") {
  json j = chsh_threshold();
  j["functional"] = "chsx";
  CHECK(error_path(j) == "functional");

  j = chsh_threshold();
  j["loss"].erase("sink_b");
  CHECK(error_path(j) == "loss.sink_b");

  j = chsh_threshold();
  j["loss"]["bogus"] = 1;
  CHECK(error_path(j) == "loss.bogus");

  j = chsh_threshold();
  j["loss"]["eta"] = json::array({0.9, "x"});
  CHECK(error_path(j) == "loss.eta[1]");

  j = chsh_threshold();
  j["optimizer"]["restarts"] = 0;
  CHECK(error_path(j) == "optimizer.restarts");

  j = chsh_threshold();
  j["optimizer"]["seed"] = -3;
  CHECK(error_path(j) == "optimizer.seed");

  j = chsh_threshold();
  j["params"]["orientation"] = "sideways";
  CHECK(error_path(j) == "params");

  j = chsh_threshold();
  j["loss"]["model"] = "none";
  CHECK(error_path(j) == "loss.model");

  j = chsh_threshold();
  j["task"] = "curve";
  CHECK(error_path(j) == "grid");
  j["grid"] = json::array({0.5, 1.5});
  CHECK(error_path(j) == "grid[1]");

  j = chsh_threshold();
  j["fixed_params"] = json::array({0.1, 0.2});
  CHECK(error_path(j) == "fixed_params");

  CHECK(error_path(json::parse(R"({"functional":"chsh"})")) == "task");
  CHECK(error_path(json::parse(R"({"task":"noise","functional":"s3"})")) == "channel");
  CHECK(error_path(json::parse(R"({"task":"polytope","polytope":{"scenario":"bell","cards":[2,2]}})")) ==
        "polytope.cards");
  CHECK(error_path(json::parse(R"({"task":"formulas","name":"bc_chain_sym"})")) == "N");
  CHECK(error_path(json::parse(R"({"task":"formulas","formula":{"name":"nope"}})")) == "formula.name");
}

TEST_CASE("grid shorthand and formula forms") {
  json j = chsh_threshold();
  j["task"] = "curve";
  j["grid"] = {{"start", 0.5}, {"stop", 1.0}, {"count", 6}};
  auto c = parse_config(j);
  REQUIRE(c.grid.size() == 6);
  CHECK(c.grid[1] == doctest::Approx(0.6));

  auto f = parse_config(json::parse(R"({"task":"formulas","name":"ch_nsite_threshold","n":3})"));
  CHECK(f.formula == "ch_nsite_threshold");
  CHECK(f.formula_args.at("n") == 3.0);
  auto g = parse_config(json::parse(R"({"task":"formulas","formula":{"name":"eberhard_sym"}})"));
  CHECK(g.formula_args.empty());
}

TEST_CASE("seed override from the environment") {
  CHECK_FALSE(seed_from_env(nullptr).has_value());
  CHECK(*seed_from_env("12345") == 12345u);
  CHECK_THROWS_AS(seed_from_env("12a"), ConfigError);
  CHECK_THROWS_AS(seed_from_env("-1"), ConfigError);
}

TEST_CASE("tables and summaries round-trip") {
  Table t{{"eta1", "eta2", "crossing"}, {{0.5, std::numeric_limits<double>::quiet_NaN(), 0}, {1, 0.5003, 1}}};
  auto text = table_to_csv(t);
  CHECK(text.find("nan") != std::string::npos);
  auto back = table_from_csv(text);
  CHECK(back.columns == t.columns);
  CHECK(std::isnan(back.rows[0][1]));
  CHECK(back.rows[1][1] == 0.5003);
  CHECK(back.column("crossing") == 2);
  CHECK(back.column("missing") == -1);
  CHECK(table_to_csv(back) == text);

  std::vector<SummaryRow> rows{check("symmetric threshold", 0.6675, 0.667, 0.005),
                               check("far off", 0.9, 0.667, 0.005),
                               check("no value", std::numeric_limits<double>::quiet_NaN(), 0.5, 0.01)};
  CHECK(rows[0].pass);
  CHECK_FALSE(rows[1].pass);
  CHECK_FALSE(rows[2].pass);
  auto s = summary_to_csv(rows);
  CHECK(s.rfind(kSummaryHeader, 0) == 0);
  auto sb = summary_from_csv(s);
  REQUIRE(sb.size() == 3);
  CHECK(sb[0].pass);
  CHECK(sb[0].quantity == "symmetric threshold");
  CHECK_FALSE(sb[1].pass);
}

TEST_CASE("outputs are byte-identical for a fixed seed regardless of threads") {
  RunConfig c = parse_config(chsh_threshold());
  auto quiet = [](const std::string&) {};
  c.out_dir = scratch("one").string();
  c.prefix = "t";
  auto files1 = write_job(c, execute(c, quiet));

  RunConfig c2 = c;
  c2.out_dir = scratch("two").string();
  c2.optimizer.threads = 2;
  auto files2 = write_job(c2, execute(c2, quiet));

  REQUIRE(files1.size() == files2.size());
  for (const char* suffix : {"t_results.csv", "t_results.json", "t_curve.csv"}) {
    CAPTURE(suffix);
    auto a = read_text((fs::path(c.out_dir) / suffix).string());
    auto b = read_text((fs::path(c2.out_dir) / suffix).string());
    CHECK_FALSE(a.empty());
    CHECK(a == b);
  }

  RunConfig c3 = c;
  c3.out_dir = scratch("three").string();
  c3.optimizer.seed = 100;
  write_job(c3, execute(c3, quiet));
  CHECK(read_text((fs::path(c3.out_dir) / "t_results.json").string()) !=
        read_text((fs::path(c.out_dir) / "t_results.json").string()));
}

TEST_CASE("job outputs") {
  auto quiet = [](const std::string&) {};
  auto poly = parse_config(json::parse(
      R"({"task":"polytope","polytope":{"scenario":"instrumental","cards":[2,2,3],"facets":true},"functional":"i223"})"));
  auto out = execute(poly, quiet);
  REQUIRE(out.facets_csv.has_value());
  CHECK(out.mirror.dump().find("96") != std::string::npos);

  auto noise = parse_config(json::parse(
      R"({"task":"noise","functional":"s3","channel":"depolarizing","optimizer":{"restarts":4}})"));
  auto nout = execute(noise, quiet);
  REQUIRE(nout.rows.size() == 1);
  CHECK_FALSE(nout.no_crossing);

  auto never = parse_config(json::parse(
      R"({"task":"threshold","functional":"pearl","loss":{"model":"absorption","sink_a":1,"sink_b":0},"optimizer":{"restarts":2}})"));
  CHECK(execute(never, quiet).no_crossing);
}

TEST_CASE("figure catalog") {
  auto ids = figure_ids();
  CHECK(ids.size() == 9);
  CHECK(std::find(ids.begin(), ids.end(), "fig10") != ids.end());
}

TEST_CASE("command-line exit codes") {
  const char* cli = std::getenv("DETLOOP_CLI");
  if (!cli) {
    MESSAGE("DETLOOP_CLI not set; skipping");
    return;
  }
  auto dir = scratch("cli");
  auto run = [&](const std::string& args) {
    std::string cmd = "\"" + std::string(cli) + "\" " + args + " > \"" + (dir / "stdout.txt").string() + "\" 2>&1";
    int rc = std::system(cmd.c_str());
#ifdef WEXITSTATUS
    return WEXITSTATUS(rc);
#else
    return rc;
#endif
  };
  auto write_config = [&](const std::string& name, const json& j) {
    auto p = (dir / name).string();
    write_text(p, j.dump());
    return p;
  };

  json ok = chsh_threshold();
  ok["output"] = {{"dir", (dir / "out").string()}, {"prefix", "chsh"}};
  CHECK(run("run \"" + write_config("ok.json", ok) + "\"") == 0);
  CHECK(fs::exists(dir / "out" / "chsh_results.csv"));
  CHECK(fs::exists(dir / "out" / "chsh_manifest.json"));
  CHECK(fs::exists(dir / "out" / "chsh.log"));

  json bad = ok;
  bad["loss"].erase("sink_a");
  CHECK(run("run \"" + write_config("bad.json", bad) + "\"") == 2);
  CHECK(read_text((dir / "stdout.txt").string()).find("loss.sink_a") != std::string::npos);

  json never = ok;
  never["functional"] = "pearl";
  never.erase("params");
  CHECK(run("run \"" + write_config("never.json", never) + "\"") == 3);

  CHECK(run("run \"" + (dir / "missing.json").string() + "\"") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("formulas ch_nsite_threshold --arg n=2") == 0);
  CHECK(read_text((dir / "stdout.txt").string()).find("0.6666666666666666") != std::string::npos);
  CHECK(run("list-functionals") == 0);
}
