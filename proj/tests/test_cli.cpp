#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "compstat/cli.hpp"
#include "doctest.h"

using namespace compstat;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "compstat");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("compstat_test_" + name)).string();
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(
      "# comment\n"
      "model = slutsky_hicks\n"
      "at.p = 1, 2\n"
      "sweep.m = 1:2:3   # trailing comment\n"
      "mode = analytic\n"
      "csm.recipes = omega, universal_U\n"
      "isovectors.basis = nullspace\n"
      "tol.fd = 2e-5\n"
      "solver.max_iter = 50\n"
      "output.format = csv\n");
  CHECK(c.model == "slutsky_hicks");
  REQUIRE(c.at.size() == 1);
  CHECK(c.at[0].values == std::vector<double>{1.0, 2.0});
  REQUIRE(c.sweep.size() == 1);
  CHECK(c.sweep[0].count == 3);
  CHECK(*c.mode == PipelineMode::analytic);
  CHECK(c.pipeline.recipes.size() == 2);
  CHECK(*c.pipeline.basis == BasisKind::nullspace);
  CHECK(c.pipeline.tol.fd == 2e-5);
  CHECK(c.pipeline.solver.max_iter == 50);
  CHECK(*c.format == OutputFormat::csv);
  CHECK(c.echo.size() == 9);

  const auto pts = expand_points(find_benchmark("slutsky_hicks"), c);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0][1] == 2.0);
  CHECK(pts[1][2] == 1.5);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("solver.bogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("tol.fd = -1\n"), Error);
  CHECK_THROWS_AS(parse_config("tol = 0\n"), Error);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), Error);
  CHECK_THROWS_AS(parse_config("sweep.p = 1:2\n"), Error);
  CHECK_THROWS_AS(parse_config("solver.max_iter = 1.5\n"), Error);
  CHECK_THROWS_AS(parse_config("output.format = xml\n"), Error);
  RunConfig c;
  apply_setting(c, "at.q", "1");
  CHECK_THROWS_AS(expand_points(find_benchmark("slutsky_hicks"), c), Error);
  RunConfig d;
  apply_setting(d, "at.p", "1,2,3");
  CHECK_THROWS_AS(expand_points(find_benchmark("slutsky_hicks"), d), Error);
}

TEST_CASE("JSON report round-trips losslessly") {
  RunConfig c = parse_config("model = market_power\nsweep.m = 4:6:2\n");
  const RunReport r = run_analyze(c);
  const nlohmann::json j = to_json(r);
  CHECK(j["schema_version"] == kReportSchemaVersion);
  const RunReport back = report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(back.points[1].sens.x_jac == r.points[1].sens.x_jac);
  CHECK(back.points[0].csms[0].matrix == r.points[0].csms[0].matrix);

  nlohmann::json wrong = j;
  wrong["schema_version"] = kReportSchemaVersion + 1;
  CHECK_THROWS_AS(report_from_json(wrong), Error);
}

TEST_CASE("non-finite values survive the JSON round trip") {
  RunReport r;
  r.command = "analyze";
  PointReport p;
  p.model = "x";
  p.mode = "numeric";
  CheckReport c = make_check("inf", "", std::numeric_limits<double>::infinity(), 1.0);
  p.checks.push_back(c);
  r.points.push_back(p);
  const RunReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(std::isinf(back.points[0].checks[0].residual));
  CHECK(std::isnan(back.points[0].sol.kkt_residual));
}

TEST_CASE("analyze reproduces the Slutsky matrix") {
  const CliRun r = cli({"analyze", "--model", "slutsky_hicks", "--at", "p=1,1", "m=1"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto& comp = j["points"][0]["compensated_jacobian"];
  CHECK(comp["row_labels"][0] == "x[1]");
  CHECK(comp["col_labels"][1] == "p[2]");
  CHECK(comp["data"][0][0].get<double>() == doctest::Approx(-0.25).epsilon(1e-6));
  CHECK(comp["data"][0][1].get<double>() == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(j["summary"]["failed"] == 0);
}

TEST_CASE("analyze sweep runs every point") {
  const CliRun r = cli({"analyze", "--model", "profit_cd", "--sweep", "p=1:3:5", "--format", "csv"});
  CHECK(r.code == 0);
  int homog = 0;
  std::istringstream is(r.out);
  for (std::string line; std::getline(is, line);)
    if (line.find("homogeneity.degree_zero,pass") != std::string::npos) ++homog;
  CHECK(homog == 5);
}

TEST_CASE("exit codes") {
  CHECK(cli({"verify-all", "--only", "principal_agent"}).code == 0);
  CHECK(cli({"verify-all", "--only", "slutsky_hicks", "--tol", "1e-15"}).code == 1);
  CHECK(cli({"analyze", "--model", "nope"}).code == 3);
  CHECK(cli({"analyze"}).code == 3);
  CHECK(cli({"analyze", "--model", "slutsky_hicks", "--at", "p=1,1,1"}).code == 3);
  CHECK(cli({"verify-all", "--bogus"}).code == 3);
  CHECK(cli({"analyze", "--model", "slutsky_hicks", "--at", "m=-1"}).code == 2);

  const std::string cfg = temp_path("bad.cfg");
  std::ofstream(cfg) << "model = slutsky_hicks\nsolver.bogus = 1\n";
  const CliRun bad = cli({"analyze", "--config", cfg});
  CHECK(bad.code == 3);
  CHECK(bad.out.empty());
}

TEST_CASE("verify-all filter and summary table") {
  const CliRun r = cli({"verify-all", "--only", "principal_agent,market_power"});
  CHECK(r.code == 0);
  CHECK(r.out.find("principal_agent") != std::string::npos);
  CHECK(r.out.find("market_power") != std::string::npos);
  CHECK(r.out.find("slutsky_hicks") == std::string::npos);
}

TEST_CASE("list-models formats are stable") {
  for (const char* f : {"table", "json", "csv"}) {
    const CliRun a = cli({"list-models", "--format", f});
    const CliRun b = cli({"list-models", "--format", f});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
  const CliRun names = cli({"list-models", "--names-only"});
  CHECK(names.out.rfind("slutsky_hicks\nprofit_cd\n", 0) == 0);
  const auto j = nlohmann::json::parse(cli({"list-models", "--format", "json"}).out);
  CHECK(j["models"].size() == 10);
  CHECK(j["models"][0]["properties"].size() > 0);
}

TEST_CASE("output directory from the environment") {
  const std::string dir = temp_path("outdir");
  std::filesystem::remove_all(dir);
  setenv("COMPSTAT_OUTPUT_DIR", dir.c_str(), 1);
  const CliRun r = cli({"analyze", "--model", "slutsky_hicks"});
  unsetenv("COMPSTAT_OUTPUT_DIR");
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(dir + "/analyze-slutsky_hicks.json"));
  const CliRun explicit_out = cli({"analyze", "--model", "slutsky_hicks", "--out", dir + "/x.csv", "--format", "csv"});
  CHECK(std::filesystem::exists(dir + "/x.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("reports are deterministic without timings") {
  RunConfig c = parse_config("model = efficient_portfolio\noutput.timings = false\n");
  CHECK(to_json(run_analyze(c)).dump() == to_json(run_analyze(c)).dump());
}
