#include "compstat/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

namespace compstat {

namespace {

PointReport run_point(const BenchmarkEntry& e, const Vec& a, const PipelineOptions& opts, int index, bool timings) {
  try {
    return point_report(analyze(e, a, opts), index, timings);
  } catch (const Error& err) {
    return failed_point(e, opts.mode, index, a, err);
  } catch (const std::exception& ex) {
    return failed_point(e, opts.mode, index, a, Error(ErrorKind::evaluation, ex.what()));
  }
}

void finish(RunReport& r) { r.exit_code = exit_code_for(r); }

}  // namespace

RunReport run_analyze(const RunConfig& cfg) {
  if (cfg.model.empty()) fail(ErrorKind::config, "analyze: no model given (--model or 'model = ...')");
  const BenchmarkEntry& e = find_benchmark(cfg.model);
  const std::vector<Vec> points = expand_points(e, cfg);
  PipelineOptions opts = cfg.pipeline;
  opts.mode = cfg.mode.value_or(PipelineMode::numeric);

  RunReport r;
  r.command = "analyze";
  r.config = cfg.echo;
  r.points.resize(points.size());
  const int n = static_cast<int>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) r.points[i] = run_point(e, points[i], opts, i, cfg.timings);
  finish(r);
  return r;
}

RunReport run_verify_all(const RunConfig& cfg) {
  if (!cfg.at.empty() || !cfg.sweep.empty())
    fail(ErrorKind::config, "verify-all runs each benchmark at its default point; 'at' and 'sweep' are not accepted");
  std::vector<const BenchmarkEntry*> entries;
  if (cfg.only.empty()) {
    for (const auto& e : catalog()) entries.push_back(&e);
  } else {
    for (const auto& name : cfg.only) entries.push_back(&find_benchmark(name));
  }
  std::vector<PipelineMode> modes = {PipelineMode::analytic, PipelineMode::numeric};
  if (cfg.mode) modes = {*cfg.mode};

  RunReport r;
  r.command = "verify-all";
  r.config = cfg.echo;
  const int n = static_cast<int>(entries.size() * modes.size());
  r.points.resize(n);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    const BenchmarkEntry& e = *entries[k / modes.size()];
    PipelineOptions opts = cfg.pipeline;
    opts.mode = modes[k % modes.size()];
    r.points[k] = run_point(e, e.default_point, opts, 0, cfg.timings);
  }
  finish(r);
  return r;
}

namespace {

std::string extension(OutputFormat f) {
  switch (f) {
    case OutputFormat::json: return ".json";
    case OutputFormat::csv: return ".csv";
    case OutputFormat::table: return ".txt";
  }
  return ".out";
}

// Empty result means stdout.
std::string output_path(const RunConfig& cfg, const std::string& stem, OutputFormat f) {
  if (!cfg.out.empty()) return cfg.out == "-" ? std::string() : cfg.out;
  const char* dir = std::getenv("COMPSTAT_OUTPUT_DIR");
  if (!dir || !*dir) return {};
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::config, std::string("cannot create output directory '") + dir + "': " + ec.message());
  return (std::filesystem::path(dir) / (stem + extension(f))).string();
}

template <class WriteFn>
bool emit(const std::string& path, std::ostream& out, std::ostream& err, WriteFn&& write) {
  if (path.empty()) {
    write(out);
    return true;
  }
  std::ofstream f(path);
  if (!f) {
    err << "compstat: cannot write '" << path << "'\n";
    return false;
  }
  write(f);
  return true;
}

void list_models(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const OutputFormat f = cfg.format.value_or(OutputFormat::table);
  const std::string path = output_path(cfg, "models", f);
  emit(path, out, err, [&](std::ostream& os) {
    if (cfg.names_only) {
      for (const auto& e : catalog()) os << e.name << "\n";
      return;
    }
    auto joined = [](const std::vector<std::string>& v, const char* sep) {
      std::string s;
      for (size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
      return s;
    };
    switch (f) {
      case OutputFormat::json: {
        nlohmann::json models = nlohmann::json::array();
        for (const auto& e : catalog())
          models.push_back({{"name", e.name},
                            {"description", e.description},
                            {"M", e.model->M},
                            {"K", e.model->K},
                            {"N", e.model->N},
                            {"parameters", e.model->parameter_names},
                            {"decisions", e.model->decision_names},
                            {"closed_form", static_cast<bool>(e.model->analytic_solution)},
                            {"properties", e.property_names()}});
        os << nlohmann::json{{"schema_version", kReportSchemaVersion}, {"models", models}}.dump(2) << "\n";
        break;
      }
      case OutputFormat::csv:
        os << "name,M,K,N,closed_form,properties\n";
        for (const auto& e : catalog())
          os << e.name << "," << e.model->M << "," << e.model->K << "," << e.model->N << ","
             << (e.model->analytic_solution ? "true" : "false") << "," << joined(e.property_names(), ";") << "\n";
        break;
      case OutputFormat::table:
        for (const auto& e : catalog())
          os << e.name << "  M=" << e.model->M << " K=" << e.model->K << " N=" << e.model->N << "\n    "
             << e.description << "\n    properties: " << joined(e.property_names(), ", ") << "\n";
        break;
    }
  });
}

int write_run(const RunReport& r, const RunConfig& cfg, const std::string& stem, OutputFormat def, std::ostream& out,
              std::ostream& err) {
  const OutputFormat f = cfg.format.value_or(def);
  const std::string path = output_path(cfg, stem, f);
  const bool summary_table = r.command == "verify-all";
  const bool ok = emit(path, out, err, [&](std::ostream& os) {
    if (summary_table && f == OutputFormat::table) {
      write_summary_table(os, r);
      os << "total: " << r.checks() << " checks, " << r.failures() << " failed, " << r.solver_failures()
         << " solver failure(s)\n";
    } else {
      write_report(os, r, f);
    }
  });
  if (!ok) return 3;
  if (!path.empty()) {
    if (summary_table) write_summary_table(out, r);
    out << "wrote " << path << " (" << r.checks() << " checks, " << r.failures() << " failed)\n";
  }
  return r.exit_code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"compstat: comparative statics for constrained optimization models"};
  app.require_subcommand(1);

  std::string config_path, model, recipes, basis, out_path, format, only, mode;
  std::vector<std::string> at, sweep, tol;
  bool names_only = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--out", out_path, "output file ('-' for stdout)");
    sub->add_option("--format", format, "json, csv or table");
  };
  auto pipeline = [&](CLI::App* sub) {
    sub->add_option("--recipes", recipes, "comma-separated CSM recipes");
    sub->add_option("--basis", basis, "isovector basis: prescribed, nullspace or one_term");
    sub->add_option("--tol", tol, "a tolerance for every check, or name=value pairs (fd=1e-6 ...)");
    sub->add_option("--mode", mode, "analytic or numeric");
  };

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "run the pipeline at one or more parameter points");
  common(analyze_cmd);
  pipeline(analyze_cmd);
  analyze_cmd->add_option("--model", model, "benchmark name");
  analyze_cmd->add_option("--at", at, "parameter values, e.g. p=1,1 m=1");
  analyze_cmd->add_option("--sweep", sweep, "sweep axes, e.g. p=1:3:5");

  CLI::App* verify_cmd = app.add_subcommand("verify-all", "run every benchmark's property suite");
  common(verify_cmd);
  pipeline(verify_cmd);
  verify_cmd->add_option("--only", only, "comma-separated benchmark names");

  CLI::App* list_cmd = app.add_subcommand("list-models", "list the benchmark catalog");
  common(list_cmd);
  list_cmd->add_flag("--names-only", names_only, "print one name per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 3;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    auto set = [&](const std::string& key, const std::string& value) {
      if (!value.empty()) apply_setting(cfg, key, value);
    };
    set("model", model);
    auto assignments = [&](const std::vector<std::string>& items, const std::string& prefix) {
      for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) fail(ErrorKind::config, "expected name=value, got '" + item + "'");
        apply_setting(cfg, prefix + item.substr(0, eq), item.substr(eq + 1));
      }
    };
    assignments(at, "at.");
    assignments(sweep, "sweep.");
    set("csm.recipes", recipes);
    set("isovectors.basis", basis);
    set("mode", mode);
    for (const auto& t : tol) {
      if (t.find('=') == std::string::npos)
        apply_setting(cfg, "tol", t);
      else
        assignments({t}, "tol.");
    }
    set("only", only);
    set("output.path", out_path);
    set("output.format", format);
    cfg.names_only = names_only;

    if (list_cmd->parsed()) {
      list_models(cfg, out, err);
      return 0;
    }
    if (analyze_cmd->parsed()) {
      const RunReport r = run_analyze(cfg);
      const std::string stem = "analyze-" + cfg.model;
      return write_run(r, cfg, stem, OutputFormat::json, out, err);
    }
    const RunReport r = run_verify_all(cfg);
    return write_run(r, cfg, "verify-all", OutputFormat::table, out, err);
  } catch (const Error& e) {
    err << "compstat: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::config ? 3 : 2;
  }
}

}  // namespace compstat
