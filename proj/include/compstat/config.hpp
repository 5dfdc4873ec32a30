#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "compstat/benchmarks.hpp"

namespace compstat {

enum class OutputFormat { json, csv, table };
const char* to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& s);

// name is a parameter group ("p", every p[i]) or a single parameter ("p[2]", "m").
struct ParameterAssignment {
  std::string name;
  std::vector<double> values;
};

struct SweepAxis {
  std::string name;
  double from = 0.0;
  double to = 0.0;
  int count = 1;
};

struct RunConfig {
  std::string model;
  std::vector<std::string> only;
  std::vector<ParameterAssignment> at;
  std::vector<SweepAxis> sweep;
  std::optional<PipelineMode> mode;
  PipelineOptions pipeline;
  std::string out;
  std::optional<OutputFormat> format;
  bool timings = true;
  bool names_only = false;
  // Every accepted key with its raw value, in the order applied.
  std::vector<std::pair<std::string, std::string>> echo;
};

// Keys:
//   model, only, mode, at.<param>, sweep.<param>
//   sensitivity.method, isovectors.basis, csm.recipes
//   tol (all check tolerances), tol.{analytic,fd,coherence,conformance,method_agreement,oracle_kkt,rank}
//   solver.{tol,max_iter,max_backtracks,fd_step}
//   run.properties, run.compare_methods
//   output.path, output.format, output.timings
// Anything else is a config error.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// One "key = value" per line; '#' starts a comment; blank lines ignored.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

// Default point with the `at` overrides applied, then the Cartesian product of
// the sweep axes (first axis varies slowest). A single point without sweeps.
std::vector<Vec> expand_points(const BenchmarkEntry& entry, const RunConfig& cfg);

}  // namespace compstat
