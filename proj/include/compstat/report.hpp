#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "compstat/config.hpp"

namespace compstat {

// Bump on any change to the emitted fields.
inline constexpr int kReportSchemaVersion = 1;

enum class PointStatus { ok, solver_failure, config_error };
const char* to_string(PointStatus s);

struct PointReport {
  std::string model;
  std::string mode;
  int index = 0;
  PointStatus status = PointStatus::ok;
  std::string error_kind;
  std::string error_message;
  std::vector<std::string> parameter_labels;
  std::vector<std::string> decision_labels;
  Vec a;
  SolutionPoint sol;
  SensitivityBundle sens;
  IsovectorSet iso;
  Mat compensated;  // M x A, GCD-derived decision sensitivities
  std::vector<CsmResult> csms;
  std::vector<CheckReport> checks;
  std::vector<std::pair<std::string, double>> timings_ms;

  int failures() const;
};

struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<PointReport> points;
  int exit_code = 0;

  int checks() const;
  int failures() const;
  int skipped() const;
  int solver_failures() const;
};

PointReport point_report(const Analysis& an, int index, bool timings = true);
PointReport failed_point(const BenchmarkEntry& entry, PipelineMode mode, int index, const Vec& a, const Error& err);

// 0 all checks pass, 1 a check failed, 2 a solve failed, 3 a config error.
int exit_code_for(const RunReport& r);

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

// One row per check.
void write_csv(std::ostream& os, const RunReport& r);
// Per point: solution, CSMs and any failed check; then a summary line.
void write_table(std::ostream& os, const RunReport& r);
// One line per model and mode.
void write_summary_table(std::ostream& os, const RunReport& r);
void write_report(std::ostream& os, const RunReport& r, OutputFormat f);

}  // namespace compstat
