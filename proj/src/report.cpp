#include "compstat/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace compstat {

using nlohmann::json;

const char* to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::solver_failure: return "solver_failure";
    case PointStatus::config_error: return "config_error";
  }
  return "unknown";
}

int PointReport::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const CheckReport& c) { return c.failed(); }));
}

int RunReport::checks() const {
  int n = 0;
  for (const auto& p : points) n += static_cast<int>(p.checks.size());
  return n;
}

int RunReport::failures() const {
  int n = 0;
  for (const auto& p : points) n += p.failures();
  return n;
}

int RunReport::skipped() const {
  int n = 0;
  for (const auto& p : points)
    for (const auto& c : p.checks) n += c.verdict == Verdict::skipped;
  return n;
}

int RunReport::solver_failures() const {
  return static_cast<int>(
      std::count_if(points.begin(), points.end(), [](const PointReport& p) { return p.status == PointStatus::solver_failure; }));
}

PointReport point_report(const Analysis& an, int index, bool timings) {
  PointReport p;
  p.model = an.benchmark;
  p.mode = to_string(an.mode);
  p.index = index;
  p.parameter_labels = an.model->parameter_names;
  p.decision_labels = an.model->decision_names;
  p.a = an.sol.a;
  p.sol = an.sol;
  p.sens = an.sens;
  p.iso = an.iso;
  p.compensated = gcd_apply(an.iso, an.sens.x_jac);
  p.csms = an.csms;
  p.checks = an.checks;
  if (timings) p.timings_ms = an.timings_ms;
  return p;
}

PointReport failed_point(const BenchmarkEntry& entry, PipelineMode mode, int index, const Vec& a, const Error& err) {
  PointReport p;
  p.model = entry.name;
  p.mode = to_string(mode);
  p.index = index;
  p.status = err.kind() == ErrorKind::config ? PointStatus::config_error : PointStatus::solver_failure;
  p.error_kind = to_string(err.kind());
  p.error_message = err.what();
  p.parameter_labels = entry.model->parameter_names;
  p.decision_labels = entry.model->decision_names;
  p.a = a;
  p.sol.a = a;
  return p;
}

int exit_code_for(const RunReport& r) {
  int code = 0;
  for (const auto& p : r.points) {
    if (p.status == PointStatus::config_error) code = std::max(code, 3);
    if (p.status == PointStatus::solver_failure) code = std::max(code, 2);
    if (p.failures() > 0) code = std::max(code, 1);
  }
  return code;
}

// ---- JSON ----

namespace {

json num(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  return v;
}

double get_num(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
    fail(ErrorKind::config, "report: '" + s + "' is not a number");
  }
  return j.get<double>();
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

Vec vec_from(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_num(j[i]);
  return v;
}

json mat_json(const Mat& m, const std::vector<std::string>& row_labels, const std::vector<std::string>& col_labels) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(num(m(i, k)));
    data.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"row_labels", row_labels}, {"col_labels", col_labels}, {"data", data}};
}

Mat mat_from(const json& j) {
  Mat m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const json& d = j.at("data");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = get_num(d.at(i).at(k));
  return m;
}

std::vector<std::string> labels_or_index(const std::vector<std::string>& labels, Eigen::Index n, const char* base) {
  if (static_cast<Eigen::Index>(labels.size()) == n) return labels;
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(std::string(base) + "[" + std::to_string(i + 1) + "]");
  return out;
}

json pairs_json(const std::vector<std::pair<std::string, double>>& v) {
  json out = json::array();
  for (const auto& [k, x] : v) out.push_back({k, num(x)});
  return out;
}

std::vector<std::pair<std::string, double>> pairs_from(const json& j) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& e : j) out.emplace_back(e.at(0).get<std::string>(), get_num(e.at(1)));
  return out;
}

template <class E, size_t N>
E parse_enum(const std::string& s, const E (&all)[N], const char* what) {
  for (E e : all)
    if (s == to_string(e)) return e;
  fail(ErrorKind::config, std::string("report: unknown ") + what + " '" + s + "'");
}

constexpr Verdict kVerdicts[] = {Verdict::pass, Verdict::fail, Verdict::skipped};
constexpr SolutionSource kSources[] = {SolutionSource::newton, SolutionSource::analytic};
constexpr SignConvention kSigns[] = {SignConvention::positive_semidefinite_expected,
                                     SignConvention::negative_semidefinite_expected};
constexpr PointStatus kStatuses[] = {PointStatus::ok, PointStatus::solver_failure, PointStatus::config_error};

std::vector<std::string> row_labels_of(const IsovectorSet& iso) { return labels_or_index(iso.labels, iso.A, "t"); }

json point_json(const PointReport& p) {
  json j;
  j["model"] = p.model;
  j["mode"] = p.mode;
  j["index"] = p.index;
  j["status"] = to_string(p.status);
  j["error"] = p.error_kind.empty() ? json(nullptr) : json{{"kind", p.error_kind}, {"message", p.error_message}};
  j["parameters"] = {{"labels", p.parameter_labels}, {"values", vec_json(p.a)}};
  const std::vector<std::string> lam_labels = labels_or_index({}, p.sol.lambda.size(), "lambda");
  j["solution"] = {{"decision_labels", p.decision_labels},
                   {"x", vec_json(p.sol.x)},
                   {"lambda", vec_json(p.sol.lambda)},
                   {"kkt_residual", num(p.sol.kkt_residual)},
                   {"iterations", p.sol.iterations},
                   {"converged", p.sol.converged},
                   {"source", to_string(p.sol.source)},
                   {"newton_discrepancy", num(p.sol.newton_discrepancy)},
                   {"message", p.sol.message}};
  j["sensitivity"] = {{"method", to_string(p.sens.method)},
                      {"step", num(p.sens.step)},
                      {"cross_check_residual", num(p.sens.cross_check_residual)},
                      {"x_jac", mat_json(p.sens.x_jac, p.decision_labels, p.parameter_labels)},
                      {"lambda_jac", mat_json(p.sens.lambda_jac, lam_labels, p.parameter_labels)}};
  const auto iso_rows = row_labels_of(p.iso);
  j["isovectors"] = {{"basis_kind", to_string(p.iso.basis_kind)},
                     {"A", p.iso.A},
                     {"annihilates_objective", p.iso.annihilates_objective},
                     {"redundant", p.iso.redundant},
                     {"degenerate", p.iso.degenerate},
                     {"warnings", p.iso.warnings},
                     {"labels", p.iso.labels},
                     {"target_labels", p.iso.target_labels},
                     {"vectors", mat_json(p.iso.vectors, iso_rows, p.parameter_labels)},
                     {"null_residuals", mat_json(p.iso.null_residuals, iso_rows, p.iso.target_labels)}};
  j["compensated_jacobian"] = mat_json(p.compensated, p.decision_labels, iso_rows);
  json csms = json::array();
  for (const auto& c : p.csms) {
    const auto lab = labels_or_index(c.labels, c.matrix.rows(), "t");
    csms.push_back({{"recipe", to_string(c.recipe)},
                    {"sign_convention", to_string(c.sign_convention)},
                    {"matrix", mat_json(c.matrix, lab, lab)},
                    {"labels", c.labels},
                    {"eigenvalues", vec_json(c.eigenvalues)},
                    {"symmetry_residual", num(c.symmetry_residual)},
                    {"rank_estimate", c.rank_estimate},
                    {"rank_tol", num(c.rank_tol)},
                    {"symmetry_tol", num(c.symmetry_tol)},
                    {"note", c.note}});
  }
  j["csms"] = std::move(csms);
  json checks = json::array();
  for (const auto& c : p.checks)
    checks.push_back({{"name", c.name},
                      {"verdict", to_string(c.verdict)},
                      {"residual", num(c.residual)},
                      {"tolerance", num(c.tolerance)},
                      {"claim", c.claim},
                      {"reason", c.reason},
                      {"values", pairs_json(c.values)}});
  j["checks"] = std::move(checks);
  j["timings_ms"] = pairs_json(p.timings_ms);
  return j;
}

PointReport point_from(const json& j) {
  PointReport p;
  p.model = j.at("model").get<std::string>();
  p.mode = j.at("mode").get<std::string>();
  p.index = j.at("index").get<int>();
  p.status = parse_enum(j.at("status").get<std::string>(), kStatuses, "status");
  if (!j.at("error").is_null()) {
    p.error_kind = j["error"].at("kind").get<std::string>();
    p.error_message = j["error"].at("message").get<std::string>();
  }
  p.parameter_labels = j.at("parameters").at("labels").get<std::vector<std::string>>();
  p.a = vec_from(j["parameters"].at("values"));
  const json& s = j.at("solution");
  p.decision_labels = s.at("decision_labels").get<std::vector<std::string>>();
  p.sol.a = p.a;
  p.sol.x = vec_from(s.at("x"));
  p.sol.lambda = vec_from(s.at("lambda"));
  p.sol.kkt_residual = get_num(s.at("kkt_residual"));
  p.sol.iterations = s.at("iterations").get<int>();
  p.sol.converged = s.at("converged").get<bool>();
  p.sol.source = parse_enum(s.at("source").get<std::string>(), kSources, "solution source");
  p.sol.newton_discrepancy = get_num(s.at("newton_discrepancy"));
  p.sol.message = s.at("message").get<std::string>();
  const json& se = j.at("sensitivity");
  p.sens.method = sensitivity_method_from_string(se.at("method").get<std::string>());
  p.sens.step = get_num(se.at("step"));
  p.sens.cross_check_residual = get_num(se.at("cross_check_residual"));
  p.sens.x_jac = mat_from(se.at("x_jac"));
  p.sens.lambda_jac = mat_from(se.at("lambda_jac"));
  const json& is = j.at("isovectors");
  p.iso.basis_kind = basis_kind_from_string(is.at("basis_kind").get<std::string>());
  p.iso.A = is.at("A").get<int>();
  p.iso.annihilates_objective = is.at("annihilates_objective").get<bool>();
  p.iso.redundant = is.at("redundant").get<bool>();
  p.iso.degenerate = is.at("degenerate").get<bool>();
  p.iso.warnings = is.at("warnings").get<std::vector<std::string>>();
  p.iso.labels = is.at("labels").get<std::vector<std::string>>();
  p.iso.target_labels = is.at("target_labels").get<std::vector<std::string>>();
  p.iso.vectors = mat_from(is.at("vectors"));
  p.iso.null_residuals = mat_from(is.at("null_residuals"));
  p.compensated = mat_from(j.at("compensated_jacobian"));
  for (const auto& c : j.at("csms")) {
    CsmResult r;
    r.recipe = recipe_from_string(c.at("recipe").get<std::string>());
    r.sign_convention = parse_enum(c.at("sign_convention").get<std::string>(), kSigns, "sign convention");
    r.matrix = mat_from(c.at("matrix"));
    r.labels = c.at("labels").get<std::vector<std::string>>();
    r.eigenvalues = vec_from(c.at("eigenvalues"));
    r.symmetry_residual = get_num(c.at("symmetry_residual"));
    r.rank_estimate = c.at("rank_estimate").get<int>();
    r.rank_tol = get_num(c.at("rank_tol"));
    r.symmetry_tol = get_num(c.at("symmetry_tol"));
    r.note = c.at("note").get<std::string>();
    p.csms.push_back(std::move(r));
  }
  for (const auto& c : j.at("checks")) {
    CheckReport r;
    r.name = c.at("name").get<std::string>();
    r.verdict = parse_enum(c.at("verdict").get<std::string>(), kVerdicts, "verdict");
    r.residual = get_num(c.at("residual"));
    r.tolerance = get_num(c.at("tolerance"));
    r.claim = c.at("claim").get<std::string>();
    r.reason = c.at("reason").get<std::string>();
    r.values = pairs_from(c.at("values"));
    p.checks.push_back(std::move(r));
  }
  p.timings_ms = pairs_from(j.at("timings_ms"));
  return p;
}

}  // namespace

json to_json(const RunReport& r) {
  json cfg = json::array();
  for (const auto& [k, v] : r.config) cfg.push_back({k, v});
  json points = json::array();
  for (const auto& p : r.points) points.push_back(point_json(p));
  return {{"schema_version", r.schema_version},
          {"tool", "compstat"},
          {"command", r.command},
          {"config", cfg},
          {"points", points},
          {"summary",
           {{"points", r.points.size()},
            {"checks", r.checks()},
            {"failed", r.failures()},
            {"skipped", r.skipped()},
            {"solver_failures", r.solver_failures()},
            {"exit_code", r.exit_code}}}};
}

RunReport report_from_json(const json& j) {
  try {
    RunReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
      fail(ErrorKind::config, "report: schema version " + std::to_string(r.schema_version) + " is not supported");
    r.command = j.at("command").get<std::string>();
    for (const auto& e : j.at("config")) r.config.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    for (const auto& p : j.at("points")) r.points.push_back(point_from(p));
    r.exit_code = j.at("summary").at("exit_code").get<int>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("report: malformed JSON report: ") + e.what());
  }
}

// ---- text formats ----

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string g17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string short_num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void write_matrix(std::ostream& os, const std::string& title, const Mat& m, const std::vector<std::string>& rows,
                  const std::vector<std::string>& cols) {
  os << "  " << title << "\n";
  os << "    " << std::setw(12) << "";
  for (const auto& c : cols) os << std::setw(13) << c;
  os << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << "    " << std::setw(12) << (i < static_cast<Eigen::Index>(rows.size()) ? rows[i] : "");
    for (Eigen::Index k = 0; k < m.cols(); ++k) os << std::setw(13) << short_num(m(i, k));
    os << "\n";
  }
}

}  // namespace

void write_csv(std::ostream& os, const RunReport& r) {
  os << "model,mode,point,status,check,verdict,residual,tolerance,reason\n";
  for (const auto& p : r.points) {
    const std::string lead = csv_field(p.model) + "," + p.mode + "," + std::to_string(p.index) + "," + to_string(p.status);
    if (p.status != PointStatus::ok)
      os << lead << ",,,,," << csv_field(p.error_kind + ": " + p.error_message) << "\n";
    for (const auto& c : p.checks)
      os << lead << "," << csv_field(c.name) << "," << to_string(c.verdict) << "," << g17(c.residual) << ","
         << g17(c.tolerance) << "," << csv_field(c.reason) << "\n";
  }
}

void write_table(std::ostream& os, const RunReport& r) {
  for (const auto& p : r.points) {
    os << p.model << " (" << p.mode << ") point " << p.index << ":";
    for (Eigen::Index i = 0; i < p.a.size(); ++i)
      os << " " << (i < static_cast<Eigen::Index>(p.parameter_labels.size()) ? p.parameter_labels[i] : "?") << "="
         << short_num(p.a[i]);
    os << "\n";
    if (p.status != PointStatus::ok) {
      os << "  " << to_string(p.status) << " [" << p.error_kind << "] " << p.error_message << "\n";
      continue;
    }
    os << "  x =";
    for (Eigen::Index i = 0; i < p.sol.x.size(); ++i) os << " " << short_num(p.sol.x[i]);
    if (p.sol.lambda.size()) {
      os << "   lambda =";
      for (Eigen::Index i = 0; i < p.sol.lambda.size(); ++i) os << " " << short_num(p.sol.lambda[i]);
    }
    os << "   kkt residual " << short_num(p.sol.kkt_residual) << "\n";
    const auto iso_rows = labels_or_index(p.iso.labels, p.iso.A, "t");
    write_matrix(os, "compensated jacobian", p.compensated, p.decision_labels, iso_rows);
    for (const auto& c : p.csms) {
      const auto lab = labels_or_index(c.labels, c.matrix.rows(), "t");
      write_matrix(os, std::string(to_string(c.recipe)) + " (rank " + std::to_string(c.rank_estimate) + ")", c.matrix,
                   lab, lab);
    }
    int pass = 0, skip = 0;
    for (const auto& c : p.checks) {
      pass += c.passed();
      skip += c.verdict == Verdict::skipped;
      if (c.failed())
        os << "  FAIL " << c.name << ": residual " << short_num(c.residual) << " > " << short_num(c.tolerance)
           << (c.reason.empty() ? "" : "  (" + c.reason + ")") << "\n";
    }
    os << "  checks: " << pass << " pass, " << p.failures() << " fail, " << skip << " skipped\n";
  }
  os << "summary: " << r.points.size() << " point(s), " << r.checks() << " checks, " << r.failures() << " failed, "
     << r.solver_failures() << " solver failure(s), exit " << r.exit_code << "\n";
}

void write_summary_table(std::ostream& os, const RunReport& r) {
  struct Row {
    int checks = 0, failed = 0, skipped = 0, errors = 0;
    std::string first_failure;
  };
  std::vector<std::string> order;
  std::map<std::string, Row> rows;
  for (const auto& p : r.points) {
    const std::string key = p.model + " " + p.mode;
    if (!rows.count(key)) order.push_back(key);
    Row& row = rows[key];
    row.checks += static_cast<int>(p.checks.size());
    row.failed += p.failures();
    if (p.status != PointStatus::ok) {
      ++row.errors;
      if (row.first_failure.empty()) row.first_failure = p.error_kind + ": " + p.error_message;
    }
    for (const auto& c : p.checks) {
      row.skipped += c.verdict == Verdict::skipped;
      if (c.failed() && row.first_failure.empty()) row.first_failure = c.name;
    }
  }
  for (const auto& key : order) {
    const Row& row = rows[key];
    const bool ok = row.failed == 0 && row.errors == 0;
    const auto sp = key.find(' ');
    os << (ok ? "PASS " : "FAIL ") << std::left << std::setw(26) << key.substr(0, sp) << std::setw(9)
       << key.substr(sp + 1) << std::right << std::setw(4) << row.checks << " checks " << std::setw(3) << row.failed
       << " failed " << std::setw(3) << row.skipped << " skipped";
    if (!ok) os << "  first: " << row.first_failure;
    os << "\n";
  }
}

void write_report(std::ostream& os, const RunReport& r, OutputFormat f) {
  switch (f) {
    case OutputFormat::json: os << to_json(r).dump(2) << "\n"; break;
    case OutputFormat::csv: write_csv(os, r); break;
    case OutputFormat::table: write_table(os, r); break;
  }
}

}  // namespace compstat
