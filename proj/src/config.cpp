#include "compstat/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace compstat {

const char* to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::json: return "json";
    case OutputFormat::csv: return "csv";
    case OutputFormat::table: return "table";
  }
  return "unknown";
}

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "table") return OutputFormat::table;
  fail(ErrorKind::config, "unknown output format '" + s + "' (json, csv, table)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const std::string t = trim(s);
  const char* end = t.data() + t.size();
  auto [p, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || p != end) fail(ErrorKind::config, key + ": '" + s + "' is not a number");
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  int v = 0;
  const std::string t = trim(s);
  const char* end = t.data() + t.size();
  auto [p, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || p != end) fail(ErrorKind::config, key + ": '" + s + "' is not an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(ErrorKind::config, key + ": '" + s + "' is not a boolean");
}

double positive(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (!(v > 0.0)) fail(ErrorKind::config, key + ": must be positive");
  return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(to_double(key, t));
  if (out.empty()) fail(ErrorKind::config, key + ": no values");
  return out;
}

SweepAxis to_axis(const std::string& key, const std::string& name, const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) fail(ErrorKind::config, key + ": expected from:to:count, got '" + s + "'");
  SweepAxis ax{name, to_double(key, parts[0]), to_double(key, parts[1]), to_int(key, parts[2])};
  if (ax.count < 1) fail(ErrorKind::config, key + ": count must be at least 1");
  return ax;
}

std::string suffix(const std::string& key, const std::string& prefix) {
  const std::string name = key.substr(prefix.size());
  if (name.empty()) fail(ErrorKind::config, "'" + key + "' needs a parameter name");
  return name;
}

std::vector<int> resolve(const ProblemModel& m, const std::string& name) {
  std::vector<int> idx;
  for (int i = 0; i < m.N; ++i)
    if (m.parameter_names[i] == name) return {i};
  for (int i = 0; i < m.N; ++i) {
    const std::string& p = m.parameter_names[i];
    if (p.size() > name.size() && p.compare(0, name.size(), name) == 0 && p[name.size()] == '[') idx.push_back(i);
  }
  if (idx.empty()) fail(ErrorKind::config, "model " + m.name + " has no parameter '" + name + "'");
  return idx;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  PipelineOptions& po = cfg.pipeline;
  Tolerances& t = po.tol;
  if (key == "model") {
    if (value.empty()) fail(ErrorKind::config, "model: empty name");
    cfg.model = value;
  } else if (key == "only") {
    cfg.only = split(value, ',');
  } else if (key == "mode") {
    cfg.mode = pipeline_mode_from_string(value);
  } else if (key.rfind("at.", 0) == 0) {
    cfg.at.push_back({suffix(key, "at."), to_doubles(key, value)});
  } else if (key.rfind("sweep.", 0) == 0) {
    cfg.sweep.push_back(to_axis(key, suffix(key, "sweep."), value));
  } else if (key == "sensitivity.method") {
    po.sensitivity = sensitivity_method_from_string(value);
  } else if (key == "isovectors.basis") {
    po.basis = basis_kind_from_string(value);
  } else if (key == "csm.recipes") {
    po.recipes.clear();
    for (const auto& r : split(value, ',')) po.recipes.push_back(recipe_from_string(r));
    if (po.recipes.empty()) fail(ErrorKind::config, "csm.recipes: no recipes");
  } else if (key == "tol") {
    const double v = positive(key, value);
    t.analytic = t.fd = t.coherence = t.conformance = t.method_agreement = t.oracle_kkt = v;
  } else if (key == "tol.analytic") {
    t.analytic = positive(key, value);
  } else if (key == "tol.fd") {
    t.fd = positive(key, value);
  } else if (key == "tol.coherence") {
    t.coherence = positive(key, value);
  } else if (key == "tol.conformance") {
    t.conformance = positive(key, value);
  } else if (key == "tol.method_agreement") {
    t.method_agreement = positive(key, value);
  } else if (key == "tol.oracle_kkt") {
    t.oracle_kkt = positive(key, value);
  } else if (key == "tol.rank") {
    t.rank = positive(key, value);
  } else if (key == "solver.tol") {
    po.solver.tol = positive(key, value);
  } else if (key == "solver.max_iter") {
    po.solver.max_iter = to_int(key, value);
    if (po.solver.max_iter < 1) fail(ErrorKind::config, key + ": must be at least 1");
  } else if (key == "solver.max_backtracks") {
    po.solver.max_backtracks = to_int(key, value);
    if (po.solver.max_backtracks < 0) fail(ErrorKind::config, key + ": must be non-negative");
  } else if (key == "solver.fd_step") {
    po.solver.fd.rel_step = positive(key, value);
  } else if (key == "run.properties") {
    po.run_properties = to_bool(key, value);
  } else if (key == "run.compare_methods") {
    po.compare_methods = to_bool(key, value);
  } else if (key == "output.path") {
    cfg.out = value;
  } else if (key == "output.format") {
    cfg.format = output_format_from_string(value);
  } else if (key == "output.timings") {
    cfg.timings = to_bool(key, value);
  } else {
    fail(ErrorKind::config, "unknown config key '" + key + "'");
  }
  cfg.echo.emplace_back(key, value);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::config, "line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorKind::config, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::vector<Vec> expand_points(const BenchmarkEntry& entry, const RunConfig& cfg) {
  const ProblemModel& m = *entry.model;
  Vec base = entry.default_point;
  for (const auto& as : cfg.at) {
    const auto idx = resolve(m, as.name);
    if (as.values.size() != 1 && as.values.size() != idx.size())
      fail(ErrorKind::config, "at." + as.name + ": expected 1 or " + std::to_string(idx.size()) + " values");
    for (size_t k = 0; k < idx.size(); ++k) base[idx[k]] = as.values.size() == 1 ? as.values[0] : as.values[k];
  }
  std::vector<Vec> points{base};
  for (const auto& ax : cfg.sweep) {
    const auto idx = resolve(m, ax.name);
    std::vector<Vec> next;
    for (const Vec& p : points)
      for (int i = 0; i < ax.count; ++i) {
        const double v = ax.count == 1 ? ax.from : ax.from + (ax.to - ax.from) * i / (ax.count - 1);
        Vec q = p;
        for (int j : idx) q[j] = v;
        next.push_back(q);
      }
    points = std::move(next);
  }
  return points;
}

}  // namespace compstat
