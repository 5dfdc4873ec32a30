#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "compstat/diagnostics.hpp"

namespace compstat {

struct Tolerances {
  double analytic = 1e-8;          // closed-form Jacobians
  double fd = 1e-5;                // anything touched by finite differences of solutions
  double coherence = 1e-6;         // relative, between CSM recipes
  double conformance = 1e-6;
  double method_agreement = 1e-4;  // FD vs IFT Jacobians
  double oracle_kkt = 1e-10;
  double rank = 1e-7;
};

// analytic: registered closed forms where available. numeric: Newton + IFT.
enum class PipelineMode { analytic, numeric };
const char* to_string(PipelineMode m);
PipelineMode pipeline_mode_from_string(const std::string& s);

struct PipelineOptions {
  PipelineMode mode = PipelineMode::numeric;
  std::optional<SensitivityMethod> sensitivity;  // default follows mode
  std::optional<BasisKind> basis;                // default: prescribed rows when registered
  std::vector<Recipe> recipes;                   // empty: the standard set
  Tolerances tol;
  SolverOptions solver;
  bool run_properties = true;
  bool compare_methods = true;
};

struct Analysis {
  std::string benchmark;
  ModelPtr model;
  PipelineMode mode = PipelineMode::numeric;
  SolutionPoint sol;
  SensitivityBundle sens;
  IsovectorSet iso;
  std::vector<CsmResult> csms;
  std::vector<CheckReport> checks;
  std::vector<std::pair<std::string, double>> timings_ms;
  // CSM entries and eigenvalues below this count as zero: rank tolerance times
  // max|L_xa| max|x_jac| max(1, max|t|)^2.
  double zero_level = 0.0;

  const CsmResult* find(Recipe r) const;
  int failures() const;
  bool all_passed() const { return failures() == 0; }
  // Tolerance for checks whose accuracy follows the sensitivity path.
  double path_tol(const Tolerances& t) const;
};

struct BenchmarkEntry;
using PropertyFn = std::function<std::vector<CheckReport>(const Analysis&, const PipelineOptions&)>;

struct Property {
  std::string name;
  PropertyFn run;
};

using IsovectorRowsFn = std::function<Mat(const SolutionPoint&)>;

struct BenchmarkEntry {
  std::string name;
  std::string description;
  ModelPtr model;
  Vec default_point;
  Vec x0;
  IsovectorRowsFn isovectors;  // prescribed GCD rows, A x N
  std::vector<std::string> isovector_labels;
  bool rows_annihilate_objective = false;
  std::optional<HattaForm> hatta;
  std::vector<Recipe> extra_recipes;
  std::vector<Property> properties;

  std::vector<std::string> property_names() const;
};

// Full pipeline: solve, sensitivities, isovectors, CSMs, standard checks and
// (when enabled) the entry's property suite.
Analysis analyze(const BenchmarkEntry& entry, const Vec& a, const PipelineOptions& opts = {});
Analysis analyze(const BenchmarkEntry& entry, const PipelineOptions& opts = {});

// Solve + sensitivities + isovectors only.
Analysis prepare(const BenchmarkEntry& entry, const Vec& a, const PipelineOptions& opts);

// ---- catalog ----

struct SlutskyConfig {
  Vec gamma = Vec::Constant(2, 0.5);
};
struct ProfitCdConfig {
  Vec gamma = Vec::Constant(2, 1.0 / 3.0);
  double F0 = 1.0;
  double offset = 0.0;  // F = F0 prod x^gamma - offset
  Vec w = Vec::Constant(2, 1.0);
  double p = 3.0;
};
struct QuadraticTechnology {
  std::vector<Vec> c;  // G vectors of length M
  std::vector<Mat> A;  // G positive definite M x M
};
struct MultiOutputConfig {
  QuadraticTechnology tech;
  Vec w, p;
};
struct CostConstrainedConfig {
  QuadraticTechnology tech;
  Vec w, p;
  double C = 0.0;
};
struct MultiConstraintConfig {
  Vec gamma;
  std::vector<Vec> prices;
  std::vector<double> incomes;
};
struct MarketPowerConfig {
  Vec gamma = Vec::Constant(2, 0.5);
  Vec c;       // supply intercepts
  Vec slope;   // p'
  Vec q;       // aggregate demand of the others
  double m = 5.0;
};
struct PrincipalAgentConfig {
  Vec P1, P2;  // outcome probabilities under the two effort levels
  double B1 = 1.5, B2 = 1.2;
};
struct PortfolioConfig {
  Mat sigma;
  Vec r;
  Vec w;
  double W = 1.0;
  double R = 2.2;
  double riskless_tol = 1e-12;
};
struct ParetoConfig {
  Mat theta;  // H x G
  Vec omega;  // G
  Vec b;      // G
};
struct GenericQuadraticConfig {
  int M = 5, K = 2, N = 4;
  unsigned seed = 20240917u;
};

MultiOutputConfig default_multi_output();
CostConstrainedConfig default_cost_constrained();
MultiConstraintConfig default_multi_constraint(int K = 2);
MarketPowerConfig default_market_power();
PrincipalAgentConfig default_principal_agent();
PortfolioConfig default_portfolio();
ParetoConfig default_pareto();

BenchmarkEntry register_slutsky_hicks(const SlutskyConfig& cfg = {});
BenchmarkEntry register_profit_max(const ProfitCdConfig& cfg = {});
BenchmarkEntry register_multi_output_profit(const MultiOutputConfig& cfg = default_multi_output());
BenchmarkEntry register_cost_constrained_profit(const CostConstrainedConfig& cfg = default_cost_constrained());
BenchmarkEntry register_multi_constraint_utility(const MultiConstraintConfig& cfg = default_multi_constraint());
BenchmarkEntry register_market_power(const MarketPowerConfig& cfg = default_market_power());
BenchmarkEntry register_principal_agent(const PrincipalAgentConfig& cfg = default_principal_agent());
BenchmarkEntry register_efficient_portfolio(const PortfolioConfig& cfg = default_portfolio());
BenchmarkEntry register_pareto_allocation(const ParetoConfig& cfg = default_pareto());
BenchmarkEntry register_generic_quadratic(const GenericQuadraticConfig& cfg = {});

// The nine economies plus the generic quadratic instance, in a fixed order.
const std::vector<BenchmarkEntry>& catalog();
const BenchmarkEntry& find_benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

// ---- derived quantities used by the property suites ----

// Single-output profit model with a = (w, p), K = 0.
struct ProfitBounds {
  Vec own_price_elasticity;      // w_mu/x_mu dx_mu/dw_mu
  Vec sharpened_bound;           // elasticity form of the W* diagonal bound
  double standard_bound = 0.0;
  double supply_elasticity = 0.0;         // p/F dF/dp
  double supply_sharpened_bound = 0.0;    // p/F * (-(w/p)^T W (w/p))
  Mat W;                                  // dx/dw
  Mat W_star;                             // W + x_p x_p^T / F_p
  Vec x_p;
  double F = 0.0, F_p = 0.0;
};
ProfitBounds profit_bounds(const Analysis& an);

// Z_{mu nu} = d zeta_mu/dw_nu + zeta_nu d zeta_mu/dp with zeta = x/F.
Mat profit_z_matrix(const Analysis& an);
// Delta = I - l w^T/p
Mat profit_delta(const Vec& l, const Vec& w, double p);

// Market-power parameter change (q, m) -> (p, m) at the solution.
struct MarketPowerPrices {
  Vec p;            // p_a = c_a + p'_a (x_a + q_a)
  Mat dp_da;        // Jacobian of (p, m) with respect to (q, m)
  Mat x_jac_pm;     // dx/d(p, m)
  Mat slutsky;      // Sigma in (p, m) coordinates, not symmetric
  Mat G;            // compensated matrix in (q, m) coordinates
  Mat G_tilde;      // Sigma J
};
MarketPowerPrices market_power_prices(const Analysis& an, const MarketPowerConfig& cfg);

}  // namespace compstat
