#include <random>

#include "bench_support.hpp"

namespace compstat {

using namespace detail;

// f = -1/2 x^T Q x + x^T B a, g = F a + c - E x. KKT: [Q E^T; E 0][x; lambda] = [B a; F a + c].
BenchmarkEntry register_generic_quadratic(const GenericQuadraticConfig& cfg) {
  const int M = cfg.M, K = cfg.K, N = cfg.N;
  if (M < 1 || K < 0 || K > M || N < 1) fail(ErrorKind::config, "generic_quadratic: need M >= 1, 0 <= K <= M, N >= 1");
  std::mt19937 rng(cfg.seed);
  std::normal_distribution<double> nd;
  auto draw = [&](int r, int c) {
    Mat A(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) A(i, j) = nd(rng);
    return A;
  };
  const Mat R = draw(M, M);
  const Mat Q = R * R.transpose() + static_cast<double>(M) * Mat::Identity(M, M);
  const Mat B = draw(M, N);
  const Mat E = draw(K, M);
  const Mat F = draw(K, N);
  const Vec c = draw(K, 1);
  const Vec a0 = draw(N, 1);

  Mat kkt = Mat::Zero(M + K, M + K);
  kkt.topLeftCorner(M, M) = Q;
  kkt.topRightCorner(M, K) = E.transpose();
  kkt.bottomLeftCorner(K, M) = E;
  const Eigen::FullPivLU<Mat> lu(kkt);
  if (!lu.isInvertible()) fail(ErrorKind::config, "generic_quadratic: singular KKT matrix for this seed");
  Mat rhs_a(M + K, N);
  rhs_a << B, F;

  ProblemModel m;
  m.name = "generic_quadratic";
  m.M = M;
  m.N = N;
  m.K = K;
  m.objective.value = [=](const Vec& x, const Vec& a) { return -0.5 * x.dot(Q * x) + x.dot(B * a); };
  m.objective.grad_x = [=](const Vec& x, const Vec& a) -> Vec { return -Q * x + B * a; };
  m.objective.grad_a = [=](const Vec& x, const Vec&) -> Vec { return B.transpose() * x; };
  m.objective.hess_xx = [=](const Vec&, const Vec&) -> Mat { return -Q; };
  m.objective.hess_xa = [=](const Vec&, const Vec&) -> Mat { return B; };
  for (int k = 0; k < K; ++k) {
    ScalarFunction g;
    g.value = [=](const Vec& x, const Vec& a) { return F.row(k).dot(a) + c[k] - E.row(k).dot(x); };
    g.grad_x = [=](const Vec&, const Vec&) -> Vec { return -E.row(k).transpose(); };
    g.grad_a = [=](const Vec&, const Vec&) -> Vec { return F.row(k).transpose(); };
    g.hess_xx = [M](const Vec&, const Vec&) -> Mat { return Mat::Zero(M, M); };
    g.hess_xa = [M, N](const Vec&, const Vec&) -> Mat { return Mat::Zero(M, N); };
    m.constraints.push_back(g);
  }
  m.analytic_solution = [=](const Vec& a) {
    Vec rhs(M + K);
    rhs << B * a, F * a + c;
    const Vec z = lu.solve(rhs);
    return AnalyticSolution{z.head(M), z.tail(K)};
  };
  m.analytic_jacobian = [=](const Vec&) {
    const Mat Z = lu.solve(rhs_a);
    return AnalyticJacobian{Z.topRows(M), Z.bottomRows(K)};
  };

  BenchmarkEntry e;
  e.name = "generic_quadratic";
  e.description = "random concave quadratic program with linear constraints (fixed seed)";
  e.model = finalize_model(std::move(m));
  e.default_point = a0;
  e.x0 = Vec::Zero(M);
  e.properties.push_back({"universal_rank", [M, K, N](const Analysis& an, const PipelineOptions&) {
    std::vector<CheckReport> out;
    if (const CsmResult* u = an.find(Recipe::universal_U))
      out.push_back(check_rank_equals("attains_bound", *u, std::min(M - K, N)));
    else
      out.push_back(skipped_check("attains_bound", "rank U = min(M - K, N)", "recipe_not_run"));
    return out;
  }});
  return e;
}

const std::vector<BenchmarkEntry>& catalog() {
  static const std::vector<BenchmarkEntry> entries = [] {
    return std::vector<BenchmarkEntry>{
        register_slutsky_hicks(),           register_profit_max(),
        register_multi_output_profit(),     register_cost_constrained_profit(),
        register_multi_constraint_utility(), register_market_power(),
        register_principal_agent(),         register_efficient_portfolio(),
        register_pareto_allocation(),       register_generic_quadratic(),
    };
  }();
  return entries;
}

const BenchmarkEntry& find_benchmark(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  fail(ErrorKind::config, "unknown model '" + name + "'");
}

std::vector<std::string> benchmark_names() {
  std::vector<std::string> out;
  for (const auto& e : catalog()) out.push_back(e.name);
  return out;
}

}  // namespace compstat
