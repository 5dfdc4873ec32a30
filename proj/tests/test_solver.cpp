#include "doctest.h"
#include "toy_models.hpp"

using namespace compstat;

TEST_CASE("log-utility demand") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  const SolutionPoint s = solve_interior(*m, Vec::Ones(3), (Vec(2) << 0.2, 0.7).finished());
  REQUIRE(s.converged);
  CHECK(s.x[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s.x[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s.lambda[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.kkt_residual <= 1e-10);
  CHECK(check_second_order(*m, s).pass);
}

TEST_CASE("square-root profit optimum") {
  const ModelPtr m = toy::sqrt_profit();
  const SolutionPoint s = solve_interior(*m, (Vec(2) << 1.0, 2.0).finished(), Vec::Constant(1, 0.3));
  REQUIRE(s.converged);
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.lambda.size() == 0);
}

TEST_CASE("multipliers") {
  SUBCASE("unconstrained: empty multipliers, residual is the gradient norm") {
    const ModelPtr m = toy::sqrt_profit();
    const Vec a = (Vec(2) << 1.0, 2.0).finished();
    const MultiplierResult at_opt = recover_multipliers(*m, Vec::Ones(1), a);
    CHECK(at_opt.lambda.size() == 0);
    CHECK(at_opt.residual < 1e-8);
    const MultiplierResult off = recover_multipliers(*m, Vec::Constant(1, 4.0), a);
    CHECK(off.residual == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("log utility") {
    const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
    const MultiplierResult r = recover_multipliers(*m, Vec::Constant(2, 0.5), Vec::Ones(3));
    CHECK(r.lambda[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.residual < 1e-9);
  }
}

TEST_CASE("portfolio Newton solve matches the closed form") {
  const BenchmarkEntry& e = find_benchmark("efficient_portfolio");
  const SolutionPoint s = solve(*e.model, e.default_point, e.x0, {}, false);
  REQUIRE(s.converged);
  const AnalyticSolution cf = e.model->analytic_solution(e.default_point);
  CHECK((s.x - cf.x).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((s.lambda - cf.lambda).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("iteration cap yields a non-converged point") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  SolverOptions o;
  o.max_iter = 1;
  const SolutionPoint s = solve_interior(*m, Vec::Ones(3), (Vec(2) << 0.05, 0.9).finished(), o);
  CHECK_FALSE(s.converged);
}

TEST_CASE("dependent constraints make the Newton system singular") {
  ProblemModel p;
  p.M = 2;
  p.N = 3;
  p.K = 2;
  p.objective.value = [](const Vec& x, const Vec&) { return 0.5 * std::log(x[0]) + 0.5 * std::log(x[1]); };
  ScalarFunction g;
  g.value = [](const Vec& x, const Vec& a) { return a[2] - a.head(2).dot(x); };
  p.constraints = {g, g};
  const ModelPtr m = finalize_model(std::move(p));
  try {
    solve_interior(*m, Vec::Ones(3), Vec::Constant(2, 0.5));
    FAIL("no error raised");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::rank_deficiency);
  }
}

TEST_CASE("registered oracles satisfy first-order conditions at the default point") {
  for (const auto& e : catalog()) {
    if (!e.model->analytic_solution) continue;
    CAPTURE(e.name);
    const AnalyticSolution s = e.model->analytic_solution(e.default_point);
    CHECK(kkt_residual(*e.model, s.x, e.default_point, s.lambda) <= 1e-10);
  }
}
