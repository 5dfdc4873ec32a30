#include <cmath>

#include "doctest.h"
#include "toy_models.hpp"

using namespace compstat;

TEST_CASE("lagrangian without constraints is the objective") {
  const ModelPtr m = toy::sqrt_profit();
  const Vec x = Vec::Constant(1, 2.25), a = (Vec(2) << 0.7, 1.9).finished();
  CHECK(evaluate_lagrangian(*m, x, a, Vec()) == doctest::Approx(evaluate(m->objective, x, a, "f")).epsilon(1e-15));
}

TEST_CASE("lagrangian of log utility at the demand point") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  const Vec x = Vec::Constant(2, 0.5), a = Vec::Ones(3), lam = Vec::Ones(1);
  CHECK(evaluate_lagrangian(*m, x, a, lam) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("lagrangian of the square-root profit model") {
  const ModelPtr m = toy::sqrt_profit();
  CHECK(evaluate_lagrangian(*m, Vec::Ones(1), (Vec(2) << 1.0, 2.0).finished(), Vec()) == doctest::Approx(1.0));
}

TEST_CASE("budget gradient in parameter space is (-x, 1)") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  const Vec x = (Vec(2) << 0.3, 0.8).finished();
  const GradientResult g = numeric_gradient(*m, FunctionRef::constraint(0), Wrt::a, x, Vec::Ones(3));
  CHECK_FALSE(g.analytic);
  CHECK((g.value - (Vec(3) << -0.3, -0.8, 1.0).finished()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("gradient of a constant objective vanishes") {
  ProblemModel p;
  p.M = 2;
  p.N = 2;
  p.objective.value = [](const Vec&, const Vec&) { return 3.0; };
  const ModelPtr m = finalize_model(std::move(p));
  CHECK(numeric_gradient(*m, FunctionRef::objective(), Wrt::x, Vec::Ones(2), Vec::Ones(2)).value.norm() == 0.0);
  CHECK(numeric_gradient(*m, FunctionRef::objective(), Wrt::a, Vec::Ones(2), Vec::Ones(2)).value.norm() == 0.0);
}

TEST_CASE("registered gradients agree with central differences") {
  Mat Q(2, 2), B(2, 3);
  Q << 2, 0.5, 0.5, 1;
  B << 1, 0, 2, 0, 1, -1;
  const ModelPtr m = toy::quadratic(Q, B);
  const GradientResult g =
      numeric_gradient(*m, FunctionRef::objective(), Wrt::x, (Vec(2) << 0.4, -1.2).finished(), Vec::Ones(3));
  CHECK(g.analytic);
  CHECK(g.fd_residual < 1e-5);
}

TEST_CASE("scale augmentation") {
  const ModelPtr base = toy::sqrt_profit();
  const ModelPtr m = augment_with_scale(*base);
  REQUIRE(m->N == 3);
  CHECK(m->parameter_names.back() == "s");
  const Vec x = Vec::Constant(1, 4.0);

  SUBCASE("s = 1 restores the original objective") {
    const Vec a = (Vec(3) << 0.5, 2.0, 1.0).finished();
    CHECK(evaluate(m->objective, x, a, "f") == doctest::Approx(evaluate(base->objective, x, a.head(2), "f")));
  }
  SUBCASE("parameter gradient is (-s x, s F, phi)") {
    const double w = 0.5, p = 2.0, s = 1.5, F = 2.0, phi = p * F - w * 4.0;
    const Vec a = (Vec(3) << w, p, s).finished();
    const Vec g = gradient(m->objective, Wrt::a, x, a);
    CHECK(g[0] == doctest::Approx(-s * 4.0).epsilon(1e-8));
    CHECK(g[1] == doctest::Approx(s * F).epsilon(1e-8));
    CHECK(g[2] == doctest::Approx(phi).epsilon(1e-8));
  }
  SUBCASE("decisions do not depend on the scale") {
    const Vec a = (Vec(3) << 0.5, 2.0, 1.3).finished();
    const SolutionPoint sol = solve(*m, a, Vec::Ones(1));
    REQUIRE(sol.converged);
    CHECK(sol.x[0] == doctest::Approx(4.0).epsilon(1e-9));
    const SensitivityBundle fd = decision_jacobian_fd(*m, sol);
    CHECK(std::abs(fd.x_jac(0, 2)) < 1e-8);
    CHECK(std::abs(decision_jacobian_ift(*m, sol).x_jac(0, 2)) < 1e-8);
  }
}

TEST_CASE("non-finite evaluations raise an evaluation error") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  try {
    evaluate(m->objective, (Vec(2) << -1.0, 1.0).finished(), Vec::Ones(3), "f");
    FAIL("no error raised");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::evaluation);
  }
}

TEST_CASE("finalize rejects inconsistent dimensions") {
  ProblemModel p;
  p.M = 2;
  p.N = 1;
  p.K = 1;
  p.objective.value = [](const Vec&, const Vec&) { return 0.0; };
  CHECK_THROWS_AS(finalize_model(std::move(p)), Error);
}

TEST_CASE("homogeneity generator holds on the consumer model") {
  const BenchmarkEntry& e = find_benchmark("slutsky_hicks");
  REQUIRE_FALSE(e.model->invariance_generators.empty());
  const Vec x = (Vec(2) << 0.3, 0.9).finished(), a = (Vec(3) << 1.2, 0.7, 2.0).finished();
  for (const auto& gen : e.model->invariance_generators)
    for (double r : generator_residuals(*e.model, gen, x, a)) CHECK(std::abs(r) < 1e-6);
}
