#include "doctest.h"
#include "toy_models.hpp"

using namespace compstat;

TEST_CASE("finite-difference demand derivatives") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  const SolutionPoint s = solve(*m, Vec::Ones(3), Vec::Constant(2, 0.4));
  const SensitivityBundle fd = decision_jacobian_fd(*m, s);
  CHECK(fd.x_jac(0, 0) == doctest::Approx(-0.5).epsilon(1e-5));
  CHECK(fd.x_jac(0, 2) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(std::abs(fd.x_jac(0, 1)) < 1e-5);
  CHECK(fd.lambda_jac(0, 2) == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK(constraint_identity_residual(*m, s, fd) < 1e-6);
}

TEST_CASE("a parameter absent from the problem has an exactly zero column") {
  ProblemModel p;
  p.M = 1;
  p.N = 3;
  p.objective.value = [](const Vec& x, const Vec& a) { return a[1] * std::sqrt(x[0]) - a[0] * x[0]; };
  const ModelPtr m = finalize_model(std::move(p));
  const SolutionPoint s = solve(*m, (Vec(3) << 1.0, 2.0, 5.0).finished(), Vec::Ones(1));
  CHECK(decision_jacobian_fd(*m, s).x_jac(0, 2) == 0.0);
}

TEST_CASE("implicit-function Jacobian agrees with finite differences on every benchmark") {
  for (const auto& e : catalog()) {
    CAPTURE(e.name);
    const SolutionPoint s = solve(*e.model, e.default_point, e.x0, {}, false);
    REQUIRE(s.converged);
    SensitivityBundle ift = decision_jacobian_ift(*e.model, s);
    FdSensitivityOptions o;
    o.use_analytic_solution = false;
    SensitivityBundle fd = decision_jacobian_fd(*e.model, s, o);
    CHECK(cross_check(ift, fd) < 1e-4);
    CHECK(ift.cross_check_residual == fd.cross_check_residual);
  }
}

TEST_CASE("separable objective: decisions independent of parameters") {
  const ModelPtr m = toy::separable(3, 4);
  const SolutionPoint s = solve(*m, (Vec(4) << 0.1, -2, 3, 0.5).finished(), Vec::Zero(3));
  const SensitivityBundle ift = decision_jacobian_ift(*m, s);
  CHECK(ift.x_jac.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("Cobb-Douglas factor demand slopes") {
  const BenchmarkEntry& e = find_benchmark("profit_cd");
  const SolutionPoint s = solve(*e.model, e.default_point, e.x0, {}, false);
  const SensitivityBundle ift = decision_jacobian_ift(*e.model, s);
  const double g = 1.0 / 3.0, gsum = 2.0 / 3.0;
  const Vec w = e.default_point.head(2);
  for (int mu = 0; mu < 2; ++mu)
    for (int nu = 0; nu < 2; ++nu) {
      const double expect = -(s.x[mu] / w[nu]) * ((mu == nu) + g / (1.0 - gsum));
      CHECK(ift.x_jac(mu, nu) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("parallel and serial finite-difference kernels agree bit for bit") {
  for (const auto& e : catalog()) {
    CAPTURE(e.name);
    const SolutionPoint s = solve(*e.model, e.default_point, e.x0);
    const SensitivityBundle par = decision_jacobian_fd(*e.model, s);
    const SensitivityBundle ser = decision_jacobian_fd_serial(*e.model, s);
    CHECK(par.x_jac == ser.x_jac);
    CHECK(par.lambda_jac == ser.lambda_jac);
  }
}
