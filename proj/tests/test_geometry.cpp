#include <random>

#include "doctest.h"
#include "toy_models.hpp"

using namespace compstat;

namespace {

SolutionPoint log_utility_point(const ModelPtr& m) { return solve(*m, Vec::Ones(3), Vec::Constant(2, 0.4)); }

Mat budget_rows(const Vec& x) {
  Mat T = Mat::Zero(2, 3);
  T << 1, 0, x[0], 0, 1, x[1];
  return T;
}

}  // namespace

TEST_CASE("budget-compensated rows pass the null property") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  const SolutionPoint s = log_utility_point(m);
  const IsovectorSet iso = prescribe_isovectors(budget_rows(s.x), target_gradients(*m, s, false));
  CHECK(iso.A == 2);
  CHECK(iso.basis_kind == BasisKind::prescribed);
  CHECK(iso.null_residuals.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(check_null_property(iso, 1e-8).passed());
}

TEST_CASE("normal direction is rejected as an isovector") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  const SolutionPoint s = log_utility_point(m);
  const TargetStack st = target_gradients(*m, s, false);
  CHECK_THROWS_AS(prescribe_isovectors(st.grads, st), Error);
  CHECK(null_residuals(st.grads, st)(0, 0) == doctest::Approx(st.grads.squaredNorm()));
}

TEST_CASE("empty target stack gives the whole parameter space") {
  TargetStack st;
  st.grads = Mat(0, 4);
  const IsovectorSet iso = build_isovectors(st);
  CHECK(iso.A == 4);
  CHECK((iso.vectors * iso.vectors.transpose() - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(identity_isovectors(4).vectors == Mat::Identity(4, 4));
}

TEST_CASE("null-space basis of a random independent stack") {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  TargetStack st;
  st.grads = Mat::NullaryExpr(2, 4, [&] { return nd(rng); });
  const IsovectorSet iso = build_isovectors(st);
  CHECK(iso.A == 2);
  CHECK((iso.vectors * st.grads.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::JacobiSVD<Mat> svd(iso.vectors);
  CHECK(svd.singularValues().minCoeff() > 1e-10 * svd.singularValues().maxCoeff());
}

TEST_CASE("objective-compensated rows for the scale-augmented profit model") {
  const ModelPtr m = augment_with_scale(*toy::sqrt_profit());
  const Vec a = (Vec(3) << 0.5, 2.0, 1.0).finished();
  const SolutionPoint s = solve(*m, a, Vec::Ones(1));
  const double x = s.x[0], F = std::sqrt(x), phi = a[1] * F - a[0] * x, sc = a[2];
  Mat T(2, 3);
  T << 1, 0, sc * x / phi, 0, 1, -sc * F / phi;
  const IsovectorSet iso = prescribe_isovectors(T, target_gradients(*m, s, true));
  CHECK(iso.annihilates_objective);
  CHECK(iso.null_residuals.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("one-term compensation") {
  SUBCASE("profit with the output price compensating") {
    const ModelPtr m = toy::sqrt_profit();
    const Vec a = (Vec(2) << 1.0, 2.0).finished();
    const SolutionPoint s = solve(*m, a, Vec::Constant(1, 0.5));
    const IsovectorSet iso = one_term_compensation(*m, s, FunctionRef::objective(), 1);
    REQUIRE(iso.A == 1);
    CHECK(iso.vectors(0, 0) == doctest::Approx(std::sqrt(s.x[0])).epsilon(1e-8));
    CHECK(iso.vectors(0, 1) == doctest::Approx(s.x[0]).epsilon(1e-8));
  }
  SUBCASE("scale compensation pairs f_s with -f_alpha") {
    const Vec grad = (Vec(3) << -2.0, 0.0, 4.0).finished();
    const IsovectorSet iso = one_term_compensation(grad, 2);
    REQUIRE(iso.A == 2);
    CHECK(iso.vectors(0, 0) == 4.0);
    CHECK(iso.vectors(0, 2) == 2.0);
    // target independent of a_2: only the f_s entry survives
    CHECK(iso.vectors(1, 1) == 4.0);
    CHECK(iso.vectors(1, 2) == 0.0);
  }
}

TEST_CASE("compensated derivatives") {
  const ModelPtr m = toy::log_utility(Vec::Constant(2, 0.5));
  const SolutionPoint s = log_utility_point(m);
  const SensitivityBundle fd = decision_jacobian_fd(*m, s);
  CHECK(gcd_apply(identity_isovectors(3), fd.x_jac) == fd.x_jac);

  const IsovectorSet iso = prescribe_isovectors(budget_rows(s.x), target_gradients(*m, s, false));
  const Mat sigma = gcd_apply(iso, fd.x_jac);
  Mat expect(2, 2);
  expect << -0.25, 0.25, 0.25, -0.25;
  CHECK((sigma - expect).cwiseAbs().maxCoeff() < 1e-6);

  const ConformanceTable ct = verify_conformance(sigma, constraint_jacobian_x(*m, s.x, s.a), 1e-8);
  CHECK(ct.pass);
  CHECK(ct.max_abs < 1e-8);
  const ConformanceTable none = verify_conformance(sigma, Mat(0, 2), 1e-8);
  CHECK(none.pass);
  CHECK(none.residuals.size() == 0);
}
