#include "doctest.h"
#include "toy_models.hpp"

using namespace compstat;

namespace {

Analysis run(const std::string& name, PipelineMode mode = PipelineMode::analytic) {
  PipelineOptions o;
  o.mode = mode;
  o.run_properties = false;
  return analyze(find_benchmark(name), o);
}

double rel_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-10, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("consumer CSM is minus lambda times the Slutsky matrix") {
  const Analysis an = run("slutsky_hicks");
  const CsmResult* om = an.find(Recipe::omega);
  REQUIRE(om);
  Mat sigma(2, 2);
  sigma << -0.25, 0.25, 0.25, -0.25;
  CHECK((om->matrix + an.sol.lambda[0] * sigma).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(om->eigenvalues.minCoeff() >= -1e-8);
  CHECK(om->sign_convention == SignConvention::positive_semidefinite_expected);
  CHECK(om->rank_estimate == 1);
}

TEST_CASE("separable objective has a vanishing CSM") {
  const ModelPtr m = toy::separable(2, 3);
  const SolutionPoint s = solve(*m, (Vec(3) << 0.3, -1.0, 2.0).finished(), Vec::Zero(2));
  const SensitivityBundle sens = decision_jacobian_ift(*m, s);
  const IsovectorSet iso = identity_isovectors(3);
  const CsmResult om = build_omega(*m, s, sens, iso);
  CHECK(om.matrix.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(om.rank_estimate == 0);
  CHECK(build_omega_quadratic(*m, s, sens, iso).matrix.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(build_omega_b(*m, s, sens, iso, 10.0).matrix.cwiseAbs().maxCoeff() < 1e-12);
  const SpectralRelation sr = spectral_relation(om, hessian_xx(m->objective, s.x, s.a), gcd_apply(iso, sens.x_jac));
  CHECK(sr.csm_eigenvalues.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("output-price response equals minus the wage response of output") {
  const Analysis an = run("profit_cd");
  const ProfitBounds b = profit_bounds(an);
  const Vec F_x = (gradient(an.model->objective, Wrt::x, an.sol.x, an.sol.a) + an.sol.a.head(2)) / an.sol.a[2];
  CHECK((b.x_p + b.W.transpose() * F_x).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("quadratic-form recipe") {
  SUBCASE("agrees with the first-derivative recipe on every benchmark") {
    for (const auto& e : catalog()) {
      CAPTURE(e.name);
      const Analysis an = run(e.name);
      CHECK(rel_diff(an.find(Recipe::omega_quadratic)->matrix, an.find(Recipe::omega)->matrix) < 1e-6);
    }
  }
  SUBCASE("unconstrained: -x_jac^T f_xx x_jac") {
    const Analysis an = run("profit_cd");
    const Mat fxx = hessian_xx(an.model->objective, an.sol.x, an.sol.a);
    const Mat expect = -an.sens.x_jac.transpose() * fxx * an.sens.x_jac;
    CHECK(rel_diff(an.find(Recipe::omega_quadratic)->matrix, expect) < 1e-8);
  }
  SUBCASE("zero Jacobian gives the zero matrix") {
    const Analysis an = run("profit_cd");
    SensitivityBundle zero = an.sens;
    zero.x_jac.setZero();
    CHECK(build_omega_quadratic(*an.model, an.sol, zero, an.iso).matrix.isZero(0.0));
  }
}

TEST_CASE("parameter-derivative recipes on the profit model") {
  const Analysis an = run("profit_cd");
  const CsmResult a2 = build_omega_a2(*an.model, an.sol, an.sens);
  const Mat W = an.sens.x_jac.leftCols(2);
  CHECK(rel_diff(a2.matrix.topLeftCorner(2, 2), -W) < 1e-8);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (W + W.transpose())).eigenvalues().maxCoeff() <= 1e-8);
  CHECK(a2.matrix(2, 2) >= 0.0);
  const CsmResult a1 = build_omega_a1(*an.model, an.sol, an.sens);
  CHECK(a1.eigenvalues.minCoeff() >= -1e-8 * std::max(1.0, a1.scale()));
  CHECK(a2.eigenvalues.minCoeff() >= -1e-8 * std::max(1.0, a2.scale()));
  // The log correction is proportional to f_x, which vanishes at an unconstrained optimum.
  CHECK(rel_diff(a1.matrix, a2.matrix) < 1e-8);
}

TEST_CASE("log-objective recipe on a single-constraint model") {
  const Analysis an = run("slutsky_hicks");
  const CsmResult b = build_omega_b(*an.model, an.sol, an.sens, an.iso, 5.0);
  CHECK(b.eigenvalues.minCoeff() >= -1e-8);
  CHECK(an.find(Recipe::omega)->eigenvalues.minCoeff() >= -1e-8);
}

TEST_CASE("Silberberg matrix") {
  SUBCASE("consumer: semidefinite on the budget tangent") {
    const Analysis an = run("slutsky_hicks");
    const SilberbergResult s = build_silberberg(*an.model, an.sol, an.sens);
    CHECK(s.constrained_psd);
    CHECK(s.restricted_eigenvalues.minCoeff() >= -1e-8);
    const Mat T = an.iso.vectors;
    CHECK(rel_diff(T * s.csm.matrix * T.transpose(), an.find(Recipe::omega)->matrix) < 1e-6);
  }
  SUBCASE("unconstrained: equals the parameter-derivative recipe") {
    const Analysis an = run("profit_cd");
    const SilberbergResult s = build_silberberg(*an.model, an.sol, an.sens);
    CHECK(rel_diff(s.csm.matrix, build_omega_a2(*an.model, an.sol, an.sens).matrix) < 1e-8);
    CHECK(s.constrained_psd);
  }
}

TEST_CASE("universal CSM") {
  SUBCASE("unconstrained reduces to the parameter-derivative recipe") {
    const Analysis an = run("profit_cd");
    CHECK(rel_diff(build_universal(*an.model, an.sol, an.sens).matrix,
                   build_omega_a2(*an.model, an.sol, an.sens).matrix) < 1e-8);
  }
  SUBCASE("generic quadratic attains the rank bound") {
    const Analysis an = run("generic_quadratic");
    CHECK(an.find(Recipe::universal_U)->rank_estimate == 3);
    const Mat T = an.iso.vectors;
    CHECK(rel_diff(T * an.find(Recipe::universal_U)->matrix * T.transpose(), an.find(Recipe::omega)->matrix) < 1e-6);
  }
}

TEST_CASE("congruence transforms") {
  const Analysis an = run("slutsky_hicks");
  const CsmResult& om = *an.find(Recipe::omega);
  const TransformResult id = transform_csm(om, Mat::Identity(2, 2));
  CHECK(id.csm.matrix == om.matrix);
  CHECK(id.kind == TransformKind::congruence);
  CHECK(transform_csm(om, Mat::Ones(1, 2)).kind == TransformKind::contraction);
  CHECK(transform_csm(om, Mat::Ones(2, 2)).kind == TransformKind::singular_square);
}

TEST_CASE("Delta with l = 1 is singular where p = w.1") {
  const Analysis an = run("profit_cd");
  const Vec w = an.sol.a.head(2);
  const double p = w.sum();
  const Mat D = profit_delta(Vec::Ones(2), w, p);
  CHECK(std::abs(D.determinant()) < 1e-14);
  const CsmResult W = make_csm(an.sens.x_jac.leftCols(2), Recipe::application,
                               SignConvention::negative_semidefinite_expected);
  const TransformResult t = transform_csm(W, D);
  CHECK(t.kind == TransformKind::singular_square);
  CHECK(t.csm.rank_estimate == W.rank_estimate - 1);
}

TEST_CASE("reparameterization") {
  const Analysis an = run("slutsky_hicks");
  SUBCASE("identity maps leave the CSM unchanged") {
    const ReparameterizedCsm r = reparameterize_csm(*an.model, an.sol, an.sens, an.iso, CoordinateMap::identity(),
                                                    CoordinateMap::identity());
    CHECK(rel_diff(r.csm.matrix, an.find(Recipe::omega)->matrix) < 1e-12);
    CHECK(r.x_jac_tilde.isApprox(an.sens.x_jac));
  }
  SUBCASE("a singular parameter map is rejected") {
    CoordinateMap squash;
    squash.forward = [](const Vec& a) {
      Vec b = a;
      b[0] = 0.0;
      return b;
    };
    try {
      reparameterize_csm(*an.model, an.sol, an.sens, an.iso, CoordinateMap::identity(), squash);
      FAIL("no error raised");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::transformation);
    }
  }
}

TEST_CASE("spectral relation on the unconstrained profit model") {
  const Analysis an = run("profit_cd");
  const CsmResult& om = *an.find(Recipe::omega);
  const Mat H = hessian_xx(an.model->objective, an.sol.x, an.sol.a);
  const SpectralRelation sr = spectral_relation(om, H, gcd_apply(an.iso, an.sens.x_jac));
  CHECK(sr.max_residual < 1e-6 * std::max(1.0, sr.spectral_scale));
  CHECK(sr.hessian_eigenvalues.maxCoeff() < 0.0);
  CHECK(sr.csm_eigenvalues.minCoeff() >= -1e-8);
}

TEST_CASE("make_csm bookkeeping") {
  Mat m(2, 2);
  m << 1.0, 2e-9, 0.0, 1e-12;
  const CsmResult c = make_csm(m, Recipe::transformed, SignConvention::positive_semidefinite_expected);
  CHECK(c.symmetry_residual == doctest::Approx(2e-9));
  CHECK(c.rank_estimate == 1);
  CHECK(c.recipe == Recipe::transformed);
  CHECK(recipe_from_string(to_string(Recipe::silberberg_S)) == Recipe::silberberg_S);
  CHECK_THROWS_AS(recipe_from_string("bogus"), Error);
}
