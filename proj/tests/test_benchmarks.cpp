#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "toy_models.hpp"

using namespace compstat;

namespace {

Analysis run(const BenchmarkEntry& e, PipelineMode mode = PipelineMode::analytic) {
  PipelineOptions o;
  o.mode = mode;
  return analyze(e, o);
}

Analysis run(const std::string& name, PipelineMode mode = PipelineMode::analytic) {
  return run(find_benchmark(name), mode);
}

const CheckReport& check(const Analysis& an, const std::string& name) {
  const auto it = std::find_if(an.checks.begin(), an.checks.end(), [&](const CheckReport& c) { return c.name == name; });
  REQUIRE_MESSAGE(it != an.checks.end(), "missing check " << name);
  return *it;
}

void expect_pass(const Analysis& an, const std::string& name) {
  const CheckReport& c = check(an, name);
  CHECK_MESSAGE(c.passed(), name << ": residual " << c.residual << " tol " << c.tolerance << " " << c.reason);
}

}  // namespace

TEST_CASE("catalog") {
  const auto names = benchmark_names();
  CHECK(names.size() == 10);
  CHECK(names.front() == "slutsky_hicks");
  CHECK(names.back() == "generic_quadratic");
  CHECK_THROWS_AS(find_benchmark("nope"), Error);
}

TEST_CASE("every property suite passes under both pipelines") {
  for (const auto& e : catalog())
    for (PipelineMode mode : {PipelineMode::analytic, PipelineMode::numeric}) {
      CAPTURE(e.name);
      CAPTURE(to_string(mode));
      const Analysis an = run(e, mode);
      for (const auto& c : an.checks) CHECK_MESSAGE(!c.failed(), c.name << ": " << c.residual << " > " << c.tolerance << " " << c.reason);
      for (const auto& p : e.properties) {
        const bool ran = std::any_of(an.checks.begin(), an.checks.end(),
                                     [&](const CheckReport& c) { return c.name.rfind(p.name, 0) == 0; });
        CHECK_MESSAGE(ran, "property " << p.name << " produced no checks");
      }
    }
}

TEST_CASE("Slutsky matrix of the Cobb-Douglas consumer") {
  const Analysis an = run("slutsky_hicks", PipelineMode::numeric);
  const Mat S = gcd_apply(an.iso, an.sens.x_jac);
  Mat expect(2, 2);
  expect << -0.25, 0.25, 0.25, -0.25;
  CHECK((S - expect).cwiseAbs().maxCoeff() < 1e-6);
  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (S + S.transpose())).eigenvalues();
  CHECK(ev[0] == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(std::abs(ev[1]) < 1e-8);
  const Analysis exact = run("slutsky_hicks");
  CHECK((gcd_apply(exact.iso, exact.sens.x_jac) * exact.sol.a.head(2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Cobb-Douglas elasticity bounds") {
  for (PipelineMode mode : {PipelineMode::analytic, PipelineMode::numeric}) {
    const double tol = mode == PipelineMode::analytic ? 1e-6 : 1e-4;
    const ProfitBounds b = profit_bounds(run("profit_cd", mode));
    for (int mu = 0; mu < 2; ++mu) {
      CHECK(b.own_price_elasticity[mu] == doctest::Approx(-2.0).epsilon(tol));
      CHECK(b.sharpened_bound[mu] == doctest::Approx(-1.5).epsilon(tol));
    }
    CHECK(b.standard_bound == 0.0);
    CHECK(b.supply_elasticity == doctest::Approx(2.0).epsilon(tol));
    CHECK(b.supply_sharpened_bound == doctest::Approx(2.0).epsilon(tol));
  }
}

TEST_CASE("Delta family with l = 0 recovers W") {
  const Analysis an = run("profit_cd");
  expect_pass(an, "delta_family.l_zero_gives_W");
  expect_pass(an, "z_matrix.negative_semidefinite");
  expect_pass(an, "zero_profit_singularity.rank_drops_by_one");
  expect_pass(an, "zero_profit_singularity.singular_map_rejected");
}

TEST_CASE("multi-output profit") {
  const Analysis an = run("multi_output_profit", PipelineMode::numeric);
  expect_pass(an, "block_matrix.block_symmetry");
  expect_pass(an, "sharpened_blocks.W_star_minus_W_psd");

  MultiOutputConfig one = default_multi_output();
  one.tech.c.resize(1);
  one.tech.A.resize(1);
  one.p = Vec(one.p.head(1));
  const Analysis single = run(register_multi_output_profit(one));
  CHECK(single.failures() == 0);
}

TEST_CASE("cost-constrained profit") {
  const Analysis an = run("cost_constrained_profit", PipelineMode::numeric);
  expect_pass(an, "single_output_price_independence.dx_dp_vanishes");
  CHECK(an.sol.lambda[0] > 0.0);
  expect_pass(an, "csm_blocks.lambda_positive");
  CHECK(an.find(Recipe::omega_B)->rank_estimate <= an.model->M - 1);
}

TEST_CASE("multi-constraint utility") {
  SUBCASE("K = 2") {
    const Analysis an = run("multi_constraint_utility", PipelineMode::numeric);
    CHECK(an.find(Recipe::omega)->rank_estimate <= 2);
    expect_pass(an, "block_structure.mirror_blocks_12");
  }
  SUBCASE("K = 1 is the ordinary consumer") {
    const Analysis an = run(register_multi_constraint_utility(default_multi_constraint(1)));
    CHECK(an.failures() == 0);
    CHECK(an.find(Recipe::omega)->rank_estimate == an.model->M - 1);
  }
}

TEST_CASE("market power") {
  const Analysis an = run("market_power", PipelineMode::numeric);
  expect_pass(an, "modified_slutsky.modified_euler");
  expect_pass(an, "modified_slutsky.elasticity_form");
  expect_pass(an, "competitive_limit.limit_recovers_slutsky");

  MarketPowerConfig flat = default_market_power();
  flat.slope = Vec::Constant(flat.slope.size(), 1e-9);
  const BenchmarkEntry e = register_market_power(flat);
  const Analysis near = run(e);
  const MarketPowerPrices mp = market_power_prices(near, flat);
  CHECK((mp.G - mp.slutsky).cwiseAbs().maxCoeff() < 1e-6);

  flat.slope.setZero();
  CHECK_THROWS_AS(market_power_prices(near, flat), Error);
}

TEST_CASE("principal-agent") {
  const Analysis an = run("principal_agent", PipelineMode::numeric);
  expect_pass(an, "H_matrix.negative_semidefinite");
  expect_pass(an, "phi_blocks.phi22_is_R_phi11_R");
  expect_pass(an, "phi_blocks.phi12_is_phi11_R");
  CHECK(check(an, "conformance").residual < 1e-6);
}

TEST_CASE("efficient portfolio") {
  SUBCASE("hand instance: diag(1, 4) covariance") {
    PortfolioConfig c;
    c.sigma = (Mat(2, 2) << 1, 0, 0, 4).finished();
    c.w = Vec::Ones(2);
    c.r = (Vec(2) << 1, 2).finished();
    c.W = 1.0;
    c.R = 1.2;
    const BenchmarkEntry e = register_efficient_portfolio(c);
    auto variance = [&](double target) {
      Vec a = e.default_point;
      a[a.size() - 1] = target;
      const SolutionPoint s = solve(*e.model, a, e.x0, {}, false);
      return s.x.cwiseAbs2().dot(a.head(2));
    };
    CHECK(variance(1.2) == doctest::Approx(0.8).epsilon(1e-10));
    for (double d : {1e-3, 0.1, 1.0}) {
      CHECK(variance(1.2 + d) > 0.8);
      CHECK(variance(1.2 - d) > 0.8);
    }
  }
  SUBCASE("diagonal covariance keeps the original assets") {
    PortfolioConfig c = default_portfolio();
    c.sigma = Vec::LinSpaced(3, 1.0, 3.0).asDiagonal();
    const Analysis an = run(register_efficient_portfolio(c));
    CHECK(an.failures() == 0);
  }
  const Analysis an = run("efficient_portfolio", PipelineMode::numeric);
  expect_pass(an, "closed_form.newton_matches_closed_form");
  expect_pass(an, "slutsky_blocks.cross_relation");
  CHECK(an.find(Recipe::omega)->rank_estimate <= an.model->M - 2);
}

TEST_CASE("Pareto allocation") {
  const Analysis an = run("pareto_allocation", PipelineMode::numeric);
  expect_pass(an, "omega_independence.rows_free_of_omega");
  CHECK(an.iso.null_residuals.cwiseAbs().maxCoeff() < 1e-8);

  ParetoConfig one = default_pareto();
  one.theta = Mat(one.theta.topRows(1));
  const Analysis single = run(register_pareto_allocation(one));
  CHECK(single.failures() == 0);
  CHECK(single.iso.A == static_cast<int>(one.b.size()));
}

TEST_CASE("generic quadratic") {
  const Analysis an = run("generic_quadratic", PipelineMode::numeric);
  CHECK(an.find(Recipe::universal_U)->rank_estimate == 3);
  GenericQuadraticConfig c;
  c.K = c.M;
  c.N = c.M + 2;
  CHECK(run(register_generic_quadratic(c)).failures() == 0);
  c.K = c.M + 1;
  CHECK_THROWS_AS(register_generic_quadratic(c), Error);
}
