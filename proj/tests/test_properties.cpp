#include <cstring>
#include <random>

#include "compstat/report.hpp"
#include "doctest.h"
#include "toy_models.hpp"

using namespace compstat;

namespace {

constexpr int kTrials = 12;

double rel_diff(const Mat& a, const Mat& b, double floor) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(floor, b.cwiseAbs().maxCoeff());
}

Vec uniform(std::mt19937& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = U(rng);
  return v;
}

}  // namespace

TEST_CASE("property: random Cobb-Douglas consumers have a symmetric NSD Slutsky matrix with null vector p") {
  std::mt19937 rng(11);
  for (int t = 0; t < kTrials; ++t) {
    const int M = 2 + t % 3;
    Vec gamma = uniform(rng, M, 0.2, 1.0);
    gamma /= gamma.sum();
    SlutskyConfig cfg{gamma};
    const BenchmarkEntry e = register_slutsky_hicks(cfg);
    Vec a(M + 1);
    a << uniform(rng, M, 0.5, 3.0), uniform(rng, 1, 0.5, 4.0);
    PipelineOptions o;
    o.run_properties = false;
    const Analysis an = analyze(e, a, o);
    CAPTURE(t);
    const Mat S = gcd_apply(an.iso, an.sens.x_jac);
    CHECK(rel_diff(S, S.transpose(), 1.0) < 1e-6);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (S + S.transpose())).eigenvalues().maxCoeff() < 1e-6);
    CHECK((S * a.head(M)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(an.find(Recipe::omega)->rank_estimate == M - 1);
    CHECK(an.failures() == 0);
  }
}

TEST_CASE("property: recipe coherence, rank bounds and conformance on random quadratic programs") {
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int t = 0; t < kTrials; ++t) {
    GenericQuadraticConfig c;
    c.M = dim(rng) + 1;
    c.K = std::uniform_int_distribution<int>(0, c.M - 1)(rng);
    c.N = c.K + dim(rng);
    c.seed = static_cast<unsigned>(rng());
    CAPTURE(c.M);
    CAPTURE(c.K);
    CAPTURE(c.N);
    const BenchmarkEntry e = register_generic_quadratic(c);
    for (PipelineMode mode : {PipelineMode::analytic, PipelineMode::numeric}) {
      PipelineOptions o;
      o.mode = mode;
      const Analysis an = analyze(e, o);
      for (const auto& ch : an.checks) CHECK_MESSAGE(!ch.failed(), ch.name << " " << ch.residual << " " << ch.reason);
      const CsmResult& om = *an.find(Recipe::omega);
      const CsmResult& U = *an.find(Recipe::universal_U);
      const double floor = std::max(1e-10, an.zero_level);
      CHECK(rel_diff(an.find(Recipe::omega_quadratic)->matrix, om.matrix, floor) < 1e-6);
      CHECK(rel_diff(an.iso.vectors * U.matrix * an.iso.vectors.transpose(), om.matrix, floor) < 1e-6);
      CHECK(om.rank_estimate <= std::min(c.M - c.K, an.iso.A));
      CHECK(U.rank_estimate == std::min(c.M - c.K, c.N));
      CHECK(om.eigenvalues.minCoeff() >= -1e-8 * std::max(1.0, om.scale()));
    }
  }
}

TEST_CASE("property: Cobb-Douglas factor demand is homogeneous of degree zero with NSD wage response") {
  std::mt19937 rng(5);
  for (int t = 0; t < kTrials; ++t) {
    ProfitCdConfig c;
    const int M = 2 + t % 2;
    c.gamma = uniform(rng, M, 0.05, 0.9 / M);
    c.w = uniform(rng, M, 0.5, 2.0);
    c.p = uniform(rng, 1, 1.0, 5.0)[0];
    const BenchmarkEntry e = register_profit_max(c);
    PipelineOptions o;
    o.mode = PipelineMode::numeric;
    o.run_properties = false;
    const Analysis an = analyze(e, o);
    CAPTURE(t);
    CHECK((an.sens.x_jac * an.sol.a).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, an.sol.x.cwiseAbs().maxCoeff()));
    const Mat W = an.sens.x_jac.leftCols(M);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (W + W.transpose())).eigenvalues().maxCoeff() < 1e-8);
    const double gs = c.gamma.sum();
    for (int mu = 0; mu < M; ++mu)
      CHECK(c.w[mu] / an.sol.x[mu] * W(mu, mu) ==
            doctest::Approx(-(1.0 + c.gamma[mu] / (1.0 - gs))).epsilon(1e-5));
  }
}

TEST_CASE("property: separable objectives have a vanishing CSM at random points") {
  std::mt19937 rng(3);
  for (int t = 0; t < kTrials; ++t) {
    const int M = 1 + t % 4, N = 1 + (t * 7) % 5;
    const ModelPtr m = toy::separable(M, N);
    const Vec a = uniform(rng, N, -2.0, 2.0);
    const SolutionPoint s = solve(*m, a, uniform(rng, M, -1.0, 3.0));
    REQUIRE(s.converged);
    const SensitivityBundle sens = decision_jacobian_fd(*m, s);
    const CsmResult om = build_omega(*m, s, sens, identity_isovectors(N));
    CHECK(om.matrix.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(om.rank_estimate == 0);
  }
}

TEST_CASE("property: null-space isovectors are orthonormal, annihilate the stack and have the right count") {
  std::mt19937 rng(17);
  std::normal_distribution<double> nd;
  for (int t = 0; t < kTrials; ++t) {
    const int N = 2 + t % 6, C = t % N;
    TargetStack st;
    st.grads = Mat::NullaryExpr(C, N, [&] { return nd(rng); });
    if (C >= 2 && t % 3 == 0) st.grads.row(C - 1) = 2.0 * st.grads.row(0);  // dependent row
    const int rank = C ? static_cast<int>(Eigen::FullPivLU<Mat>(st.grads).rank()) : 0;
    const IsovectorSet iso = build_isovectors(st);
    CAPTURE(t);
    CHECK(iso.A == N - rank);
    if (iso.A) {
      CHECK((iso.vectors * iso.vectors.transpose() - Mat::Identity(iso.A, iso.A)).cwiseAbs().maxCoeff() < 1e-12);
      if (C) CHECK((iso.vectors * st.grads.transpose()).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, st.grads.norm()));
    }
  }
}

TEST_CASE("property: nonsingular congruences preserve rank and semidefiniteness") {
  std::mt19937 rng(29);
  std::normal_distribution<double> nd;
  for (int t = 0; t < kTrials; ++t) {
    const int A = 2 + t % 4, r = 1 + t % A;
    const Mat L = Mat::NullaryExpr(A, r, [&] { return nd(rng); });
    const CsmResult c = make_csm(L * L.transpose(), Recipe::omega, SignConvention::positive_semidefinite_expected);
    const Mat T = Mat::NullaryExpr(A, A, [&] { return nd(rng); }) + 3.0 * Mat::Identity(A, A);
    const TransformResult tr = transform_csm(c, T);
    CHECK(c.rank_estimate == r);
    CHECK(tr.kind == TransformKind::congruence);
    CHECK(tr.csm.rank_estimate == r);
    CHECK(tr.csm.eigenvalues.minCoeff() >= -1e-10 * tr.csm.scale());
    for (int i = 1; i < c.eigenvalues.size(); ++i) CHECK(c.eigenvalues[i - 1] <= c.eigenvalues[i]);
  }
}

TEST_CASE("property: FD and implicit-function Jacobians agree at random benchmark points") {
  std::mt19937 rng(41);
  for (const char* name : {"slutsky_hicks", "profit_cd", "market_power", "efficient_portfolio"}) {
    const BenchmarkEntry& e = find_benchmark(name);
    for (int t = 0; t < 4; ++t) {
      const Vec a = e.default_point.cwiseProduct(uniform(rng, e.model->N, 0.9, 1.1));
      CAPTURE(name);
      CAPTURE(a.transpose());
      const SolutionPoint s = solve(*e.model, a, e.x0, {}, false);
      REQUIRE(s.converged);
      SensitivityBundle ift = decision_jacobian_ift(*e.model, s);
      SensitivityBundle fd = decision_jacobian_fd(*e.model, s);
      CHECK(cross_check(ift, fd) < 1e-4);
    }
  }
}

TEST_CASE("property: JSON doubles round-trip bit for bit") {
  std::mt19937_64 rng(99);
  RunReport r;
  r.command = "analyze";
  PointReport p;
  p.model = "bits";
  p.mode = "numeric";
  p.a.resize(200);
  for (int i = 0; i < p.a.size(); ++i) {
    uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    p.a[i] = std::isfinite(v) ? v : 1.0 / (i + 3.0);
  }
  r.points.push_back(p);
  const RunReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  for (int i = 0; i < p.a.size(); ++i) CHECK(std::memcmp(&back.points[0].a[i], &p.a[i], sizeof(double)) == 0);
}
