#include <cmath>
#include <limits>

#include "bench_support.hpp"

namespace compstat {

using namespace detail;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---- principal-agent ----

PrincipalAgentConfig default_principal_agent() {
  PrincipalAgentConfig c;
  c.P1 = (Vec(3) << 0.2, 0.3, 0.5).finished();
  c.P2 = (Vec(3) << 0.5, 0.3, 0.2).finished();
  c.B1 = 1.5;
  c.B2 = 1.2;
  return c;
}

BenchmarkEntry register_principal_agent(const PrincipalAgentConfig& cfg) {
  const int M = static_cast<int>(cfg.P1.size());
  if (M < 2 || cfg.P2.size() != M) fail(ErrorKind::config, "principal_agent: two probability vectors of equal length >= 2");
  for (const Vec* P : {&cfg.P1, &cfg.P2})
    if ((P->array() <= 0.0).any() || std::abs(P->sum() - 1.0) > 1e-12)
      fail(ErrorKind::config, "principal_agent: probabilities must lie in the open simplex");
  const int N = 2 * (M + 2);
  auto off = [M](int k) { return k * (M + 2); };  // P^k block; B^k at off+M, s^k at off+M+1

  // Level-k utility constraint B^k - sum sqrt(x_i) P^k_i; the principal's cost sum x_i P^I_i.
  ProblemModel m;
  m.name = "principal_agent";
  m.M = M;
  m.N = N;
  m.K = 2;
  m.objective.value = [=](const Vec& x, const Vec& a) { return -x.dot(a.head(M)); };
  m.objective.grad_x = [=](const Vec&, const Vec& a) -> Vec { return -a.head(M); };
  m.objective.grad_a = [=](const Vec& x, const Vec&) {
    Vec v = Vec::Zero(N);
    v.head(M) = -x;
    return v;
  };
  m.objective.hess_xx = [M](const Vec&, const Vec&) -> Mat { return Mat::Zero(M, M); };
  m.objective.hess_xa = [=](const Vec&, const Vec&) {
    Mat H = Mat::Zero(M, N);
    H.leftCols(M) = -Mat::Identity(M, M);
    return H;
  };
  for (int k = 0; k < 2; ++k) {
    const int o = off(k);
    ScalarFunction g;
    g.value = [=](const Vec& x, const Vec& a) {
      if ((x.array() <= 0.0).any()) return kNaN;
      return a[o + M] - x.array().sqrt().matrix().dot(a.segment(o, M));
    };
    g.grad_x = [=](const Vec& x, const Vec& a) -> Vec {
      return (-0.5 * a.segment(o, M).array() / x.array().sqrt()).matrix();
    };
    g.grad_a = [=](const Vec& x, const Vec&) {
      Vec v = Vec::Zero(N);
      v.segment(o, M) = -x.array().sqrt().matrix();
      v[o + M] = 1.0;
      return v;
    };
    g.hess_xx = [=](const Vec& x, const Vec& a) -> Mat {
      return (0.25 * a.segment(o, M).array() / x.array().pow(1.5)).matrix().asDiagonal();
    };
    g.hess_xa = [=](const Vec& x, const Vec&) {
      Mat H = Mat::Zero(M, N);
      H.block(0, o, M, M) = (-0.5 / x.array().sqrt()).matrix().asDiagonal();
      return H;
    };
    m.constraints.push_back(g);

    ScalarFunction h;
    h.value = [=](const Vec&, const Vec& a) { return a[o + M + 1] - a.segment(o, M).sum(); };
    h.grad_x = [M](const Vec&, const Vec&) -> Vec { return Vec::Zero(M); };
    h.grad_a = [=](const Vec&, const Vec&) {
      Vec v = Vec::Zero(N);
      v.segment(o, M).setConstant(-1.0);
      v[o + M + 1] = 1.0;
      return v;
    };
    m.parameter_constraints.push_back(h);

    const std::string lvl = k == 0 ? "I" : "II";
    append(m.parameter_names, indexed("P" + lvl, M));
    m.parameter_names.push_back("B" + lvl);
    m.parameter_names.push_back("s" + lvl);
  }
  m.decision_names = indexed("x", M);

  // sqrt(x_i) = (l1 + l2 rho_i)/2, rho = P^II/P^I, with (l1, l2) the level multipliers in cost form.
  m.analytic_solution = [=](const Vec& a) {
    const Vec P1 = a.head(M), P2 = a.segment(off(1), M);
    const Vec rho = (P2.array() / P1.array()).matrix();
    Eigen::Matrix2d S;
    S << P1.sum(), P2.sum(), P2.sum(), (P2.array() * rho.array()).sum();
    const Eigen::Vector2d l = S.fullPivLu().solve(Eigen::Vector2d(2.0 * a[M], 2.0 * a[off(1) + M]));
    const Vec y = ((l[0] + l[1] * rho.array()) / 2.0).matrix();
    if ((y.array() <= 0.0).any()) fail(ErrorKind::domain, "principal_agent: closed form gives a nonpositive wage");
    return AnalyticSolution{y.array().square().matrix(), Vec(Eigen::Vector2d(-l[0], -l[1]))};
  };
  for (int k = 0; k < 2; ++k) {
    std::vector<bool> gs = {k == 0, k == 1};
    m.invariance_generators.push_back(
        scaling_generator(k == 0 ? "homogeneity_level_I" : "homogeneity_level_II", range(off(k), M + 2), k == 0, gs));
  }

  BenchmarkEntry e;
  e.name = "principal_agent";
  e.description = "principal's cost minimization with agent utility constraints at two effort levels";
  e.model = finalize_model(std::move(m));
  e.default_point = Vec(N);
  e.default_point << cfg.P1, cfg.B1, cfg.P1.sum(), cfg.P2, cfg.B2, cfg.P2.sum();
  {
    const AnalyticSolution s = e.model->analytic_solution(e.default_point);
    const Vec lp = -s.lambda;
    if (!(lp[0] >= 0.0 && lp[1] <= 0.0))
      fail(ErrorKind::config, "principal_agent: both utility constraints must bind with lambda_I >= 0 >= lambda_II");
    const Vec vprime = (0.5 / s.x.array().sqrt()).matrix();
    if (((1.0 - lp[0] * vprime.array()) > 1e-12).any())
      fail(ErrorKind::config, "principal_agent: 1 - lambda_I v'(x) <= 0 fails at the default point");
    e.x0 = s.x.array() * 1.2;
  }
  e.isovectors = [=](const SolutionPoint& s) {
    Mat T = Mat::Zero(2 * M, N);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < M; ++i) {
        T(k * M + i, off(k) + i) = 1.0;
        T(k * M + i, off(k) + M) = std::sqrt(s.x[i]);
        T(k * M + i, off(k) + M + 1) = 1.0;
      }
    return T;
  };
  e.isovector_labels = indexed("PI", M);
  append(e.isovector_labels, indexed("PII", M));

  // Reduced operators D^k_j x_i with s eliminated by level homogeneity.
  auto reduced = [=](const Analysis& an, int k) {
    const Mat& X = an.sens.x_jac;
    const Vec& a = an.sol.a;
    const Vec P = a.segment(off(k), M);
    const Vec xP = X.middleCols(off(k), M) * P;
    Mat D(M, M);
    for (int j = 0; j < M; ++j)
      D.col(j) = X.col(off(k) + j) - xP + (std::sqrt(an.sol.x[j]) - a[off(k) + M]) * X.col(off(k) + M);
    return D;
  };
  auto phi = [=](const Analysis& an) -> Mat {
    const CsmResult* om = an.find(Recipe::omega);
    if (om) return -om->matrix;
    return -build_omega(*an.model, an.sol, an.sens, an.iso).matrix;
  };
  auto ratio = [=](const Analysis& an) -> Mat {
    return (-(an.sol.a.head(M).array() / an.sol.a.segment(off(1), M).array())).matrix().asDiagonal();
  };

  e.properties.push_back({"phi_blocks", [=](const Analysis& an, const PipelineOptions& o) {
    const double tol = an.path_tol(o.tol);
    const Mat F = phi(an);
    const Mat R = ratio(an);
    const Mat F11 = F.topLeftCorner(M, M), F12 = F.topRightCorner(M, M), F22 = F.bottomRightCorner(M, M);
    const Vec lp = -an.sol.lambda;
    const Mat Xs = x_semi(an);
    Mat expect(2 * M, 2 * M);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < M; ++i) {
        const double c = (k == 0 ? 1.0 : 0.0) - lp[k] * 0.5 / std::sqrt(an.sol.x[i]);
        expect.row(k * M + i) = c * Xs.row(i);
      }
    return std::vector<CheckReport>{
        check_semidefinite("negative_semidefinite", F, SignConvention::negative_semidefinite_expected, tol),
        check_close("entry_form", "Phi^{kk'}_ij = [2 - k - lambda_k v'(x_i)] d^{k'}_j x_i", F, expect,
                    o.tol.coherence, 1e-10),
        check_close("phi22_is_R_phi11_R", "Phi^22 = R Phi^11 R", F22, R * F11 * R, tol),
        check_close("phi12_is_phi11_R", "Phi^12 = Phi^11 R", F12, F11 * R, tol)};
  }});
  e.properties.push_back({"reduced_operators", [=](const Analysis& an, const PipelineOptions& o) {
    const Mat Xs = x_semi(an);
    std::vector<CheckReport> out;
    for (int k = 0; k < 2; ++k)
      out.push_back(check_close(k == 0 ? "level_I_matches_rows" : "level_II_matches_rows",
                                "s-free operator equals the prescribed compensated derivative", reduced(an, k),
                                Xs.middleCols(k * M, M), an.path_tol(o.tol)));
    return out;
  }});
  e.properties.push_back({"H_matrix", [=](const Analysis& an, const PipelineOptions& o) {
    const double tol = an.path_tol(o.tol);
    const Vec vp = (0.5 / an.sol.x.array().sqrt()).matrix();
    const Mat H = vp.asDiagonal() * reduced(an, 1);
    const Mat F22 = phi(an).bottomRightCorner(M, M);
    const double lII = -an.sol.lambda[1];
    return std::vector<CheckReport>{
        check_semidefinite("negative_semidefinite", H, SignConvention::negative_semidefinite_expected, tol),
        rank_at_most("rank", H, M - 2, o.tol.rank),
        check_close("phi22_is_scaled_H", "Phi^22 = -lambda_II H", F22, -lII * H, tol)};
  }});
  e.properties.push_back({"diagonal_signs", [=](const Analysis& an, const PipelineOptions& o) {
    const double tol = an.path_tol(o.tol);
    const Mat D1 = reduced(an, 0), D2 = reduced(an, 1);
    std::vector<CheckReport> out;
    for (int i = 0; i < M; ++i) {
      const std::string s = std::to_string(i + 1);
      out.push_back(at_least_zero("level_I_" + s, "D^I_i x_i >= 0", D1(i, i), tol));
      out.push_back(at_most_zero("level_II_" + s, "D^II_i x_i <= 0", D2(i, i), tol));
    }
    return out;
  }});
  e.properties.push_back({"multiplier_signs", [=](const Analysis& an, const PipelineOptions& o) {
    const Vec lp = -an.sol.lambda;
    const double tol = o.tol.analytic;
    std::vector<CheckReport> out = {at_least_zero("lambda_I_nonnegative", "lambda_I >= 0", lp[0], tol),
                                    at_most_zero("lambda_II_nonpositive", "lambda_II <= 0", lp[1], tol)};
    for (int i = 0; i < M; ++i)
      out.push_back(at_most_zero("marginal_" + std::to_string(i + 1), "1 - lambda_I v'(x_i) <= 0",
                                 1.0 - lp[0] * 0.5 / std::sqrt(an.sol.x[i]), tol));
    return out;
  }});
  return e;
}

// ---- efficient portfolio in principal coordinates ----

PortfolioConfig default_portfolio() {
  PortfolioConfig c;
  c.sigma = (Mat(3, 3) << 1, .3, .1, .3, 2, .2, .1, .2, 3).finished();
  c.r = (Vec(3) << 1, 2, 3).finished();
  c.w = Vec::Ones(3);
  c.W = 1.0;
  c.R = 2.2;
  return c;
}

namespace {

struct Principal {
  Mat E;   // M x Mp, kept eigenvectors as columns
  Vec s2;  // kept principal variances
  int excluded = 0;
};

Principal principal_portfolios(const Mat& sigma, double riskless_tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  if (es.info() != Eigen::Success) fail(ErrorKind::config, "efficient_portfolio: eigensolve failed");
  const Vec ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if ((ev.array() < -riskless_tol * top).any())
    fail(ErrorKind::config, "efficient_portfolio: covariance is not positive semidefinite");
  Principal P;
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > riskless_tol * top) keep.push_back(i);
  P.excluded = static_cast<int>(ev.size()) - static_cast<int>(keep.size());
  P.E.resize(sigma.rows(), keep.size());
  P.s2.resize(keep.size());
  for (size_t j = 0; j < keep.size(); ++j) {
    Vec v = es.eigenvectors().col(keep[j]);
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;  // deterministic sign
    P.E.col(j) = v;
    P.s2[j] = ev[keep[j]];
  }
  return P;
}

struct PortfolioClosedForm {
  Vec X;
  double l1 = 0.0, l2 = 0.0;  // cost-form multipliers: 2 sigma^2 X = l1 W + l2 R
  double variance = 0.0;
};

PortfolioClosedForm portfolio_closed_form(const Vec& s2, const Vec& W, double budget, const Vec& R, double target) {
  const Vec sd = s2.array().sqrt().matrix();
  const Vec Wb = (W.array() / sd.array()).matrix(), Rb = (R.array() / sd.array()).matrix();
  const double ww = Wb.dot(Wb), rr = Rb.dot(Rb), wr = Wb.dot(Rb);
  const double D = ww * rr - wr * wr;
  if (!(D > 1e-14 * ww * rr)) fail(ErrorKind::rank_deficiency, "efficient_portfolio: W and R are parallel");
  PortfolioClosedForm c;
  const Vec gap = budget * Rb - target * Wb;
  c.l1 = 2.0 * Rb.dot(gap) / D;
  c.l2 = -2.0 * Wb.dot(gap) / D;
  c.X = ((c.l1 * Wb + c.l2 * Rb).array() / (2.0 * sd.array())).matrix();
  c.variance = gap.squaredNorm() / D;
  return c;
}

}  // namespace

BenchmarkEntry register_efficient_portfolio(const PortfolioConfig& cfg) {
  const int M0 = static_cast<int>(cfg.sigma.rows());
  if (M0 < 2 || cfg.sigma.cols() != M0 || cfg.r.size() != M0 || cfg.w.size() != M0)
    fail(ErrorKind::config, "efficient_portfolio: sigma is M x M with M >= 2, r and w have M entries");
  if ((cfg.sigma - cfg.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::config, "efficient_portfolio: sigma must be symmetric");
  const Principal P = principal_portfolios(cfg.sigma, cfg.riskless_tol);
  const int M = static_cast<int>(P.s2.size());
  if (M < 2) fail(ErrorKind::config, "efficient_portfolio: fewer than two risky principal portfolios");
  const int N = 3 * M + 2;
  const int iW = M, iB = 2 * M, iR = 2 * M + 1, iT = 3 * M + 1;

  ProblemModel m;
  m.name = "efficient_portfolio";
  m.M = M;
  m.N = N;
  m.K = 2;
  m.objective.value = [=](const Vec& X, const Vec& a) { return -(a.head(M).array() * X.array().square()).sum(); };
  m.objective.grad_x = [=](const Vec& X, const Vec& a) -> Vec { return (-2.0 * a.head(M).array() * X.array()).matrix(); };
  m.objective.grad_a = [=](const Vec& X, const Vec&) {
    Vec v = Vec::Zero(N);
    v.head(M) = -X.array().square().matrix();
    return v;
  };
  m.objective.hess_xx = [=](const Vec&, const Vec& a) -> Mat { return (-2.0 * a.head(M)).asDiagonal(); };
  m.objective.hess_xa = [=](const Vec& X, const Vec&) {
    Mat H = Mat::Zero(M, N);
    H.leftCols(M) = (-2.0 * X).asDiagonal();
    return H;
  };
  for (auto [ic, ik] : {std::pair{iW, iB}, std::pair{iR, iT}}) {
    ScalarFunction g;
    g.value = [=](const Vec& X, const Vec& a) { return a[ik] - a.segment(ic, M).dot(X); };
    g.grad_x = [=](const Vec&, const Vec& a) -> Vec { return -a.segment(ic, M); };
    g.grad_a = [=](const Vec& X, const Vec&) {
      Vec v = Vec::Zero(N);
      v.segment(ic, M) = -X;
      v[ik] = 1.0;
      return v;
    };
    g.hess_xx = [M](const Vec&, const Vec&) -> Mat { return Mat::Zero(M, M); };
    g.hess_xa = [=](const Vec&, const Vec&) {
      Mat H = Mat::Zero(M, N);
      H.middleCols(ic, M) = -Mat::Identity(M, M);
      return H;
    };
    m.constraints.push_back(g);
  }
  m.analytic_solution = [=](const Vec& a) {
    if ((a.head(M).array() <= 0.0).any()) fail(ErrorKind::domain, "efficient_portfolio: principal variance <= 0");
    const PortfolioClosedForm c = portfolio_closed_form(a.head(M), a.segment(iW, M), a[iB], a.segment(iR, M), a[iT]);
    return AnalyticSolution{c.X, Vec(Eigen::Vector2d(-c.l1, -c.l2))};
  };
  m.parameter_names = indexed("sigma2", M);
  append(m.parameter_names, indexed("W", M));
  m.parameter_names.push_back("budget");
  append(m.parameter_names, indexed("R", M));
  m.parameter_names.push_back("target");
  m.decision_names = indexed("X", M);
  m.invariance_generators.push_back(scaling_generator("homogeneity_sigma2", range(0, M), true, {false, false}));
  m.invariance_generators.push_back(scaling_generator("homogeneity_W", range(iW, M + 1), false, {true, false}));
  m.invariance_generators.push_back(scaling_generator("homogeneity_R", range(iR, M + 1), false, {false, true}));

  BenchmarkEntry e;
  e.name = "efficient_portfolio";
  e.description = "minimum-variance portfolio at a target return, in principal-portfolio coordinates";
  if (P.excluded > 0)
    e.description += " (" + std::to_string(P.excluded) + " riskless principal portfolio(s) excluded)";
  e.model = finalize_model(std::move(m));
  e.default_point = Vec(N);
  e.default_point << P.s2, P.E.transpose() * cfg.w, cfg.W, P.E.transpose() * cfg.r, cfg.R;
  e.x0 = Vec::Zero(M);
  e.isovectors = [=](const SolutionPoint& s) {
    Mat T = Mat::Zero(3 * M, N);
    for (int mu = 0; mu < M; ++mu) {
      T(mu, mu) = 1.0;
      T(M + mu, iW + mu) = 1.0;
      T(M + mu, iB) = s.x[mu];
      T(2 * M + mu, iR + mu) = 1.0;
      T(2 * M + mu, iT) = s.x[mu];
    }
    return T;
  };
  e.isovector_labels = indexed("sigma2", M);
  append(e.isovector_labels, indexed("W", M));
  append(e.isovector_labels, indexed("R", M));

  e.properties.push_back({"closed_form", [=](const Analysis& an, const PipelineOptions& o) {
    const Vec& a = an.sol.a;
    const PortfolioClosedForm c = portfolio_closed_form(a.head(M), a.segment(iW, M), a[iB], a.segment(iR, M), a[iT]);
    const SolutionPoint nw = solve_interior(*an.model, a, Vec::Zero(M), o.solver);
    std::vector<CheckReport> out;
    out.push_back(check_close("newton_matches_closed_form", "numeric KKT solution equals the closed form", nw.x, c.X,
                              o.tol.analytic));
    out.push_back(check_scalar("variance_formula", "portfolio variance equals |W R_bar - R W_bar|^2 / D",
                               (a.head(M).array() * an.sol.x.array().square()).sum(), c.variance,
                               o.tol.analytic * std::max(1.0, c.variance)));
    return out;
  }});
  e.properties.push_back({"variance_minimum", [=](const Analysis& an, const PipelineOptions&) {
    const Vec& a = an.sol.a;
    const Vec s2 = a.head(M), W = a.segment(iW, M), R = a.segment(iR, M);
    const Vec sd = s2.array().sqrt().matrix();
    const Vec Wb = (W.array() / sd.array()).matrix(), Rb = (R.array() / sd.array()).matrix();
    const double Rstar = a[iB] * Wb.dot(Rb) / Wb.dot(Wb);
    const double vmin = a[iB] * a[iB] / Wb.dot(Wb);
    auto var = [&](double t) { return portfolio_closed_form(s2, W, a[iB], R, t).variance; };
    double worst = 0.0;
    for (double d : {1e-3, 1e-2, 0.1, 1.0}) worst = std::max({worst, var(Rstar) - var(Rstar + d), var(Rstar) - var(Rstar - d)});
    // Brute force: the minimum of the quadratic through three points.
    const double h = 0.5, v0 = var(Rstar - h), v1 = var(Rstar), v2 = var(Rstar + h);
    const double vertex = Rstar + 0.5 * h * (v0 - v2) / (v0 - 2.0 * v1 + v2);
    CheckReport c1 = check_scalar("minimizing_target", "variance is minimized at R* = budget W_bar.R_bar / W_bar.W_bar",
                                  vertex, Rstar, 1e-9 * std::max(1.0, std::abs(Rstar)));
    return std::vector<CheckReport>{
        c1, check_scalar("minimum_value", "minimum variance equals budget^2 / W_bar.W_bar", var(Rstar), vmin,
                         1e-12 * std::max(1.0, vmin)),
        make_check("sampled_targets_not_lower", "no sampled target gives a lower variance", std::max(0.0, worst),
                   1e-12 * std::max(1.0, vmin))};
  }});
  e.properties.push_back({"slutsky_blocks", [=](const Analysis& an, const PipelineOptions& o) {
    const double tol = an.path_tol(o.tol);
    const Vec& a = an.sol.a;
    const Vec& X = an.sol.x;
    const double l1 = -an.sol.lambda[0], l2 = -an.sol.lambda[1];
    const Mat Xs = x_semi(an);
    const Mat SW = Xs.middleCols(M, M), SR = Xs.middleCols(2 * M, M);
    Mat dX2 = Mat(M, M);  // d(X_mu^2)/d sigma2_nu
    for (int mu = 0; mu < M; ++mu) dX2.row(mu) = 2.0 * X[mu] * an.sens.x_jac.row(mu).head(M);
    const Vec W = a.segment(iW, M), R = a.segment(iR, M);
    std::vector<CheckReport> out;
    if (const CsmResult* om = an.find(Recipe::omega))
      out.push_back(check_semidefinite("block_matrix_nsd", -om->matrix, SignConvention::negative_semidefinite_expected,
                                       tol));
    out.push_back(check_close("variance_response_from_W", "dX^2/dsigma2 = -4 X Sigma^W X / lambda_1", dX2,
                              -4.0 * X.asDiagonal() * SW * X.asDiagonal() / l1, tol));
    out.push_back(check_close("variance_response_from_R", "dX^2/dsigma2 = -4 X Sigma^R X / lambda_2", dX2,
                              -4.0 * X.asDiagonal() * SR * X.asDiagonal() / l2, tol));
    const Mat Xinv = X.cwiseInverse().asDiagonal();
    const Mat scaled = Xinv * dX2 * Xinv;
    for (auto [lbl, v] : {std::pair{"W", W}, std::pair{"R", R}}) {
      const std::string s = lbl;
      out.push_back(check_null_vector(s + "_null_for_SigmaW", SW, v, tol));
      out.push_back(check_null_vector(s + "_null_for_SigmaR", SR, v, tol));
      out.push_back(check_null_vector(s + "_null_for_variance_block", scaled, v, tol));
    }
    out.push_back(rank_at_most("SigmaW_rank", SW, M - 2, o.tol.rank));
    out.push_back(rank_at_most("SigmaR_rank", SR, M - 2, o.tol.rank));
    out.push_back(rank_at_most("variance_block_rank", dX2, M - 2, o.tol.rank));
    out.push_back(check_semidefinite("lambda1_SigmaW_psd", l1 * SW, SignConvention::positive_semidefinite_expected, tol));
    out.push_back(check_semidefinite("lambda2_SigmaR_psd", l2 * SR, SignConvention::positive_semidefinite_expected, tol));
    out.push_back(check_close("cross_relation", "lambda_1 Sigma^R = lambda_2 Sigma^W", l1 * SR, l2 * SW, tol, 1e-10));
    return out;
  }});
  e.properties.push_back({"back_map", [=](const Analysis& an, const PipelineOptions& o) {
    std::vector<CheckReport> out;
    const Vec& a = an.sol.a;
    const bool at_default = (a.head(M) - P.s2).cwiseAbs().maxCoeff() < 1e-12 &&
                            (a.segment(iW, M) - P.E.transpose() * cfg.w).cwiseAbs().maxCoeff() < 1e-12 &&
                            (a.segment(iR, M) - P.E.transpose() * cfg.r).cwiseAbs().maxCoeff() < 1e-12;
    if (P.excluded > 0 || !at_default) {
      out.push_back(skipped_check("matches_direct_solve", "x = sum e^mu X_mu solves the original problem",
                                  P.excluded > 0 ? "riskless_excluded" : "off_default_covariance"));
      return out;
    }
    const int M0 = static_cast<int>(cfg.sigma.rows());
    const Mat& S = cfg.sigma;
    // Original coordinates: a = (w, budget, r, target).
    ProblemModel orig;
    orig.name = "portfolio_original";
    orig.M = M0;
    orig.N = 2 * M0 + 2;
    orig.K = 2;
    const int N0 = orig.N;
    orig.objective.value = [S](const Vec& x, const Vec&) { return -x.dot(S * x); };
    orig.objective.grad_x = [S](const Vec& x, const Vec&) -> Vec { return -2.0 * S * x; };
    orig.objective.grad_a = [N0](const Vec&, const Vec&) -> Vec { return Vec::Zero(N0); };
    orig.objective.hess_xx = [S](const Vec&, const Vec&) -> Mat { return -2.0 * S; };
    orig.objective.hess_xa = [M0, N0](const Vec&, const Vec&) -> Mat { return Mat::Zero(M0, N0); };
    for (int k = 0; k < 2; ++k) {
      const int c0 = k * (M0 + 1), kk = c0 + M0;
      ScalarFunction g;
      g.value = [=](const Vec& x, const Vec& aa) { return aa[kk] - aa.segment(c0, M0).dot(x); };
      g.grad_x = [=](const Vec&, const Vec& aa) -> Vec { return -aa.segment(c0, M0); };
      g.grad_a = [=](const Vec& x, const Vec&) {
        Vec v = Vec::Zero(N0);
        v.segment(c0, M0) = -x;
        v[kk] = 1.0;
        return v;
      };
      orig.constraints.push_back(g);
    }
    const ModelPtr om = finalize_model(orig);
    Vec a0(N0);
    a0 << cfg.w, a[iB], cfg.r, a[iT];
    const SolutionPoint s0 = solve_interior(*om, a0, Vec::Zero(M0), o.solver);
    out.push_back(check_close("matches_direct_solve", "x = sum e^mu X_mu solves the original problem",
                              P.E * an.sol.x, s0.x, o.tol.analytic));
    out.push_back(check_close("same_multipliers", "multipliers agree in both coordinates", s0.lambda, an.sol.lambda,
                              o.tol.analytic));
    const SensitivityBundle sb = decision_jacobian_ift(*om, s0);
    const Mat& J = sb.x_jac;
    const Mat Sw = J.leftCols(M0) + J.col(M0) * s0.x.transpose();
    const Mat Sr = J.middleCols(M0 + 1, M0) + J.col(2 * M0 + 1) * s0.x.transpose();
    const double l1 = -s0.lambda[0], l2 = -s0.lambda[1];
    const double tol = o.tol.analytic * 100;
    out.push_back(check_close("original_cross_relation", "lambda_2 Sigma^w = lambda_1 Sigma^r", l2 * Sw, l1 * Sr, tol,
                              1e-10));
    out.push_back(check_null_vector("w_null_for_Sigma_w", Sw, cfg.w, tol));
    out.push_back(check_null_vector("r_null_for_Sigma_w", Sw, cfg.r, tol));
    out.push_back(check_null_vector("w_null_for_Sigma_r", Sr, cfg.w, tol));
    out.push_back(check_null_vector("r_null_for_Sigma_r", Sr, cfg.r, tol));
    return out;
  }});
  e.properties.push_back({"principal_portfolios", [=](const Analysis&, const PipelineOptions&) {
    const double sc = std::max(1.0, cfg.sigma.cwiseAbs().maxCoeff());
    return std::vector<CheckReport>{
        make_check("orthonormal", "principal portfolios are orthonormal",
                   (P.E.transpose() * P.E - Mat::Identity(M, M)).cwiseAbs().maxCoeff(), 1e-12),
        make_check("diagonalize_covariance", "sigma e^mu = sigma_mu^2 e^mu",
                   (cfg.sigma * P.E - P.E * P.s2.asDiagonal()).cwiseAbs().maxCoeff() / sc, 1e-12)};
  }});
  return e;
}

}  // namespace compstat
