#include <cmath>
#include <limits>

#include "bench_support.hpp"

namespace compstat {

using namespace detail;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// sum_i gamma_i log x_i, independent of a.
ScalarFunction log_utility(const Vec& gamma, int N) {
  ScalarFunction f;
  f.value = [gamma](const Vec& x, const Vec&) {
    if ((x.array() <= 0.0).any()) return kNaN;
    return (gamma.array() * x.array().log()).sum();
  };
  f.grad_x = [gamma](const Vec& x, const Vec&) -> Vec { return gamma.array() / x.array(); };
  f.grad_a = [N](const Vec&, const Vec&) -> Vec { return Vec::Zero(N); };
  f.hess_xx = [gamma](const Vec& x, const Vec&) -> Mat {
    return (-(gamma.array() / x.array().square())).matrix().asDiagonal();
  };
  f.hess_xa = [N](const Vec& x, const Vec&) -> Mat { return Mat::Zero(x.size(), N); };
  return f;
}

// a[m_idx] - a[p_off .. p_off + M) . x
ScalarFunction linear_budget(int M, int p_off, int m_idx, int N) {
  ScalarFunction g;
  g.value = [=](const Vec& x, const Vec& a) { return a[m_idx] - a.segment(p_off, M).dot(x); };
  g.grad_x = [=](const Vec&, const Vec& a) -> Vec { return -a.segment(p_off, M); };
  g.grad_a = [=](const Vec& x, const Vec&) {
    Vec v = Vec::Zero(N);
    v.segment(p_off, M) = -x;
    v[m_idx] = 1.0;
    return v;
  };
  g.hess_xx = [M](const Vec&, const Vec&) -> Mat { return Mat::Zero(M, M); };
  g.hess_xa = [=](const Vec&, const Vec&) {
    Mat H = Mat::Zero(M, N);
    H.block(0, p_off, M, M) = -Mat::Identity(M, M);
    return H;
  };
  return g;
}

void require_positive(const Vec& v, const std::string& what) {
  if (v.size() == 0 || (v.array() <= 0.0).any()) fail(ErrorKind::config, what + " must be positive");
}

// Standard Cobb-Douglas Slutsky matrix at prices p and income m.
Mat cobb_douglas_slutsky(const Vec& gamma, const Vec& p, double m) {
  const Vec x = (gamma.array() * m / (gamma.sum() * p.array())).matrix();
  Mat S = x * x.transpose() / m;
  for (int i = 0; i < x.size(); ++i) S(i, i) -= x[i] / p[i];
  return S;
}

}  // namespace

// ---- Slutsky-Hicks ----

BenchmarkEntry register_slutsky_hicks(const SlutskyConfig& cfg) {
  require_positive(cfg.gamma, "slutsky_hicks: gamma");
  const Vec gamma = cfg.gamma;
  const int M = static_cast<int>(gamma.size());
  const int N = M + 1;
  const double G = gamma.sum();

  ProblemModel m;
  m.name = "slutsky_hicks";
  m.M = M;
  m.N = N;
  m.K = 1;
  m.objective = log_utility(gamma, N);
  m.constraints = {linear_budget(M, 0, M, N)};
  m.parameter_names = indexed("p", M);
  m.parameter_names.push_back("m");
  m.decision_names = indexed("x", M);
  m.analytic_solution = [gamma, M, G](const Vec& a) {
    AnalyticSolution s;
    s.x = (gamma.array() * a[M] / (G * a.head(M).array())).matrix();
    s.lambda = Vec::Constant(1, G / a[M]);
    return s;
  };
  m.analytic_jacobian = [gamma, M, N, G](const Vec& a) {
    const Vec x = (gamma.array() * a[M] / (G * a.head(M).array())).matrix();
    AnalyticJacobian j;
    j.x_jac = Mat::Zero(M, N);
    for (int i = 0; i < M; ++i) j.x_jac(i, i) = -x[i] / a[i];
    j.x_jac.col(M) = x / a[M];
    j.lambda_jac = Mat::Zero(1, N);
    j.lambda_jac(0, M) = -G / (a[M] * a[M]);
    return j;
  };
  m.invariance_generators = {scaling_generator("homogeneity_p_m", range(0, N), false, {true})};

  BenchmarkEntry e;
  e.name = "slutsky_hicks";
  e.description = "Cobb-Douglas consumer, demand x_i = gamma_i m / p_i";
  e.model = finalize_model(std::move(m));
  e.default_point = Vec::Ones(N);
  e.x0 = Vec::Ones(M);
  e.isovectors = [M, N](const SolutionPoint& s) {
    Mat T = Mat::Zero(M, N);
    for (int al = 0; al < M; ++al) {
      T(al, al) = 1.0;
      T(al, M) = s.x[al];
    }
    return T;
  };
  e.isovector_labels = indexed("p", M);
  e.hatta = HattaForm{{M}, {}};

  e.properties.push_back({"slutsky_matrix", [M](const Analysis& an, const PipelineOptions& o) {
    const double tol = an.path_tol(o.tol);
    const Mat S = x_semi(an);
    const Vec p = an.sol.a.head(M);
    std::vector<CheckReport> out;
    out.push_back(check_symmetry("symmetric", S, tol));
    out.push_back(check_semidefinite("negative_semidefinite", S, SignConvention::negative_semidefinite_expected, tol));
    out.push_back(check_null_vector("annihilated_by_prices", S, p, tol));
    out.push_back(rank_at_most("rank", S, M - 1, o.tol.rank));
    if (const CsmResult* om = an.find(Recipe::omega))
      out.push_back(check_close("omega_is_minus_lambda_sigma", "Omega = -lambda Sigma",
                                om->matrix, -an.sol.lambda[0] * S, o.tol.coherence, 1e-10));
    return out;
  }});

  e.properties.push_back({"homogeneity", [](const Analysis& an, const PipelineOptions& o) {
    const Vec r = an.sens.x_jac * an.sol.a;
    return std::vector<CheckReport>{make_check("degree_zero", "sum_mu a_mu dx/da_mu = 0",
                                               r.cwiseAbs().maxCoeff() / std::max(1.0, an.sol.x.cwiseAbs().maxCoeff()),
                                               an.path_tol(o.tol))};
  }});

  e.properties.push_back({"reduced_form", [M, N](const Analysis& an, const PipelineOptions& o) {
    std::vector<CheckReport> out;
    const double tol = an.path_tol(o.tol);
    const double income = an.sol.a[M];
    CoordinateMap normalize;
    normalize.forward = [M](const Vec& a) {
      Vec t = a;
      t.head(M) /= a[M];
      return t;
    };
    normalize.jacobian = [M, N](const Vec& a) {
      Mat J = Mat::Identity(N, N);
      J.topLeftCorner(M, M) /= a[M];
      J.block(0, M, M, 1) = -a.head(M) / (a[M] * a[M]);
      return J;
    };
    const ReparameterizedCsm rp =
        reparameterize_csm(*an.model, an.sol, an.sens, an.iso, CoordinateMap::identity(), normalize);
    if (const CsmResult* om = an.find(Recipe::omega))
      out.push_back(check_close("reparameterization_invariant", "Omega is unchanged by (p, m) -> (p/m, m)",
                                rp.csm.matrix, om->matrix, o.tol.coherence, 1e-10));

    const Vec pt = an.sol.a.head(M) / income;
    const Mat D = rp.x_jac_tilde.leftCols(M);
    const Mat T = Mat::Identity(M, M) - an.sol.x * pt.transpose();
    const TransformResult red =
        transform_csm(make_csm(D, Recipe::application, SignConvention::negative_semidefinite_expected), T);
    const Mat& St = red.csm.matrix;
    out.push_back(check_close("equals_scaled_slutsky", "reduced matrix equals m Sigma", St, income * x_semi(an),
                              tol, 1e-10));
    out.push_back(check_null_vector("annihilated_by_normalized_prices", St, pt, tol));

    if (M >= 2) {
      // Rebuild the dropped row/column from St pt = 0.
      Mat R = Mat::Zero(M, M);
      const int n = M - 1;
      R.topLeftCorner(n, n) = St.topLeftCorner(n, n);
      const Vec last = -St.topLeftCorner(n, n) * pt.head(n) / pt[n];
      R.block(0, n, n, 1) = last;
      R.block(n, 0, 1, n) = last.transpose();
      R(n, n) = -last.dot(pt.head(n)) / pt[n];
      out.push_back(check_close("reconstruct_dropped", "dropping the last row and column loses nothing", R, St, tol,
                                1e-10));
    } else {
      out.push_back(skipped_check("reconstruct_dropped", "dropping the last row and column loses nothing",
                                  "single_good"));
    }
    return out;
  }});
  return e;
}

// ---- several budget constraints ----

MultiConstraintConfig default_multi_constraint(int K) {
  if (K < 1 || K > 2) fail(ErrorKind::config, "default_multi_constraint: K must be 1 or 2");
  MultiConstraintConfig c;
  c.gamma = (Vec(4) << 0.1, 0.2, 0.3, 0.4).finished();
  c.prices = {(Vec(4) << 1, 2, 1, 3).finished()};
  c.incomes = {7.0};
  if (K == 2) {
    c.prices.push_back((Vec(4) << 2, 1, 3, 1).finished());
    c.incomes.push_back(7.0);
  }
  return c;
}

BenchmarkEntry register_multi_constraint_utility(const MultiConstraintConfig& cfg) {
  require_positive(cfg.gamma, "multi_constraint_utility: gamma");
  const int M = static_cast<int>(cfg.gamma.size());
  const int K = static_cast<int>(cfg.prices.size());
  if (K < 1 || static_cast<int>(cfg.incomes.size()) != K || K > M)
    fail(ErrorKind::config, "multi_constraint_utility: need 1 <= K <= M price vectors and K incomes");
  const int N = K * (M + 1);
  auto p_off = [M](int k) { return k * (M + 1); };
  auto m_idx = [M](int k) { return k * (M + 1) + M; };

  ProblemModel m;
  m.name = "multi_constraint_utility";
  m.M = M;
  m.N = N;
  m.K = K;
  m.objective = log_utility(cfg.gamma, N);
  Vec a0(N);
  for (int k = 0; k < K; ++k) {
    if (cfg.prices[k].size() != M) fail(ErrorKind::config, "multi_constraint_utility: price vector length");
    require_positive(cfg.prices[k], "multi_constraint_utility: prices");
    m.constraints.push_back(linear_budget(M, p_off(k), m_idx(k), N));
    append(m.parameter_names, indexed("p" + std::to_string(k + 1), M));
    m.parameter_names.push_back("m" + std::to_string(k + 1));
    a0.segment(p_off(k), M) = cfg.prices[k];
    a0[m_idx(k)] = cfg.incomes[k];
  }
  m.decision_names = indexed("x", M);
  for (int k = 0; k < K; ++k) {
    std::vector<bool> gs(K, false);
    gs[k] = true;
    m.invariance_generators.push_back(
        scaling_generator("homogeneity_budget" + std::to_string(k + 1), range(p_off(k), M + 1), false, gs));
  }

  BenchmarkEntry e;
  e.name = "multi_constraint_utility";
  e.description = "log utility under " + std::to_string(K) + " simultaneous budget constraints";
  e.model = finalize_model(std::move(m));
  e.default_point = a0;
  e.x0 = Vec::Ones(M);
  e.isovectors = [=](const SolutionPoint& s) {
    Mat T = Mat::Zero(K * M, N);
    for (int k = 0; k < K; ++k)
      for (int al = 0; al < M; ++al) {
        T(k * M + al, p_off(k) + al) = 1.0;
        T(k * M + al, m_idx(k)) = s.x[al];
      }
    return T;
  };
  for (int k = 0; k < K; ++k) append(e.isovector_labels, indexed("p" + std::to_string(k + 1), M));
  std::vector<int> kappas;
  for (int k = 0; k < K; ++k) kappas.push_back(m_idx(k));
  e.hatta = HattaForm{kappas, {}};

  e.properties.push_back({"block_structure", [=](const Analysis& an, const PipelineOptions& o) {
    std::vector<CheckReport> out;
    const double tol = an.path_tol(o.tol);
    const Mat X = x_semi(an);  // M x KM, block j = Sigma^j
    const Vec& lam = an.sol.lambda;
    const Mat S1 = X.leftCols(M);
    out.push_back(check_semidefinite("sigma1_negative_semidefinite", S1,
                                     SignConvention::negative_semidefinite_expected, tol));
    out.push_back(rank_at_most("sigma1_rank", S1, M - K, o.tol.rank));
    for (int k = 0; k < K; ++k)
      out.push_back(check_null_vector("sigma1_annihilated_by_p" + std::to_string(k + 1), S1,
                                      an.sol.a.segment(p_off(k), M), tol));
    const CsmResult* om = an.find(Recipe::omega);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
        out.push_back(check_close("sigma_ratio_" + ij, "Sigma^j = (lambda_j/lambda_1) Sigma^1",
                                  X.middleCols(j * M, M), (lam[j] / lam[0]) * S1, tol, 1e-10));
        if (om)
          out.push_back(check_close("omega_block_" + ij, "block(i,j) = -(lambda_i lambda_j/lambda_1) Sigma^1",
                                    om->matrix.block(i * M, j * M, M, M), -(lam[i] * lam[j] / lam[0]) * S1, tol,
                                    1e-10));
        if (om && i < j)
          out.push_back(check_close("mirror_blocks_" + ij, "block(i,j) is the transpose of block(j,i)",
                                    om->matrix.block(i * M, j * M, M, M),
                                    om->matrix.block(j * M, i * M, M, M).transpose(), tol, 1e-10));
      }
    return out;
  }});
  return e;
}

// ---- market power ----

MarketPowerConfig default_market_power() {
  MarketPowerConfig c;
  c.gamma = Vec::Constant(2, 0.5);
  c.c = Vec::Ones(2);
  c.slope = (Vec(2) << 0.2, 0.3).finished();
  c.q = (Vec(2) << 1.0, 2.0).finished();
  c.m = 5.0;
  return c;
}

namespace {

// x_i(lambda) from lambda (2 p'_i x^2 + b_i x) = gamma_i, b_i = c_i + p'_i q_i.
Vec market_power_demand(const Vec& gamma, const Vec& c, const Vec& slope, const Vec& q, double lam) {
  Vec x(gamma.size());
  for (int i = 0; i < x.size(); ++i) {
    const double b = c[i] + slope[i] * q[i];
    if (slope[i] == 0.0) {
      x[i] = gamma[i] / (lam * b);
    } else {
      const double disc = b * b + 8.0 * slope[i] * gamma[i] / lam;
      x[i] = 2.0 * gamma[i] / (lam * (b + std::sqrt(disc)));  // rationalized root
    }
  }
  return x;
}

double market_power_spending(const Vec& x, const Vec& c, const Vec& slope, const Vec& q) {
  return (x.array() * (c.array() + slope.array() * (x.array() + q.array()))).sum();
}

}  // namespace

BenchmarkEntry register_market_power(const MarketPowerConfig& cfg) {
  require_positive(cfg.gamma, "market_power: gamma");
  const int M = static_cast<int>(cfg.gamma.size());
  if (cfg.c.size() != M || cfg.slope.size() != M || cfg.q.size() != M)
    fail(ErrorKind::config, "market_power: c, slope and q need one entry per good");
  require_positive(cfg.c, "market_power: supply intercepts");
  if ((cfg.slope.array() < 0.0).any() || (cfg.q.array() < 0.0).any())
    fail(ErrorKind::config, "market_power: supply slopes and others' demand must be nonnegative");
  if (cfg.m <= 0.0) fail(ErrorKind::config, "market_power: income must be positive");
  const int N = M + 1;
  const Vec gamma = cfg.gamma, c = cfg.c, s = cfg.slope;

  ProblemModel m;
  m.name = "market_power";
  m.M = M;
  m.N = N;
  m.K = 1;
  m.objective = log_utility(gamma, N);
  ScalarFunction g;
  g.value = [=](const Vec& x, const Vec& a) { return a[M] - market_power_spending(x, c, s, a.head(M)); };
  g.grad_x = [=](const Vec& x, const Vec& a) -> Vec {
    return -(c.array() + s.array() * (2.0 * x.array() + a.head(M).array())).matrix();
  };
  g.grad_a = [=](const Vec& x, const Vec&) {
    Vec v(N);
    v.head(M) = -(x.array() * s.array()).matrix();
    v[M] = 1.0;
    return v;
  };
  g.hess_xx = [=](const Vec&, const Vec&) -> Mat { return (-2.0 * s).asDiagonal(); };
  g.hess_xa = [=](const Vec&, const Vec&) {
    Mat H = Mat::Zero(M, N);
    H.leftCols(M) = (-s).asDiagonal();
    return H;
  };
  m.constraints = {g};
  m.parameter_names = indexed("q", M);
  m.parameter_names.push_back("m");
  m.decision_names = indexed("x", M);
  m.analytic_solution = [=](const Vec& a) {
    const Vec q = a.head(M);
    // Spending is decreasing in lambda; bisect on log lambda, then polish with Newton.
    auto excess = [&](double lam) { return market_power_spending(market_power_demand(gamma, c, s, q, lam), c, s, q) - a[M]; };
    double lo = 1e-12, hi = 1.0;
    while (excess(hi) > 0.0) hi *= 2.0;
    while (excess(lo) < 0.0) lo *= 0.5;
    for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-15; ++it) {
      const double mid = std::sqrt(lo * hi);
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    AnalyticSolution sol;
    const double lam = std::sqrt(lo * hi);
    sol.x = market_power_demand(gamma, c, s, q, lam);
    sol.lambda = Vec::Constant(1, lam);
    return sol;
  };

  BenchmarkEntry e;
  e.name = "market_power";
  e.description = "log utility with upward-sloping inverse supply p_i = c_i + p'_i (x_i + q_i)";
  e.model = finalize_model(std::move(m));
  e.default_point = Vec(N);
  e.default_point << cfg.q, cfg.m;
  e.x0 = Vec::Ones(M);
  e.isovectors = [M, N, s](const SolutionPoint& sol) {
    Mat T = Mat::Zero(M, N);
    for (int al = 0; al < M; ++al) {
      T(al, al) = 1.0;
      T(al, M) = sol.x[al] * s[al];
    }
    return T;
  };
  e.isovector_labels = indexed("q", M);
  e.hatta = HattaForm{{M}, {}};

  e.properties.push_back({"modified_slutsky", [M, cfg](const Analysis& an, const PipelineOptions& o) {
    std::vector<CheckReport> out;
    const double tol = an.path_tol(o.tol);
    const MarketPowerPrices mp = market_power_prices(an, cfg);
    const Vec& x = an.sol.x;
    const Vec& s = cfg.slope;
    const Vec pt = (mp.p.array() + s.array() * x.array()).matrix();
    out.push_back(check_semidefinite("G_negative_semidefinite", mp.G, SignConvention::negative_semidefinite_expected,
                                     tol));
    out.push_back(rank_at_most("G_rank", mp.G, M - 1, o.tol.rank));
    if (const CsmResult* om = an.find(Recipe::omega)) {
      const Vec inv = s.cwiseInverse();
      if ((s.array() > 0.0).all())
        out.push_back(check_close("G_from_omega", "G = diag(1/p') (-Omega/lambda) diag(1/p')",
                                  mp.G, inv.asDiagonal() * (-om->matrix / an.sol.lambda[0]) * inv.asDiagonal(), tol,
                                  1e-10));
    }
    out.push_back(check_symmetry("G_tilde_symmetric", mp.G_tilde, tol));
    out.push_back(check_null_vector("G_tilde_annihilated_by_p", mp.G_tilde, mp.p, tol));
    {
      const double scale = std::max(1.0, mp.slutsky.cwiseAbs().maxCoeff()) * mp.p.norm();
      out.push_back(make_check("sigma_left_null_p", "p^T Sigma = 0",
                               (mp.p.transpose() * mp.slutsky).cwiseAbs().maxCoeff() / scale, tol));
      out.push_back(make_check("sigma_right_null_ptilde", "Sigma ptilde = 0, ptilde = p + p' x",
                               (mp.slutsky * pt).cwiseAbs().maxCoeff() / scale, tol));
    }
    {
      const double mt = an.sol.a[M] + (x.array().square() * s.array()).sum();
      const Vec r = mt * mp.x_jac_pm.col(M) + mp.x_jac_pm.leftCols(M) * pt;
      out.push_back(make_check("modified_euler", "m~ dx/dm + sum ptilde_nu dx/dp_nu = 0",
                               r.cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff()), tol));
    }
    {
      // Elasticity form of the correction matrix.
      const Vec q = an.sol.a.head(M);
      Mat J(M, M);
      for (int gm = 0; gm < M; ++gm)
        for (int b = 0; b < M; ++b) {
          const double eps_dem = mp.p[gm] / x[b] * mp.x_jac_pm(b, gm);
          const double eps_sup = mp.p[gm] / ((x[gm] + q[gm]) * s[gm]);
          J(gm, b) = (gm == b ? 1.0 : 0.0) - (x[gm] / (x[gm] + q[gm])) * (x[b] / x[gm]) * eps_dem / eps_sup;
        }
      if ((s.array() > 0.0).all())
        out.push_back(check_close("elasticity_form", "elasticity form equals the linear-supply correction",
                                  mp.slutsky * J, mp.G_tilde, tol, 1e-10));
    }
    return out;
  }});

  e.properties.push_back({"competitive_limit", [M, N, cfg](const Analysis&, const PipelineOptions& o) {
    std::vector<CheckReport> out;
    PipelineOptions sub = o;
    sub.run_properties = false;
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double last = 0.0;
    for (double sl : {0.1, 0.01, 0.001}) {
      MarketPowerConfig c = cfg;
      c.slope = Vec::Constant(M, sl);
      const BenchmarkEntry sub_entry = register_market_power(c);
      Vec a(N);
      a << c.q, c.m;
      const Analysis sa = prepare(sub_entry, a, sub);
      const MarketPowerPrices mp = market_power_prices(sa, c);
      const Mat S = cobb_douglas_slutsky(c.gamma, mp.p, c.m);
      const double err = (mp.G - S).cwiseAbs().maxCoeff() / std::max(1.0, S.cwiseAbs().maxCoeff());
      decreasing = decreasing && err < prev;
      prev = err;
      last = err;
    }
    out.push_back(boolean_check("error_decreases", "G approaches Sigma as p' shrinks", decreasing,
                                "error did not decrease along the p' sequence"));
    // O(p') convergence: at p' = 1e-3 the gap must be of that order.
    CheckReport r = make_check("limit_recovers_slutsky", "G -> Sigma as p' -> 0", last, 1e-2);
    out.push_back(r);
    return out;
  }});
  return e;
}

MarketPowerPrices market_power_prices(const Analysis& an, const MarketPowerConfig& cfg) {
  const int M = an.model->M;
  const Vec& x = an.sol.x;
  const Vec q = an.sol.a.head(M);
  const Vec& s = cfg.slope;
  const Mat& X = an.sens.x_jac;
  if ((s.array() <= 0.0).any())
    fail(ErrorKind::domain, "market_power: price coordinates need every supply slope positive");
  MarketPowerPrices r;
  r.p = (cfg.c.array() + s.array() * (x.array() + q.array())).matrix();
  r.dp_da = Mat::Zero(M + 1, M + 1);
  for (int al = 0; al < M; ++al) {
    for (int b = 0; b < M; ++b) r.dp_da(al, b) = s[al] * (X(al, b) + (al == b ? 1.0 : 0.0));
    r.dp_da(al, M) = s[al] * X(al, M);
  }
  r.dp_da(M, M) = 1.0;
  Eigen::FullPivLU<Mat> lu(r.dp_da);
  if (!lu.isInvertible()) fail(ErrorKind::transformation, "market_power: (q, m) -> (p, m) is singular");
  r.x_jac_pm = X * lu.inverse();
  r.slutsky = r.x_jac_pm.leftCols(M) + r.x_jac_pm.col(M) * x.transpose();
  r.G = gcd_apply(an.iso, X) * s.cwiseInverse().asDiagonal();
  Mat J = Mat::Identity(M, M);
  for (int gm = 0; gm < M; ++gm)
    for (int b = 0; b < M; ++b) J(gm, b) -= s[gm] * r.x_jac_pm(b, gm);
  r.G_tilde = r.slutsky * J;
  return r;
}

// ---- Pareto allocation ----

ParetoConfig default_pareto() {
  ParetoConfig c;
  c.theta = (Mat(2, 2) << 0.3, 0.7, 0.6, 0.4).finished();
  c.omega = Vec::Constant(2, 3.0);
  c.b = Vec::Zero(2);
  return c;
}

BenchmarkEntry register_pareto_allocation(const ParetoConfig& cfg) {
  const int H = static_cast<int>(cfg.theta.rows());
  const int G = static_cast<int>(cfg.theta.cols());
  if (H < 1 || G < 1 || cfg.omega.size() != G || cfg.b.size() != G)
    fail(ErrorKind::config, "pareto_allocation: theta is H x G, omega and b have G entries");
  require_positive(cfg.omega, "pareto_allocation: omega");
  const Mat theta = cfg.theta;
  const int M = H * G;
  const int K = H - 1 + G;
  const int N = G + (H - 1) + G;
  const int ub0 = G, om0 = G + H - 1;  // offsets of ubar and omega in a
  auto xi = [G](int h, int g) { return h * G + g; };

  auto utility = [=](const Vec& x, const Vec& a, int h) {
    double u = 0.0;
    for (int g = 0; g < G; ++g) u += (theta(h, g) + a[g]) * std::log(x[xi(h, g)]);
    return u;
  };

  ProblemModel m;
  m.name = "pareto_allocation";
  m.M = M;
  m.N = N;
  m.K = K;
  m.objective.value = [=](const Vec& x, const Vec& a) {
    if ((x.array() <= 0.0).any()) return kNaN;
    return utility(x, a, 0);
  };
  m.objective.grad_x = [=](const Vec& x, const Vec& a) {
    Vec v = Vec::Zero(M);
    for (int g = 0; g < G; ++g) v[xi(0, g)] = (theta(0, g) + a[g]) / x[xi(0, g)];
    return v;
  };
  m.objective.grad_a = [=](const Vec& x, const Vec&) {
    Vec v = Vec::Zero(N);
    for (int g = 0; g < G; ++g) v[g] = std::log(x[xi(0, g)]);
    return v;
  };
  for (int h = 1; h < H; ++h) {
    ScalarFunction c;
    c.value = [=](const Vec& x, const Vec& a) {
      if ((x.array() <= 0.0).any()) return kNaN;
      return a[ub0 + h - 1] - utility(x, a, h);
    };
    c.grad_x = [=](const Vec& x, const Vec& a) {
      Vec v = Vec::Zero(M);
      for (int g = 0; g < G; ++g) v[xi(h, g)] = -(theta(h, g) + a[g]) / x[xi(h, g)];
      return v;
    };
    c.grad_a = [=](const Vec& x, const Vec&) {
      Vec v = Vec::Zero(N);
      for (int g = 0; g < G; ++g) v[g] = -std::log(x[xi(h, g)]);
      v[ub0 + h - 1] = 1.0;
      return v;
    };
    m.constraints.push_back(c);
  }
  for (int g = 0; g < G; ++g) {
    ScalarFunction c;
    c.value = [=](const Vec& x, const Vec& a) {
      double s = a[om0 + g];
      for (int h = 0; h < H; ++h) s -= x[xi(h, g)];
      return s;
    };
    c.grad_x = [=](const Vec&, const Vec&) {
      Vec v = Vec::Zero(M);
      for (int h = 0; h < H; ++h) v[xi(h, g)] = -1.0;
      return v;
    };
    c.grad_a = [=](const Vec&, const Vec&) {
      Vec v = Vec::Zero(N);
      v[om0 + g] = 1.0;
      return v;
    };
    c.hess_xx = [M](const Vec&, const Vec&) -> Mat { return Mat::Zero(M, M); };
    c.hess_xa = [M, N](const Vec&, const Vec&) -> Mat { return Mat::Zero(M, N); };
    m.constraints.push_back(c);
  }
  m.parameter_names = indexed("b", G);
  append(m.parameter_names, indexed("ubar", H - 1));
  append(m.parameter_names, indexed("omega", G));
  for (int h = 0; h < H; ++h)
    for (int g = 0; g < G; ++g)
      m.decision_names.push_back("x" + std::to_string(h + 1) + "[" + std::to_string(g + 1) + "]");

  // x^h_g = lambda_h alpha^h_g omega_g / S_g with lambda_1 = 1; Newton on log lambda_{2..H}.
  m.analytic_solution = [=](const Vec& a) {
    Mat alpha(H, G);
    for (int h = 0; h < H; ++h)
      for (int g = 0; g < G; ++g) alpha(h, g) = theta(h, g) + a[g];
    if ((alpha.array() <= 0.0).any()) fail(ErrorKind::domain, "pareto_allocation: theta + b must be positive");
    Vec z = Vec::Zero(H - 1);
    auto alloc = [&](const Vec& zz, Mat& x, Vec& S) {
      Vec lam(H);
      lam[0] = 1.0;
      for (int h = 1; h < H; ++h) lam[h] = std::exp(zz[h - 1]);
      S = alpha.transpose() * lam;
      x.resize(H, G);
      for (int h = 0; h < H; ++h)
        for (int g = 0; g < G; ++g) x(h, g) = lam[h] * alpha(h, g) * a[om0 + g] / S[g];
      return lam;
    };
    Mat x;
    Vec S;
    for (int it = 0; it < 100 && H > 1; ++it) {
      const Vec lam = alloc(z, x, S);
      Vec r(H - 1);
      Mat J = Mat::Zero(H - 1, H - 1);
      for (int h = 1; h < H; ++h) {
        r[h - 1] = (alpha.row(h).array() * x.row(h).array().log()).sum() - a[ub0 + h - 1];
        for (int j = 1; j < H; ++j)
          for (int g = 0; g < G; ++g)
            J(h - 1, j - 1) += alpha(h, g) * ((h == j ? 1.0 : 0.0) - lam[j] * alpha(j, g) / S[g]);
      }
      if (r.cwiseAbs().maxCoeff() < 1e-14) break;
      z -= J.fullPivLu().solve(r);
    }
    const Vec lam = alloc(z, x, S);
    AnalyticSolution sol;
    sol.x.resize(M);
    for (int h = 0; h < H; ++h)
      for (int g = 0; g < G; ++g) sol.x[xi(h, g)] = x(h, g);
    sol.lambda.resize(K);
    for (int h = 1; h < H; ++h) sol.lambda[h - 1] = -lam[h];
    for (int g = 0; g < G; ++g) sol.lambda[H - 1 + g] = S[g] / a[om0 + g];
    return sol;
  };

  BenchmarkEntry e;
  e.name = "pareto_allocation";
  e.description = "Pareto-optimal split of a fixed bundle among log-utility households";
  Vec a0(N);
  a0.head(G) = cfg.b;
  for (int h = 1; h < H; ++h) {
    // Household h is held at the utility of an equal split.
    double u = 0.0;
    for (int g = 0; g < G; ++g) u += (theta(h, g) + cfg.b[g]) * std::log(cfg.omega[g] / H);
    a0[ub0 + h - 1] = u;
  }
  a0.tail(G) = cfg.omega;
  e.model = finalize_model(std::move(m));
  e.default_point = a0;
  e.x0 = Vec(M);
  for (int h = 0; h < H; ++h)
    for (int g = 0; g < G; ++g) e.x0[xi(h, g)] = cfg.omega[g] / H;
  e.isovectors = [=](const SolutionPoint& s) {
    Mat T = Mat::Zero(G, N);
    for (int al = 0; al < G; ++al) {
      T(al, al) = 1.0;
      for (int h = 1; h < H; ++h) T(al, ub0 + h - 1) = std::log(s.x[xi(h, al)]);
    }
    return T;
  };
  e.isovector_labels = indexed("b", G);
  {
    std::vector<int> kap;
    for (int i = ub0; i < N; ++i) kap.push_back(i);
    e.hatta = HattaForm{kap, range(0, G)};
  }

  e.properties.push_back({"omega_independence", [=](const Analysis& an, const PipelineOptions&) {
    const double w = an.iso.vectors.rightCols(G).cwiseAbs().maxCoeff();
    CheckReport c = make_check("rows_free_of_omega", "compensated derivatives do not involve omega", w, 0.0);
    return std::vector<CheckReport>{c};
  }});
  e.properties.push_back({"count", [=](const Analysis& an, const PipelineOptions&) {
    return std::vector<CheckReport>{make_check("one_row_per_taste_parameter", "A = L",
                                               std::abs(an.iso.A - G), 0.0)};
  }});
  return e;
}

}  // namespace compstat
