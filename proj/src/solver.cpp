#include "compstat/solver.hpp"

#include <cmath>
#include <sstream>

namespace compstat {

const char* to_string(SolutionSource s) { return s == SolutionSource::analytic ? "analytic" : "newton"; }

namespace {

Vec kkt_vector(const ProblemModel& model, const Vec& x, const Vec& a, const Vec& lambda,
               const FdOptions& fd) {
  Vec r(model.M + model.K);
  r.head(model.M) = lagrangian_gradient_x(model, x, a, lambda, fd);
  for (int k = 0; k < model.K; ++k)
    r[model.M + k] = evaluate(model.constraints[k], x, a, "g" + std::to_string(k + 1));
  return r;
}

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Mat null_space_columns(const Mat& G, double rel_tol) {
  const int n = static_cast<int>(G.cols());
  if (G.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * smax && s[i] > 0.0) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

double kkt_residual(const ProblemModel& model, const Vec& x, const Vec& a, const Vec& lambda,
                    const FdOptions& fd) {
  return inf_norm(kkt_vector(model, x, a, lambda, fd));
}

MultiplierResult recover_multipliers(const ProblemModel& model, const Vec& x, const Vec& a,
                                     const FdOptions& fd) {
  check_dimensions(model, x, a);
  const Vec gf = gradient(model.objective, Wrt::x, x, a, fd, "f");
  MultiplierResult r;
  if (model.K == 0) {
    r.lambda = Vec(0);
    r.residual = gf.norm();
    return r;
  }
  const Mat Gt = constraint_jacobian_x(model, x, a, fd).transpose();  // M x K
  Eigen::ColPivHouseholderQR<Mat> qr(Gt);
  qr.setThreshold(1e-10);
  if (qr.rank() < model.K)
    fail(ErrorKind::rank_deficiency, "constraint gradients are linearly dependent at x");
  r.lambda = qr.solve(-gf);
  r.residual = (gf + Gt * r.lambda).norm();
  return r;
}

SolutionPoint solve_interior(const ProblemModel& model, const Vec& a, const Vec& x0,
                             const SolverOptions& opts) {
  check_dimensions(model, x0, a);
  const int M = model.M, K = model.K;
  SolutionPoint sp;
  sp.a = a;
  sp.source = SolutionSource::newton;
  Vec x = x0;
  Vec lambda = recover_multipliers(model, x, a, opts.fd).lambda;
  Vec r = kkt_vector(model, x, a, lambda, opts.fd);
  double rn = inf_norm(r);
  int it = 0;
  bool polished = false;
  for (; it < opts.max_iter; ++it) {
    if (rn <= opts.tol) {
      // One extra step once inside tolerance drives the residual to roundoff,
      // which keeps finite-difference stencils of x(a) clean.
      if (polished) break;
      polished = true;
    }
    Mat J = Mat::Zero(M + K, M + K);
    J.topLeftCorner(M, M) = lagrangian_hessian_xx(model, x, a, lambda, opts.fd);
    if (K > 0) {
      const Mat G = constraint_jacobian_x(model, x, a, opts.fd);
      J.topRightCorner(M, K) = G.transpose();
      J.bottomLeftCorner(K, M) = G;
    }
    Eigen::FullPivLU<Mat> lu(J);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible())
      fail(ErrorKind::rank_deficiency, "singular Newton system in model " + model.name);
    const Vec d = lu.solve(-r);
    double t = 1.0;
    bool accepted = false;
    for (int b = 0; b <= opts.max_backtracks; ++b, t *= 0.5) {
      const Vec xt = x + t * d.head(M);
      const Vec lt = lambda + t * d.tail(K);
      Vec rt;
      try {
        evaluate(model.objective, xt, a, "f");
        rt = kkt_vector(model, xt, a, lt, opts.fd);
      } catch (const Error&) {
        continue;  // left the evaluable domain, shorten the step
      }
      const double rtn = inf_norm(rt);
      if (rtn < rn) {
        x = xt;
        lambda = lt;
        r = rt;
        rn = rtn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (rn > opts.tol) sp.message = "line search failed to reduce the KKT residual";
      ++it;
      break;
    }
  }
  sp.x = x;
  sp.lambda = lambda;
  sp.kkt_residual = rn;
  sp.iterations = it;
  sp.converged = rn <= opts.tol;
  if (!sp.converged && sp.message.empty()) {
    std::ostringstream os;
    os << "iteration cap " << opts.max_iter << " reached, KKT residual " << rn;
    sp.message = os.str();
  }
  return sp;
}

SolutionPoint solve(const ProblemModel& model, const Vec& a, const Vec& x0, const SolverOptions& opts,
                    bool prefer_analytic) {
  if (!(prefer_analytic && model.analytic_solution)) return solve_interior(model, a, x0, opts);
  const AnalyticSolution an = model.analytic_solution(a);
  SolutionPoint sp;
  sp.a = a;
  sp.x = an.x;
  sp.lambda = an.lambda;
  sp.source = SolutionSource::analytic;
  sp.kkt_residual = kkt_residual(model, an.x, a, an.lambda, opts.fd);
  sp.converged = sp.kkt_residual <= std::max(opts.tol, 1e-10);
  try {
    const SolutionPoint nw = solve_interior(model, a, x0, opts);
    sp.newton_discrepancy = nw.converged ? inf_norm(nw.x - an.x) : std::numeric_limits<double>::infinity();
    sp.iterations = nw.iterations;
  } catch (const Error& e) {
    sp.newton_discrepancy = std::numeric_limits<double>::infinity();
    sp.message = std::string("newton cross-check failed: ") + e.what();
  }
  return sp;
}

SecondOrderReport check_second_order(const ProblemModel& model, const SolutionPoint& sol, double tol,
                                     const FdOptions& fd) {
  const Mat H = lagrangian_hessian_xx(model, sol.x, sol.a, sol.lambda, fd);
  const Mat Z = null_space_columns(constraint_jacobian_x(model, sol.x, sol.a, fd));
  SecondOrderReport rep;
  rep.scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if (Z.cols() == 0) {
    rep.pass = true;
    return rep;
  }
  Mat P = Z.transpose() * H * Z;
  P = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(P, Eigen::EigenvaluesOnly);
  rep.max_projected_eigenvalue = es.eigenvalues().maxCoeff();
  rep.pass = rep.max_projected_eigenvalue <= tol * rep.scale;
  rep.strictly_negative = rep.max_projected_eigenvalue < -tol * rep.scale;
  return rep;
}

}  // namespace compstat
