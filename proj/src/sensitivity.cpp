#include "compstat/sensitivity.hpp"

#include <cmath>
#include <exception>
#include <vector>

namespace compstat {

const char* to_string(SensitivityMethod m) {
  switch (m) {
    case SensitivityMethod::fd: return "fd";
    case SensitivityMethod::ift: return "ift";
    case SensitivityMethod::analytic: return "analytic";
  }
  return "unknown";
}

SensitivityMethod sensitivity_method_from_string(const std::string& s) {
  if (s == "fd") return SensitivityMethod::fd;
  if (s == "ift") return SensitivityMethod::ift;
  if (s == "analytic") return SensitivityMethod::analytic;
  fail(ErrorKind::config, "unknown sensitivity method '" + s + "'");
}

namespace {

struct StencilPoint {
  Vec x;
  Vec lambda;
};

StencilPoint resolve_at(const ProblemModel& model, const Vec& a, const Vec& warm,
                        const FdSensitivityOptions& opts, int mu) {
  if (opts.use_analytic_solution && model.analytic_solution) {
    const AnalyticSolution s = model.analytic_solution(a);
    return {s.x, s.lambda};
  }
  SolutionPoint sp;
  try {
    sp = solve_interior(model, a, warm, opts.solver);
  } catch (const Error& e) {
    fail(ErrorKind::sensitivity, "stencil solve failed for parameter " +
                                     model.parameter_names[mu] + ": " + e.what());
  }
  if (!sp.converged)
    fail(ErrorKind::sensitivity, "stencil solve did not converge for parameter " +
                                     model.parameter_names[mu] + ": " + sp.message);
  return {sp.x, sp.lambda};
}

void fd_column(const ProblemModel& model, const SolutionPoint& sol, const FdSensitivityOptions& opts,
               int mu, Mat& xj, Mat& lj) {
  const double h = opts.rel_step * std::max(1.0, std::abs(sol.a[mu]));
  Vec ap = sol.a, am = sol.a;
  ap[mu] += h;
  am[mu] -= h;
  const StencilPoint p = resolve_at(model, ap, sol.x, opts, mu);
  const StencilPoint m = resolve_at(model, am, sol.x, opts, mu);
  xj.col(mu) = (p.x - m.x) / (2.0 * h);
  if (model.K > 0) lj.col(mu) = (p.lambda - m.lambda) / (2.0 * h);
}

SensitivityBundle make_fd_bundle(const ProblemModel& model, const FdSensitivityOptions& opts) {
  SensitivityBundle b;
  b.x_jac = Mat::Zero(model.M, model.N);
  b.lambda_jac = Mat::Zero(model.K, model.N);
  b.method = SensitivityMethod::fd;
  b.step = opts.rel_step;
  return b;
}

}  // namespace

SensitivityBundle decision_jacobian_fd_serial(const ProblemModel& model, const SolutionPoint& sol,
                                              const FdSensitivityOptions& opts) {
  check_dimensions(model, sol.x, sol.a);
  SensitivityBundle b = make_fd_bundle(model, opts);
  for (int mu = 0; mu < model.N; ++mu) fd_column(model, sol, opts, mu, b.x_jac, b.lambda_jac);
  return b;
}

SensitivityBundle decision_jacobian_fd(const ProblemModel& model, const SolutionPoint& sol,
                                       const FdSensitivityOptions& opts) {
  check_dimensions(model, sol.x, sol.a);
  SensitivityBundle b = make_fd_bundle(model, opts);
  const int N = model.N;
  std::vector<std::exception_ptr> errors(N);
#pragma omp parallel for schedule(dynamic)
  for (int mu = 0; mu < N; ++mu) {
    try {
      fd_column(model, sol, opts, mu, b.x_jac, b.lambda_jac);
    } catch (...) {
      errors[mu] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return b;
}

SensitivityBundle decision_jacobian_ift(const ProblemModel& model, const SolutionPoint& sol,
                                        const FdOptions& fd) {
  check_dimensions(model, sol.x, sol.a);
  const int M = model.M, K = model.K, N = model.N;
  Mat B = Mat::Zero(M + K, M + K);
  B.topLeftCorner(M, M) = lagrangian_hessian_xx(model, sol.x, sol.a, sol.lambda, fd);
  Mat rhs(M + K, N);
  rhs.topRows(M) = -lagrangian_hessian_xa(model, sol.x, sol.a, sol.lambda, fd);
  if (K > 0) {
    const Mat Gx = constraint_jacobian_x(model, sol.x, sol.a, fd);
    B.topRightCorner(M, K) = Gx.transpose();
    B.bottomLeftCorner(K, M) = Gx;
    rhs.bottomRows(K) = -constraint_jacobian_a(model, sol.x, sol.a, fd);
  }
  Eigen::FullPivLU<Mat> lu(B);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible())
    fail(ErrorKind::degeneracy, "singular bordered Hessian in model " + model.name +
                                    " (zero in the spectrum of L on the tangent space)");
  const Mat sol_mat = lu.solve(rhs);
  SensitivityBundle b;
  b.x_jac = sol_mat.topRows(M);
  b.lambda_jac = sol_mat.bottomRows(K);
  b.method = SensitivityMethod::ift;
  return b;
}

SensitivityBundle decision_jacobian_analytic(const ProblemModel& model, const SolutionPoint& sol) {
  if (!model.analytic_jacobian)
    fail(ErrorKind::config, "model " + model.name + " has no analytic Jacobian");
  const AnalyticJacobian j = model.analytic_jacobian(sol.a);
  if (j.x_jac.rows() != model.M || j.x_jac.cols() != model.N ||
      j.lambda_jac.rows() != model.K || j.lambda_jac.cols() != model.N)
    fail(ErrorKind::dimension, "analytic Jacobian of " + model.name + " has wrong shape");
  SensitivityBundle b;
  b.x_jac = j.x_jac;
  b.lambda_jac = j.lambda_jac;
  b.method = SensitivityMethod::analytic;
  return b;
}

double constraint_identity_residual(const ProblemModel& model, const SolutionPoint& sol,
                                    const SensitivityBundle& sens, const FdOptions& fd) {
  if (model.K == 0) return 0.0;
  const Mat R = constraint_jacobian_a(model, sol.x, sol.a, fd) +
                constraint_jacobian_x(model, sol.x, sol.a, fd) * sens.x_jac;
  return R.cwiseAbs().maxCoeff();
}

double cross_check(SensitivityBundle& a, SensitivityBundle& b) {
  const double r = (a.x_jac - b.x_jac).cwiseAbs().maxCoeff();
  a.cross_check_residual = r;
  b.cross_check_residual = r;
  return r;
}

}  // namespace compstat
