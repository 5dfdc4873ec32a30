#include "compstat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace compstat {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::skipped: return "skipped";
  }
  return "unknown";
}

CheckReport make_check(std::string name, std::string claim, double residual, double tolerance) {
  CheckReport r;
  r.name = std::move(name);
  r.claim = std::move(claim);
  r.residual = residual;
  r.tolerance = tolerance;
  r.verdict = (std::isfinite(residual) && residual <= tolerance) ? Verdict::pass : Verdict::fail;
  if (r.failed()) {
    std::ostringstream os;
    os << "residual " << residual << " exceeds tolerance " << tolerance;
    r.reason = os.str();
  }
  return r;
}

CheckReport skipped_check(std::string name, std::string claim, std::string reason) {
  CheckReport r;
  r.name = std::move(name);
  r.claim = std::move(claim);
  r.reason = std::move(reason);
  r.verdict = Verdict::skipped;
  r.residual = std::numeric_limits<double>::quiet_NaN();
  return r;
}

CheckReport boolean_check(std::string name, std::string claim, bool ok, std::string reason_if_false) {
  CheckReport r = make_check(std::move(name), std::move(claim), ok ? 0.0 : 1.0, 0.0);
  if (!ok && !reason_if_false.empty()) r.reason = std::move(reason_if_false);
  return r;
}

CheckReport check_close(std::string name, std::string claim, const Mat& a, const Mat& b, double tol,
                        double floor) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    CheckReport r = make_check(std::move(name), std::move(claim), std::numeric_limits<double>::infinity(), tol);
    r.reason = "shape mismatch";
    return r;
  }
  const double diff = a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
  const double scale = std::max(floor, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  CheckReport r = make_check(std::move(name), std::move(claim), diff / scale, tol);
  r.values.emplace_back("scale", scale);
  return r;
}

CheckReport check_scalar(std::string name, std::string claim, double value, double expected, double tol) {
  CheckReport r = make_check(std::move(name), std::move(claim), std::abs(value - expected), tol);
  r.values.emplace_back("value", value);
  r.values.emplace_back("expected", expected);
  return r;
}

CheckReport check_symmetry(std::string name, const Mat& m, double tol) {
  const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  const double res = m.size() ? (m - m.transpose()).cwiseAbs().maxCoeff() : 0.0;
  return make_check(std::move(name), "matrix is symmetric", res / scale, tol);
}

CheckReport check_semidefinite(std::string name, const Mat& m, SignConvention expected, double tol) {
  const bool positive = expected == SignConvention::positive_semidefinite_expected;
  const std::string claim = positive ? "matrix is symmetric positive semidefinite"
                                     : "matrix is symmetric negative semidefinite";
  if (m.rows() != m.cols()) {
    CheckReport r = make_check(std::move(name), claim, std::numeric_limits<double>::infinity(), tol);
    r.reason = "matrix is not square";
    return r;
  }
  if (m.size() == 0) return make_check(std::move(name), claim, 0.0, tol);
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  const double scale = std::max(1.0, std::max(ev.cwiseAbs().maxCoeff(), m.cwiseAbs().maxCoeff()));
  const double sym_res = (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
  const double wrong_sign = positive ? std::max(0.0, -ev.minCoeff()) : std::max(0.0, ev.maxCoeff());
  CheckReport r = make_check(std::move(name), claim, std::max(sym_res, wrong_sign / scale), tol);
  r.values.emplace_back("symmetry_residual", sym_res);
  r.values.emplace_back("min_eigenvalue", ev.minCoeff());
  r.values.emplace_back("max_eigenvalue", ev.maxCoeff());
  return r;
}

CheckReport check_rank_bound(std::string name, const CsmResult& csm, int bound) {
  CheckReport r = make_check(std::move(name), "rank does not exceed " + std::to_string(bound),
                             std::max(0, csm.rank_estimate - bound), 0.0);
  r.values.emplace_back("rank", csm.rank_estimate);
  r.values.emplace_back("bound", bound);
  return r;
}

CheckReport check_rank_bound(const CsmResult& csm, int M, int K, int A) {
  return check_rank_bound(std::string("rank_bound_") + to_string(csm.recipe), csm, std::min(M - K, A));
}

CheckReport check_rank_equals(std::string name, const CsmResult& csm, int expected) {
  CheckReport r = make_check(std::move(name), "rank equals " + std::to_string(expected),
                             std::abs(csm.rank_estimate - expected), 0.0);
  r.values.emplace_back("rank", csm.rank_estimate);
  r.values.emplace_back("expected", expected);
  return r;
}

CheckReport check_null_vector(std::string name, const Mat& m, const Vec& v, double tol) {
  const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0) * std::max(1e-300, v.norm());
  const double res = std::max((m * v).cwiseAbs().maxCoeff(), (v.transpose() * m).cwiseAbs().maxCoeff());
  return make_check(std::move(name), "vector annihilates the matrix from both sides", res / scale, tol);
}

CheckReport check_envelope(const ProblemModel& model, const SolutionPoint& sol, const IsovectorSet& iso,
                           const EnvelopeOptions& opts) {
  const std::string claim = "derivative of the value function along each isovector equals f_{;a} at fixed x";
  const Vec f_a = gradient(model.objective, Wrt::a, sol.x, sol.a, opts.solver.fd, "f");
  double worst = 0.0;
  Vec v_semi(iso.A), f_semi(iso.A);
  for (int al = 0; al < iso.A; ++al) {
    const Vec t = iso.vectors.row(al).transpose();
    const double tn = t.norm();
    if (tn == 0.0) {
      v_semi[al] = f_semi[al] = 0.0;
      continue;
    }
    const double h = opts.rel_step * std::max(1.0, sol.a.cwiseAbs().maxCoeff()) / tn;
    double V[2];
    for (int s = 0; s < 2; ++s) {
      const Vec a = sol.a + (s == 0 ? h : -h) * t;
      SolutionPoint p;
      try {
        p = solve(model, a, sol.x, opts.solver, opts.prefer_analytic);
      } catch (const Error& e) {
        return skipped_check("envelope", claim, std::string("stencil_solve_failed: ") + e.what());
      }
      if (!p.converged) return skipped_check("envelope", claim, "stencil_not_converged: " + p.message);
      V[s] = evaluate(model.objective, p.x, a, "f");
    }
    v_semi[al] = (V[0] - V[1]) / (2.0 * h);
    f_semi[al] = t.dot(f_a);
    worst = std::max(worst, std::abs(v_semi[al] - f_semi[al]) / std::max(1.0, std::abs(f_semi[al])));
  }
  CheckReport r = make_check("envelope", claim, worst, opts.tol);
  if (iso.annihilates_objective) {
    const double vmax = iso.A ? v_semi.cwiseAbs().maxCoeff() : 0.0;
    r.values.emplace_back("max_abs_value_derivative", vmax);
    if (vmax > opts.tol) {
      r.verdict = Verdict::fail;
      r.residual = std::max(r.residual, vmax);
      r.reason = "isovectors annihilate f but the value function is not stationary along them";
    }
  }
  try {
    const SecondOrderReport so = check_second_order(model, sol);
    r.values.emplace_back("projected_hessian_max_eigenvalue", so.max_projected_eigenvalue);
    r.values.emplace_back("projected_hessian_strictly_negative", so.strictly_negative ? 1.0 : 0.0);
  } catch (const Error&) {
  }
  return r;
}

CheckReport check_invariance(const ProblemModel& model, const InvarianceGenerator& gen, const SolutionPoint& sol,
                             const SensitivityBundle& sens, double tol) {
  const std::string name = "invariance_" + gen.name;
  const std::string claim = "X(x) - sum_mu A_mu x_{,mu} vanishes";
  const Vec X = gen.X_map ? gen.X_map(sol.x) : Vec::Zero(model.M);
  const Vec A = gen.A_map ? gen.A_map(sol.a) : Vec::Zero(model.N);
  if (X.size() != model.M || A.size() != model.N) {
    CheckReport r = make_check(name, claim, std::numeric_limits<double>::infinity(), tol);
    r.reason = "generator maps have the wrong length";
    return r;
  }
  const Vec res = X - sens.x_jac * A;
  const double scale = std::max(1.0, sol.x.cwiseAbs().maxCoeff());
  return make_check(name, claim, res.cwiseAbs().maxCoeff() / scale, tol);
}

CheckReport check_generator_response(const ProblemModel& model, const InvarianceGenerator& gen,
                                     const SolutionPoint& sol, double tol) {
  const std::vector<double> res = generator_residuals(model, gen, sol.x, sol.a);
  double worst = 0.0;
  for (double r : res) worst = std::max(worst, std::abs(r));
  const double scale = std::max(1.0, std::abs(evaluate(model.objective, sol.x, sol.a, "f")));
  return make_check("generator_response_" + gen.name, "J f = F(f) and J g = G(g)", worst / scale, tol);
}

CheckReport check_conformance(const ProblemModel& model, const SolutionPoint& sol, const SensitivityBundle& sens,
                              const IsovectorSet& iso, double tol) {
  const std::string claim = "sum_i g^k_{,i} x_{i;a} = 0";
  if (model.K == 0) return skipped_check("conformance", claim, "unconstrained");
  const Mat Gx = constraint_jacobian_x(model, sol.x, sol.a);
  const ConformanceTable t = verify_conformance(gcd_apply(iso, sens.x_jac), Gx, tol);
  const double scale = std::max(1.0, Gx.cwiseAbs().maxCoeff() * std::max(1.0, sens.x_jac.cwiseAbs().maxCoeff()));
  return make_check("conformance", claim, t.max_abs / scale, tol);
}

CheckReport check_null_property(const IsovectorSet& iso, double tol) {
  const std::string claim = "every isovector annihilates every target gradient";
  if (iso.null_residuals.size() == 0) return make_check("null_property", claim, 0.0, tol);
  return make_check("null_property", claim, iso.null_residuals.cwiseAbs().maxCoeff(), tol);
}

HattaResult hatta_reduction(const ProblemModel& model, const SolutionPoint& sol, const SensitivityBundle& sens,
                            const HattaForm& form, double tol) {
  const std::string claim = "Hatta-form compensated matrix equals the generic assembly with the same rows";
  HattaResult out;
  if (static_cast<int>(form.kappa_indices.size()) != model.K) {
    out.check = skipped_check("hatta_reduction", claim, "kappa_count_mismatch");
    return out;
  }
  std::vector<int> p = form.p_indices;
  if (p.empty())
    for (int mu = 0; mu < model.N; ++mu)
      if (std::find(form.kappa_indices.begin(), form.kappa_indices.end(), mu) == form.kappa_indices.end())
        p.push_back(mu);

  const PointDerivatives d = point_derivatives(model, sol);
  // Separable form: dg^l/dkappa_l' = delta, f and the x-gradients free of kappa.
  for (int l = 0; l < model.K; ++l) {
    for (int lp = 0; lp < model.K; ++lp) {
      const double want = l == lp ? 1.0 : 0.0;
      if (std::abs(d.g_a(l, form.kappa_indices[lp]) - want) > 1e-8) {
        out.check = skipped_check("hatta_reduction", claim, "not_separable");
        return out;
      }
      if (d.g_xa[l].col(form.kappa_indices[lp]).cwiseAbs().maxCoeff() > 1e-8) {
        out.check = skipped_check("hatta_reduction", claim, "not_separable");
        return out;
      }
    }
  }
  for (int kap : form.kappa_indices) {
    if (std::abs(d.f_a[kap]) > 1e-8 || d.f_xa.col(kap).cwiseAbs().maxCoeff() > 1e-8) {
      out.check = skipped_check("hatta_reduction", claim, "objective_depends_on_kappa");
      return out;
    }
  }

  const int A = static_cast<int>(p.size());
  out.rows = Mat::Zero(A, model.N);
  for (int al = 0; al < A; ++al) {
    out.rows(al, p[al]) = 1.0;
    for (int l = 0; l < model.K; ++l) out.rows(al, form.kappa_indices[l]) -= d.g_a(l, p[al]);
  }
  const Mat x_semi = sens.x_jac * out.rows.transpose();  // M x A
  Mat coeff(model.M, A);                                 // f_{,ia} - sum lambda k^l_{,ia}
  for (int al = 0; al < A; ++al) {
    coeff.col(al) = d.f_xa.col(p[al]);
    for (int l = 0; l < model.K; ++l) coeff.col(al) += sol.lambda[l] * d.g_xa[l].col(p[al]);
  }
  out.matrix = coeff.transpose() * x_semi;

  IsovectorSet iso;
  iso.vectors = out.rows;
  iso.A = A;
  iso.basis_kind = BasisKind::prescribed;
  out.omega = build_omega(model, sol, sens, iso).matrix;
  out.check = check_close("hatta_reduction", claim, out.matrix, out.omega, tol);
  return out;
}

CheckReport check_hatta_reduction(const ProblemModel& model, const SolutionPoint& sol,
                                  const SensitivityBundle& sens, const HattaForm& form, double tol) {
  return hatta_reduction(model, sol, sens, form, tol).check;
}

}  // namespace compstat
