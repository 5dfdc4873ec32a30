#include "compstat/csm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace compstat {

const char* to_string(Recipe r) {
  switch (r) {
    case Recipe::omega: return "omega";
    case Recipe::omega_quadratic: return "omega_quadratic";
    case Recipe::omega_A1: return "omega_A1";
    case Recipe::omega_A2: return "omega_A2";
    case Recipe::omega_B: return "omega_B";
    case Recipe::silberberg_S: return "silberberg_S";
    case Recipe::universal_U: return "universal_U";
    case Recipe::transformed: return "transformed";
    case Recipe::reparameterized: return "reparameterized";
    case Recipe::application: return "application";
  }
  return "unknown";
}

Recipe recipe_from_string(const std::string& s) {
  for (Recipe r : {Recipe::omega, Recipe::omega_quadratic, Recipe::omega_A1, Recipe::omega_A2,
                   Recipe::omega_B, Recipe::silberberg_S, Recipe::universal_U, Recipe::transformed,
                   Recipe::reparameterized, Recipe::application})
    if (s == to_string(r)) return r;
  fail(ErrorKind::config, "unknown CSM recipe '" + s + "'");
}

const char* to_string(SignConvention s) {
  return s == SignConvention::positive_semidefinite_expected ? "positive_semidefinite_expected"
                                                             : "negative_semidefinite_expected";
}

const char* to_string(TransformKind k) {
  switch (k) {
    case TransformKind::congruence: return "congruence";
    case TransformKind::singular_square: return "singular_square";
    case TransformKind::contraction: return "contraction";
    case TransformKind::expansion: return "expansion";
  }
  return "unknown";
}

double CsmResult::scale() const {
  double s = matrix.size() ? matrix.cwiseAbs().maxCoeff() : 0.0;
  if (eigenvalues.size()) s = std::max(s, eigenvalues.cwiseAbs().maxCoeff());
  return s;
}

int estimate_rank(const Vec& ev, double rel_tol, double abs_floor) {
  if (ev.size() == 0) return 0;
  const double cut = std::max(rel_tol * ev.cwiseAbs().maxCoeff(), abs_floor);
  int r = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) > cut) ++r;
  return r;
}

CsmResult make_csm(const Mat& matrix, Recipe recipe, SignConvention sign, std::vector<std::string> labels,
                   const CsmTolerances& tol) {
  CsmResult c;
  c.matrix = matrix;
  c.recipe = recipe;
  c.sign_convention = sign;
  c.rank_tol = tol.rank_tol;
  c.symmetry_tol = tol.symmetry_tol;
  c.labels = std::move(labels);
  if (matrix.rows() != matrix.cols()) fail(ErrorKind::dimension, "CSM must be square");
  if (matrix.size() == 0) {
    c.eigenvalues = Vec(0);
    return c;
  }
  if (!matrix.allFinite()) fail(ErrorKind::evaluation, std::string("non-finite entries in ") + to_string(recipe));
  c.symmetry_residual = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  const Mat sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  c.eigenvalues = es.eigenvalues();
  c.rank_estimate = estimate_rank(c.eigenvalues, tol.rank_tol, tol.abs_floor);
  return c;
}

PointDerivatives point_derivatives(const ProblemModel& model, const SolutionPoint& sol, const FdOptions& fd) {
  const Vec& x = sol.x;
  const Vec& a = sol.a;
  check_dimensions(model, x, a);
  PointDerivatives d;
  d.f = evaluate(model.objective, x, a, "f");
  d.f_x = gradient(model.objective, Wrt::x, x, a, fd, "f");
  d.f_a = gradient(model.objective, Wrt::a, x, a, fd, "f");
  d.f_xx = hessian_xx(model.objective, x, a, fd, "f");
  d.f_xa = hessian_xa(model.objective, x, a, fd, "f");
  d.g_x = Mat(model.K, model.M);
  d.g_a = Mat(model.K, model.N);
  d.L_xx = d.f_xx;
  d.L_xa = d.f_xa;
  for (int k = 0; k < model.K; ++k) {
    const auto& g = model.constraints[k];
    const std::string lab = "g" + std::to_string(k + 1);
    d.g_x.row(k) = gradient(g, Wrt::x, x, a, fd, lab).transpose();
    d.g_a.row(k) = gradient(g, Wrt::a, x, a, fd, lab).transpose();
    d.g_xx.push_back(hessian_xx(g, x, a, fd, lab));
    d.g_xa.push_back(hessian_xa(g, x, a, fd, lab));
    d.L_xx += sol.lambda[k] * d.g_xx.back();
    d.L_xa += sol.lambda[k] * d.g_xa.back();
  }
  return d;
}

std::vector<std::string> isovector_labels(const ProblemModel& model, const IsovectorSet& iso) {
  if (static_cast<int>(iso.labels.size()) == iso.A) return iso.labels;
  std::vector<std::string> out;
  const bool is_identity = iso.A == model.N && iso.vectors.isIdentity(0.0);
  for (int i = 0; i < iso.A; ++i)
    out.push_back(is_identity ? model.parameter_names[i] : "t" + std::to_string(i + 1));
  return out;
}

namespace {

void check_bundle(const ProblemModel& model, const SensitivityBundle& sens) {
  if (sens.x_jac.rows() != model.M || sens.x_jac.cols() != model.N)
    fail(ErrorKind::dimension, "sensitivity bundle does not match model " + model.name);
}

void check_iso(const ProblemModel& model, const IsovectorSet& iso) {
  if (iso.vectors.cols() != model.N) fail(ErrorKind::dimension, "isovector length differs from N");
}

}  // namespace

CsmResult build_omega(const ProblemModel& model, const SolutionPoint& sol, const SensitivityBundle& sens,
                      const IsovectorSet& iso, const CsmTolerances& tol) {
  check_bundle(model, sens);
  check_iso(model, iso);
  const PointDerivatives d = point_derivatives(model, sol);
  const Mat T = iso.vectors.transpose();        // N x A
  const Mat L_semi = d.L_xa * T;                // L_{,i;alpha}
  const Mat x_semi = sens.x_jac * T;            // x_{i;beta}
  return make_csm(L_semi.transpose() * x_semi, Recipe::omega,
                  SignConvention::positive_semidefinite_expected, isovector_labels(model, iso), tol);
}

CsmResult build_omega_quadratic(const ProblemModel& model, const SolutionPoint& sol,
                                const SensitivityBundle& sens, const IsovectorSet& iso,
                                const CsmTolerances& tol) {
  check_bundle(model, sens);
  check_iso(model, iso);
  const Mat H = lagrangian_hessian_xx(model, sol.x, sol.a, sol.lambda);
  const Mat x_semi = gcd_apply(iso, sens.x_jac);
  return make_csm(-x_semi.transpose() * H * x_semi, Recipe::omega_quadratic,
                  SignConvention::positive_semidefinite_expected, isovector_labels(model, iso), tol);
}

CsmResult build_omega_a1(const ProblemModel& model, const SolutionPoint& sol, const SensitivityBundle& sens,
                         double shift, const CsmTolerances& tol) {
  check_bundle(model, sens);
  if (model.K != 0) fail(ErrorKind::config, "omega_A1 applies to unconstrained problems only");
  const PointDerivatives d = point_derivatives(model, sol);
  const double F = d.f + shift;
  if (!(F > 0.0)) {
    std::ostringstream os;
    os << "omega_A1 needs f + c > 0 (f = " << d.f << ", c = " << shift
       << "); add a constant shift c to the objective";
    fail(ErrorKind::domain, os.str());
  }
  const Mat log_xa = d.f_xa / F - d.f_x * d.f_a.transpose() / (F * F);  // [log F]_{,i mu}
  CsmResult c = make_csm(F * log_xa.transpose() * sens.x_jac, Recipe::omega_A1,
                         SignConvention::positive_semidefinite_expected, model.parameter_names, tol);
  if (shift != 0.0) c.note = "objective shifted by " + std::to_string(shift);
  return c;
}

CsmResult build_omega_a2(const ProblemModel& model, const SolutionPoint& sol, const SensitivityBundle& sens,
                         const CsmTolerances& tol) {
  check_bundle(model, sens);
  if (model.K != 0) fail(ErrorKind::config, "omega_A2 applies to unconstrained problems only");
  const Mat f_xa = hessian_xa(model.objective, sol.x, sol.a);
  return make_csm(f_xa.transpose() * sens.x_jac, Recipe::omega_A2,
                  SignConvention::positive_semidefinite_expected, model.parameter_names, tol);
}

CsmResult build_omega_b(const ProblemModel& model, const SolutionPoint& sol, const SensitivityBundle& sens,
                        const IsovectorSet& iso, double shift, const CsmTolerances& tol) {
  check_bundle(model, sens);
  check_iso(model, iso);
  const PointDerivatives d = point_derivatives(model, sol);
  const double F = d.f + shift;
  if (!(F > 0.0)) {
    std::ostringstream os;
    os << "omega_B needs f + c > 0 (f = " << d.f << ", c = " << shift
       << "); add a constant shift c to the objective";
    fail(ErrorKind::domain, os.str());
  }
  const Mat T = iso.vectors.transpose();
  const Vec F_semi = iso.vectors * d.f_a;  // F_{;alpha}
  Mat bracket = (d.f_xa * T) / F - d.f_x * F_semi.transpose() / (F * F);
  for (int k = 0; k < model.K; ++k) bracket += (sol.lambda[k] / F) * (d.g_xa[k] * T);
  const Mat x_semi = sens.x_jac * T;
  CsmResult c = make_csm(F * bracket.transpose() * x_semi, Recipe::omega_B,
                         SignConvention::positive_semidefinite_expected, isovector_labels(model, iso), tol);
  c.note = "multipliers of the log-objective problem, lambda/(f+c)";
  if (shift != 0.0) c.note += "; objective shifted by " + std::to_string(shift);
  return c;
}

SilberbergResult build_silberberg(const ProblemModel& model, const SolutionPoint& sol,
                                  const SensitivityBundle& sens, double tol, const CsmTolerances& ctol) {
  check_bundle(model, sens);
  const PointDerivatives d = point_derivatives(model, sol);
  Mat S = d.L_xa.transpose() * sens.x_jac;
  if (model.K > 0) S += d.g_a.transpose() * sens.lambda_jac;
  SilberbergResult r;
  r.csm = make_csm(S, Recipe::silberberg_S, SignConvention::positive_semidefinite_expected,
                   model.parameter_names, ctol);
  r.tangent_basis = null_space_columns(d.g_a);
  Mat R = r.tangent_basis.transpose() * S * r.tangent_basis;
  R = 0.5 * (R + R.transpose());
  if (R.size() == 0) {
    r.restricted_eigenvalues = Vec(0);
    r.constrained_psd = true;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(R, Eigen::EigenvaluesOnly);
  r.restricted_eigenvalues = es.eigenvalues();
  const double scale = std::max(r.restricted_eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
  r.constrained_psd = r.restricted_eigenvalues.minCoeff() >= -tol * std::max(scale, 1.0);
  return r;
}

Mat tangent_projector(const Mat& g_x) {
  const int M = static_cast<int>(g_x.cols());
  if (g_x.rows() == 0) return Mat::Identity(M, M);
  const Mat G = g_x * g_x.transpose();
  Eigen::FullPivLU<Mat> lu(G);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible())
    fail(ErrorKind::constraint_qualification, "Gram matrix of constraint gradients is singular");
  return Mat::Identity(M, M) - g_x.transpose() * lu.solve(g_x);
}

CsmResult build_universal(const ProblemModel& model, const SolutionPoint& sol, const SensitivityBundle& sens,
                          const CsmTolerances& tol) {
  check_bundle(model, sens);
  const PointDerivatives d = point_derivatives(model, sol);
  const Mat P = tangent_projector(d.g_x);
  Mat inner = d.L_xa;
  if (model.K > 0) {
    const Mat G = d.g_x * d.g_x.transpose();
    inner -= d.L_xx * d.g_x.transpose() * G.fullPivLu().solve(d.g_a);
  }
  return make_csm(sens.x_jac.transpose() * P * inner, Recipe::universal_U,
                  SignConvention::positive_semidefinite_expected, model.parameter_names, tol);
}

TransformResult transform_csm(const CsmResult& csm, const Mat& T, const CsmTolerances& tol) {
  if (T.cols() != csm.matrix.rows())
    fail(ErrorKind::dimension, "transform_csm: T must have as many columns as the CSM has rows");
  TransformResult r;
  if (T.rows() == T.cols()) {
    Eigen::FullPivLU<Mat> lu(T);
    lu.setThreshold(1e-10);
    r.kind = lu.isInvertible() ? TransformKind::congruence : TransformKind::singular_square;
  } else {
    r.kind = T.rows() < T.cols() ? TransformKind::contraction : TransformKind::expansion;
  }
  r.csm = make_csm(T * csm.matrix * T.transpose(), Recipe::transformed, csm.sign_convention, {}, tol);
  r.csm.note = std::string(to_string(r.kind)) + " of " + to_string(csm.recipe);
  return r;
}

CoordinateMap CoordinateMap::identity() {
  CoordinateMap m;
  m.forward = [](const Vec& z) { return z; };
  m.jacobian = [](const Vec& z) -> Mat { return Mat::Identity(z.size(), z.size()); };
  return m;
}

Mat map_jacobian(const CoordinateMap& map, const Vec& z) {
  if (map.jacobian) return map.jacobian(z);
  const Vec z0 = map.forward(z);
  Mat J(z0.size(), z.size());
  Vec zp = z;
  const FdOptions fd;
  for (int j = 0; j < z.size(); ++j) {
    const double h = fd.rel_step * std::max(1.0, std::abs(z[j]));
    zp[j] = z[j] + h;
    const Vec fp = map.forward(zp);
    zp[j] = z[j] - h;
    const Vec fm = map.forward(zp);
    zp[j] = z[j];
    J.col(j) = (fp - fm) / (2.0 * h);
  }
  return J;
}

namespace {

// Returns the factorization of J^T.
Eigen::FullPivLU<Mat> checked_lu(const Mat& J, const std::string& what) {
  if (J.rows() != J.cols()) fail(ErrorKind::transformation, what + " Jacobian is not square");
  Eigen::JacobiSVD<Mat> svd(J);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] <= 1e-10 * s[0]) {
    std::ostringstream os;
    os << what << " Jacobian is singular (smallest/largest singular value "
       << (s.size() ? s[s.size() - 1] / s[0] : 0.0) << ")";
    fail(ErrorKind::transformation, os.str());
  }
  return Eigen::FullPivLU<Mat>(J.transpose());
}

}  // namespace

ReparameterizedCsm reparameterize_csm(const ProblemModel& model, const SolutionPoint& sol,
                                      const SensitivityBundle& sens, const IsovectorSet& iso,
                                      const CoordinateMap& decision_map, const CoordinateMap& parameter_map,
                                      const CsmTolerances& tol) {
  check_bundle(model, sens);
  check_iso(model, iso);
  ReparameterizedCsm r;
  r.decision_jacobian = map_jacobian(decision_map, sol.x);
  r.parameter_jacobian = map_jacobian(parameter_map, sol.a);
  const auto lu_dt = checked_lu(r.decision_jacobian, "decision map");
  const auto lu_pt = checked_lu(r.parameter_jacobian, "parameter map");
  const PointDerivatives d = point_derivatives(model, sol);
  const Mat T = iso.vectors.transpose();
  const Mat L_semi = d.L_xa * T;  // M x A
  // x~_{j,nu} = sum (dx~_j/dx_i) x_{i,mu} (da_mu/da~_nu)
  r.x_jac_tilde = r.decision_jacobian * lu_pt.solve(sens.x_jac.transpose()).transpose();
  r.isovectors_tilde = (r.parameter_jacobian * T).transpose();  // A x N
  // C~ factors: (dx/dx~)^T L_semi and t~
  const Mat C_left = lu_dt.solve(L_semi);  // J_d^{-T} L_semi
  Mat omega = C_left.transpose() * r.x_jac_tilde * r.isovectors_tilde.transpose();
  r.csm = make_csm(omega, Recipe::reparameterized, SignConvention::positive_semidefinite_expected,
                   isovector_labels(model, iso), tol);
  return r;
}

SpectralRelation spectral_relation(const CsmResult& csm, const Mat& hessian_L, const Mat& x_semicolon) {
  if (x_semicolon.cols() != csm.matrix.rows() || x_semicolon.rows() != hessian_L.rows())
    fail(ErrorKind::dimension, "spectral_relation: dimension mismatch");
  SpectralRelation s;
  const Mat sym = 0.5 * (csm.matrix + csm.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> ec(sym);
  s.csm_eigenvalues = ec.eigenvalues();
  s.csm_eigenvectors = ec.eigenvectors();
  const Mat H = 0.5 * (hessian_L + hessian_L.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eh(H);
  s.hessian_eigenvalues = eh.eigenvalues();
  s.hessian_eigenvectors = eh.eigenvectors();
  s.mixing_vectors = x_semicolon * s.csm_eigenvectors;
  const Mat proj = s.hessian_eigenvectors.transpose() * s.mixing_vectors;  // (q^g . b^I)
  const int A = static_cast<int>(s.csm_eigenvalues.size());
  s.reconstruction_residual.resize(A);
  double qmax = 0.0;
  for (int g = 0; g < A; ++g) {
    double recon = 0.0;
    for (int I = 0; I < proj.rows(); ++I) recon -= proj(I, g) * proj(I, g) * s.hessian_eigenvalues[I];
    s.reconstruction_residual[g] = std::abs(s.csm_eigenvalues[g] - recon);
    qmax = std::max(qmax, s.mixing_vectors.col(g).squaredNorm());
  }
  const double mmax = s.hessian_eigenvalues.size() ? s.hessian_eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double cmax = A ? s.csm_eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  s.spectral_scale = std::max({cmax, mmax * qmax, 1e-300});
  s.max_residual = A ? s.reconstruction_residual.maxCoeff() : 0.0;
  return s;
}

}  // namespace compstat
