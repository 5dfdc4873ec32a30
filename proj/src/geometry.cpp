#include "compstat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace compstat {

const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::nullspace: return "nullspace";
    case BasisKind::prescribed: return "prescribed";
    case BasisKind::one_term: return "one_term";
  }
  return "unknown";
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "nullspace") return BasisKind::nullspace;
  if (s == "prescribed") return BasisKind::prescribed;
  if (s == "one_term") return BasisKind::one_term;
  fail(ErrorKind::config, "unknown basis kind '" + s + "'");
}

TargetStack target_gradients(const ProblemModel& model, const SolutionPoint& sol,
                             bool include_objective, const FdOptions& fd) {
  const int C = model.K + static_cast<int>(model.parameter_constraints.size()) + (include_objective ? 1 : 0);
  TargetStack st;
  st.grads.resize(C, model.N);
  int r = 0;
  for (int k = 0; k < model.K; ++k, ++r) {
    st.labels.push_back("g" + std::to_string(k + 1));
    st.grads.row(r) = gradient(model.constraints[k], Wrt::a, sol.x, sol.a, fd, st.labels.back()).transpose();
  }
  for (size_t k = 0; k < model.parameter_constraints.size(); ++k, ++r) {
    st.labels.push_back("h" + std::to_string(k + 1));
    st.grads.row(r) =
        gradient(model.parameter_constraints[k], Wrt::a, sol.x, sol.a, fd, st.labels.back()).transpose();
  }
  if (include_objective) {
    st.labels.push_back("f");
    st.grads.row(r) = gradient(model.objective, Wrt::a, sol.x, sol.a, fd, "f").transpose();
  }
  return st;
}

Mat null_residuals(const Mat& rows, const TargetStack& stack) {
  return rows * stack.grads.transpose();
}

namespace {

void fill_residuals(IsovectorSet& iso, const TargetStack& stack) {
  iso.null_residuals = null_residuals(iso.vectors, stack);
  iso.target_labels = stack.labels;
  iso.annihilates_objective =
      std::find(stack.labels.begin(), stack.labels.end(), "f") != stack.labels.end();
}

bool rows_dependent(const Mat& rows) {
  if (rows.rows() <= 1) return rows.rows() == 1 && rows.norm() == 0.0;
  Eigen::JacobiSVD<Mat> svd(rows);
  const Vec& s = svd.singularValues();
  if (rows.rows() > rows.cols()) return true;
  return s[s.size() - 1] <= 1e-10 * s[0];
}

}  // namespace

IsovectorSet build_isovectors(const TargetStack& stack, double rank_tol) {
  IsovectorSet iso;
  iso.basis_kind = BasisKind::nullspace;
  const Mat Z = null_space_columns(stack.grads, rank_tol);  // N x A, orthonormal
  if (Z.cols() == 0)
    fail(ErrorKind::empty_tangent, "target gradients span the whole parameter space; no isovectors");
  iso.vectors = Z.transpose();
  for (int r = 0; r < iso.vectors.rows(); ++r) iso.vectors.row(r).normalize();
  iso.A = static_cast<int>(iso.vectors.rows());
  fill_residuals(iso, stack);
  return iso;
}

IsovectorSet prescribe_isovectors(const Mat& rows, const TargetStack& stack, double tol) {
  if (rows.cols() != stack.grads.cols())
    fail(ErrorKind::dimension, "isovector rows have the wrong length");
  IsovectorSet iso;
  iso.basis_kind = BasisKind::prescribed;
  iso.vectors = rows;
  iso.A = static_cast<int>(rows.rows());
  fill_residuals(iso, stack);
  for (int al = 0; al < iso.A; ++al) {
    for (int c = 0; c < iso.null_residuals.cols(); ++c) {
      const double scale = stack.grads.row(c).norm() * std::max(1.0, rows.row(al).norm());
      if (std::abs(iso.null_residuals(al, c)) > tol * std::max(scale, 1e-300)) {
        std::ostringstream os;
        os << "isovector " << al + 1 << " violates the null property for " << stack.labels[c]
           << " (residual " << iso.null_residuals(al, c) << ")";
        fail(ErrorKind::null_property, os.str());
      }
    }
  }
  if (rows_dependent(rows)) {
    iso.redundant = true;
    iso.warnings.push_back("prescribed isovectors are linearly dependent; redundant GCDs kept");
  }
  return iso;
}

IsovectorSet one_term_compensation(const Vec& target_grad, int comp, const std::string& target_label) {
  const int N = static_cast<int>(target_grad.size());
  if (comp < 0 || comp >= N) fail(ErrorKind::config, "compensating parameter index out of range");
  IsovectorSet iso;
  iso.basis_kind = BasisKind::one_term;
  iso.vectors = Mat::Zero(N - 1, N);
  int r = 0;
  for (int al = 0; al < N; ++al) {
    if (al == comp) continue;
    iso.vectors(r, al) = target_grad[comp];
    iso.vectors(r, comp) = -target_grad[al];
    ++r;
  }
  iso.A = N - 1;
  if (target_grad[comp] == 0.0) {
    iso.degenerate = true;
    iso.warnings.push_back("compensating parameter has zero gradient entry for " + target_label);
  }
  TargetStack st;
  st.grads = target_grad.transpose();
  st.labels = {target_label};
  fill_residuals(iso, st);
  return iso;
}

IsovectorSet one_term_compensation(const ProblemModel& model, const SolutionPoint& sol, FunctionRef target,
                                   int comp, const FdOptions& fd) {
  const ScalarFunction& fn = function_of(model, target);
  const std::string label = target.which == Target::objective ? "f" : "g" + std::to_string(target.k + 1);
  return one_term_compensation(gradient(fn, Wrt::a, sol.x, sol.a, fd, label), comp, label);
}

IsovectorSet identity_isovectors(int N, std::vector<std::string> labels) {
  IsovectorSet iso;
  iso.labels = std::move(labels);
  iso.basis_kind = BasisKind::prescribed;
  iso.vectors = Mat::Identity(N, N);
  iso.A = N;
  iso.null_residuals = Mat(N, 0);
  return iso;
}

Mat gcd_apply(const IsovectorSet& iso, const Mat& jac) {
  if (jac.cols() != iso.vectors.cols()) fail(ErrorKind::dimension, "gcd_apply: Jacobian column count");
  return jac * iso.vectors.transpose();
}

ConformanceTable verify_conformance(const Mat& x_semicolon, const Mat& decision_grads, double tol) {
  ConformanceTable t;
  t.tol = tol;
  if (decision_grads.rows() == 0) {
    t.residuals = Mat(0, x_semicolon.cols());
    return t;
  }
  if (decision_grads.cols() != x_semicolon.rows())
    fail(ErrorKind::dimension, "verify_conformance: decision dimension mismatch");
  t.residuals = decision_grads * x_semicolon;
  t.max_abs = t.residuals.size() ? t.residuals.cwiseAbs().maxCoeff() : 0.0;
  t.pass = t.max_abs <= tol;
  return t;
}

}  // namespace compstat
