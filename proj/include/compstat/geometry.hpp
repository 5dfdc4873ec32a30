#pragma once

#include <string>
#include <vector>

#include "compstat/solver.hpp"

namespace compstat {

enum class BasisKind { nullspace, prescribed, one_term };
const char* to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

// Parameter-space gradients of the functions the isovectors must annihilate.
struct TargetStack {
  Mat grads;  // C x N
  std::vector<std::string> labels;
};

struct IsovectorSet {
  Mat vectors;  // A x N, row alpha = t^alpha
  int A = 0;
  bool annihilates_objective = false;
  Mat null_residuals;  // A x C, t^alpha . grad_a(target c)
  std::vector<std::string> target_labels;
  BasisKind basis_kind = BasisKind::nullspace;
  bool redundant = false;
  bool degenerate = false;
  std::vector<std::string> warnings;
  std::vector<std::string> labels;  // one per row; optional
};

// Constraint gradients in a (plus parameter-only constraints, plus the
// objective when include_objective) at (sol.x, sol.a).
TargetStack target_gradients(const ProblemModel& model, const SolutionPoint& sol,
                             bool include_objective, const FdOptions& fd = {});

// Orthonormal basis of the complement of the row space of the stack (SVD).
IsovectorSet build_isovectors(const TargetStack& stack, double rank_tol = 1e-10);

// Accepts user rows only if every |t . grad| <= tol * |grad| * max(1, |t|).
IsovectorSet prescribe_isovectors(const Mat& rows, const TargetStack& stack, double tol = 1e-8);

// Rows with alpha-entry d(target)/d(comp) and comp-entry -d(target)/d(a_alpha),
// one per alpha != comp.
IsovectorSet one_term_compensation(const Vec& target_grad, int comp,
                                   const std::string& target_label = "target");
IsovectorSet one_term_compensation(const ProblemModel& model, const SolutionPoint& sol,
                                   FunctionRef target, int comp, const FdOptions& fd = {});

Mat null_residuals(const Mat& rows, const TargetStack& stack);

// Standard basis of R^N (ordinary partial derivatives).
IsovectorSet identity_isovectors(int N, std::vector<std::string> labels = {});

// Column alpha = jac * t^alpha, i.e. x_{i;alpha}.
Mat gcd_apply(const IsovectorSet& iso, const Mat& jac);

struct ConformanceTable {
  Mat residuals;  // K x A
  double max_abs = 0.0;
  double tol = 0.0;
  bool pass = true;
};

// residual(k, alpha) = sum_i g^k_{,i} x_{i;alpha}
ConformanceTable verify_conformance(const Mat& x_semicolon, const Mat& decision_grads, double tol);

}  // namespace compstat
