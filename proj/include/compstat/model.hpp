#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "compstat/error.hpp"

namespace compstat {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using ValueFn = std::function<double(const Vec& x, const Vec& a)>;
using VectorFn = std::function<Vec(const Vec& x, const Vec& a)>;
using MatrixFn = std::function<Mat(const Vec& x, const Vec& a)>;

// A scalar function of (x, a). Only `value` is required; every missing
// derivative is filled in by central differences.
struct ScalarFunction {
  ValueFn value;
  VectorFn grad_x;   // length M
  VectorFn grad_a;   // length N
  MatrixFn hess_xx;  // M x M
  MatrixFn hess_xa;  // M x N, entry (i, mu) = d^2 / dx_i da_mu
};

// J = sum_i X_i d/dx_i + sum_mu A_mu d/da_mu with J f = F(f), J g^k = G^k(g^k).
struct InvarianceGenerator {
  std::string name;
  std::function<Vec(const Vec& x)> X_map;
  std::function<Vec(const Vec& a)> A_map;
  std::function<double(double)> response_f;
  std::vector<std::function<double(double)>> response_g;
};

struct AnalyticSolution {
  Vec x;
  Vec lambda;
};

struct AnalyticJacobian {
  Mat x_jac;       // M x N
  Mat lambda_jac;  // K x N
};

struct ProblemModel {
  std::string name;
  int M = 0;
  int N = 0;
  int K = 0;
  ScalarFunction objective;
  std::vector<ScalarFunction> constraints;
  // Functions of a alone that isovectors must also annihilate (for example a
  // normalization s - sum(P) = 0). They never enter the decision problem.
  std::vector<ScalarFunction> parameter_constraints;
  std::function<AnalyticSolution(const Vec& a)> analytic_solution;
  std::function<AnalyticJacobian(const Vec& a)> analytic_jacobian;
  std::vector<std::string> parameter_names;
  std::vector<std::string> decision_names;
  std::vector<InvarianceGenerator> invariance_generators;
};

using ModelPtr = std::shared_ptr<const ProblemModel>;

// Validates dimensions, fills default labels and freezes the model.
ModelPtr finalize_model(ProblemModel model);

struct FdOptions {
  // h_i = rel_step * max(1, |z_i|)
  double rel_step = 6.0554544523933395e-06;  // cbrt(DBL_EPSILON)
};

enum class Target { objective, constraint, parameter_constraint };
enum class Wrt { x, a };

struct FunctionRef {
  Target which = Target::objective;
  int k = 0;
  static FunctionRef objective() { return {Target::objective, 0}; }
  static FunctionRef constraint(int k) { return {Target::constraint, k}; }
};

struct GradientResult {
  Vec value;
  bool analytic = false;
  // max |analytic - fd| / max(1, |fd|_inf); NaN when no analytic gradient.
  double fd_residual = std::numeric_limits<double>::quiet_NaN();
};

const ScalarFunction& function_of(const ProblemModel& model, FunctionRef ref);

// Evaluates with a finiteness guard; non-finite results raise an evaluation error.
double evaluate(const ScalarFunction& fn, const Vec& x, const Vec& a,
                const std::string& label);

double evaluate_lagrangian(const ProblemModel& model, const Vec& x, const Vec& a,
                           const Vec& lambda);

GradientResult numeric_gradient(const ProblemModel& model, FunctionRef ref, Wrt wrt,
                                const Vec& x, const Vec& a,
                                const FdOptions& fd = {}, bool cross_check = true);

// Plain central-difference gradient, ignoring any analytic data.
Vec fd_gradient(const ScalarFunction& fn, Wrt wrt, const Vec& x, const Vec& a,
                const FdOptions& fd = {}, const std::string& label = "f");

// Analytic when registered, else differences of the (analytic or FD) gradient.
Vec gradient(const ScalarFunction& fn, Wrt wrt, const Vec& x, const Vec& a,
             const FdOptions& fd = {}, const std::string& label = "f");
Mat hessian_xx(const ScalarFunction& fn, const Vec& x, const Vec& a,
               const FdOptions& fd = {}, const std::string& label = "f");
Mat hessian_xa(const ScalarFunction& fn, const Vec& x, const Vec& a,
               const FdOptions& fd = {}, const std::string& label = "f");

// K x M and K x N stacks of constraint gradients.
Mat constraint_jacobian_x(const ProblemModel& model, const Vec& x, const Vec& a,
                          const FdOptions& fd = {});
Mat constraint_jacobian_a(const ProblemModel& model, const Vec& x, const Vec& a,
                          const FdOptions& fd = {});

Vec lagrangian_gradient_x(const ProblemModel& model, const Vec& x, const Vec& a,
                          const Vec& lambda, const FdOptions& fd = {});
Mat lagrangian_hessian_xx(const ProblemModel& model, const Vec& x, const Vec& a,
                          const Vec& lambda, const FdOptions& fd = {});
Mat lagrangian_hessian_xa(const ProblemModel& model, const Vec& x, const Vec& a,
                          const Vec& lambda, const FdOptions& fd = {});

// Appends a scale parameter s (default 1) and multiplies the objective by it.
ModelPtr augment_with_scale(const ProblemModel& model, const std::string& scale_name = "s");

// Residuals of J f - F(f) and J g^k - G^k(g^k) at (x, a); entries for absent
// response maps are omitted.
std::vector<double> generator_residuals(const ProblemModel& model,
                                        const InvarianceGenerator& gen, const Vec& x,
                                        const Vec& a, const FdOptions& fd = {});

void check_dimensions(const ProblemModel& model, const Vec& x, const Vec& a);

}  // namespace compstat
