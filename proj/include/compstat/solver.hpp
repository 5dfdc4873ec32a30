#pragma once

#include <limits>
#include <string>

#include "compstat/model.hpp"

namespace compstat {

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 100;
  int max_backtracks = 30;
  FdOptions fd;
};

enum class SolutionSource { newton, analytic };
const char* to_string(SolutionSource s);

struct SolutionPoint {
  Vec a;
  Vec x;
  Vec lambda;
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  SolutionSource source = SolutionSource::newton;
  // ||x_newton - x_analytic||_inf when both ran; NaN otherwise.
  double newton_discrepancy = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

struct MultiplierResult {
  Vec lambda;
  // Norm of the part of grad_x f outside span{grad_x g^k}.
  double residual = 0.0;
};

// Max-norm of the stacked system (grad_x L, g).
double kkt_residual(const ProblemModel& model, const Vec& x, const Vec& a, const Vec& lambda,
                    const FdOptions& fd = {});

MultiplierResult recover_multipliers(const ProblemModel& model, const Vec& x, const Vec& a,
                                     const FdOptions& fd = {});

// Damped Newton on [grad_x f + sum lambda_k grad_x g^k ; g] = 0. A singular
// Newton matrix raises a rank-deficiency error; hitting the iteration cap
// returns a point with converged = false.
SolutionPoint solve_interior(const ProblemModel& model, const Vec& a, const Vec& x0,
                             const SolverOptions& opts = {});

// Analytic solution when registered (authoritative, Newton run as a cross-check
// from x0), Newton otherwise. prefer_analytic = false forces Newton.
SolutionPoint solve(const ProblemModel& model, const Vec& a, const Vec& x0,
                    const SolverOptions& opts = {}, bool prefer_analytic = true);

struct SecondOrderReport {
  double max_projected_eigenvalue = 0.0;
  double scale = 0.0;
  bool strictly_negative = false;
  bool pass = false;
};

// Largest eigenvalue of L_xx restricted to {l : l . grad_x g^k = 0}.
SecondOrderReport check_second_order(const ProblemModel& model, const SolutionPoint& sol,
                                     double tol = 1e-8, const FdOptions& fd = {});

// Orthonormal basis (columns) of the null space of the rows of G.
Mat null_space_columns(const Mat& G, double rel_tol = 1e-10);

}  // namespace compstat
