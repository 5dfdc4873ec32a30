#pragma once

#include <limits>

#include "compstat/solver.hpp"

namespace compstat {

enum class SensitivityMethod { fd, ift, analytic };
const char* to_string(SensitivityMethod m);
SensitivityMethod sensitivity_method_from_string(const std::string& s);

struct SensitivityBundle {
  Mat x_jac;       // M x N, (i, mu) = dx_i/da_mu
  Mat lambda_jac;  // K x N
  SensitivityMethod method = SensitivityMethod::ift;
  double step = 0.0;  // relative FD step, fd only
  double cross_check_residual = std::numeric_limits<double>::quiet_NaN();
};

struct FdSensitivityOptions {
  double rel_step = 6.0554544523933395e-06;  // h_mu = rel_step * max(1, |a_mu|)
  SolverOptions solver;
  // Re-solve stencil points with the registered closed form when there is one.
  bool use_analytic_solution = true;
};

// Central differences of re-solved x(a), lambda(a), warm-started from sol.x.
// Columns run concurrently under OpenMP.
SensitivityBundle decision_jacobian_fd(const ProblemModel& model, const SolutionPoint& sol,
                                       const FdSensitivityOptions& opts = {});
// Same stencil, single-threaded. Kept as the reference for the parallel kernel.
SensitivityBundle decision_jacobian_fd_serial(const ProblemModel& model, const SolutionPoint& sol,
                                              const FdSensitivityOptions& opts = {});

// Bordered system [L_xx G^T ; G 0] [x_mu ; lambda_mu] = -[L_x mu ; g_mu], one
// factorization for all N right-hand sides.
SensitivityBundle decision_jacobian_ift(const ProblemModel& model, const SolutionPoint& sol,
                                        const FdOptions& fd = {});

// Registered closed-form Jacobian.
SensitivityBundle decision_jacobian_analytic(const ProblemModel& model, const SolutionPoint& sol);

// max_{k,mu} |g^k_mu + sum_i g^k_i x_{i,mu}|
double constraint_identity_residual(const ProblemModel& model, const SolutionPoint& sol,
                                    const SensitivityBundle& sens, const FdOptions& fd = {});

// Max-norm difference of the x Jacobians; stored into both bundles' cross-check field.
double cross_check(SensitivityBundle& a, SensitivityBundle& b);

}  // namespace compstat
