#pragma once

#include <functional>
#include <string>
#include <vector>

#include "compstat/geometry.hpp"
#include "compstat/sensitivity.hpp"

namespace compstat {

enum class Recipe {
  omega,
  omega_quadratic,
  omega_A1,
  omega_A2,
  omega_B,
  silberberg_S,
  universal_U,
  transformed,
  reparameterized,
  application,
};
const char* to_string(Recipe r);
Recipe recipe_from_string(const std::string& s);

enum class SignConvention { positive_semidefinite_expected, negative_semidefinite_expected };
const char* to_string(SignConvention s);

struct CsmResult {
  Mat matrix;
  Recipe recipe = Recipe::omega;
  SignConvention sign_convention = SignConvention::positive_semidefinite_expected;
  Vec eigenvalues;  // ascending, of the symmetrized matrix
  double symmetry_residual = 0.0;  // max |M - M^T| before symmetrization
  int rank_estimate = 0;
  double rank_tol = 1e-7;
  double symmetry_tol = 1e-8;
  std::vector<std::string> labels;
  std::string note;

  double scale() const;  // max |eigenvalue|, or max |entry| when larger
};

struct CsmTolerances {
  double rank_tol = 1e-7;
  double symmetry_tol = 1e-8;
  double abs_floor = 1e-12;  // eigenvalues below this never count toward rank
};

// Symmetrizes, eigensolves and ranks. rank counts |lambda| > max(rank_tol * max|lambda|, abs_floor).
CsmResult make_csm(const Mat& matrix, Recipe recipe, SignConvention sign,
                   std::vector<std::string> labels = {}, const CsmTolerances& tol = {});

int estimate_rank(const Vec& eigenvalues, double rel_tol, double abs_floor = 1e-12);

// Derivative blocks at a solution point.
struct PointDerivatives {
  double f = 0.0;
  Vec f_x, f_a;
  Mat f_xx, f_xa;
  Mat g_x, g_a;  // K x M, K x N
  std::vector<Mat> g_xx, g_xa;
  Mat L_xx, L_xa;
};
PointDerivatives point_derivatives(const ProblemModel& model, const SolutionPoint& sol,
                                   const FdOptions& fd = {});

std::vector<std::string> isovector_labels(const ProblemModel& model, const IsovectorSet& iso);

// Omega_ab = sum_i x_{i;b} [f_{,i;a} + sum_k lambda_k g^k_{,i;a}]
CsmResult build_omega(const ProblemModel& model, const SolutionPoint& sol,
                      const SensitivityBundle& sens, const IsovectorSet& iso,
                      const CsmTolerances& tol = {});
// Omega_ab = -sum_ij x_{i;a} x_{j;b} L_{,ij}
CsmResult build_omega_quadratic(const ProblemModel& model, const SolutionPoint& sol,
                                const SensitivityBundle& sens, const IsovectorSet& iso,
                                const CsmTolerances& tol = {});
// Unconstrained only. shift is added to f before taking the log.
CsmResult build_omega_a1(const ProblemModel& model, const SolutionPoint& sol,
                         const SensitivityBundle& sens, double shift = 0.0,
                         const CsmTolerances& tol = {});
CsmResult build_omega_a2(const ProblemModel& model, const SolutionPoint& sol,
                         const SensitivityBundle& sens, const CsmTolerances& tol = {});
// Log-objective form: (f+c) sum_i x_{i;b} {[log(f+c)]_{,i;a} + sum_k (lambda_k/(f+c)) g^k_{,i;a}},
// where lambda_k/(f+c) are the multipliers of the log-objective problem.
CsmResult build_omega_b(const ProblemModel& model, const SolutionPoint& sol,
                        const SensitivityBundle& sens, const IsovectorSet& iso, double shift = 0.0,
                        const CsmTolerances& tol = {});

struct SilberbergResult {
  CsmResult csm;              // S, N x N, not symmetric in general
  Mat tangent_basis;          // N x r, orthonormal basis of {q : q . grad_a g^k = 0}
  Vec restricted_eigenvalues; // of the symmetric part of B^T S B
  bool constrained_psd = false;
};
SilberbergResult build_silberberg(const ProblemModel& model, const SolutionPoint& sol,
                                  const SensitivityBundle& sens, double tol = 1e-8,
                                  const CsmTolerances& ctol = {});

// Orthogonal projector onto the decision-space tangent hyperplane, I - Q.
Mat tangent_projector(const Mat& g_x);

CsmResult build_universal(const ProblemModel& model, const SolutionPoint& sol,
                          const SensitivityBundle& sens, const CsmTolerances& tol = {});

enum class TransformKind { congruence, singular_square, contraction, expansion };
const char* to_string(TransformKind k);

struct TransformResult {
  CsmResult csm;
  TransformKind kind = TransformKind::congruence;
};
TransformResult transform_csm(const CsmResult& csm, const Mat& T, const CsmTolerances& tol = {});

// Smooth change of coordinates; jacobian is optional (central differences otherwise).
struct CoordinateMap {
  std::function<Vec(const Vec&)> forward;
  std::function<Mat(const Vec&)> jacobian;
  std::vector<std::string> labels;
  static CoordinateMap identity();
};

struct ReparameterizedCsm {
  CsmResult csm;
  Mat x_jac_tilde;         // d xtilde / d atilde
  Mat isovectors_tilde;    // t^alpha expressed in atilde coordinates
  Mat decision_jacobian;   // d xtilde / d x
  Mat parameter_jacobian;  // d atilde / d a
};

// Omega~_ab = sum_{j nu} C~^{ab}_{j nu} x~_{j,nu} with C^{ab}_{i mu} = L_{,i;a} t^b_mu.
// decision_map sends x to xtilde, parameter_map sends a to atilde.
ReparameterizedCsm reparameterize_csm(const ProblemModel& model, const SolutionPoint& sol,
                                      const SensitivityBundle& sens, const IsovectorSet& iso,
                                      const CoordinateMap& decision_map,
                                      const CoordinateMap& parameter_map,
                                      const CsmTolerances& tol = {});

Mat map_jacobian(const CoordinateMap& map, const Vec& z);

struct SpectralRelation {
  Vec hessian_eigenvalues;   // m^(I)
  Mat hessian_eigenvectors;  // columns b^(I)
  Vec csm_eigenvalues;       // mu^(g)
  Mat csm_eigenvectors;      // columns z^(g)
  Mat mixing_vectors;        // columns q^(g) = sum_mu z_mu x_{i;mu}
  Vec reconstruction_residual;
  double spectral_scale = 0.0;
  double max_residual = 0.0;
};

// mu^(g) = -sum_I (q^(g) . b^(I))^2 m^(I)
SpectralRelation spectral_relation(const CsmResult& csm, const Mat& hessian_L, const Mat& x_semicolon);

}  // namespace compstat
