#pragma once

#include <string>
#include <utility>
#include <vector>

#include "compstat/csm.hpp"

namespace compstat {

enum class Verdict { pass, fail, skipped };
const char* to_string(Verdict v);

struct CheckReport {
  std::string name;
  Verdict verdict = Verdict::skipped;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string claim;   // the statement being verified
  std::string reason;  // set for skipped (machine-readable token) and failed checks
  std::vector<std::pair<std::string, double>> values;

  bool passed() const { return verdict == Verdict::pass; }
  bool failed() const { return verdict == Verdict::fail; }
};

// pass iff residual is finite and <= tolerance.
CheckReport make_check(std::string name, std::string claim, double residual, double tolerance);
CheckReport skipped_check(std::string name, std::string claim, std::string reason);
// Folds a boolean into a check with residual 0/1 and tolerance 0.
CheckReport boolean_check(std::string name, std::string claim, bool ok, std::string reason_if_false = {});

// max|A - B| <= tol * max(floor, max|B|)
CheckReport check_close(std::string name, std::string claim, const Mat& a, const Mat& b, double tol,
                        double floor = 1.0);
CheckReport check_scalar(std::string name, std::string claim, double value, double expected, double tol);

// Symmetry residual and extreme eigenvalue against tol * max(1, scale).
CheckReport check_semidefinite(std::string name, const Mat& matrix, SignConvention expected, double tol);
CheckReport check_symmetry(std::string name, const Mat& matrix, double tol);

// rank(csm) <= bound.
CheckReport check_rank_bound(std::string name, const CsmResult& csm, int bound);
CheckReport check_rank_bound(const CsmResult& csm, int M, int K, int A);
CheckReport check_rank_equals(std::string name, const CsmResult& csm, int expected);

// max(|matrix v|, |v^T matrix|) <= tol * max(1, |matrix|) * |v|
CheckReport check_null_vector(std::string name, const Mat& matrix, const Vec& v, double tol);

struct EnvelopeOptions {
  double rel_step = 6.0554544523933395e-06;
  double tol = 1e-5;
  SolverOptions solver;
  bool prefer_analytic = true;
};

// V_{;a} from central differences of V(a) = f(x(a), a) along each isovector,
// compared with f_{;a} at fixed x. Also reports the largest projected
// eigenvalue of L_xx, which decides whether objective-compensated rows are
// covered by the strict-definiteness condition.
CheckReport check_envelope(const ProblemModel& model, const SolutionPoint& sol, const IsovectorSet& iso,
                           const EnvelopeOptions& opts = {});

// residual_i = X_i(x) - sum_mu A_mu(a) x_{i,mu}; pass iff max <= tol * max(1, |x|).
CheckReport check_invariance(const ProblemModel& model, const InvarianceGenerator& gen,
                             const SolutionPoint& sol, const SensitivityBundle& sens, double tol);

// Sampled J f = F(f), J g = G(g) on the model itself.
CheckReport check_generator_response(const ProblemModel& model, const InvarianceGenerator& gen,
                                     const SolutionPoint& sol, double tol);

// sum_i g^k_{,i} x_{i;alpha} = 0 for every constraint and isovector.
CheckReport check_conformance(const ProblemModel& model, const SolutionPoint& sol,
                              const SensitivityBundle& sens, const IsovectorSet& iso, double tol);

CheckReport check_null_property(const IsovectorSet& iso, double tol);

// Constraints of the form kappa_l - k^l(x, p) = 0.
struct HattaForm {
  std::vector<int> kappa_indices;  // one per constraint
  std::vector<int> p_indices;      // empty: every parameter that is not a kappa
};

struct HattaResult {
  Mat rows;    // D_a = d/dp_a + sum_l (dk^l/dp_a) d/dkappa_l
  Mat matrix;  // sum_i [f_{,ia} - sum_l lambda_l k^l_{,ia}] x_{i;b}
  Mat omega;   // the same rows through the generic assembly
  CheckReport check;
};

HattaResult hatta_reduction(const ProblemModel& model, const SolutionPoint& sol,
                            const SensitivityBundle& sens, const HattaForm& form, double tol);
CheckReport check_hatta_reduction(const ProblemModel& model, const SolutionPoint& sol,
                                  const SensitivityBundle& sens, const HattaForm& form, double tol);

}  // namespace compstat
