#include <algorithm>
#include <chrono>
#include <cmath>

#include "compstat/benchmarks.hpp"

namespace compstat {

const char* to_string(PipelineMode m) { return m == PipelineMode::analytic ? "analytic" : "numeric"; }

PipelineMode pipeline_mode_from_string(const std::string& s) {
  if (s == "analytic") return PipelineMode::analytic;
  if (s == "numeric") return PipelineMode::numeric;
  fail(ErrorKind::config, "unknown pipeline mode '" + s + "'");
}

const CsmResult* Analysis::find(Recipe r) const {
  for (const auto& c : csms)
    if (c.recipe == r) return &c;
  return nullptr;
}

int Analysis::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const CheckReport& c) { return c.failed(); }));
}

double Analysis::path_tol(const Tolerances& t) const {
  return sens.method == SensitivityMethod::analytic ? t.analytic : t.fd;
}

std::vector<std::string> BenchmarkEntry::property_names() const {
  std::vector<std::string> out;
  for (const auto& p : properties) out.push_back(p.name);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

SensitivityBundle compute_sensitivity(const ProblemModel& model, const SolutionPoint& sol, SensitivityMethod m,
                                      const PipelineOptions& opts) {
  switch (m) {
    case SensitivityMethod::analytic:
      return decision_jacobian_analytic(model, sol);
    case SensitivityMethod::ift:
      return decision_jacobian_ift(model, sol, opts.solver.fd);
    case SensitivityMethod::fd: {
      FdSensitivityOptions fo;
      fo.solver = opts.solver;
      fo.use_analytic_solution = opts.mode == PipelineMode::analytic;
      return decision_jacobian_fd(model, sol, fo);
    }
  }
  fail(ErrorKind::config, "unknown sensitivity method");
}

SensitivityMethod default_method(const ProblemModel& model, const PipelineOptions& opts) {
  if (opts.sensitivity) return *opts.sensitivity;
  if (opts.mode == PipelineMode::numeric) return SensitivityMethod::ift;
  return model.analytic_jacobian ? SensitivityMethod::analytic : SensitivityMethod::fd;
}

IsovectorSet make_isovectors(const BenchmarkEntry& e, const ProblemModel& model, const SolutionPoint& sol,
                             const PipelineOptions& opts) {
  BasisKind kind = opts.basis ? *opts.basis : (e.isovectors ? BasisKind::prescribed : BasisKind::nullspace);
  IsovectorSet iso;
  switch (kind) {
    case BasisKind::prescribed: {
      if (!e.isovectors) fail(ErrorKind::config, "benchmark " + e.name + " has no prescribed isovectors");
      iso = prescribe_isovectors(e.isovectors(sol), target_gradients(model, sol, e.rows_annihilate_objective));
      iso.labels = e.isovector_labels;
      break;
    }
    case BasisKind::nullspace: {
      const TargetStack st = target_gradients(model, sol, false);
      if (st.grads.rows() == 0) {
        iso = identity_isovectors(model.N, model.parameter_names);
      } else {
        iso = build_isovectors(st);
      }
      break;
    }
    case BasisKind::one_term: {
      // Compensate with the last parameter against the first constraint (or f when unconstrained).
      const FunctionRef ref = model.K > 0 ? FunctionRef::constraint(0) : FunctionRef::objective();
      iso = one_term_compensation(model, sol, ref, model.N - 1);
      if (model.K > 1 || !model.parameter_constraints.empty()) {
        // Recheck against every target; one-term rows only null one function.
        const TargetStack st = target_gradients(model, sol, false);
        iso.null_residuals = null_residuals(iso.vectors, st);
        iso.target_labels = st.labels;
      }
      break;
    }
  }
  if (static_cast<int>(iso.labels.size()) != iso.A) iso.labels.clear();
  return iso;
}

std::vector<Recipe> standard_recipes(const BenchmarkEntry& e, const ProblemModel& model) {
  std::vector<Recipe> r = {Recipe::omega, Recipe::omega_quadratic, Recipe::silberberg_S, Recipe::universal_U};
  if (model.K == 0) r.push_back(Recipe::omega_A2);
  for (Recipe x : e.extra_recipes)
    if (std::find(r.begin(), r.end(), x) == r.end()) r.push_back(x);
  return r;
}

void add_recipe(Analysis& an, Recipe r, const CsmTolerances& ct, std::vector<CheckReport>& notes,
                SilberbergResult* silb) {
  const ProblemModel& model = *an.model;
  const std::string name = std::string("recipe_") + to_string(r);
  try {
    switch (r) {
      case Recipe::omega: an.csms.push_back(build_omega(model, an.sol, an.sens, an.iso, ct)); break;
      case Recipe::omega_quadratic:
        an.csms.push_back(build_omega_quadratic(model, an.sol, an.sens, an.iso, ct));
        break;
      case Recipe::omega_A1: an.csms.push_back(build_omega_a1(model, an.sol, an.sens, 0.0, ct)); break;
      case Recipe::omega_A2: an.csms.push_back(build_omega_a2(model, an.sol, an.sens, ct)); break;
      case Recipe::omega_B: an.csms.push_back(build_omega_b(model, an.sol, an.sens, an.iso, 0.0, ct)); break;
      case Recipe::silberberg_S: {
        *silb = build_silberberg(model, an.sol, an.sens, 1e-8, ct);
        an.csms.push_back(silb->csm);
        break;
      }
      case Recipe::universal_U: an.csms.push_back(build_universal(model, an.sol, an.sens, ct)); break;
      case Recipe::transformed:
      case Recipe::reparameterized:
      case Recipe::application:
        notes.push_back(skipped_check(name, "recipe assembled", "needs_transformation_input"));
        break;
    }
  } catch (const Error& e) {
    notes.push_back(skipped_check(name, "recipe assembled", std::string(to_string(e.kind())) + ": " + e.what()));
  }
}

void standard_checks(const BenchmarkEntry& e, Analysis& an, const PipelineOptions& opts,
                     const SilberbergResult& silb) {
  const ProblemModel& model = *an.model;
  const Tolerances& tol = opts.tol;
  const double ptol = an.path_tol(tol);
  auto& out = an.checks;

  {
    const Vec gf = gradient(model.objective, Wrt::x, an.sol.x, an.sol.a);
    const double scale = std::max(1.0, gf.cwiseAbs().maxCoeff());
    out.push_back(make_check("kkt_residual", "first-order conditions hold at the reported solution",
                             an.sol.kkt_residual / scale, std::max(tol.analytic, 100 * opts.solver.tol)));
    if (model.analytic_solution) {
      const AnalyticSolution s = model.analytic_solution(an.sol.a);
      out.push_back(make_check("oracle_kkt", "closed-form solution satisfies the first-order conditions",
                               kkt_residual(model, s.x, an.sol.a, s.lambda) / scale, tol.oracle_kkt));
    }
    if (std::isfinite(an.sol.newton_discrepancy))
      out.push_back(make_check("newton_matches_oracle", "Newton solution agrees with the closed form",
                               an.sol.newton_discrepancy / std::max(1.0, an.sol.x.cwiseAbs().maxCoeff()),
                               tol.analytic));
  }
  {
    const SecondOrderReport so = check_second_order(model, an.sol);
    CheckReport r = boolean_check("second_order", "L_xx is negative semidefinite on the constraint tangent space",
                                  so.pass, "projected Hessian has a positive eigenvalue");
    r.values.emplace_back("max_projected_eigenvalue", so.max_projected_eigenvalue);
    out.push_back(r);
  }
  out.push_back(check_null_property(an.iso, tol.analytic));
  out.push_back(check_conformance(model, an.sol, an.sens, an.iso, tol.conformance));
  if (model.K > 0)
    out.push_back(make_check("constraint_identity", "g^k_{,mu} + sum_i g^k_{,i} x_{i,mu} = 0",
                             constraint_identity_residual(model, an.sol, an.sens) /
                                 std::max(1.0, an.sens.x_jac.cwiseAbs().maxCoeff()),
                             ptol));

  const CsmResult* omega = an.find(Recipe::omega);
  for (const auto& c : an.csms) {
    if (c.recipe == Recipe::silberberg_S) continue;
    out.push_back(check_semidefinite(std::string("semidefinite_") + to_string(c.recipe), c.matrix,
                                     c.sign_convention, ptol));
  }
  if (an.find(Recipe::silberberg_S)) {
    const double scale = std::max(1.0, silb.csm.scale());
    const double worst = silb.restricted_eigenvalues.size() ? std::max(0.0, -silb.restricted_eigenvalues.minCoeff())
                                                            : 0.0;
    out.push_back(make_check("silberberg_constrained_psd",
                             "S is positive semidefinite on the parameter tangent hyperplane", worst / scale, ptol));
  }
  if (omega) {
    const Mat T = an.iso.vectors;  // A x N
    const double floor = std::max(1e-10, an.zero_level);
    const std::string rel = "agrees with the first-derivative assembly";
    if (const CsmResult* q = an.find(Recipe::omega_quadratic))
      out.push_back(check_close("coherence_quadratic", "quadratic form " + rel, q->matrix, omega->matrix,
                                tol.coherence, floor));
    if (const CsmResult* s = an.find(Recipe::silberberg_S))
      out.push_back(check_close("coherence_silberberg", "t S t^T " + rel, T * s->matrix * T.transpose(),
                                omega->matrix, tol.coherence, floor));
    if (const CsmResult* u = an.find(Recipe::universal_U))
      out.push_back(check_close("coherence_universal", "t U t^T " + rel, T * u->matrix * T.transpose(),
                                omega->matrix, tol.coherence, floor));
    if (const CsmResult* b = an.find(Recipe::omega_B))
      out.push_back(check_close("coherence_log_objective", "log-objective form " + rel, b->matrix, omega->matrix,
                                tol.coherence, floor));
    if (const CsmResult* a2 = an.find(Recipe::omega_A2))
      out.push_back(check_close("coherence_A2", "f_xa^T x_jac projected on the isovectors " + rel,
                                T * a2->matrix * T.transpose(), omega->matrix, tol.coherence, floor));
    out.push_back(check_rank_bound("rank_bound_omega", *omega, std::min(model.M - model.K, an.iso.A)));
  }
  if (const CsmResult* u = an.find(Recipe::universal_U))
    out.push_back(check_rank_bound("rank_bound_universal", *u, std::min(model.M - model.K, model.N)));

  if (const CsmResult* q = an.find(Recipe::omega_quadratic)) {
    const Mat H = lagrangian_hessian_xx(model, an.sol.x, an.sol.a, an.sol.lambda);
    const SpectralRelation sr = spectral_relation(*q, H, gcd_apply(an.iso, an.sens.x_jac));
    CheckReport r = make_check("spectral_relation", "mu = -sum_I (q . b_I)^2 m_I for every CSM eigenpair",
                               sr.max_residual / sr.spectral_scale, tol.coherence);
    out.push_back(r);
  }

  for (const auto& gen : model.invariance_generators) {
    out.push_back(check_generator_response(model, gen, an.sol, 1e-6));
    out.push_back(check_invariance(model, gen, an.sol, an.sens, ptol));
  }

  EnvelopeOptions eo;
  eo.tol = tol.fd;
  eo.solver = opts.solver;
  eo.prefer_analytic = opts.mode == PipelineMode::analytic;
  out.push_back(check_envelope(model, an.sol, an.iso, eo));

  if (e.hatta) out.push_back(check_hatta_reduction(model, an.sol, an.sens, *e.hatta, tol.coherence));

  if (opts.compare_methods) {
    try {
      FdSensitivityOptions fo;
      fo.solver = opts.solver;
      fo.use_analytic_solution = opts.mode == PipelineMode::analytic;
      SensitivityBundle fd = decision_jacobian_fd(model, an.sol, fo);
      SensitivityBundle ift = decision_jacobian_ift(model, an.sol);
      const double r = cross_check(fd, ift);
      an.sens.cross_check_residual = r;
      out.push_back(make_check("fd_vs_ift", "finite-difference and implicit-function Jacobians agree",
                               r / std::max(1.0, ift.x_jac.cwiseAbs().maxCoeff()), tol.method_agreement));
    } catch (const Error& err) {
      out.push_back(skipped_check("fd_vs_ift", "finite-difference and implicit-function Jacobians agree",
                                  std::string(to_string(err.kind())) + ": " + err.what()));
    }
  }
}

}  // namespace

Analysis prepare(const BenchmarkEntry& e, const Vec& a, const PipelineOptions& opts) {
  Analysis an;
  an.benchmark = e.name;
  an.model = e.model;
  an.mode = opts.mode;
  const ProblemModel& model = *e.model;
  check_dimensions(model, e.x0, a);

  auto t0 = Clock::now();
  an.sol = solve(model, a, e.x0, opts.solver, opts.mode == PipelineMode::analytic);
  if (!an.sol.converged)
    fail(ErrorKind::non_convergence, "solver did not converge for " + e.name + ": " + an.sol.message);
  an.timings_ms.emplace_back("solve", ms_since(t0));

  t0 = Clock::now();
  an.sens = compute_sensitivity(model, an.sol, default_method(model, opts), opts);
  an.timings_ms.emplace_back("sensitivity", ms_since(t0));

  t0 = Clock::now();
  an.iso = make_isovectors(e, model, an.sol, opts);
  an.timings_ms.emplace_back("isovectors", ms_since(t0));
  return an;
}

Analysis analyze(const BenchmarkEntry& e, const Vec& a, const PipelineOptions& opts) {
  Analysis an = prepare(e, a, opts);
  const ProblemModel& model = *e.model;

  auto t0 = Clock::now();
  const PointDerivatives d = point_derivatives(model, an.sol);
  const double t_max = an.iso.A ? an.iso.vectors.cwiseAbs().maxCoeff() : 0.0;
  const double l_max = d.L_xa.size() ? d.L_xa.cwiseAbs().maxCoeff() : 0.0;
  const double j_max = an.sens.x_jac.size() ? an.sens.x_jac.cwiseAbs().maxCoeff() : 0.0;
  an.zero_level = opts.tol.rank * l_max * j_max * std::pow(std::max(1.0, t_max), 2);
  CsmTolerances ct;
  ct.rank_tol = opts.tol.rank;
  ct.abs_floor = std::max(ct.abs_floor, an.zero_level);
  std::vector<CheckReport> notes;
  SilberbergResult silb;
  for (Recipe r : opts.recipes.empty() ? standard_recipes(e, model) : opts.recipes) add_recipe(an, r, ct, notes, &silb);
  an.timings_ms.emplace_back("csm", ms_since(t0));

  t0 = Clock::now();
  an.checks = notes;
  standard_checks(e, an, opts, silb);
  if (opts.run_properties) {
    for (const auto& p : e.properties) {
      try {
        for (auto& c : p.run(an, opts)) {
          c.name = p.name + "." + c.name;
          an.checks.push_back(std::move(c));
        }
      } catch (const Error& err) {
        CheckReport r = make_check(p.name, "property suite ran", std::numeric_limits<double>::infinity(), 0.0);
        r.reason = std::string(to_string(err.kind())) + ": " + err.what();
        an.checks.push_back(r);
      }
    }
  }
  an.timings_ms.emplace_back("checks", ms_since(t0));
  return an;
}

Analysis analyze(const BenchmarkEntry& e, const PipelineOptions& opts) { return analyze(e, e.default_point, opts); }

}  // namespace compstat
