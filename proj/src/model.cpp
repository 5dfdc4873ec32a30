#include "compstat/model.hpp"

#include <cmath>
#include <sstream>

namespace compstat {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::rank_deficiency: return "rank_deficiency";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::sensitivity: return "sensitivity";
    case ErrorKind::constraint_qualification: return "constraint_qualification";
    case ErrorKind::empty_tangent: return "empty_tangent";
    case ErrorKind::null_property: return "null_property";
    case ErrorKind::transformation: return "transformation";
    case ErrorKind::dimension: return "dimension";
  }
  return "unknown";
}

namespace {

double step_for(double z, const FdOptions& fd) { return fd.rel_step * std::max(1.0, std::abs(z)); }

// Step for second differences of values: eps^(1/4) balances truncation and roundoff.
double step2_for(double z) { return 1.2207031250e-04 * std::max(1.0, std::abs(z)); }

std::string coord_label(Wrt wrt, int i) {
  std::ostringstream os;
  os << (wrt == Wrt::x ? "x" : "a") << "[" << i << "]";
  return os.str();
}

double eval_at(const ScalarFunction& fn, const Vec& x, const Vec& a, const std::string& label,
               const std::string& where) {
  try {
    return evaluate(fn, x, a, label);
  } catch (const Error& e) {
    fail(ErrorKind::evaluation, e.what() + std::string(" (stencil coordinate ") + where + ")");
  }
}

}  // namespace

ModelPtr finalize_model(ProblemModel model) {
  if (model.M <= 0) fail(ErrorKind::config, "model " + model.name + ": M must be positive");
  if (model.N <= 0) fail(ErrorKind::config, "model " + model.name + ": N must be positive");
  // K = M is allowed: the constraints then fix x and every CSM vanishes.
  if (model.K < 0 || model.K > model.M)
    fail(ErrorKind::config, "model " + model.name + ": need 0 <= K <= M");
  if (static_cast<int>(model.constraints.size()) != model.K)
    fail(ErrorKind::config, "model " + model.name + ": constraint count differs from K");
  if (!model.objective.value) fail(ErrorKind::config, "model " + model.name + ": no objective");
  for (const auto& g : model.constraints)
    if (!g.value) fail(ErrorKind::config, "model " + model.name + ": constraint without value");
  if (model.parameter_names.empty())
    for (int i = 0; i < model.N; ++i) model.parameter_names.push_back("a[" + std::to_string(i + 1) + "]");
  if (model.decision_names.empty())
    for (int i = 0; i < model.M; ++i) model.decision_names.push_back("x[" + std::to_string(i + 1) + "]");
  if (static_cast<int>(model.parameter_names.size()) != model.N ||
      static_cast<int>(model.decision_names.size()) != model.M)
    fail(ErrorKind::config, "model " + model.name + ": label count mismatch");
  return std::make_shared<const ProblemModel>(std::move(model));
}

void check_dimensions(const ProblemModel& model, const Vec& x, const Vec& a) {
  if (x.size() != model.M || a.size() != model.N) {
    std::ostringstream os;
    os << "dimension mismatch for model " << model.name << ": got |x|=" << x.size()
       << ", |a|=" << a.size() << ", expected " << model.M << ", " << model.N;
    fail(ErrorKind::config, os.str());
  }
}

const ScalarFunction& function_of(const ProblemModel& model, FunctionRef ref) {
  switch (ref.which) {
    case Target::objective: return model.objective;
    case Target::constraint:
      if (ref.k < 0 || ref.k >= model.K) fail(ErrorKind::config, "constraint index out of range");
      return model.constraints[ref.k];
    case Target::parameter_constraint:
      if (ref.k < 0 || ref.k >= static_cast<int>(model.parameter_constraints.size()))
        fail(ErrorKind::config, "parameter constraint index out of range");
      return model.parameter_constraints[ref.k];
  }
  fail(ErrorKind::config, "bad function reference");
}

double evaluate(const ScalarFunction& fn, const Vec& x, const Vec& a, const std::string& label) {
  const double v = fn.value(x, a);
  if (!std::isfinite(v)) fail(ErrorKind::evaluation, "non-finite value of " + label);
  return v;
}

double evaluate_lagrangian(const ProblemModel& model, const Vec& x, const Vec& a,
                           const Vec& lambda) {
  check_dimensions(model, x, a);
  if (lambda.size() != model.K) fail(ErrorKind::config, "multiplier count differs from K");
  double L = evaluate(model.objective, x, a, "f");
  for (int k = 0; k < model.K; ++k)
    L += lambda[k] * evaluate(model.constraints[k], x, a, "g" + std::to_string(k + 1));
  return L;
}

Vec fd_gradient(const ScalarFunction& fn, Wrt wrt, const Vec& x, const Vec& a,
                const FdOptions& fd, const std::string& label) {
  const Vec& z = (wrt == Wrt::x) ? x : a;
  Vec g(z.size());
  Vec xp = x, ap = a;
  for (int i = 0; i < z.size(); ++i) {
    const double h = step_for(z[i], fd);
    Vec& zz = (wrt == Wrt::x) ? xp : ap;
    const double z0 = zz[i];
    zz[i] = z0 + h;
    const double fp = eval_at(fn, xp, ap, label, coord_label(wrt, i));
    zz[i] = z0 - h;
    const double fm = eval_at(fn, xp, ap, label, coord_label(wrt, i));
    zz[i] = z0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vec gradient(const ScalarFunction& fn, Wrt wrt, const Vec& x, const Vec& a, const FdOptions& fd,
             const std::string& label) {
  const VectorFn& an = (wrt == Wrt::x) ? fn.grad_x : fn.grad_a;
  if (an) {
    Vec g = an(x, a);
    if (g.size() != ((wrt == Wrt::x) ? x.size() : a.size()))
      fail(ErrorKind::dimension, "analytic gradient of " + label + " has wrong length");
    if (!g.allFinite()) fail(ErrorKind::evaluation, "non-finite analytic gradient of " + label);
    return g;
  }
  return fd_gradient(fn, wrt, x, a, fd, label);
}

GradientResult numeric_gradient(const ProblemModel& model, FunctionRef ref, Wrt wrt, const Vec& x,
                                const Vec& a, const FdOptions& fd, bool cross_check) {
  check_dimensions(model, x, a);
  const ScalarFunction& fn = function_of(model, ref);
  GradientResult r;
  const VectorFn& an = (wrt == Wrt::x) ? fn.grad_x : fn.grad_a;
  if (an) {
    r.value = gradient(fn, wrt, x, a, fd);
    r.analytic = true;
    if (cross_check) {
      const Vec g = fd_gradient(fn, wrt, x, a, fd);
      const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      r.fd_residual = g.size() ? (r.value - g).cwiseAbs().maxCoeff() / scale : 0.0;
    }
  } else {
    r.value = fd_gradient(fn, wrt, x, a, fd);
  }
  return r;
}

Mat hessian_xx(const ScalarFunction& fn, const Vec& x, const Vec& a, const FdOptions& fd,
               const std::string& label) {
  const int M = static_cast<int>(x.size());
  if (fn.hess_xx) {
    Mat H = fn.hess_xx(x, a);
    if (H.rows() != M || H.cols() != M) fail(ErrorKind::dimension, "analytic hessian of " + label);
    return H;
  }
  Mat H(M, M);
  if (fn.grad_x) {
    Vec xp = x;
    for (int j = 0; j < M; ++j) {
      const double h = step_for(x[j], fd);
      xp[j] = x[j] + h;
      const Vec gp = gradient(fn, Wrt::x, xp, a, fd, label);
      xp[j] = x[j] - h;
      const Vec gm = gradient(fn, Wrt::x, xp, a, fd, label);
      xp[j] = x[j];
      H.col(j) = (gp - gm) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
  }
  Vec xp = x;
  for (int i = 0; i < M; ++i) {
    for (int j = i; j < M; ++j) {
      const double hi = step2_for(x[i]), hj = step2_for(x[j]);
      auto at = [&](double si, double sj) {
        xp = x;
        xp[i] += si * hi;
        xp[j] += sj * hj;
        return eval_at(fn, xp, a, label, coord_label(Wrt::x, i) + "," + coord_label(Wrt::x, j));
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      H(i, j) = H(j, i) = v;
    }
  }
  return H;
}

Mat hessian_xa(const ScalarFunction& fn, const Vec& x, const Vec& a, const FdOptions& fd,
               const std::string& label) {
  const int M = static_cast<int>(x.size()), N = static_cast<int>(a.size());
  if (fn.hess_xa) {
    Mat H = fn.hess_xa(x, a);
    if (H.rows() != M || H.cols() != N) fail(ErrorKind::dimension, "analytic mixed hessian of " + label);
    return H;
  }
  Mat H(M, N);
  if (fn.grad_x) {
    Vec ap = a;
    for (int mu = 0; mu < N; ++mu) {
      const double h = step_for(a[mu], fd);
      ap[mu] = a[mu] + h;
      const Vec gp = gradient(fn, Wrt::x, x, ap, fd, label);
      ap[mu] = a[mu] - h;
      const Vec gm = gradient(fn, Wrt::x, x, ap, fd, label);
      ap[mu] = a[mu];
      H.col(mu) = (gp - gm) / (2.0 * h);
    }
    return H;
  }
  if (fn.grad_a) {
    Vec xp = x;
    for (int i = 0; i < M; ++i) {
      const double h = step_for(x[i], fd);
      xp[i] = x[i] + h;
      const Vec gp = gradient(fn, Wrt::a, xp, a, fd, label);
      xp[i] = x[i] - h;
      const Vec gm = gradient(fn, Wrt::a, xp, a, fd, label);
      xp[i] = x[i];
      H.row(i) = ((gp - gm) / (2.0 * h)).transpose();
    }
    return H;
  }
  Vec xp = x, ap = a;
  for (int i = 0; i < M; ++i) {
    for (int mu = 0; mu < N; ++mu) {
      const double hi = step2_for(x[i]), hm = step2_for(a[mu]);
      auto at = [&](double si, double sm) {
        xp = x;
        ap = a;
        xp[i] += si * hi;
        ap[mu] += sm * hm;
        return eval_at(fn, xp, ap, label, coord_label(Wrt::x, i) + "," + coord_label(Wrt::a, mu));
      };
      H(i, mu) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hm);
    }
  }
  return H;
}

Mat constraint_jacobian_x(const ProblemModel& model, const Vec& x, const Vec& a,
                          const FdOptions& fd) {
  Mat G(model.K, model.M);
  for (int k = 0; k < model.K; ++k)
    G.row(k) = gradient(model.constraints[k], Wrt::x, x, a, fd, "g" + std::to_string(k + 1)).transpose();
  return G;
}

Mat constraint_jacobian_a(const ProblemModel& model, const Vec& x, const Vec& a,
                          const FdOptions& fd) {
  Mat G(model.K, model.N);
  for (int k = 0; k < model.K; ++k)
    G.row(k) = gradient(model.constraints[k], Wrt::a, x, a, fd, "g" + std::to_string(k + 1)).transpose();
  return G;
}

Vec lagrangian_gradient_x(const ProblemModel& model, const Vec& x, const Vec& a, const Vec& lambda,
                          const FdOptions& fd) {
  Vec g = gradient(model.objective, Wrt::x, x, a, fd, "f");
  for (int k = 0; k < model.K; ++k)
    g += lambda[k] * gradient(model.constraints[k], Wrt::x, x, a, fd, "g" + std::to_string(k + 1));
  return g;
}

Mat lagrangian_hessian_xx(const ProblemModel& model, const Vec& x, const Vec& a, const Vec& lambda,
                          const FdOptions& fd) {
  Mat H = hessian_xx(model.objective, x, a, fd, "f");
  for (int k = 0; k < model.K; ++k)
    H += lambda[k] * hessian_xx(model.constraints[k], x, a, fd, "g" + std::to_string(k + 1));
  return H;
}

Mat lagrangian_hessian_xa(const ProblemModel& model, const Vec& x, const Vec& a, const Vec& lambda,
                          const FdOptions& fd) {
  Mat H = hessian_xa(model.objective, x, a, fd, "f");
  for (int k = 0; k < model.K; ++k)
    H += lambda[k] * hessian_xa(model.constraints[k], x, a, fd, "g" + std::to_string(k + 1));
  return H;
}

namespace {

// Lifts a function of (x, a) to (x, [a; s]) ignoring s.
ScalarFunction drop_last_parameter(const ScalarFunction& fn, int N) {
  ScalarFunction out;
  out.value = [fn, N](const Vec& x, const Vec& a) { return fn.value(x, a.head(N)); };
  if (fn.grad_x) out.grad_x = [fn, N](const Vec& x, const Vec& a) { return fn.grad_x(x, a.head(N)); };
  if (fn.grad_a)
    out.grad_a = [fn, N](const Vec& x, const Vec& a) {
      Vec g = Vec::Zero(N + 1);
      g.head(N) = fn.grad_a(x, a.head(N));
      return g;
    };
  if (fn.hess_xx) out.hess_xx = [fn, N](const Vec& x, const Vec& a) { return fn.hess_xx(x, a.head(N)); };
  if (fn.hess_xa)
    out.hess_xa = [fn, N](const Vec& x, const Vec& a) {
      Mat H = Mat::Zero(x.size(), N + 1);
      H.leftCols(N) = fn.hess_xa(x, a.head(N));
      return H;
    };
  return out;
}

}  // namespace

ModelPtr augment_with_scale(const ProblemModel& model, const std::string& scale_name) {
  const int N = model.N;
  ProblemModel m;
  m.name = model.name;
  m.M = model.M;
  m.N = N + 1;
  m.K = model.K;
  const ScalarFunction f = model.objective;
  m.objective.value = [f, N](const Vec& x, const Vec& a) { return a[N] * f.value(x, a.head(N)); };
  if (f.grad_x)
    m.objective.grad_x = [f, N](const Vec& x, const Vec& a) -> Vec { return a[N] * f.grad_x(x, a.head(N)); };
  if (f.grad_a)
    m.objective.grad_a = [f, N](const Vec& x, const Vec& a) {
      Vec g(N + 1);
      g.head(N) = a[N] * f.grad_a(x, a.head(N));
      g[N] = f.value(x, a.head(N));
      return g;
    };
  if (f.hess_xx)
    m.objective.hess_xx = [f, N](const Vec& x, const Vec& a) -> Mat { return a[N] * f.hess_xx(x, a.head(N)); };
  if (f.hess_xa && f.grad_x)
    m.objective.hess_xa = [f, N](const Vec& x, const Vec& a) {
      Mat H(x.size(), N + 1);
      H.leftCols(N) = a[N] * f.hess_xa(x, a.head(N));
      H.col(N) = f.grad_x(x, a.head(N));
      return H;
    };
  for (const auto& g : model.constraints) m.constraints.push_back(drop_last_parameter(g, N));
  for (const auto& g : model.parameter_constraints)
    m.parameter_constraints.push_back(drop_last_parameter(g, N));
  if (model.analytic_solution) {
    auto sol = model.analytic_solution;
    m.analytic_solution = [sol, N](const Vec& a) {
      AnalyticSolution s = sol(a.head(N));
      s.lambda *= a[N];  // multipliers of s*f are s times those of f
      return s;
    };
  }
  if (model.analytic_jacobian && model.analytic_solution) {
    auto jac = model.analytic_jacobian;
    auto sol = model.analytic_solution;
    m.analytic_jacobian = [jac, sol, N](const Vec& a) {
      const AnalyticJacobian j = jac(a.head(N));
      const AnalyticSolution s = sol(a.head(N));
      AnalyticJacobian out;
      out.x_jac = Mat::Zero(j.x_jac.rows(), N + 1);
      out.x_jac.leftCols(N) = j.x_jac;
      out.lambda_jac = Mat::Zero(j.lambda_jac.rows(), N + 1);
      out.lambda_jac.leftCols(N) = a[N] * j.lambda_jac;
      out.lambda_jac.col(N) = s.lambda;
      return out;
    };
  }
  m.parameter_names = model.parameter_names;
  m.parameter_names.push_back(scale_name);
  m.decision_names = model.decision_names;
  for (const auto& gen : model.invariance_generators) {
    InvarianceGenerator g = gen;
    auto A = gen.A_map;
    g.A_map = [A, N](const Vec& a) {
      Vec out = Vec::Zero(N + 1);
      out.head(N) = A(a.head(N));
      return out;
    };
    g.response_f = nullptr;  // J(s f) = s J f is not a function of s f in general
    m.invariance_generators.push_back(std::move(g));
  }
  InvarianceGenerator scale;
  scale.name = "scale_" + scale_name;
  scale.X_map = [](const Vec& x) { return Vec::Zero(x.size()); };
  scale.A_map = [N](const Vec& a) {
    Vec out = Vec::Zero(N + 1);
    out[N] = a[N];
    return out;
  };
  scale.response_f = [](double v) { return v; };
  for (int k = 0; k < model.K; ++k) scale.response_g.push_back([](double) { return 0.0; });
  m.invariance_generators.push_back(std::move(scale));
  return finalize_model(std::move(m));
}

std::vector<double> generator_residuals(const ProblemModel& model, const InvarianceGenerator& gen,
                                        const Vec& x, const Vec& a, const FdOptions& fd) {
  check_dimensions(model, x, a);
  const Vec X = gen.X_map(x);
  const Vec A = gen.A_map(a);
  std::vector<double> out;
  auto J = [&](const ScalarFunction& fn, const std::string& label) {
    return X.dot(gradient(fn, Wrt::x, x, a, fd, label)) + A.dot(gradient(fn, Wrt::a, x, a, fd, label));
  };
  if (gen.response_f) out.push_back(J(model.objective, "f") - gen.response_f(evaluate(model.objective, x, a, "f")));
  for (int k = 0; k < model.K && k < static_cast<int>(gen.response_g.size()); ++k) {
    if (!gen.response_g[k]) continue;
    const std::string lab = "g" + std::to_string(k + 1);
    out.push_back(J(model.constraints[k], lab) - gen.response_g[k](evaluate(model.constraints[k], x, a, lab)));
  }
  return out;
}

}  // namespace compstat
