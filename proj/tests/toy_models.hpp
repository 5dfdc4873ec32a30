#pragma once

#include <cmath>

#include "compstat/benchmarks.hpp"

namespace toy {

using compstat::Mat;
using compstat::ModelPtr;
using compstat::ProblemModel;
using compstat::ScalarFunction;
using compstat::Vec;

// U = sum gamma_i log x_i subject to m - p.x = 0, a = (p, m). Values only.
inline ModelPtr log_utility(const Vec& gamma) {
  const int M = static_cast<int>(gamma.size());
  ProblemModel m;
  m.name = "log_utility";
  m.M = M;
  m.N = M + 1;
  m.K = 1;
  m.objective.value = [gamma](const Vec& x, const Vec&) { return gamma.dot(x.array().log().matrix()); };
  ScalarFunction g;
  g.value = [M](const Vec& x, const Vec& a) { return a[M] - a.head(M).dot(x); };
  m.constraints.push_back(g);
  return compstat::finalize_model(std::move(m));
}

// f = p sqrt(x) - w x, a = (w, p), with analytic x-derivatives.
inline ModelPtr sqrt_profit() {
  ProblemModel m;
  m.name = "sqrt_profit";
  m.M = 1;
  m.N = 2;
  m.objective.value = [](const Vec& x, const Vec& a) { return a[1] * std::sqrt(x[0]) - a[0] * x[0]; };
  m.objective.grad_x = [](const Vec& x, const Vec& a) -> Vec {
    return Vec::Constant(1, 0.5 * a[1] / std::sqrt(x[0]) - a[0]);
  };
  m.objective.hess_xx = [](const Vec& x, const Vec& a) -> Mat {
    return Mat::Constant(1, 1, -0.25 * a[1] / (x[0] * std::sqrt(x[0])));
  };
  return compstat::finalize_model(std::move(m));
}

// f = G(x) + H(a): decisions never move with a.
inline ModelPtr separable(int M, int N) {
  ProblemModel m;
  m.name = "separable";
  m.M = M;
  m.N = N;
  m.objective.value = [](const Vec& x, const Vec& a) {
    return -(x.array() - 1.0).square().sum() + a.squaredNorm() + std::sin(a.sum());
  };
  return compstat::finalize_model(std::move(m));
}

// Unconstrained concave quadratic f = -1/2 x^T Q x + x^T B a with closed form x = Q^{-1} B a.
inline ModelPtr quadratic(const Mat& Q, const Mat& B) {
  ProblemModel m;
  m.name = "quadratic";
  m.M = static_cast<int>(Q.rows());
  m.N = static_cast<int>(B.cols());
  m.objective.value = [Q, B](const Vec& x, const Vec& a) { return -0.5 * x.dot(Q * x) + x.dot(B * a); };
  m.objective.grad_x = [Q, B](const Vec& x, const Vec& a) -> Vec { return -Q * x + B * a; };
  m.objective.hess_xx = [Q](const Vec&, const Vec&) -> Mat { return -Q; };
  m.objective.hess_xa = [B](const Vec&, const Vec&) -> Mat { return B; };
  return compstat::finalize_model(std::move(m));
}

}  // namespace toy
