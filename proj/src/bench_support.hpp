#pragma once

#include <string>
#include <vector>

#include "compstat/benchmarks.hpp"

namespace compstat::detail {

inline std::vector<std::string> indexed(const std::string& base, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(base + "[" + std::to_string(i + 1) + "]");
  return out;
}

inline void append(std::vector<std::string>& to, const std::vector<std::string>& more) {
  to.insert(to.end(), more.begin(), more.end());
}

// x_{i;alpha}, M x A
inline Mat x_semi(const Analysis& an) { return gcd_apply(an.iso, an.sens.x_jac); }

inline int rank_of(const Mat& m, double rel_tol) {
  return make_csm(m, Recipe::application, SignConvention::positive_semidefinite_expected, {},
                  CsmTolerances{rel_tol, 1e-8, 1e-12})
      .rank_estimate;
}

inline CheckReport rank_at_most(std::string name, const Mat& m, int bound, double rel_tol) {
  const int r = rank_of(m, rel_tol);
  CheckReport c = make_check(std::move(name), "rank does not exceed " + std::to_string(bound),
                             std::max(0, r - bound), 0.0);
  c.values.emplace_back("rank", r);
  c.values.emplace_back("bound", bound);
  return c;
}

// value >= -tol * scale
inline CheckReport at_least_zero(std::string name, std::string claim, double value, double tol,
                                 double scale = 1.0) {
  CheckReport c = make_check(std::move(name), std::move(claim), std::max(0.0, -value) / std::max(1.0, scale), tol);
  c.values.emplace_back("value", value);
  return c;
}

inline CheckReport at_most_zero(std::string name, std::string claim, double value, double tol,
                                double scale = 1.0) {
  CheckReport c = make_check(std::move(name), std::move(claim), std::max(0.0, value) / std::max(1.0, scale), tol);
  c.values.emplace_back("value", value);
  return c;
}

inline InvarianceGenerator scaling_generator(std::string name, std::vector<int> scaled, bool f_scales,
                                             std::vector<bool> g_scales) {
  InvarianceGenerator gen;
  gen.name = std::move(name);
  gen.X_map = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  gen.A_map = [scaled](const Vec& a) {
    Vec A = Vec::Zero(a.size());
    for (int i : scaled) A[i] = a[i];
    return A;
  };
  gen.response_f = f_scales ? std::function<double(double)>([](double y) { return y; })
                            : std::function<double(double)>([](double) { return 0.0; });
  for (bool s : g_scales)
    gen.response_g.push_back(s ? std::function<double(double)>([](double y) { return y; })
                               : std::function<double(double)>([](double) { return 0.0; }));
  return gen;
}

inline std::vector<int> range(int from, int count) {
  std::vector<int> v;
  for (int i = 0; i < count; ++i) v.push_back(from + i);
  return v;
}

}  // namespace compstat::detail
