#include <cmath>
#include <limits>

#include "doctest.h"
#include "toy_models.hpp"

using namespace compstat;

namespace {

Analysis run(const std::string& name, PipelineMode mode = PipelineMode::analytic) {
  PipelineOptions o;
  o.mode = mode;
  o.run_properties = false;
  return analyze(find_benchmark(name), o);
}

}  // namespace

TEST_CASE("check primitives") {
  CHECK(make_check("a", "", 1e-9, 1e-8).passed());
  CHECK(make_check("a", "", 1e-7, 1e-8).failed());
  CHECK(make_check("a", "", std::numeric_limits<double>::quiet_NaN(), 1.0).failed());
  CHECK(skipped_check("a", "", "why").verdict == Verdict::skipped);
  CHECK(boolean_check("a", "", false, "no").reason == "no");
  Mat a(1, 2), b(1, 2);
  a << 100.0, 0.0;
  b << 100.0 + 1e-5, 0.0;
  CHECK(check_close("c", "", a, b, 1e-6).passed());
  CHECK(check_close("c", "", a, b, 1e-8).failed());
}

TEST_CASE("semidefiniteness and rank") {
  Mat s(2, 2);
  s << -0.25, 0.25, 0.25, -0.25;
  CHECK(check_semidefinite("nsd", s, SignConvention::negative_semidefinite_expected, 1e-8).passed());
  CHECK(check_semidefinite("psd", s, SignConvention::positive_semidefinite_expected, 1e-8).failed());
  CHECK(check_null_vector("p", s, Vec::Ones(2), 1e-8).passed());
  CHECK(check_null_vector("e1", s, (Vec(2) << 1, 0).finished(), 1e-8).failed());
  const CsmResult c = make_csm(-s, Recipe::omega, SignConvention::positive_semidefinite_expected);
  CHECK(check_rank_bound(c, 2, 1, 2).passed());
  CHECK(check_rank_bound("tight", c, 0).failed());
  CHECK(check_rank_equals("one", c, 1).passed());
}

TEST_CASE("envelope along budget-compensated rows of the consumer") {
  const Analysis an = run("slutsky_hicks");
  const CheckReport r = check_envelope(*an.model, an.sol, an.iso);
  CHECK(r.passed());
  CHECK(r.residual < 1e-6);
}

TEST_CASE("envelope along objective-compensated rows of the profit model") {
  const Analysis an = run("profit_cd");
  IsovectorSet iso = one_term_compensation(*an.model, an.sol, FunctionRef::objective(), 2);
  iso.annihilates_objective = true;
  const CheckReport r = check_envelope(*an.model, an.sol, iso);
  CHECK(r.passed());
  CHECK(r.residual < 1e-6);
}

TEST_CASE("plain envelope with the standard basis on an unconstrained model") {
  const Analysis an = run("profit_cd");
  const CheckReport r = check_envelope(*an.model, an.sol, identity_isovectors(3));
  CHECK(r.passed());
}

TEST_CASE("registered invariance generators hold on the benchmarks") {
  for (const char* name : {"slutsky_hicks", "profit_cd", "cost_constrained_profit"}) {
    CAPTURE(name);
    const Analysis an = run(name, PipelineMode::numeric);
    REQUIRE_FALSE(an.model->invariance_generators.empty());
    for (const auto& gen : an.model->invariance_generators) {
      CAPTURE(gen.name);
      CHECK(check_invariance(*an.model, gen, an.sol, an.sens, 1e-5).passed());
      CHECK(check_generator_response(*an.model, gen, an.sol, 1e-6).passed());
    }
  }
}

TEST_CASE("broken invariance is reported") {
  const Analysis an = run("slutsky_hicks");
  InvarianceGenerator bad;
  bad.name = "prices_only";
  bad.X_map = [](const Vec& x) { return Vec::Zero(x.size()); };
  bad.A_map = [](const Vec& a) {
    Vec r = a;
    r[2] = 0.0;
    return r;
  };
  CHECK(check_invariance(*an.model, bad, an.sol, an.sens, 1e-6).failed());
}

TEST_CASE("conformance and null property on every constrained benchmark") {
  for (const auto& e : catalog()) {
    if (e.model->K == 0) continue;
    CAPTURE(e.name);
    const Analysis an = run(e.name, PipelineMode::numeric);
    CHECK(check_conformance(*an.model, an.sol, an.sens, an.iso, 1e-6).passed());
    CHECK(check_null_property(an.iso, 1e-8).passed());
  }
}

TEST_CASE("Hatta rows for a linear budget are the Slutsky rows") {
  const Analysis an = run("slutsky_hicks");
  const HattaResult h = hatta_reduction(*an.model, an.sol, an.sens, HattaForm{{2}, {}}, 1e-6);
  CHECK((h.rows - an.iso.vectors).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(h.check.passed());
  CHECK((h.matrix - an.find(Recipe::omega)->matrix).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("Hatta reduction is skipped when the constraint is not separable") {
  const Analysis an = run("generic_quadratic");
  const CheckReport r = check_hatta_reduction(*an.model, an.sol, an.sens, HattaForm{{0, 1}, {}}, 1e-6);
  CHECK(r.verdict == Verdict::skipped);
}
