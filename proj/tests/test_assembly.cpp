#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cuspclose/assembly.hpp"
#include "cuspclose/errors.hpp"
#include "cuspclose/surface.hpp"

using namespace cuspclose;

namespace {

CuspedManifoldSpec spec(int n = 4, int k = 2, double L = 1.0) {
  CuspedManifoldSpec s;
  s.n = n;
  s.k = k;
  s.L = L;
  return s;
}

const ClosingPlan& base_plan() {
  static const ClosingPlan p = plan_closing(spec(), 0.1, 200, WindowMode::TwoSided);
  return p;
}

// A plan with a hand-picked cap range, bypassing the threshold search.
ClosingPlan plan_with_range(int lo, int hi, int k = 2) {
  ClosingPlan p = base_plan();
  p.spec.k = k;
  p.i_eps = lo;
  p.i_max = hi;
  return p;
}

}  // namespace

TEST_CASE("manifold spec validation") {
  CHECK_NOTHROW(spec().validate());
  CHECK_THROWS_AS(spec(3).validate(), UsageError);
  CHECK_THROWS_AS(spec(4, 0).validate(), UsageError);
  CHECK_THROWS_AS(spec(4, 2, 0.0).validate(), UsageError);
}

TEST_CASE("closing parameters") {
  const auto [a, r] = closing_parameters(1.0);
  // the rule, re-run by hand
  double rr = 0.0;
  for (int j = 0; j < 3; ++j) rr = std::asinh(std::exp(-2.0 * rr) / std::numbers::pi) / 4.0;
  CHECK(r == rr);
  CHECK(std::abs(1.0 - a * std::exp(2.0 * r)) <= 1e-12);
  CHECK(validate_collar(a, r).pass);
  CHECK(validate_collar(a, r).margin > 0.0);
  for (double L : {0.01, 0.5, 3.0, 40.0}) {
    const auto [aL, rL] = closing_parameters(L);
    CHECK(std::abs(L - aL * std::exp(2.0 * rL)) <= 1e-12 * L);
    CHECK(validate_collar(aL, rL).pass);
  }
}

TEST_CASE("plan_closing") {
  const ClosingPlan& p = base_plan();
  REQUIRE(p.i_eps);
  CHECK(*p.i_eps == min_order(0.1, p.a, p.r, WindowMode::TwoSided).i_eps);
  CHECK(std::abs(CuspCylinder(p.a).leaf_length(2 * p.r) - 1.0) <= 1e-12);
  CHECK(p.cap_orders().front() == *p.i_eps);
  CHECK(p.cap_orders().back() == 200);
  CHECK(p.kept_cusps().size() == static_cast<std::size_t>(*p.i_eps - 1));

  const ClosingPlan one = plan_closing(spec(), 0.1, 50, WindowMode::OneSided);
  CHECK_FALSE(one.has_caps());
  CHECK(one.cap_orders().empty());
  REQUIRE(one.certificate);
  CHECK(one.certificate->kind == "riccati_comparison");

  CHECK_THROWS_AS(plan_closing(spec(), 0.1, *p.i_eps - 1, WindowMode::TwoSided), CapacityError);
  CHECK_THROWS_AS(plan_closing(spec(), 0.1, 1, WindowMode::TwoSided), UsageError);
  CHECK_THROWS_AS(plan_closing(spec(3), 0.1, 10, WindowMode::TwoSided), UsageError);
}

TEST_CASE("collar isometries") {
  const ClosingPlan& p = base_plan();
  const int i = *p.i_eps;
  for (int j : {i, i + 7, i + 20}) {
    const CollarResidual c = collar_isometry_check(p, j, 64);
    CHECK(c.pass);
    CHECK(c.residual <= 1e-9);
    CHECK(c.width == p.r);
  }
  const CollarResidual c4 = collar_isometry_check(p, i, 64, 3, 1.0, 4);
  const CollarResidual c7 = collar_isometry_check(p, i, 64, 3, 1.0, 7);
  CHECK(std::abs(c4.residual - c7.residual) <= 1e-12);

  const CollarResidual bad = collar_isometry_check(p, i, 64, 1, 1.0 + 1e-6);
  CHECK_FALSE(bad.pass);
  CHECK(bad.residual == doctest::Approx(1e-6).epsilon(1e-6));
  const CollarResidual bad7 = collar_isometry_check(p, i, 64, 1, 1.0 + 1e-6, 7);
  CHECK(std::abs(bad.residual - bad7.residual) <= 1e-12);

  CHECK_THROWS_AS(collar_isometry_check(p, i - 1, 8), UsageError);
  CHECK_THROWS_AS(collar_isometry_check(p, 201, 8), UsageError);
}

TEST_CASE("collar bands are hyperbolic with the right boundary lengths") {
  const ClosingPlan& p = base_plan();
  const SplicedSurface s(p.a, *p.i_eps + 3, p.r);
  const RadialProfile prof = s.profile();
  const double R = s.corner();
  CHECK(prof.circumference(R + p.r) == doctest::Approx(p.a * std::exp(p.r)).epsilon(1e-12));
  CHECK(prof.circumference(R + 2 * p.r) == doctest::Approx(p.a * std::exp(2 * p.r)).epsilon(1e-12));
  for (double t : {1.0, 1.5, 2.0}) CHECK(prof.gauss_curvature(R + t * p.r) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("presentation and gluing graph") {
  const OrbifoldAssembly as = assemble(plan_with_range(5, 7));
  REQUIRE(as.presentation.generators == std::vector<std::string>{"s1", "s2"});
  REQUIRE(as.presentation.relators.size() == 3);
  CHECK(as.presentation.relators[0].text() == "(w_5)^5");
  CHECK(as.presentation.relators[2].text() == "(w_7)^7");
  for (const auto& r : as.presentation.relators) CHECK(r.input_required);
  CHECK(as.pieces.size() == 4);
  CHECK(as.edges.size() == 3);
  CHECK(as.interfaces.size() == 3);
  for (std::size_t j = 0; j < as.local_groups.size(); ++j) {
    CHECK(as.local_groups[j].order == as.presentation.relators[j].exponent);
    CHECK(as.local_groups[j].order == as.pieces[j + 1].order);
  }
  CHECK(as.local_groups[0].name() == "Z/5");

  ClosingPlan words = plan_with_range(5, 6);
  words.spec.relator_words = {"s1 s2", "s2^-1 s1"};
  const OrbifoldAssembly w = assemble(words);
  CHECK(w.presentation.relators[1].text() == "(s2^-1 s1)^6");
  CHECK_FALSE(w.presentation.relators[1].input_required);

  words.spec.relator_words = {"s1"};
  CHECK_THROWS_AS(assemble(words), UsageError);
  AssembleOptions strict;
  strict.allow_placeholders = false;
  CHECK_THROWS_AS(assemble(plan_with_range(5, 6), strict), UsageError);
}

TEST_CASE("torsion report") {
  const TorsionReport t = torsion_report(assemble(plan_with_range(5, 9)));
  CHECK(t.orders == std::vector<int>{5, 6, 7, 8, 9});
  CHECK(t.unbounded_at_scale);

  const ClosingPlan one = plan_closing(spec(), 0.1, 50, WindowMode::OneSided);
  const TorsionReport e = torsion_report(assemble(one));
  CHECK(e.orders.empty());
  CHECK_FALSE(e.unbounded_at_scale);
  CHECK(e.verdict.find("riccati_comparison") != std::string::npos);

  const int lo = *base_plan().i_eps;
  const TorsionReport t100 = torsion_report(assemble(plan_with_range(lo, 100)));
  const TorsionReport t200 = torsion_report(assemble(plan_with_range(lo, 200)));
  CHECK(t100.orders.back() == 100);
  CHECK(t200.orders.back() == 200);
}

TEST_CASE("completeness audit") {
  OrbifoldAssembly as = assemble(plan_with_range(5, 9));
  const CompletenessAudit ok = completeness_audit(as);
  CHECK(ok.pass);
  REQUIRE(ok.min_width);
  CHECK(*ok.min_width == as.plan.r);

  std::reverse(as.interfaces.begin(), as.interfaces.end());
  CHECK(completeness_audit(as).pass);

  as.interfaces[2].width = 0.0;
  const CompletenessAudit bad = completeness_audit(as);
  CHECK_FALSE(bad.pass);
  CHECK(*bad.min_width == 0.0);
}

TEST_CASE("curvature audit") {
  const int lo = *base_plan().i_eps;
  const OrbifoldAssembly as = assemble(plan_with_range(lo, lo + 3));
  CurvatureAuditOptions opt;
  opt.samples = 150;
  const CurvatureAudit a = curvature_audit(as, opt);
  CHECK(a.pass);
  CHECK(a.regions.size() == 5);
  CHECK(a.K_min >= -1.1 - 1e-2);
  CHECK(a.K_max <= -0.9 + 1e-2);

  opt.corrupt_log_f = 0.5;
  const CurvatureAudit bad = curvature_audit(as, opt);
  CHECK_FALSE(bad.pass);
  CHECK(bad.regions[0].pass);  // M' is untouched
}
