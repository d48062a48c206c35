#include "cuspclose/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "cuspclose/errors.hpp"
#include "cuspclose/surface.hpp"

namespace cuspclose {

void CuspedManifoldSpec::validate() const {
  if (n < 4) throw UsageError("CuspedManifoldSpec: n must be >= 4");
  if (k < 1) throw UsageError("CuspedManifoldSpec: k must be >= 1");
  if (!(L > 0.0) || !std::isfinite(L)) throw UsageError("CuspedManifoldSpec: L must be positive");
}

std::vector<int> ClosingPlan::cap_orders() const {
  std::vector<int> out;
  if (!i_eps) return out;
  for (int i = *i_eps; i <= i_max; ++i) out.push_back(i);
  return out;
}

std::vector<int> ClosingPlan::kept_cusps() const {
  const int last = i_eps ? *i_eps - 1 : i_max;
  std::vector<int> out;
  for (int i = 1; i <= last; ++i) out.push_back(i);
  return out;
}

std::pair<double, double> closing_parameters(double L) {
  double r = 0.0;
  for (int it = 0; it < 3; ++it) r = 0.25 * std::asinh(L * std::exp(-2.0 * r) / std::numbers::pi);
  return {L * std::exp(-2.0 * r), r};
}

ClosingPlan plan_closing(const CuspedManifoldSpec& spec, double epsilon, int i_max, WindowMode mode) {
  spec.validate();
  if (!(epsilon > 0.0)) throw UsageError("plan_closing: epsilon must be positive");
  if (i_max < 2) throw UsageError("plan_closing: i_max must be >= 2");

  ClosingPlan plan;
  plan.spec = spec;
  plan.epsilon = epsilon;
  plan.mode = mode;
  plan.i_max = i_max;
  std::tie(plan.a, plan.r) = closing_parameters(spec.L);
  if (std::abs(spec.L - plan.a * std::exp(2.0 * plan.r)) > 1e-12 * spec.L || !validate_collar(plan.a, plan.r).pass)
    throw InternalError("plan_closing: parameter rule violated the collar constraints");

  const MinOrderResult mo = min_order(epsilon, plan.a, plan.r, mode);
  if (!mo.i_eps) {
    plan.certificate = mo.certificate;
    return plan;
  }
  if (*mo.i_eps > i_max)
    throw CapacityError("plan_closing: threshold order " + std::to_string(*mo.i_eps) + " exceeds i_max " +
                        std::to_string(i_max));
  plan.i_eps = *mo.i_eps;
  return plan;
}

CollarResidual collar_isometry_check(const ClosingPlan& plan, int order, int samples, std::uint64_t seed,
                                     double cap_scale, int dim) {
  if (!plan.i_eps || order < *plan.i_eps || order > plan.i_max)
    throw UsageError("collar_isometry_check: order outside the plan's cap range");
  if (samples < 1) throw UsageError("collar_isometry_check: need at least one sample");
  const int n = dim == 0 ? plan.spec.n : dim;
  if (n < 2) throw UsageError("collar_isometry_check: dimension must be >= 2");

  const SplicedSurface splice(plan.a, order, plan.r);
  const double R = splice.corner();
  const CuspCylinder cusp(plan.a);
  const RadialProfile cusp_side = cusp.profile();
  const RadialProfile cap_side(-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                               [splice, R, cap_scale](double t) {
                                 ProfileJet j = splice.jet(t + R);
                                 return ProfileJet{cap_scale * j.f, cap_scale * j.fp, cap_scale * j.fpp};
                               },
                               true);
  const WarpedStack cusp_stack(n - 2, FiberSurface(cusp_side));
  const WarpedStack cap_stack(n - 2, FiberSurface(cap_side));
  const ScanRegion region = stack_region(cusp_stack, 2.0, plan.r, 2.0 * plan.r, "collar");

  std::uint64_t state = seed;
  double residual = 0.0;
  for (int j = 0; j < samples; ++j) {
    const Eigen::VectorXd p = random_point(region, state);
    const Eigen::MatrixXd gc = cusp_stack.metric_tensor(p);
    const Eigen::MatrixXd gk = cap_stack.metric_tensor(p);
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b)
          worst = std::max(worst, std::abs(std::sqrt(gk(a, a) / gc(a, a)) - 1.0));
        else
          worst = std::max(worst, std::abs(gk(a, b) - gc(a, b)) / std::sqrt(gc(a, a) * gc(b, b)));
      }
    residual = std::max(residual, worst);
  }
  return {order, n, plan.r, residual, residual <= kCollarTolerance};
}

std::string Relator::text() const { return "(" + word + ")^" + std::to_string(exponent); }

OrbifoldAssembly assemble(const ClosingPlan& plan, const AssembleOptions& options) {
  const std::vector<int> orders = plan.cap_orders();
  const auto& words = plan.spec.relator_words;
  if (words.empty() && !orders.empty() && !options.allow_placeholders)
    throw UsageError("assemble: relator words missing and placeholders not allowed");
  if (!words.empty() && words.size() != orders.size())
    throw UsageError("assemble: expected one relator word per cap");

  OrbifoldAssembly out;
  out.plan = plan;
  out.pieces.push_back({"M'", "truncated_manifold", 0});
  for (int g = 1; g <= plan.spec.k; ++g) out.presentation.generators.push_back("s" + std::to_string(g));

  std::vector<std::future<CollarResidual>> checks;
  for (int i : orders)
    checks.push_back(std::async(std::launch::async, [&plan, i, &options] {
      return collar_isometry_check(plan, i, options.collar_samples, options.seed + static_cast<std::uint64_t>(i));
    }));

  for (std::size_t j = 0; j < orders.size(); ++j) {
    const int i = orders[j];
    out.pieces.push_back({"O_" + std::to_string(i), "cap", i});
    out.edges.emplace_back(0, static_cast<int>(out.pieces.size()) - 1);
    const CollarResidual c = checks[j].get();
    out.interfaces.push_back({i, c.width, c.residual});
    Relator rel;
    rel.exponent = i;
    rel.input_required = words.empty();
    rel.word = words.empty() ? "w_" + std::to_string(i) : words[j];
    out.presentation.relators.push_back(rel);
    out.local_groups.push_back({i, i});
  }
  return out;
}

TorsionReport torsion_report(const OrbifoldAssembly& assembly) {
  TorsionReport rep;
  for (const auto& g : assembly.local_groups) rep.orders.push_back(g.order);
  std::sort(rep.orders.begin(), rep.orders.end());
  bool interval = !rep.orders.empty();
  for (std::size_t j = 1; j < rep.orders.size(); ++j) interval = interval && rep.orders[j] == rep.orders[j - 1] + 1;
  rep.unbounded_at_scale = interval && rep.orders.back() == assembly.plan.i_max;
  if (rep.unbounded_at_scale)
    rep.verdict = "unbounded-at-scale";
  else if (rep.orders.empty())
    rep.verdict = assembly.plan.certificate ? "no-caps: see certificate (" + assembly.plan.certificate->kind + ")"
                                            : "no-caps";
  else
    rep.verdict = "gaps-or-truncated";
  return rep;
}

CompletenessAudit completeness_audit(const OrbifoldAssembly& assembly) {
  CompletenessAudit rep;
  if (assembly.interfaces.empty()) {
    rep.pass = true;
    return rep;
  }
  double w = std::numeric_limits<double>::infinity();
  for (const auto& f : assembly.interfaces) w = std::min(w, f.width);
  rep.min_width = w;
  // Every piece is glued along a closed band [r, 2r] of its own profile domain.
  rep.pass = w >= assembly.plan.r - 1e-12 && w > 0.0;
  return rep;
}

ProfileSolution cap_solution(const ClosingPlan& plan, int order) {
  const SmoothingProblem problem = make_smoothing_problem(build_splice(plan.a, order, plan.r), plan.window());
  SynthesisResult res = synthesize_profile(problem);
  if (!res.solution) throw InternalError("cap_solution: order " + std::to_string(order) + " is infeasible");
  return std::move(*res.solution);
}

namespace {

RadialProfile corrupt(const RadialProfile& base, double delta, double mid) {
  if (delta == 0.0) return base;
  return RadialProfile(base.s_lo(), base.s_hi(),
                       [base, delta, mid](double s) {
                         const ProfileJet j = base.jet(s);
                         const double x = s - mid;
                         const double e = std::exp(delta * x * x);
                         const double q1 = 2.0 * delta * x;
                         const double q2 = 2.0 * delta;
                         return ProfileJet{j.f * e, (j.fp + j.f * q1) * e,
                                           (j.fpp + 2.0 * j.fp * q1 + j.f * (q2 + q1 * q1)) * e};
                       },
                       base.closed_form(), base.corners());
}

RegionAudit audit_region(const WarpedStack& stack, const ScanRegion& region, const PinchWindow& window,
                         const CurvatureAuditOptions& options, std::uint64_t seed) {
  ScanOptions so;
  so.h = options.h;
  so.window = window;
  so.tol = options.tol;
  const ScanResult scan = pinch_scan(stack, region, options.samples, seed, so);
  return {region.label, scan.K_min, scan.K_max, scan.violations.size(), scan.violations.empty()};
}

}  // namespace

CurvatureAudit curvature_audit(const OrbifoldAssembly& assembly, const CurvatureAuditOptions& options) {
  const ClosingPlan& plan = assembly.plan;
  const PinchWindow window = plan.window();
  const int depth = plan.spec.n - 2;
  CurvatureAudit out;

  const WarpedStack truncated(depth, FiberSurface(CuspCylinder(plan.a).profile()));
  out.regions.push_back(audit_region(truncated, stack_region(truncated, options.t_extent, -1.0, 2.0 * plan.r, "M'"),
                                     window, options, options.seed));

  for (const auto& piece : assembly.pieces) {
    if (piece.kind != "cap") continue;
    const ProfileSolution sol = cap_solution(plan, piece.order);
    const RadialProfile fiber = corrupt(smoothed_surface(sol), options.corrupt_log_f, 0.5 * (sol.s1 + sol.s2));
    const WarpedStack stack(depth, FiberSurface(fiber));
    const ScanRegion region = stack_region(stack, options.t_extent, sol.s1, sol.s2, piece.id);
    out.regions.push_back(
        audit_region(stack, region, window, options, options.seed + static_cast<std::uint64_t>(piece.order)));
  }

  out.K_min = std::numeric_limits<double>::infinity();
  out.K_max = -std::numeric_limits<double>::infinity();
  out.pass = true;
  for (const auto& r : out.regions) {
    out.K_min = std::min(out.K_min, r.K_min);
    out.K_max = std::max(out.K_max, r.K_max);
    out.pass = out.pass && r.pass;
  }
  return out;
}

}  // namespace cuspclose
