#include "cuspclose/smoothing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cuspclose/errors.hpp"

namespace cuspclose {

namespace {

constexpr double kRefK = 1.0;            // f''/f of the hyperbolic pieces
constexpr double kGridFraction = 1e-3;   // switch grid and mollifier width, in units of r
constexpr int kRkStepsPerWindow = 256;
constexpr double kNewtonTol = 1e-13;

double coth(double x) { return 1.0 / std::tanh(x); }
double arccoth(double x) { return std::atanh(1.0 / x); }

// Fixed-step RK4 for (f, f')' = (f', k(s) f) on [a, b].
ArcState rk4(const ControlRecord& c, double a, double b, ArcState y) {
  const double w = c.mollifier_width > 0.0 ? c.mollifier_width : (b - a);
  const int steps = std::max(1, static_cast<int>(std::ceil((b - a) / (w / kRkStepsPerWindow))));
  const double h = (b - a) / steps;
  for (int j = 0; j < steps; ++j) {
    const double s = a + h * j;
    const double km = c.k(s + 0.5 * h);
    const double k0 = c.k(s);
    const double k1 = c.k(s + h);
    const double f1 = y.fp, g1 = k0 * y.f;
    const double f2 = y.fp + 0.5 * h * g1, g2 = km * (y.f + 0.5 * h * f1);
    const double f3 = y.fp + 0.5 * h * g2, g3 = km * (y.f + 0.5 * h * f2);
    const double f4 = y.fp + h * g3, g4 = k1 * (y.f + h * f3);
    y.f += h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    y.fp += h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
  }
  return y;
}

}  // namespace

std::string to_string(WindowMode mode) {
  return mode == WindowMode::OneSided ? "one-sided" : "two-sided";
}

WindowMode parse_window_mode(const std::string& text) {
  if (text == "one-sided" || text == "one_sided") return WindowMode::OneSided;
  if (text == "two-sided" || text == "two_sided") return WindowMode::TwoSided;
  throw UsageError("unknown window mode '" + text + "' (expected one-sided or two-sided)");
}

PinchWindow PinchWindow::one_sided(double eps) {
  PinchWindow w{-1.0 - eps, -1.0, WindowMode::OneSided};
  w.validate();
  return w;
}

PinchWindow PinchWindow::two_sided(double eps, double eps_prime) {
  PinchWindow w{-1.0 - eps, -1.0 + eps_prime, WindowMode::TwoSided};
  w.validate();
  return w;
}

PinchWindow PinchWindow::for_mode(WindowMode mode, double eps) {
  return mode == WindowMode::OneSided ? one_sided(eps) : two_sided(eps, eps);
}

void PinchWindow::validate() const {
  if (K_lo > K_hi) throw UsageError("PinchWindow: K_lo > K_hi");
  if (!(K_lo <= -1.0 && -1.0 <= K_hi)) throw UsageError("PinchWindow: window must contain -1");
  if (!(K_hi < 0.0)) throw UsageError("PinchWindow: upper bound must be negative");
  if (mode == WindowMode::OneSided && K_hi != -1.0)
    throw UsageError("PinchWindow: one-sided window must have K_hi = -1");
}

ArcState propagate_arc(double k, double length, ArcState start) {
  if (k < 0.0) throw UsageError("propagate_arc: k must be non-negative");
  if (k == 0.0) return {start.f + start.fp * length, start.fp};
  const double c = std::sqrt(k);
  const double ch = std::cosh(c * length);
  const double sh = std::sinh(c * length);
  return {start.f * ch + start.fp * sh / c, start.f * c * sh + start.fp * ch};
}

std::optional<double> hitting_time(double k, double u0, double target) {
  if (!(k > 0.0)) throw UsageError("hitting_time: k must be positive");
  if (u0 == target) return 0.0;
  const double c = std::sqrt(k);
  const double th = c * (target - u0) / (k - target * u0);
  if (!(th > 0.0 && th < 1.0)) return std::nullopt;
  return std::atanh(th) / c;
}

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

double ControlRecord::k(double s) const {
  if (mollifier_width <= 0.0) return (s >= switch1 && s < switch2) ? k_mid : k_ref;
  const double w = mollifier_width;
  const double on = smooth_step((s - switch1) / w + 0.5) - smooth_step((s - switch2) / w + 0.5);
  return k_ref + (k_mid - k_ref) * on;
}

std::vector<double> ControlRecord::breakpoints() const {
  const double half = 0.5 * mollifier_width;
  std::vector<double> pts{origin, end()};
  for (double sw : {switch1, switch2})
    for (double p : {sw - half, sw + half})
      if (p > origin && p < end()) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

ControlledProfile::ControlledProfile(ControlRecord control, ArcState start)
    : control_(control), knots_(control_.breakpoints()) {
  const double half = 0.5 * control_.mollifier_width;
  states_.reserve(knots_.size());
  states_.push_back(start);
  for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
    const double mid = 0.5 * (knots_[j] + knots_[j + 1]);
    const bool in_window = control_.mollifier_width > 0.0 &&
                           (std::abs(mid - control_.switch1) < half || std::abs(mid - control_.switch2) < half);
    constant_.push_back(!in_window);
    const double len = knots_[j + 1] - knots_[j];
    states_.push_back(in_window ? rk4(control_, knots_[j], knots_[j + 1], states_.back())
                                : propagate_arc(control_.k(mid), len, states_.back()));
  }
}

ArcState ControlledProfile::state(double s) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(control_.end()));
  if (s < knots_.front() - slack || s > knots_.back() + slack)
    throw DomainError("ControlledProfile: evaluation outside the controlled interval");
  s = std::clamp(s, knots_.front(), knots_.back());
  auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
  std::size_t j = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  j = j == 0 ? 0 : j - 1;
  if (j >= constant_.size()) return states_.back();
  if (s == knots_[j]) return states_[j];
  if (constant_[j]) return propagate_arc(control_.k(0.5 * (knots_[j] + knots_[j + 1])), s - knots_[j], states_[j]);
  return rk4(control_, knots_[j], s, states_[j]);
}

ProfileJet ControlledProfile::jet(double s) const {
  const ArcState st = state(s);
  return {st.f, st.fp, control_.k(s) * st.f};
}

namespace {

struct SwitchPair {
  double t1, t2;
};

// Residual of the smoothed control: (log f(L) - log_area, u(L) - 1), f(0) = 1.
std::array<double, 2> smoothed_residual(double u1, double length, double log_area, double k_mid, double w,
                                        SwitchPair sw) {
  ControlRecord c{0.0, length, kRefK, k_mid, sw.t1, sw.t2, w};
  const ArcState end = ControlledProfile(c, {1.0, u1}).end_state();
  return {std::log(end.f) - log_area, end.u() - 1.0};
}

std::optional<SwitchPair> newton_polish(double u1, double length, double log_area, double k_mid, double w,
                                        SwitchPair x, double& residual_out) {
  auto norm = [](const std::array<double, 2>& r) { return std::max(std::abs(r[0]), std::abs(r[1])); };
  std::array<double, 2> res = smoothed_residual(u1, length, log_area, k_mid, w, x);
  const double d = 1e-7 * length;
  for (int it = 0; it < 60 && norm(res) > kNewtonTol; ++it) {
    Eigen::Matrix2d J;
    for (int col = 0; col < 2; ++col) {
      SwitchPair xp = x, xm = x;
      (col == 0 ? xp.t1 : xp.t2) += d;
      (col == 0 ? xm.t1 : xm.t2) -= d;
      const auto rp = smoothed_residual(u1, length, log_area, k_mid, w, xp);
      const auto rm = smoothed_residual(u1, length, log_area, k_mid, w, xm);
      J(0, col) = (rp[0] - rm[0]) / (2.0 * d);
      J(1, col) = (rp[1] - rm[1]) / (2.0 * d);
    }
    const Eigen::Vector2d step = J.fullPivLu().solve(-Eigen::Vector2d(res[0], res[1]));
    if (!step.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
      SwitchPair trial{x.t1 + lambda * step(0), x.t2 + lambda * step(1)};
      const auto rt = smoothed_residual(u1, length, log_area, k_mid, w, trial);
      if (std::isfinite(norm(rt)) && norm(rt) < norm(res)) {
        x = trial;
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  residual_out = norm(res);
  if (!(residual_out <= 1e-11)) return std::nullopt;
  return x;
}

// Piecewise-constant controls built from window extremes; checks the
// comparison bound on each and returns the smallest margin seen.
void enumerate_comparison_candidates(double u1, double length, const PinchWindow& window, bool descending,
                                     InfeasibilityCertificate& cert) {
  constexpr int kSwitchGrid = 12;
  constexpr int kProbe = 48;
  const std::array<double, 2> values{window.k_min(), window.k_max()};
  const double start = descending ? arccoth(u1) : std::atanh(u1);
  auto bound = [&](double s) { return descending ? coth(s + start) : std::tanh(s + start); };
  double min_margin = std::numeric_limits<double>::infinity();
  int count = 0;
  for (int pattern = 0; pattern < 8; ++pattern) {
    const std::array<double, 3> ks{values[pattern & 1], values[(pattern >> 1) & 1], values[(pattern >> 2) & 1]};
    for (int a = 0; a <= kSwitchGrid; ++a) {
      for (int b = a; b <= kSwitchGrid; ++b) {
        const std::array<double, 4> knots{0.0, length * a / kSwitchGrid, length * b / kSwitchGrid, length};
        double margin = std::numeric_limits<double>::infinity();
        for (int p = 0; p <= kProbe; ++p) {
          const double s = length * p / kProbe;
          // state at s from the arc containing it
          ArcState cur{1.0, u1};
          double pos = 0.0;
          for (int arc = 0; arc < 3; ++arc) {
            const double hi = std::min(knots[arc + 1], s);
            if (hi > pos) {
              cur = propagate_arc(ks[arc], hi - pos, cur);
              pos = hi;
            }
          }
          const double gap = descending ? cur.u() - bound(s) : bound(s) - cur.u();
          margin = std::min(margin, gap);
        }
        min_margin = std::min(min_margin, margin);
        ++count;
      }
    }
  }
  cert.candidates_checked = count;
  cert.min_comparison_margin = min_margin;
}

}  // namespace

SteerResult riccati_steer(double u1, double u2, double length, double log_area, const PinchWindow& window) {
  window.validate();
  if (!(length > 0.0)) throw UsageError("riccati_steer: length must be positive");
  if (!(u1 > 0.0)) throw UsageError("riccati_steer: u1 must be positive");
  if (std::abs(u2 - 1.0) > 1e-15) throw UsageError("riccati_steer: the terminal log-slope must be 1");

  SteerResult out;
  const double r = 0.5 * length;
  const double w = kGridFraction * r;
  out.certificate.required_terminal = u2;

  if (u1 == 1.0) {
    // u stays at the equilibrium; only the unmodified cusp profile qualifies.
    if (std::abs(log_area - length) <= 1e-12 * std::max(1.0, length)) {
      out.feasible = true;
      out.control = ControlRecord{0.0, length, kRefK, kRefK, 0.0, 0.0, w};
      return out;
    }
    out.certificate.kind = "search_exhausted";
    out.certificate.detail = "u1 = 1 is an equilibrium of k = 1; log_area must equal the length";
    out.certificate.terminal_bound = 1.0;
    return out;
  }

  const bool descending = u1 > 1.0;
  const double k_mid = descending ? window.k_min() : window.k_max();
  if ((descending && k_mid >= kRefK) || (!descending && k_mid <= kRefK)) {
    auto& cert = out.certificate;
    cert.kind = "riccati_comparison";
    if (descending) {
      cert.terminal_bound = coth(length + arccoth(u1));
      std::ostringstream msg;
      msg << "every admissible flow satisfies u(s) >= coth(s - s1 + arccoth(u1)); at the right end u >= "
          << cert.terminal_bound << " > " << u2;
      cert.detail = msg.str();
    } else {
      cert.terminal_bound = std::tanh(length + std::atanh(u1));
      std::ostringstream msg;
      msg << "every admissible flow satisfies u(s) <= tanh(s - s1 + arctanh(u1)); at the right end u <= "
          << cert.terminal_bound << " < " << u2;
      cert.detail = msg.str();
    }
    enumerate_comparison_candidates(u1, length, window, descending, cert);
    return out;
  }

  // Grid over the first switch; the second is where u first reaches 1.
  const double lo = 0.5 * w;
  const double hi = length - 0.5 * w;
  const int n = static_cast<int>(std::floor((hi - lo) / w));
  out.grid_points = n + 1;

  struct Eval {
    bool valid;
    double g;
    double t2;
  };
  auto eval = [&](double t1) -> Eval {
    const ArcState a1 = propagate_arc(kRefK, t1, {1.0, u1});
    const auto h = hitting_time(k_mid, a1.u(), 1.0);
    if (!h) return {false, 0.0, 0.0};
    const double t2 = t1 + *h;
    if (t2 > hi) return {false, 0.0, t2};
    const ArcState a2 = propagate_arc(k_mid, *h, a1);
    return {true, std::log(a2.f) + (length - t2) - log_area, t2};
  };

  std::optional<std::pair<double, double>> bracket;
  double best_abs = std::numeric_limits<double>::infinity();
  Eval prev{false, 0.0, 0.0};
  double prev_t = lo;
  for (int j = 0; j <= n; ++j) {
    const double t = lo + w * j;
    const Eval e = eval(t);
    if (e.valid) {
      best_abs = std::min(best_abs, std::abs(e.g));
      if (e.g == 0.0) {
        bracket = {t, t};
        break;
      }
      if (prev.valid && (prev.g < 0.0) != (e.g < 0.0)) {
        bracket = {prev_t, t};
        break;
      }
    }
    prev = e;
    prev_t = t;
  }

  if (!bracket) {
    auto& cert = out.certificate;
    cert.kind = "search_exhausted";
    std::ostringstream msg;
    msg << "no switch time on the " << out.grid_points << "-point grid balances the area; smallest |residual| "
        << best_abs;
    cert.detail = msg.str();
    cert.terminal_bound = u2;
    return out;
  }

  double a = bracket->first, b = bracket->second;
  double ga = eval(a).g;
  for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * length; ++it) {
    const double m = 0.5 * (a + b);
    const Eval e = eval(m);
    if (!e.valid) break;
    if ((e.g < 0.0) == (ga < 0.0)) {
      a = m;
      ga = e.g;
    } else {
      b = m;
    }
  }
  const double t1 = 0.5 * (a + b);
  const Eval root = eval(t1);
  if (!root.valid) {
    out.certificate.kind = "search_exhausted";
    out.certificate.detail = "bisection left the admissible switch range";
    return out;
  }
  out.bang_bang_switch1 = t1;
  out.bang_bang_switch2 = root.t2;

  double residual = 0.0;
  const auto polished = newton_polish(u1, length, log_area, k_mid, w, {t1, root.t2}, residual);
  out.residual = residual;
  const double slack = 1e-12 * length;
  if (!polished || polished->t1 < lo - slack || polished->t2 > hi + slack || polished->t2 < polished->t1) {
    out.certificate.kind = "mollifier_room";
    out.certificate.detail = "the bang-bang solution does not survive smoothing inside the annulus";
    out.certificate.terminal_bound = u2;
    return out;
  }
  out.feasible = true;
  out.control = ControlRecord{0.0, length, kRefK, k_mid, polished->t1, polished->t2, w};
  return out;
}

double SmoothingProblem::log_area() const { return std::log(right.f / left.f); }

SmoothingProblem make_smoothing_problem(const SplicedSurface& splice, const PinchWindow& window) {
  window.validate();
  const double s1 = splice.inner_annulus_lo();
  const double s2 = splice.inner_annulus_hi();
  const ProfileJet l = splice.jet(s1);
  const ProfileJet rj = splice.jet(s2);
  return SmoothingProblem{splice, window, s1, s2, {l.f, l.fp}, {rj.f, rj.fp}};
}

SmoothingProblem make_degenerate_problem(const SplicedSurface& splice, const PinchWindow& window) {
  SmoothingProblem p = make_smoothing_problem(splice, window);
  const ProfileJet l = splice.cusp().jet(p.s1 - splice.corner());
  p.left = {l.f, l.fp};
  return p;
}

SynthesisResult synthesize_profile(const SmoothingProblem& problem, double samples_per_unit) {
  if (!(problem.left.f > 0.0 && problem.right.f > 0.0))
    throw UsageError("synthesize_profile: boundary values must be positive");
  SynthesisResult out;
  const SteerResult steer =
      riccati_steer(problem.left.u(), problem.right.u(), problem.length(), problem.log_area(), problem.window);
  if (!steer.feasible) {
    out.certificate = steer.certificate;
    return out;
  }

  ControlRecord control = steer.control;
  control.origin = problem.s1;
  control.switch1 += problem.s1;
  control.switch2 += problem.s1;
  auto evaluator = std::make_shared<const ControlledProfile>(control, problem.left);

  ProfileSolution sol;
  sol.order = problem.splice.order();
  sol.a = problem.splice.a();
  sol.r = problem.splice.r();
  sol.window = problem.window;
  sol.s1 = problem.s1;
  sol.s2 = problem.s2;
  sol.left_target = problem.left;
  sol.right_target = problem.right;
  sol.control = control;
  sol.evaluator = evaluator;

  RadialProfile band(problem.s1, problem.s2, [evaluator](double s) { return evaluator->jet(s); }, true);
  sol.samples = band.sample(problem.s1, problem.s2, samples_per_unit);
  sol.K_min = sol.samples.K.minCoeff();
  sol.K_max = sol.samples.K.maxCoeff();

  const ArcState at_left = evaluator->state(problem.s1);
  const ArcState at_right = evaluator->end_state();
  sol.boundary_mismatch = std::max({std::abs(at_left.f - problem.left.f), std::abs(at_left.fp - problem.left.fp),
                                    std::abs(at_right.f - problem.right.f),
                                    std::abs(at_right.fp - problem.right.fp)});
  out.solution = std::move(sol);
  return out;
}

WindowReport verify_window(const ProfileSolution& solution, double tol) {
  const ProfileSamples& smp = solution.samples;
  if (smp.size() < 3) throw UsageError("verify_window: need at least 3 samples");
  const Eigen::Index n = smp.size();
  const double h = (smp.s(n - 1) - smp.s(0)) / static_cast<double>(n - 1);
  const Eigen::VectorXd K = central_difference_curvature(smp.f, h);

  WindowReport rep;
  rep.K_min = K.minCoeff();
  rep.K_max = K.maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j)
    if (!solution.window.contains(K(j), tol)) rep.violations.push_back(j);
  rep.boundary_mismatch = std::max({std::abs(smp.f(0) - solution.left_target.f),
                                    std::abs(smp.fp(0) - solution.left_target.fp),
                                    std::abs(smp.f(n - 1) - solution.right_target.f),
                                    std::abs(smp.fp(n - 1) - solution.right_target.fp)});
  rep.pass = rep.violations.empty() && rep.boundary_mismatch <= 1e-9;
  return rep;
}

bool smoothing_feasible(double eps, double a, double r, int i, WindowMode mode) {
  const SmoothingProblem p = make_smoothing_problem(build_splice(a, i, r), PinchWindow::for_mode(mode, eps));
  return riccati_steer(p.left.u(), p.right.u(), p.length(), p.log_area(), p.window).feasible;
}

MinOrderResult min_order(double eps, double a, double r, WindowMode mode, int search_bound) {
  if (!(eps > 0.0)) throw UsageError("min_order: epsilon must be positive");
  if (!validate_collar(a, r).pass) throw PreconditionError("min_order: collar constraint r < arcsinh(a/pi)/2 fails");
  if (search_bound < 2) throw UsageError("min_order: search bound must be >= 2");

  MinOrderResult out;
  out.search_bound = search_bound;
  const PinchWindow window = PinchWindow::for_mode(mode, eps);

  if (mode == WindowMode::OneSided) {
    const SmoothingProblem p = make_smoothing_problem(build_splice(a, search_bound, r), window);
    out.certificate = riccati_steer(p.left.u(), p.right.u(), p.length(), p.log_area(), window).certificate;
    return out;
  }

  auto feasible = [&](int i) { return smoothing_feasible(eps, a, r, i, mode); };

  int lo = 1;  // largest known infeasible order (1 = none tested)
  int hi = 2;
  while (!feasible(hi)) {
    lo = hi;
    if (hi >= search_bound) {
      const SmoothingProblem p = make_smoothing_problem(build_splice(a, search_bound, r), window);
      out.certificate = riccati_steer(p.left.u(), p.right.u(), p.length(), p.log_area(), window).certificate;
      return out;
    }
    hi = std::min(2 * hi, search_bound);
  }
  while (hi - lo > 1 && lo >= 2) {
    const int mid = lo + (hi - lo) / 2;
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  out.i_eps = hi;
  out.infeasible_below = (hi == 2) || !feasible(hi - 1);
  for (int factor : {1, 2, 10}) {
    const long long i = static_cast<long long>(hi) * factor;
    if (i > std::numeric_limits<int>::max()) continue;
    out.upward_samples.emplace_back(static_cast<int>(i), feasible(static_cast<int>(i)));
  }
  return out;
}

RadialProfile smoothed_surface(const ProfileSolution& solution) {
  const SplicedSurface splice(solution.a, solution.order, solution.r);
  const auto evaluator = solution.evaluator;
  const double s1 = solution.s1, s2 = solution.s2;
  auto eval = [splice, evaluator, s1, s2](double s) {
    if (s <= s1 || s >= s2) return splice.jet(s);
    return evaluator->jet(s);
  };
  return RadialProfile(0.0, std::numeric_limits<double>::infinity(), eval, true,
                       {solution.control.switch1, solution.control.switch2});
}

}  // namespace cuspclose
