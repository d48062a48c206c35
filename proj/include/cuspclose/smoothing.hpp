#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cuspclose/profile.hpp"
#include "cuspclose/surface.hpp"

namespace cuspclose {

enum class WindowMode { OneSided, TwoSided };

std::string to_string(WindowMode mode);
// Accepts "one-sided"/"one_sided" and "two-sided"/"two_sided"; throws UsageError otherwise.
WindowMode parse_window_mode(const std::string& text);

// Admissible Gauss curvature interval [K_lo, K_hi]. In terms of the Riccati
// control k = f''/f = -K the admissible range is [-K_hi, -K_lo].
struct PinchWindow {
  double K_lo = -1.0;
  double K_hi = -1.0;
  WindowMode mode = WindowMode::TwoSided;

  static PinchWindow one_sided(double eps);
  static PinchWindow two_sided(double eps, double eps_prime);
  static PinchWindow for_mode(WindowMode mode, double eps);

  double k_min() const { return -K_hi; }
  double k_max() const { return -K_lo; }
  // UsageError unless K_lo <= -1 <= K_hi < 0.
  void validate() const;
  bool contains(double K, double tol) const { return K >= K_lo - tol && K <= K_hi + tol; }
};

// (f, f') along a Riccati arc f'' = k f.
struct ArcState {
  double f = 1.0;
  double fp = 0.0;
  double u() const { return fp / f; }
};

// Exact propagation of f'' = k f over `length` with constant k > 0.
ArcState propagate_arc(double k, double length, ArcState start);

// Arc length after which u = f'/f, started at u0 under constant k > 0, first
// equals `target`; nullopt if the flow never reaches it.
std::optional<double> hitting_time(double k, double u0, double target);

// C-infinity step: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x);

// Three-arc control k(s) on [origin, origin + length]: k_ref on the outer
// arcs, k_mid between the switch centres, each switch smoothed over a window
// of `mollifier_width`. Switch positions are absolute.
struct ControlRecord {
  double origin = 0.0;
  double length = 0.0;
  double k_ref = 1.0;
  double k_mid = 1.0;
  double switch1 = 0.0;
  double switch2 = 0.0;
  double mollifier_width = 0.0;

  double k(double s) const;
  double end() const { return origin + length; }
  // Endpoints of the intervals on which k is constant or transitioning, sorted.
  std::vector<double> breakpoints() const;
};

// Dense evaluator of the profile driven by a control: exact on constant arcs,
// fixed-step RK4 inside transition windows.
class ControlledProfile {
 public:
  ControlledProfile(ControlRecord control, ArcState start);

  const ControlRecord& control() const { return control_; }
  ArcState state(double s) const;
  ProfileJet jet(double s) const;
  ArcState end_state() const { return states_.back(); }

 private:
  ControlRecord control_;
  std::vector<double> knots_;
  std::vector<ArcState> states_;
  std::vector<bool> constant_;
};

struct InfeasibilityCertificate {
  // "riccati_comparison": no admissible control can bring u down to u2.
  // "search_exhausted": the switch-time search found no solution.
  // "mollifier_room": a solution exists for the bang-bang control but not once smoothed.
  std::string kind;
  std::string detail;
  // Comparison bound for u at the right end: a lower bound when u has to
  // decrease (flow u' = 1 - u^2 from u1 > 1), an upper bound when it has to increase.
  double terminal_bound = 0.0;
  double required_terminal = 1.0;
  int candidates_checked = 0;
  // Smallest u(s) - comparison(s) seen over the enumerated candidates.
  double min_comparison_margin = 0.0;
};

struct SteerResult {
  bool feasible = false;
  ControlRecord control;  // relative to origin 0
  InfeasibilityCertificate certificate;
  int grid_points = 0;
  double bang_bang_switch1 = 0.0;  // before smoothing
  double bang_bang_switch2 = 0.0;
  double residual = 0.0;           // after the smoothed polish
};

// Finds a three-arc control carrying u1 to u2 = 1 over `length` with
// integral of u equal to log_area, or certifies that none exists.
SteerResult riccati_steer(double u1, double u2, double length, double log_area, const PinchWindow& window);

// Smoothing data on the annulus [R_i - r, R_i + r] of a spliced surface.
struct SmoothingProblem {
  SplicedSurface splice;
  PinchWindow window;
  double s1 = 0.0;
  double s2 = 0.0;
  ArcState left;   // cone data at s1
  ArcState right;  // cusp data at s2

  double length() const { return s2 - s1; }
  double log_area() const;
};

SmoothingProblem make_smoothing_problem(const SplicedSurface& splice, const PinchWindow& window);
// Same annulus but with the cusp profile on both sides (zero gap).
SmoothingProblem make_degenerate_problem(const SplicedSurface& splice, const PinchWindow& window);

struct ProfileSolution {
  int order = 0;
  double a = 0.0;
  double r = 0.0;
  PinchWindow window;
  double s1 = 0.0;
  double s2 = 0.0;
  ArcState left_target;
  ArcState right_target;
  ProfileSamples samples;
  double K_min = 0.0;  // from the control at grid points
  double K_max = 0.0;
  double boundary_mismatch = 0.0;
  ControlRecord control;
  std::shared_ptr<const ControlledProfile> evaluator;
};

struct SynthesisResult {
  std::optional<ProfileSolution> solution;
  InfeasibilityCertificate certificate;
  bool feasible() const { return solution.has_value(); }
};

SynthesisResult synthesize_profile(const SmoothingProblem& problem,
                                   double samples_per_unit = RadialProfile::kDefaultSamplesPerUnit);

struct WindowReport {
  double K_min = 0.0;
  double K_max = 0.0;
  double boundary_mismatch = 0.0;
  bool pass = false;
  std::vector<Eigen::Index> violations;  // sample indices outside window +- tol
};

// Recomputes curvature from the samples alone.
WindowReport verify_window(const ProfileSolution& solution, double tol);

struct MinOrderResult {
  std::optional<int> i_eps;
  int search_bound = 0;
  bool infeasible_below = false;          // i_eps - 1 checked infeasible (or i_eps == 2)
  std::vector<std::pair<int, bool>> upward_samples;  // {i_eps, 2 i_eps, 10 i_eps}
  InfeasibilityCertificate certificate;   // one-sided mode or nothing found up to the bound
};

// Feasibility of the smoothing problem for a single order i.
bool smoothing_feasible(double eps, double a, double r, int i, WindowMode mode);

// Smallest i >= 2 admitting a smoothing. Throws PreconditionError on a failed collar.
MinOrderResult min_order(double eps, double a, double r, WindowMode mode, int search_bound = 1'000'000);

// F_i: cone profile, then the smoothing, then the cusp profile.
RadialProfile smoothed_surface(const ProfileSolution& solution);

}  // namespace cuspclose
