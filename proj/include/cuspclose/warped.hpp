#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cuspclose/hyperbolic.hpp"
#include "cuspclose/profile.hpp"
#include "cuspclose/smoothing.hpp"

namespace cuspclose {

// Surface ds^2 + f(s)^2 dtheta^2 used as the innermost fiber of a stack.
class FiberSurface {
 public:
  explicit FiberSurface(RadialProfile profile, bool complete = true)
      : profile_(std::move(profile)), complete_(complete) {}

  const RadialProfile& profile() const { return profile_; }
  double curvature(double s) const { return profile_.gauss_curvature(s); }
  bool complete() const { return complete_; }

 private:
  RadialProfile profile_;
  bool complete_;
};

// Iterated warped product R x_cosh (R x_cosh ( ... x_cosh F)) of depth d.
// Coordinates are (t_1, ..., t_d, s, theta) with t_1 outermost; the metric is
//   dt_1^2 + cosh^2 t_1 (dt_2^2 + cosh^2 t_2 ( ... (ds^2 + f(s)^2 dtheta^2))).
class WarpedStack {
 public:
  WarpedStack(int depth, FiberSurface fiber);

  int depth() const { return depth_; }
  int dim() const { return depth_ + 2; }
  const FiberSurface& fiber() const { return fiber_; }
  // A warped product over R is complete iff its fiber is.
  bool complete() const { return fiber_.complete(); }

  Eigen::VectorXd metric_diagonal(const Eigen::VectorXd& p) const;
  Eigen::MatrixXd metric_tensor(const Eigen::VectorXd& p) const;

  // Throws UsageError on a wrong coordinate count, DomainError when the fiber
  // coordinate leaves the profile domain by more than `margin`.
  void check_point(const Eigen::VectorXd& p, double margin = 0.0) const;

 private:
  int depth_;
  FiberSurface fiber_;
};

// -(f''/f) |x|^2 + (L - f'^2)/f^2 |v|^2 with f = cosh, at the level coordinate t.
double warped_sectional(double t, double x_sq, double v_sq, double fiber_curvature);

// Plane spanned by the orthonormal pair {e = x + v, w}, with w tangent to the
// innermost surface so that the decomposition is special at every level.
struct PlaneSection {
  Eigen::VectorXd basepoint;
  Eigen::VectorXd e;
  Eigen::VectorXd w;
};

// Validates orthonormality in the stack metric and that w has no t components (1e-9).
PlaneSection make_plane_section(const WarpedStack& stack, Eigen::VectorXd p, Eigen::VectorXd e, Eigen::VectorXd w);

// Single-level formula applied recursively down to the surface.
double sectional_curvature_special(const WarpedStack& stack, const PlaneSection& plane);

// Curvature tensor at one point from central differences of the metric.
class CurvatureProbe {
 public:
  CurvatureProbe(Eigen::MatrixXd metric, std::vector<double> riemann, int dim)
      : metric_(std::move(metric)), riemann_(std::move(riemann)), dim_(dim) {}

  int dim() const { return dim_; }
  const Eigen::MatrixXd& metric() const { return metric_; }
  // R_{abcd} with K(u, v) = R(u, v, u, v) / (|u|^2 |v|^2 - <u, v>^2).
  double riemann(int a, int b, int c, int d) const {
    return riemann_[((static_cast<std::size_t>(a) * dim_ + b) * dim_ + c) * dim_ + d];
  }
  // UsageError when the Gram determinant is below 1e-12.
  double sectional(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

 private:
  Eigen::MatrixXd metric_;
  std::vector<double> riemann_;
  int dim_;
};

constexpr double kDefaultFdStep = 1e-3;
constexpr double kMaxFdStep = 1e-2;

// UsageError for h > 1e-2; DomainError when p is closer than 2h to the chart boundary.
CurvatureProbe fd_riemann(const WarpedStack& stack, const Eigen::VectorXd& p, double h = kDefaultFdStep);

// Box in stack coordinates.
struct ScanRegion {
  std::string label;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

// Box with every t_j in [-t_extent, t_extent], s in [s_lo, s_hi], theta in [0, 2 pi).
ScanRegion stack_region(const WarpedStack& stack, double t_extent, double s_lo, double s_hi, std::string label);

struct ScanViolation {
  Eigen::VectorXd point;
  double K = 0.0;
};

struct ScanResult {
  std::string region;
  int samples = 0;
  std::uint64_t seed = 0;
  double h = 0.0;
  double K_min = 0.0;
  double K_max = 0.0;
  Eigen::VectorXd argmin;
  Eigen::VectorXd argmax;
  std::vector<ScanViolation> violations;
};

struct ScanOptions {
  double h = kDefaultFdStep;
  std::optional<PinchWindow> window;  // violations are reported against window +- tol
  double tol = 1e-2;
  // Keep sample points at least this far from profile corners (in s).
  double corner_clearance = 0.0;
};

// Random points and random planes (Gaussian pairs orthonormalised in the
// metric). Deterministic for a given seed: samples are split into a fixed
// number of chunks, each with its own derived stream, merged by min/max.
ScanResult pinch_scan(const WarpedStack& stack, const ScanRegion& region, int samples, std::uint64_t seed,
                      const ScanOptions& options = {});

// Drops the d outer coordinates: returns (s, theta).
Eigen::Vector2d vertical_projection(const WarpedStack& stack, const Eigen::VectorXd& p);

// Chart of H^n for a stack over the hyperbolic_plane_profile fiber: theta is
// x_1, e^{-s} the height, and the level t_j is the normal coordinate of
// H^{n-j} inside H^{n-j+1}.
UhsPointd hyperbolic_chart(const Eigen::VectorXd& p);

// Uniform random point of a region and a random orthonormal pair at it.
Eigen::VectorXd random_point(const ScanRegion& region, std::uint64_t& state);
std::pair<Eigen::VectorXd, Eigen::VectorXd> random_plane(const Eigen::MatrixXd& metric, std::uint64_t& state);
PlaneSection random_special_plane(const WarpedStack& stack, const Eigen::VectorXd& p, std::uint64_t& state);

// SplitMix64 step and helpers shared by the samplers.
std::uint64_t splitmix64(std::uint64_t& state);
double uniform01(std::uint64_t& state);
double standard_normal(std::uint64_t& state);

}  // namespace cuspclose
