#pragma once

#include "cuspclose/profile.hpp"

namespace cuspclose {

// Distance from the length-a leaf of H^2 / Z_i to the cone point: arcsinh(a i / 2 pi).
double cone_radius(double a, int i);

// H^2 modulo a cyclic parabolic group, in horocyclic arc length t.
// Profile f(t) = (a / 2 pi) e^t, so the leaf at t = 0 has length a.
class CuspCylinder {
 public:
  explicit CuspCylinder(double a);

  double a() const { return a_; }
  ProfileJet jet(double t) const;
  double leaf_length(double t) const;
  RadialProfile profile() const;

 private:
  double a_;
};

// H^2 modulo a rotation group of order i, in polar distance rho from the cone point.
// Profile f(rho) = sinh(rho) / i, cone angle 2 pi / i.
class ConePlane {
 public:
  explicit ConePlane(int order);

  int order() const { return order_; }
  ProfileJet jet(double rho) const;
  // Throws DomainError for rho <= 0.
  double circle_length(double rho) const;
  RadialProfile profile() const;

 private:
  int order_;
};

struct CollarCheck {
  bool pass = false;
  double bound = 0.0;   // (1/2) arcsinh(a / pi)
  double margin = 0.0;  // bound - r
};

// Collar constraint r < (1/2) arcsinh(a / pi). A failure is a value, not an error.
CollarCheck validate_collar(double a, double r);

// Cone piece on [0, R_i] glued to the cusp piece on [R_i, inf) along the
// common length-a leaf. The cusp side evaluates the CuspCylinder profile at
// t = s - R_i, the cone side the ConePlane profile at rho = s.
class SplicedSurface {
 public:
  SplicedSurface(double a, int order, double r);

  double a() const { return a_; }
  int order() const { return cone_.order(); }
  double r() const { return r_; }
  double corner() const { return corner_; }
  const CuspCylinder& cusp() const { return cusp_; }
  const ConePlane& cone() const { return cone_; }

  // One-sided jets at the corner pick the side by `cone_side`.
  ProfileJet jet(double s) const;
  ProfileJet corner_jet(bool cone_side) const;

  // coth(R_i) - 1, the jump of f'/f across the corner.
  double log_slope_jump() const;
  // cosh(R_i)/i - a/(2 pi).
  double slope_jump() const;

  double inner_annulus_lo() const { return corner_ - r_; }
  double inner_annulus_hi() const { return corner_ + r_; }
  double outer_annulus_lo() const { return corner_ - 2.0 * r_; }
  double outer_annulus_hi() const { return corner_ + 2.0 * r_; }
  bool annulus_avoids_cone_point() const { return outer_annulus_lo() > 0.0; }

  RadialProfile profile() const;

 private:
  double a_;
  double r_;
  double corner_;
  CuspCylinder cusp_;
  ConePlane cone_;
};

// Throws PreconditionError unless validate_collar(a, r) passes, UsageError for i < 2.
SplicedSurface build_splice(double a, int i, double r);

// H^2 as ds^2 + e^{2s} dtheta^2 on the whole line; theta is the horocyclic coordinate.
RadialProfile hyperbolic_plane_profile();

// Euclidean plane in polar coordinates, f(s) = s on (0, inf).
RadialProfile euclidean_plane_profile();

}  // namespace cuspclose
