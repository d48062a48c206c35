#include "cuspclose/surface.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cuspclose/errors.hpp"

namespace cuspclose {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double cone_radius(double a, int i) {
  if (!(a > 0.0)) throw UsageError("cone_radius: a must be positive");
  if (i < 1) throw UsageError("cone_radius: order must be >= 1");
  return std::asinh(a * static_cast<double>(i) / kTwoPi);
}

CuspCylinder::CuspCylinder(double a) : a_(a) {
  if (!(a > 0.0)) throw UsageError("CuspCylinder: a must be positive");
}

ProfileJet CuspCylinder::jet(double t) const {
  const double f = a_ / kTwoPi * std::exp(t);
  return {f, f, f};
}

double CuspCylinder::leaf_length(double t) const { return a_ * std::exp(t); }

RadialProfile CuspCylinder::profile() const {
  CuspCylinder self = *this;
  return RadialProfile(-kInf, kInf, [self](double t) { return self.jet(t); }, true);
}

ConePlane::ConePlane(int order) : order_(order) {
  if (order < 1) throw UsageError("ConePlane: order must be >= 1");
}

ProfileJet ConePlane::jet(double rho) const {
  const double inv = 1.0 / static_cast<double>(order_);
  const double sh = std::sinh(rho) * inv;
  return {sh, std::cosh(rho) * inv, sh};
}

double ConePlane::circle_length(double rho) const {
  if (!(rho > 0.0)) throw DomainError("circle_length: rho must be positive");
  return kTwoPi * std::sinh(rho) / static_cast<double>(order_);
}

RadialProfile ConePlane::profile() const {
  ConePlane self = *this;
  return RadialProfile(0.0, kInf, [self](double rho) { return self.jet(rho); }, true);
}

CollarCheck validate_collar(double a, double r) {
  CollarCheck out;
  out.bound = 0.5 * std::asinh(a / std::numbers::pi);
  out.margin = out.bound - r;
  out.pass = a > 0.0 && r > 0.0 && r < out.bound;
  return out;
}

SplicedSurface::SplicedSurface(double a, int order, double r)
    : a_(a), r_(r), corner_(cone_radius(a, order)), cusp_(a), cone_(order) {}

ProfileJet SplicedSurface::jet(double s) const {
  if (s <= corner_) return cone_.jet(s);
  return cusp_.jet(s - corner_);
}

ProfileJet SplicedSurface::corner_jet(bool cone_side) const {
  return cone_side ? cone_.jet(corner_) : cusp_.jet(0.0);
}

double SplicedSurface::log_slope_jump() const { return 1.0 / std::tanh(corner_) - 1.0; }

double SplicedSurface::slope_jump() const {
  return std::cosh(corner_) / static_cast<double>(order()) - a_ / kTwoPi;
}

RadialProfile SplicedSurface::profile() const {
  SplicedSurface self = *this;
  return RadialProfile(0.0, kInf, [self](double s) { return self.jet(s); }, true, {corner_});
}

SplicedSurface build_splice(double a, int i, double r) {
  if (i < 2) throw UsageError("build_splice: order must be >= 2");
  const CollarCheck c = validate_collar(a, r);
  if (!c.pass) throw PreconditionError("build_splice: collar constraint r < arcsinh(a/pi)/2 fails");
  return SplicedSurface(a, i, r);
}

RadialProfile hyperbolic_plane_profile() {
  return RadialProfile(-kInf, kInf, [](double s) {
    const double e = std::exp(s);
    return ProfileJet{e, e, e};
  }, true);
}

RadialProfile euclidean_plane_profile() {
  return RadialProfile(0.0, kInf, [](double s) { return ProfileJet{s, 1.0, 0.0}; }, true);
}

}  // namespace cuspclose
