#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cuspclose/errors.hpp"

// Upper half-space model H^n = { x : x_n > 0 }. Every routine here is a
// closed-form expression, templated on the scalar type.

namespace cuspclose {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
class UhsPoint {
 public:
  explicit UhsPoint(VectorX<Scalar> coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2) throw UsageError("UhsPoint: dimension must be at least 2");
    if (!(coords_(coords_.size() - 1) > Scalar(0)))
      throw InvalidPointError("UhsPoint: height coordinate must be positive");
  }

  // Point of H^n at the given height above the horizontal origin.
  static UhsPoint vertical(Eigen::Index n, Scalar height) {
    VectorX<Scalar> c = VectorX<Scalar>::Zero(n);
    c(n - 1) = height;
    return UhsPoint(std::move(c));
  }

  Eigen::Index dim() const { return coords_.size(); }
  Scalar height() const { return coords_(coords_.size() - 1); }
  Scalar operator[](Eigen::Index i) const { return coords_(i); }
  const VectorX<Scalar>& coords() const { return coords_; }

 private:
  VectorX<Scalar> coords_;
};

using UhsPointd = UhsPoint<double>;

// The totally geodesic H^k spanned by e_1..e_{k-1}, e_n.
class VerticalSubspace {
 public:
  VerticalSubspace(Eigen::Index ambient_dim, Eigen::Index dim) : ambient_(ambient_dim), dim_(dim) {
    if (dim < 2 || dim > ambient_dim)
      throw UsageError("VerticalSubspace: need 2 <= k <= n");
  }

  Eigen::Index ambient_dim() const { return ambient_; }
  Eigen::Index dim() const { return dim_; }
  bool is_ambient() const { return dim_ == ambient_; }
  bool is_contained_in(const VerticalSubspace& other) const {
    return ambient_ == other.ambient_ && dim_ <= other.dim_;
  }

  template <typename Scalar>
  bool contains(const UhsPoint<Scalar>& x, Scalar tol = Scalar(0)) const {
    if (x.dim() != ambient_) return false;
    for (Eigen::Index j = dim_ - 1; j < ambient_ - 1; ++j)
      if (std::abs(x[j]) > tol) return false;
    return true;
  }

 private:
  Eigen::Index ambient_;
  Eigen::Index dim_;
};

namespace detail {
template <typename Scalar>
void require_same_dim(const UhsPoint<Scalar>& x, const UhsPoint<Scalar>& y) {
  if (x.dim() != y.dim()) throw UsageError("dimension mismatch between points");
}
}  // namespace detail

// arccosh(1 + |x-y|^2 / (2 x_n y_n)), evaluated as 2 asinh(|x-y| / (2 sqrt(x_n y_n)))
// to keep relative accuracy for nearby points.
template <typename Scalar>
Scalar dist(const UhsPoint<Scalar>& x, const UhsPoint<Scalar>& y) {
  detail::require_same_dim(x, y);
  const Scalar chord = (x.coords() - y.coords()).norm();
  return Scalar(2) * std::asinh(chord / (Scalar(2) * std::sqrt(x.height() * y.height())));
}

// Busemann function of the ideal point at infinity, zero on the height-one horosphere.
template <typename Scalar>
Scalar busemann(const UhsPoint<Scalar>& x) {
  return -std::log(x.height());
}

// Closed horoball { busemann <= level } centred at infinity.
struct Horoball {
  double level = 0.0;

  template <typename Scalar>
  bool contains(const UhsPoint<Scalar>& x) const {
    return busemann(x) <= Scalar(level);
  }
  bool is_contained_in(const Horoball& other) const { return level <= other.level; }
};

// Nearest-point projection onto a vertical subspace: keeps x_1..x_{k-1} and
// collapses the remaining coordinates into the height by their Euclidean norm.
template <typename Scalar>
UhsPoint<Scalar> project(const UhsPoint<Scalar>& x, const VerticalSubspace& s) {
  if (x.dim() != s.ambient_dim()) throw UsageError("project: ambient dimension mismatch");
  const Eigen::Index n = x.dim();
  const Eigen::Index k = s.dim();
  VectorX<Scalar> out = VectorX<Scalar>::Zero(n);
  out.head(k - 1) = x.coords().head(k - 1);
  out(n - 1) = x.coords().tail(n - k + 1).norm();
  return UhsPoint<Scalar>(std::move(out));
}

// Conformal identification with the unit ball, used to realise elliptic rotations.
template <typename Scalar>
VectorX<Scalar> to_ball(const UhsPoint<Scalar>& x) {
  const auto& c = x.coords();
  const Eigen::Index n = c.size();
  const Scalar xn = c(n - 1);
  const Scalar denom = c.head(n - 1).squaredNorm() + (Scalar(1) + xn) * (Scalar(1) + xn);
  VectorX<Scalar> y(n);
  y.head(n - 1) = Scalar(2) * c.head(n - 1) / denom;
  y(n - 1) = (c.squaredNorm() - Scalar(1)) / denom;
  return y;
}

template <typename Scalar>
UhsPoint<Scalar> from_ball(const VectorX<Scalar>& y) {
  const Eigen::Index n = y.size();
  const Scalar yn = y(n - 1);
  const Scalar denom = y.head(n - 1).squaredNorm() + (Scalar(1) - yn) * (Scalar(1) - yn);
  VectorX<Scalar> x(n);
  x.head(n - 1) = Scalar(2) * y.head(n - 1) / denom;
  x(n - 1) = (Scalar(1) - y.squaredNorm()) / denom;
  return UhsPoint<Scalar>(std::move(x));
}

// x -> x + a e_1.
struct UnipotentTranslation {
  double a = 0.0;
};

// Rotation by 2 pi / order in the ball-model coordinate plane (axis_p, axis_q).
// The fixed set is the codimension-two totally geodesic subspace where both
// ball coordinates vanish. When axis_q is the height axis the fixed set is
// vertical; when both axes are horizontal this is a Euclidean rotation.
struct EllipticRotation {
  int order = 2;
  Eigen::Index axis_p = 0;
  Eigen::Index axis_q = 1;
};

// An isometry of H^n kept as an explicit composition list, applied left to right.
class ModelIsometry {
 public:
  using Step = std::variant<UnipotentTranslation, EllipticRotation>;

  explicit ModelIsometry(Eigen::Index dim) : dim_(dim) {
    if (dim < 2) throw UsageError("ModelIsometry: dimension must be at least 2");
  }

  static ModelIsometry identity(Eigen::Index dim) { return ModelIsometry(dim); }

  static ModelIsometry unipotent_translation(Eigen::Index dim, double a) {
    if (a < 0.0) throw UsageError("unipotent_translation: a must be >= 0");
    ModelIsometry m(dim);
    m.steps_.push_back(UnipotentTranslation{a});
    return m;
  }

  static ModelIsometry elliptic_rotation(Eigen::Index dim, int order, Eigen::Index axis_p,
                                         Eigen::Index axis_q) {
    if (order < 1) throw UsageError("elliptic_rotation: order must be >= 1");
    if (axis_p == axis_q || axis_p < 0 || axis_q < 0 || axis_p >= dim || axis_q >= dim)
      throw UsageError("elliptic_rotation: invalid axis pair");
    ModelIsometry m(dim);
    m.steps_.push_back(EllipticRotation{order, axis_p, axis_q});
    return m;
  }

  // Rotation of order i fixing the vertical plane spanned by e_2..e_{n-1}
  // and the point (0,...,0,1): rotates the (x_1, height) ball coordinates.
  static ModelIsometry elliptic_rotation(Eigen::Index dim, int order) {
    return elliptic_rotation(dim, order, 0, dim - 1);
  }

  Eigen::Index dim() const { return dim_; }
  const std::vector<Step>& steps() const { return steps_; }

  // this first, then other.
  ModelIsometry then(const ModelIsometry& other) const {
    if (other.dim_ != dim_) throw UsageError("compose: dimension mismatch");
    ModelIsometry m = *this;
    m.steps_.insert(m.steps_.end(), other.steps_.begin(), other.steps_.end());
    return m;
  }

  ModelIsometry power(int k) const {
    ModelIsometry m(dim_);
    for (int j = 0; j < k; ++j) m = m.then(*this);
    return m;
  }

  template <typename Scalar>
  UhsPoint<Scalar> operator()(const UhsPoint<Scalar>& x) const {
    if (x.dim() != dim_) throw UsageError("ModelIsometry: point dimension mismatch");
    UhsPoint<Scalar> out = x;
    for (const auto& step : steps_) out = std::visit([&](const auto& s) { return apply(s, out); }, step);
    return out;
  }

 private:
  template <typename Scalar>
  static UhsPoint<Scalar> apply(const UnipotentTranslation& t, const UhsPoint<Scalar>& x) {
    VectorX<Scalar> c = x.coords();
    c(0) += Scalar(t.a);
    return UhsPoint<Scalar>(std::move(c));
  }

  template <typename Scalar>
  static UhsPoint<Scalar> apply(const EllipticRotation& r, const UhsPoint<Scalar>& x) {
    const Scalar angle = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(r.order);
    const Scalar c = std::cos(angle);
    const Scalar s = std::sin(angle);
    const Eigen::Index n = x.dim();
    const bool horizontal = r.axis_p != n - 1 && r.axis_q != n - 1;
    if (horizontal) {
      VectorX<Scalar> v = x.coords();
      const Scalar p = v(r.axis_p), q = v(r.axis_q);
      v(r.axis_p) = c * p - s * q;
      v(r.axis_q) = s * p + c * q;
      return UhsPoint<Scalar>(std::move(v));
    }
    VectorX<Scalar> y = to_ball(x);
    const Scalar p = y(r.axis_p), q = y(r.axis_q);
    y(r.axis_p) = c * p - s * q;
    y(r.axis_q) = s * p + c * q;
    return from_ball(y);
  }

  Eigen::Index dim_;
  std::vector<Step> steps_;
};

// Canonical extension of an isometry of the vertical H^m to H^N, acting
// trivially on the normal bundle. Height-axis indices are remapped to N-1.
inline ModelIsometry extend_isometry(const ModelIsometry& phi, Eigen::Index target_dim) {
  const Eigen::Index m = phi.dim();
  if (target_dim < m) throw UsageError("extend_isometry: target dimension smaller than source");
  auto remap = [&](Eigen::Index axis) { return axis == m - 1 ? target_dim - 1 : axis; };
  ModelIsometry out(target_dim);
  for (const auto& step : phi.steps()) {
    if (const auto* t = std::get_if<UnipotentTranslation>(&step)) {
      out = out.then(ModelIsometry::unipotent_translation(target_dim, t->a));
    } else {
      const auto& r = std::get<EllipticRotation>(step);
      out = out.then(ModelIsometry::elliptic_rotation(target_dim, r.order, remap(r.axis_p), remap(r.axis_q)));
    }
  }
  return out;
}

// Embeds a point of the vertical H^m into H^N (zero normal coordinates).
template <typename Scalar>
UhsPoint<Scalar> embed(const UhsPoint<Scalar>& x, Eigen::Index target_dim) {
  const Eigen::Index m = x.dim();
  if (target_dim < m) throw UsageError("embed: target dimension smaller than source");
  VectorX<Scalar> c = VectorX<Scalar>::Zero(target_dim);
  c.head(m - 1) = x.coords().head(m - 1);
  c(target_dim - 1) = x.height();
  return UhsPoint<Scalar>(std::move(c));
}

// Coordinates of a point of a vertical subspace in its own H^k model.
template <typename Scalar>
UhsPoint<Scalar> restrict_to(const UhsPoint<Scalar>& x, const VerticalSubspace& s) {
  const Eigen::Index k = s.dim();
  VectorX<Scalar> c(k);
  c.head(k - 1) = x.coords().head(k - 1);
  c(k - 1) = x.height();
  return UhsPoint<Scalar>(std::move(c));
}

}  // namespace cuspclose
