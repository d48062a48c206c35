#include "cuspclose/warped.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "cuspclose/errors.hpp"

namespace cuspclose {

namespace {
constexpr int kScanChunks = 8;
constexpr std::size_t kMaxListedViolations = 100;
}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Box-Muller; one value per call keeps the stream position simple.
double standard_normal(std::uint64_t& state) {
  double u1 = uniform01(state);
  while (u1 <= 0.0) u1 = uniform01(state);
  const double u2 = uniform01(state);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

WarpedStack::WarpedStack(int depth, FiberSurface fiber) : depth_(depth), fiber_(std::move(fiber)) {
  if (depth < 0) throw UsageError("WarpedStack: depth must be >= 0");
}

void WarpedStack::check_point(const Eigen::VectorXd& p, double margin) const {
  if (p.size() != dim()) throw UsageError("WarpedStack: point has the wrong number of coordinates");
  const double s = p(depth_);
  const RadialProfile& prof = fiber_.profile();
  if (!(s - margin >= prof.s_lo() && s + margin <= prof.s_hi()))
    throw DomainError("WarpedStack: fiber coordinate outside the chart domain");
}

Eigen::VectorXd WarpedStack::metric_diagonal(const Eigen::VectorXd& p) const {
  check_point(p);
  Eigen::VectorXd g(dim());
  double scale = 1.0;
  for (int j = 0; j < depth_; ++j) {
    g(j) = scale;
    const double c = std::cosh(p(j));
    scale *= c * c;
  }
  const double f = fiber_.profile().f(p(depth_));
  g(depth_) = scale;
  g(depth_ + 1) = scale * f * f;
  return g;
}

Eigen::MatrixXd WarpedStack::metric_tensor(const Eigen::VectorXd& p) const {
  return metric_diagonal(p).asDiagonal();
}

double warped_sectional(double t, double x_sq, double v_sq, double fiber_curvature) {
  const double f = std::cosh(t);
  const double fp = std::sinh(t);
  const double fpp = f;
  return -(fpp / f) * x_sq + (fiber_curvature - fp * fp) / (f * f) * v_sq;
}

PlaneSection make_plane_section(const WarpedStack& stack, Eigen::VectorXd p, Eigen::VectorXd e, Eigen::VectorXd w) {
  stack.check_point(p);
  if (e.size() != stack.dim() || w.size() != stack.dim())
    throw UsageError("PlaneSection: vectors have the wrong dimension");
  const Eigen::MatrixXd g = stack.metric_tensor(p);
  constexpr double tol = 1e-9;
  if (std::abs(e.dot(g * e) - 1.0) > tol || std::abs(w.dot(g * w) - 1.0) > tol || std::abs(e.dot(g * w)) > tol)
    throw UsageError("PlaneSection: basis is not orthonormal in the stack metric");
  if (stack.depth() > 0 && w.head(stack.depth()).cwiseAbs().maxCoeff() > tol)
    throw UsageError("PlaneSection: w must be tangent to the surface fiber");
  return {std::move(p), std::move(e), std::move(w)};
}

namespace {

// Level j: coordinates j..n-1, with e and w orthonormal in the level-j metric.
double special_curvature_at_level(const WarpedStack& stack, const Eigen::VectorXd& p, int level,
                                  const Eigen::VectorXd& e, const Eigen::VectorXd& w) {
  if (level == stack.depth()) return stack.fiber().curvature(p(stack.depth()));
  const double t = p(level);
  const double x_sq = e(0) * e(0);
  const double v_sq = std::max(0.0, 1.0 - x_sq);
  double L = 0.0;
  if (v_sq > 1e-14) {
    // Norms in the next fiber are the level norms divided by cosh t.
    const double c = std::cosh(t);
    const Eigen::VectorXd v_hat = e.tail(e.size() - 1) * (c / std::sqrt(v_sq));
    const Eigen::VectorXd w_hat = w.tail(w.size() - 1) * c;
    L = special_curvature_at_level(stack, p, level + 1, v_hat, w_hat);
  }
  return warped_sectional(t, x_sq, v_sq, L);
}

}  // namespace

double sectional_curvature_special(const WarpedStack& stack, const PlaneSection& plane) {
  return special_curvature_at_level(stack, plane.basepoint, 0, plane.e, plane.w);
}

double CurvatureProbe::sectional(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  const double uu = u.dot(metric_ * u);
  const double vv = v.dot(metric_ * v);
  const double uv = u.dot(metric_ * v);
  const double gram = uu * vv - uv * uv;
  if (gram < 1e-12) throw UsageError("CurvatureProbe: plane is degenerate (Gram determinant < 1e-12)");
  double num = 0.0;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) {
      const double ab = u(a) * v(b);
      if (ab == 0.0) continue;
      for (int c = 0; c < dim_; ++c)
        for (int d = 0; d < dim_; ++d) num += ab * u(c) * v(d) * riemann(a, b, c, d);
    }
  return num / gram;
}

CurvatureProbe fd_riemann(const WarpedStack& stack, const Eigen::VectorXd& p, double h) {
  if (!(h > 0.0) || h > kMaxFdStep) throw UsageError("fd_riemann: step must lie in (0, 1e-2]");
  stack.check_point(p, 2.0 * h);
  const int n = stack.dim();

  auto g_at = [&](const Eigen::VectorXd& q) { return stack.metric_tensor(q); };
  const Eigen::MatrixXd g0 = g_at(p);
  const Eigen::MatrixXd ginv = g0.inverse();

  std::vector<Eigen::MatrixXd> plus(n), minus(n), dg(n);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd q = p;
    q(c) += h;
    plus[c] = g_at(q);
    q(c) = p(c) - h;
    minus[c] = g_at(q);
    dg[c] = (plus[c] - minus[c]) / (2.0 * h);
  }
  // d2g[c][d] = second partial of g along c and d.
  std::vector<std::vector<Eigen::MatrixXd>> d2g(n, std::vector<Eigen::MatrixXd>(n));
  for (int c = 0; c < n; ++c) {
    d2g[c][c] = (plus[c] - 2.0 * g0 + minus[c]) / (h * h);
    for (int d = c + 1; d < n; ++d) {
      Eigen::VectorXd q = p;
      q(c) += h;
      q(d) += h;
      const Eigen::MatrixXd pp = g_at(q);
      q(d) = p(d) - h;
      const Eigen::MatrixXd pm = g_at(q);
      q(c) = p(c) - h;
      const Eigen::MatrixXd mm = g_at(q);
      q(d) = p(d) + h;
      const Eigen::MatrixXd mp = g_at(q);
      d2g[c][d] = (pp - pm - mp + mm) / (4.0 * h * h);
      d2g[d][c] = d2g[c][d];
    }
  }

  // Christoffel symbols of the second kind, gamma[e](b, c) = Gamma^e_{bc}.
  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd lowered(n);
      for (int f = 0; f < n; ++f) lowered(f) = 0.5 * (dg[b](f, c) + dg[c](f, b) - dg[f](b, c));
      const Eigen::VectorXd raised = ginv * lowered;
      for (int e = 0; e < n; ++e) gamma[e](b, c) = raised(e);
    }

  std::vector<double> R(static_cast<std::size_t>(n) * n * n * n, 0.0);
  auto idx = [n](int a, int b, int c, int d) { return ((static_cast<std::size_t>(a) * n + b) * n + c) * n + d; };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double v = 0.5 * (d2g[b][c](a, d) + d2g[a][d](b, c) - d2g[a][c](b, d) - d2g[b][d](a, c));
          for (int e = 0; e < n; ++e)
            for (int f = 0; f < n; ++f)
              v += g0(e, f) * (gamma[e](b, c) * gamma[f](a, d) - gamma[e](b, d) * gamma[f](a, c));
          R[idx(a, b, c, d)] = v;
        }
  return CurvatureProbe(g0, std::move(R), n);
}

ScanRegion stack_region(const WarpedStack& stack, double t_extent, double s_lo, double s_hi, std::string label) {
  ScanRegion region{std::move(label), Eigen::VectorXd(stack.dim()), Eigen::VectorXd(stack.dim())};
  for (int j = 0; j < stack.depth(); ++j) {
    region.lo(j) = -t_extent;
    region.hi(j) = t_extent;
  }
  region.lo(stack.depth()) = s_lo;
  region.hi(stack.depth()) = s_hi;
  region.lo(stack.depth() + 1) = 0.0;
  region.hi(stack.depth() + 1) = 2.0 * std::numbers::pi;
  return region;
}

Eigen::VectorXd random_point(const ScanRegion& region, std::uint64_t& state) {
  Eigen::VectorXd p(region.lo.size());
  for (Eigen::Index j = 0; j < p.size(); ++j)
    p(j) = region.lo(j) + (region.hi(j) - region.lo(j)) * uniform01(state);
  return p;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> random_plane(const Eigen::MatrixXd& metric, std::uint64_t& state) {
  const Eigen::Index n = metric.rows();
  auto gaussian = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index j = 0; j < n; ++j) v(j) = standard_normal(state);
    return v;
  };
  for (;;) {
    Eigen::VectorXd u = gaussian();
    Eigen::VectorXd v = gaussian();
    const double uu = u.dot(metric * u);
    if (uu < 1e-12) continue;
    u /= std::sqrt(uu);
    v -= v.dot(metric * u) * u;
    const double vv = v.dot(metric * v);
    if (vv < 1e-12) continue;
    v /= std::sqrt(vv);
    return {u, v};
  }
}

PlaneSection random_special_plane(const WarpedStack& stack, const Eigen::VectorXd& p, std::uint64_t& state) {
  const Eigen::MatrixXd g = stack.metric_tensor(p);
  const int n = stack.dim();
  const int d = stack.depth();
  for (;;) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    w(d) = standard_normal(state);
    w(d + 1) = standard_normal(state);
    const double ww = w.dot(g * w);
    if (ww < 1e-12) continue;
    w /= std::sqrt(ww);
    Eigen::VectorXd e(n);
    for (int j = 0; j < n; ++j) e(j) = standard_normal(state);
    e -= e.dot(g * w) * w;
    const double ee = e.dot(g * e);
    if (ee < 1e-12) continue;
    e /= std::sqrt(ee);
    return make_plane_section(stack, p, e, w);
  }
}

namespace {

bool near_corner(const RadialProfile& prof, double s, double clearance) {
  for (double c : prof.corners())
    if (std::abs(s - c) < clearance) return true;
  return false;
}

struct ChunkResult {
  double K_min = std::numeric_limits<double>::infinity();
  double K_max = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd argmin, argmax;
  std::vector<ScanViolation> violations;
  std::size_t violation_count = 0;
};

}  // namespace

ScanResult pinch_scan(const WarpedStack& stack, const ScanRegion& region, int samples, std::uint64_t seed,
                      const ScanOptions& options) {
  if (samples < 1) throw UsageError("pinch_scan: need at least one sample");
  if (region.lo.size() != stack.dim() || region.hi.size() != stack.dim())
    throw UsageError("pinch_scan: region dimension mismatch");
  if (!(options.h > 0.0) || options.h > kMaxFdStep) throw UsageError("pinch_scan: step must lie in (0, 1e-2]");
  const RadialProfile& prof = stack.fiber().profile();
  const int d = stack.depth();
  if (region.lo(d) - 2.0 * options.h < prof.s_lo() || region.hi(d) + 2.0 * options.h > prof.s_hi())
    throw DomainError("pinch_scan: region too close to the chart boundary");

  std::vector<ChunkResult> chunks(kScanChunks);
  auto run_chunk = [&](int chunk) {
    const int begin = samples * chunk / kScanChunks;
    const int end = samples * (chunk + 1) / kScanChunks;
    std::uint64_t state = seed ^ (0xa0761d6478bd642fULL * static_cast<std::uint64_t>(chunk + 1));
    splitmix64(state);
    ChunkResult& out = chunks[chunk];
    for (int j = begin; j < end; ++j) {
      Eigen::VectorXd p = random_point(region, state);
      while (options.corner_clearance > 0.0 && near_corner(prof, p(d), options.corner_clearance))
        p = random_point(region, state);
      const CurvatureProbe probe = fd_riemann(stack, p, options.h);
      const auto [u, v] = random_plane(probe.metric(), state);
      const double K = probe.sectional(u, v);
      if (K < out.K_min) {
        out.K_min = K;
        out.argmin = p;
      }
      if (K > out.K_max) {
        out.K_max = K;
        out.argmax = p;
      }
      if (options.window && !options.window->contains(K, options.tol)) {
        ++out.violation_count;
        if (out.violations.size() < kMaxListedViolations) out.violations.push_back({p, K});
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), kScanChunks));
  if (workers == 1) {
    for (int c = 0; c < kScanChunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int c = static_cast<int>(w); c < kScanChunks; c += static_cast<int>(workers)) run_chunk(c);
      });
    for (auto& t : pool) t.join();
  }

  ScanResult out;
  out.region = region.label;
  out.samples = samples;
  out.seed = seed;
  out.h = options.h;
  out.K_min = std::numeric_limits<double>::infinity();
  out.K_max = -std::numeric_limits<double>::infinity();
  for (const auto& c : chunks) {
    if (c.K_min < out.K_min) {
      out.K_min = c.K_min;
      out.argmin = c.argmin;
    }
    if (c.K_max > out.K_max) {
      out.K_max = c.K_max;
      out.argmax = c.argmax;
    }
    for (const auto& v : c.violations)
      if (out.violations.size() < kMaxListedViolations) out.violations.push_back(v);
  }
  return out;
}

Eigen::Vector2d vertical_projection(const WarpedStack& stack, const Eigen::VectorXd& p) {
  stack.check_point(p);
  return p.tail<2>();
}

UhsPointd hyperbolic_chart(const Eigen::VectorXd& p) {
  const Eigen::Index depth = p.size() - 2;
  if (depth < 0) throw UsageError("hyperbolic_chart: need at least (s, theta)");
  const Eigen::Index n = p.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(0) = p(depth + 1);
  double height = std::exp(-p(depth));
  for (Eigen::Index level = depth - 1, axis = 1; level >= 0; --level, ++axis) {
    const double t = p(level);
    x(axis) = height * std::tanh(t);
    height /= std::cosh(t);
  }
  x(n - 1) = height;
  return UhsPointd(std::move(x));
}

}  // namespace cuspclose
