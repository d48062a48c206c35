#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cuspclose/errors.hpp"
#include "cuspclose/surface.hpp"
#include "cuspclose/warped.hpp"
#include "oracles.hpp"

using namespace cuspclose;

namespace {

WarpedStack hyperbolic_stack(int depth) { return WarpedStack(depth, FiberSurface(hyperbolic_plane_profile())); }

const ProfileSolution& threshold_solution() {
  static const ProfileSolution sol = [] {
    const int i = *min_order(0.1, 1.0, 0.05, WindowMode::TwoSided).i_eps;
    return *synthesize_profile(make_smoothing_problem(build_splice(1.0, i, 0.05), PinchWindow::two_sided(0.1, 0.1)))
                .solution;
  }();
  return sol;
}

// Pullback of the Euclidean-model metric |dx|^2 / x_n^2 through a chart map, by central differences.
Eigen::MatrixXd pullback_metric(const Eigen::VectorXd& p) {
  const Eigen::Index n = p.size();
  const double h = 1e-6;
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::VectorXd a = p, b = p;
    a(c) += h;
    b(c) -= h;
    J.col(c) = (hyperbolic_chart(a).coords() - hyperbolic_chart(b).coords()) / (2 * h);
  }
  const double y = hyperbolic_chart(p).height();
  return J.transpose() * J / (y * y);
}

}  // namespace

TEST_CASE("stack metric") {
  const WarpedStack s0 = hyperbolic_stack(0);
  Eigen::VectorXd p0(2);
  p0 << 0.3, 1.0;
  const Eigen::VectorXd g0 = s0.metric_diagonal(p0);
  CHECK(g0(0) == 1.0);
  CHECK(g0(1) == doctest::Approx(std::exp(0.6)).epsilon(1e-15));

  const WarpedStack s1 = hyperbolic_stack(1);
  Eigen::VectorXd p1(3);
  p1 << 0.0, 0.3, 1.0;
  const Eigen::MatrixXd g1 = s1.metric_tensor(p1);
  CHECK(g1(0, 0) == 1.0);
  CHECK(g1(1, 1) == 1.0);
  CHECK(g1(2, 2) == doctest::Approx(std::exp(0.6)).epsilon(1e-15));

  const WarpedStack s5 = hyperbolic_stack(5);
  const ScanRegion reg = stack_region(s5, 2.0, -2.0, 2.0, "r");
  std::uint64_t st = 9;
  for (int j = 0; j < 1000; ++j) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s5.metric_tensor(random_point(reg, st)));
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  CHECK_THROWS_AS(s5.metric_tensor(p1), UsageError);
  CHECK_THROWS_AS(WarpedStack(-1, FiberSurface(hyperbolic_plane_profile())), UsageError);
  CHECK(s5.complete());
}

TEST_CASE("chart of hyperbolic space") {
  for (int depth : {0, 1, 2, 5}) {
    const WarpedStack st = hyperbolic_stack(depth);
    const ScanRegion reg = stack_region(st, 1.5, -1.5, 1.5, "r");
    std::uint64_t state = 5 + depth;
    for (int j = 0; j < 20; ++j) {
      const Eigen::VectorXd p = random_point(reg, state);
      const Eigen::MatrixXd diff = pullback_metric(p) - st.metric_tensor(p);
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + st.metric_tensor(p).cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("vertical projection") {
  const WarpedStack st = hyperbolic_stack(4);
  const Eigen::Index n = st.dim();
  const ScanRegion reg = stack_region(st, 1.5, -1.5, 1.5, "r");
  std::uint64_t state = 77;
  for (int j = 0; j < 100; ++j) {
    const Eigen::VectorXd p = random_point(reg, state);
    const Eigen::Vector2d q = vertical_projection(st, p);
    const UhsPointd lhs = embed(hyperbolic_chart(Eigen::VectorXd(q)), n);
    const UhsPointd rhs = project(hyperbolic_chart(p), VerticalSubspace(n, 2));
    CHECK((lhs.coords() - rhs.coords()).cwiseAbs().maxCoeff() <= 1e-9);
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p(n - 2) = 0.4;
  p(n - 1) = 1.1;
  CHECK(vertical_projection(st, p)(0) == 0.4);
  CHECK(vertical_projection(st, p)(1) == 1.1);
}

TEST_CASE("single-level formula") {
  for (double t : {-1.0, 0.0, 0.7}) {
    for (double x2 : {0.0, 0.3, 1.0}) CHECK(warped_sectional(t, x2, 1.0 - x2, -1.0) == doctest::Approx(-1.0).epsilon(1e-14));
  }
  CHECK(warped_sectional(0.0, 0.0, 1.0, -1.1) == doctest::Approx(-1.1).epsilon(1e-15));
}

TEST_CASE("plane validation") {
  const WarpedStack st = hyperbolic_stack(2);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(4), w = Eigen::VectorXd::Zero(4);
  e(0) = 1.0;
  w(2) = 1.0;
  CHECK_NOTHROW(make_plane_section(st, p, e, w));
  Eigen::VectorXd w_bad = Eigen::VectorXd::Zero(4);
  w_bad(1) = 1.0;
  CHECK_THROWS_AS(make_plane_section(st, p, e, w_bad), UsageError);
  CHECK_THROWS_AS(make_plane_section(st, p, e, 2.0 * w), UsageError);
}

TEST_CASE("finite-difference curvature tensor") {
  // H^2 and H^3 charts, flat plane
  const WarpedStack h2 = hyperbolic_stack(0);
  Eigen::VectorXd q(2);
  q << 0.2, 0.0;
  CHECK(fd_riemann(h2, q).sectional(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == doctest::Approx(-1.0).epsilon(1e-5));

  const WarpedStack h3 = hyperbolic_stack(1);
  const ScanRegion reg = stack_region(h3, 1.0, -1.0, 1.0, "r");
  std::uint64_t state = 3;
  for (int j = 0; j < 100; ++j) {
    const Eigen::VectorXd p = random_point(reg, state);
    const CurvatureProbe probe = fd_riemann(h3, p, 1e-3);
    const auto [u, v] = random_plane(probe.metric(), state);
    CHECK(std::abs(probe.sectional(u, v) + 1.0) <= 1e-4);
  }

  const WarpedStack flat(0, FiberSurface(euclidean_plane_profile()));
  Eigen::VectorXd f(2);
  f << 1.3, 0.5;
  CHECK(std::abs(fd_riemann(flat, f).sectional(Eigen::Vector2d(1, 0.2), Eigen::Vector2d(0, 1))) <= 1e-6);

  CHECK_THROWS_AS(fd_riemann(flat, f, 0.05), UsageError);
  Eigen::VectorXd edge(2);
  edge << 1e-3, 0.0;
  CHECK_THROWS_AS(fd_riemann(flat, edge, 1e-3), DomainError);
  const CurvatureProbe probe = fd_riemann(flat, f);
  CHECK_THROWS_AS(probe.sectional(Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0)), UsageError);
}

TEST_CASE("special-plane formula on hyperbolic space") {
  const WarpedStack st = hyperbolic_stack(3);
  const ScanRegion reg = stack_region(st, 1.5, -1.5, 1.5, "r");
  std::uint64_t state = 41;
  for (int j = 0; j < 200; ++j) {
    const Eigen::VectorXd p = random_point(reg, state);
    const PlaneSection pl = random_special_plane(st, p, state);
    CHECK(sectional_curvature_special(st, pl) == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("pure fiber plane at t = 0 sees the fiber curvature") {
  const double eps = 0.1;
  const RadialProfile pinched(-1.0, 1.0, [eps](double s) {
    const double c = std::sqrt(1.0 + eps);
    return ProfileJet{std::cosh(c * s), c * std::sinh(c * s), (1.0 + eps) * std::cosh(c * s)};
  }, true);
  const WarpedStack st(1, FiberSurface(pinched));
  Eigen::VectorXd p(3);
  p << 0.0, 0.3, 0.0;
  const Eigen::VectorXd g = st.metric_diagonal(p);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(3), w = Eigen::VectorXd::Zero(3);
  e(1) = 1.0;
  w(2) = 1.0 / std::sqrt(g(2));
  const PlaneSection pl = make_plane_section(st, p, e, w);
  CHECK(sectional_curvature_special(st, pl) == doctest::Approx(-1.0 - eps).epsilon(1e-12));
  CHECK(fd_riemann(st, p).sectional(e, w) == doctest::Approx(-1.0 - eps).epsilon(1e-5));
}

TEST_CASE("special-plane formula against the tensor on a smoothed fiber") {
  const ProfileSolution& sol = threshold_solution();
  const WarpedStack st(3, FiberSurface(smoothed_surface(sol)));
  const ScanRegion reg = stack_region(st, 1.0, sol.s1, sol.s2, "band");
  const double clearance = 0.5 * sol.control.mollifier_width + 3e-3;
  std::uint64_t state = 99;
  int done = 0;
  while (done < 100) {
    const Eigen::VectorXd p = random_point(reg, state);
    const double s = p(st.depth());
    if (std::abs(s - sol.control.switch1) < clearance || std::abs(s - sol.control.switch2) < clearance) continue;
    const PlaneSection pl = random_special_plane(st, p, state);
    const double formula = sectional_curvature_special(st, pl);
    CHECK(std::abs(formula - fd_riemann(st, p).sectional(pl.e, pl.w)) <= 1e-3);
    CHECK(formula >= -1.1 - 1e-3);
    CHECK(formula <= -0.9 + 1e-3);
    ++done;
  }
}

TEST_CASE("pinch scans") {
  SUBCASE("hyperbolic charts") {
    for (int n : {3, 4, 7}) {
      const WarpedStack st = hyperbolic_stack(n - 2);
      const ScanResult r = pinch_scan(st, stack_region(st, 1.0, -1.0, 1.0, "H"), 1000, 12);
      CHECK(r.K_min >= -1.0 - 1e-3);
      CHECK(r.K_max <= -1.0 + 1e-3);
    }
  }
  SUBCASE("smoothed fiber inside and outside the band") {
    const ProfileSolution& sol = threshold_solution();
    const WarpedStack st(2, FiberSurface(smoothed_surface(sol)));
    ScanOptions opt;
    opt.window = sol.window;
    const ScanResult in = pinch_scan(st, stack_region(st, 1.0, sol.s1, sol.s2, "band"), 500, 4, opt);
    CHECK(in.violations.empty());
    CHECK(in.K_min >= -1.1 - 1e-2);
    CHECK(in.K_max <= -0.9 + 1e-2);
    const ScanResult out = pinch_scan(st, stack_region(st, 1.0, sol.s2 + 0.01, sol.s2 + 0.1, "outside"), 500, 4);
    CHECK(out.K_min >= -1.0 - 1e-3);
    CHECK(out.K_max <= -1.0 + 1e-3);
  }
  SUBCASE("determinism and errors") {
    const WarpedStack st = hyperbolic_stack(2);
    const ScanRegion reg = stack_region(st, 1.0, -1.0, 1.0, "H");
    const ScanResult a = pinch_scan(st, reg, 300, 5), b = pinch_scan(st, reg, 300, 5);
    CHECK(a.K_min == b.K_min);
    CHECK(a.K_max == b.K_max);
    CHECK(a.argmin == b.argmin);
    CHECK_THROWS_AS(pinch_scan(st, reg, 0, 5), UsageError);
    ScanOptions big;
    big.h = 0.1;
    CHECK_THROWS_AS(pinch_scan(st, reg, 10, 5, big), UsageError);
    const WarpedStack flat(1, FiberSurface(euclidean_plane_profile()));
    CHECK_THROWS_AS(pinch_scan(flat, stack_region(flat, 1.0, 0.0, 1.0, "x"), 10, 1), DomainError);
  }
  SUBCASE("violations are reported against the window") {
    const WarpedStack st = hyperbolic_stack(1);
    ScanOptions opt;
    opt.window = PinchWindow::two_sided(0.1, 0.1);
    opt.tol = 0.0;
    const WarpedStack flat(1, FiberSurface(euclidean_plane_profile()));
    const ScanResult r = pinch_scan(flat, stack_region(flat, 0.5, 0.5, 1.0, "flat"), 50, 1, opt);
    CHECK_FALSE(r.violations.empty());
  }
}
