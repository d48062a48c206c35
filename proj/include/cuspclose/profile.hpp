#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cuspclose {

// Value and first two derivatives of a warp function at one point.
struct ProfileJet {
  double f = 0.0;
  double fp = 0.0;
  double fpp = 0.0;
};

// Uniform samples of a profile: columns s, f, f', f'', K = -f''/f.
struct ProfileSamples {
  Eigen::VectorXd s, f, fp, fpp, K;

  Eigen::Index size() const { return s.size(); }
};

// A U(1)-invariant surface metric ds^2 + f(s)^2 dtheta^2, theta in [0, 2 pi).
// Profiles with a closed form evaluate f'' analytically; otherwise the
// evaluator's f'' is whatever the producer supplies and curvature checks fall
// back to central differences of f.
class RadialProfile {
 public:
  using Evaluator = std::function<ProfileJet(double)>;

  static constexpr double kDefaultSamplesPerUnit = 4096.0;

  RadialProfile(double s_lo, double s_hi, Evaluator eval, bool closed_form,
                std::vector<double> corners = {});

  double s_lo() const { return s_lo_; }
  double s_hi() const { return s_hi_; }
  bool closed_form() const { return closed_form_; }
  const std::vector<double>& corners() const { return corners_; }
  bool in_domain(double s) const { return s >= s_lo_ && s <= s_hi_; }

  // Throws DomainError outside [s_lo, s_hi].
  ProfileJet jet(double s) const;
  double f(double s) const { return jet(s).f; }
  double gauss_curvature(double s) const;
  double circumference(double s) const;

  // Uniform grid on [lo, hi] with ceil(per_unit * (hi - lo)) intervals.
  ProfileSamples sample(double lo, double hi, double per_unit = kDefaultSamplesPerUnit) const;

  // Restriction to a sub-interval (same evaluator).
  RadialProfile restricted(double lo, double hi) const;

 private:
  double s_lo_;
  double s_hi_;
  Evaluator eval_;
  bool closed_form_;
  std::vector<double> corners_;
};

// Second-order central-difference curvature -f''/f at interior samples; the
// two end values are copied from their neighbours.
Eigen::VectorXd central_difference_curvature(const Eigen::VectorXd& f, double h);

// CSV with header "s,f,fp,fpp,K", one row per sample, round-trip precision.
void write_profile_csv(std::ostream& os, const ProfileSamples& samples);

}  // namespace cuspclose
