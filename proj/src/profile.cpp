#include "cuspclose/profile.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cuspclose/errors.hpp"

namespace cuspclose {

RadialProfile::RadialProfile(double s_lo, double s_hi, Evaluator eval, bool closed_form,
                             std::vector<double> corners)
    : s_lo_(s_lo), s_hi_(s_hi), eval_(std::move(eval)), closed_form_(closed_form),
      corners_(std::move(corners)) {
  if (!(s_lo < s_hi)) throw UsageError("RadialProfile: empty domain");
  if (!eval_) throw UsageError("RadialProfile: missing evaluator");
}

ProfileJet RadialProfile::jet(double s) const {
  if (!in_domain(s)) {
    std::ostringstream msg;
    msg << "profile evaluated at s=" << s << " outside [" << s_lo_ << ", " << s_hi_ << "]";
    throw DomainError(msg.str());
  }
  return eval_(s);
}

double RadialProfile::gauss_curvature(double s) const {
  const ProfileJet j = jet(s);
  return -j.fpp / j.f;
}

double RadialProfile::circumference(double s) const {
  return 2.0 * std::numbers::pi * f(s);
}

ProfileSamples RadialProfile::sample(double lo, double hi, double per_unit) const {
  if (!(lo < hi)) throw UsageError("sample: empty interval");
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw UsageError("sample: interval must be finite");
  const auto intervals = static_cast<Eigen::Index>(std::ceil(per_unit * (hi - lo)));
  const Eigen::Index n = std::max<Eigen::Index>(intervals, 2) + 1;
  ProfileSamples out;
  out.s.resize(n);
  out.f.resize(n);
  out.fp.resize(n);
  out.fpp.resize(n);
  out.K.resize(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = (j == n - 1) ? hi : lo + h * static_cast<double>(j);
    const ProfileJet pj = jet(s);
    out.s(j) = s;
    out.f(j) = pj.f;
    out.fp(j) = pj.fp;
    out.fpp(j) = pj.fpp;
    out.K(j) = -pj.fpp / pj.f;
  }
  return out;
}

RadialProfile RadialProfile::restricted(double lo, double hi) const {
  if (lo < s_lo_ || hi > s_hi_) throw DomainError("restricted: interval outside profile domain");
  std::vector<double> inner;
  for (double c : corners_)
    if (c >= lo && c <= hi) inner.push_back(c);
  return RadialProfile(lo, hi, eval_, closed_form_, std::move(inner));
}

Eigen::VectorXd central_difference_curvature(const Eigen::VectorXd& f, double h) {
  const Eigen::Index n = f.size();
  if (n < 3) throw UsageError("central_difference_curvature: need at least 3 samples");
  Eigen::VectorXd K(n);
  for (Eigen::Index j = 1; j + 1 < n; ++j)
    K(j) = -(f(j + 1) - 2.0 * f(j) + f(j - 1)) / (h * h * f(j));
  K(0) = K(1);
  K(n - 1) = K(n - 2);
  return K;
}

void write_profile_csv(std::ostream& os, const ProfileSamples& samples) {
  os << "s,f,fp,fpp,K\n";
  os << std::setprecision(17);
  for (Eigen::Index j = 0; j < samples.size(); ++j) {
    os << samples.s(j) << ',' << samples.f(j) << ',' << samples.fp(j) << ',' << samples.fpp(j) << ','
       << samples.K(j) << '\n';
  }
}

}  // namespace cuspclose
