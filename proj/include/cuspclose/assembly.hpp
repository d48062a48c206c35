#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cuspclose/smoothing.hpp"
#include "cuspclose/warped.hpp"

namespace cuspclose {

// Abstract input manifold: dimension, free rank of pi_1 and the common core
// length of its rank-one unipotent cusps. Cusp i is closed by a cap of order i.
struct CuspedManifoldSpec {
  int n = 4;
  int k = 2;
  double L = 1.0;
  // Relator words w_i for i = i_eps..i_max, in that order; empty means "not supplied".
  std::vector<std::string> relator_words;

  // UsageError unless n >= 4, k >= 1, L > 0.
  void validate() const;
};

struct ClosingPlan {
  CuspedManifoldSpec spec;
  double epsilon = 0.0;
  WindowMode mode = WindowMode::TwoSided;
  double a = 0.0;
  double r = 0.0;
  std::optional<int> i_eps;  // empty when no cap exists (one-sided mode)
  int i_max = 0;
  std::optional<InfeasibilityCertificate> certificate;

  PinchWindow window() const { return PinchWindow::for_mode(mode, epsilon); }
  bool has_caps() const { return i_eps.has_value(); }
  // Orders i_eps..i_max, or empty.
  std::vector<int> cap_orders() const;
  // Cusps 1..i_eps-1 (all cusps up to i_max when there are no caps).
  std::vector<int> kept_cusps() const;
};

// r = arcsinh(L e^{-2r} / pi) / 4 iterated three times from r = 0; a = L e^{-2r}.
std::pair<double, double> closing_parameters(double L);

// CapacityError when i_eps > i_max (two-sided); one-sided plans carry the
// certificate and no caps.
ClosingPlan plan_closing(const CuspedManifoldSpec& spec, double epsilon, int i_max, WindowMode mode);

struct CollarResidual {
  int order = 0;
  int dim = 0;
  double width = 0.0;
  double residual = 0.0;
  bool pass = false;
};

constexpr double kCollarTolerance = 1e-9;

// Compares the lifted metric of the cusp collar t in [r, 2r] with the cap
// collar s in [R_i + r, R_i + 2r] under s = t + R_i, at `samples` random
// points. The residual is the largest relative discrepancy of the length
// elements, max_j |sqrt(g_cap_jj / g_cusp_jj) - 1|, plus any off-diagonal term.
// `cap_scale` multiplies the cap profile (defect injection). `dim` = 0 uses plan n.
CollarResidual collar_isometry_check(const ClosingPlan& plan, int order, int samples, std::uint64_t seed = 1,
                                     double cap_scale = 1.0, int dim = 0);

struct Piece {
  std::string id;
  std::string kind;  // "truncated_manifold" or "cap"
  int order = 0;     // cap order, 0 for M'
};

struct Interface {
  int cusp = 0;
  double width = 0.0;
  double residual = 0.0;
};

struct Relator {
  std::string word;
  int exponent = 0;
  bool input_required = false;
  std::string text() const;  // "(w)^i"
};

struct Presentation {
  std::vector<std::string> generators;
  std::vector<Relator> relators;
};

struct LocalGroup {
  int cap = 0;
  int order = 0;
  std::string name() const { return "Z/" + std::to_string(order); }
};

struct OrbifoldAssembly {
  ClosingPlan plan;
  std::vector<Piece> pieces;                    // pieces[0] is M'
  std::vector<std::pair<int, int>> edges;       // piece indices glued along an interface
  std::vector<Interface> interfaces;            // parallel to edges
  Presentation presentation;
  std::vector<LocalGroup> local_groups;
};

struct AssembleOptions {
  bool allow_placeholders = true;
  int collar_samples = 64;
  std::uint64_t seed = 1;
};

// UsageError when relator words are missing and placeholders are not allowed,
// or when the supplied word count does not match the cap count.
OrbifoldAssembly assemble(const ClosingPlan& plan, const AssembleOptions& options = {});

struct TorsionReport {
  std::vector<int> orders;
  bool unbounded_at_scale = false;
  std::string verdict;
};

TorsionReport torsion_report(const OrbifoldAssembly& assembly);

struct CompletenessAudit {
  bool pass = false;
  std::optional<double> min_width;  // empty when nothing is glued
};

CompletenessAudit completeness_audit(const OrbifoldAssembly& assembly);

struct RegionAudit {
  std::string region;
  double K_min = 0.0;
  double K_max = 0.0;
  std::size_t violations = 0;
  bool pass = false;
};

struct CurvatureAudit {
  std::vector<RegionAudit> regions;
  double K_min = 0.0;
  double K_max = 0.0;
  bool pass = false;
};

struct CurvatureAuditOptions {
  int samples = 200;  // per region
  std::uint64_t seed = 1;
  double h = kDefaultFdStep;
  double tol = 1e-2;
  double t_extent = 1.0;
  // Debug: adds delta * (s - s_mid)^2 to log f on every cap band.
  double corrupt_log_f = 0.0;
};

// pinch_scan over each cap's smoothing band and over a collar region of M'.
CurvatureAudit curvature_audit(const OrbifoldAssembly& assembly, const CurvatureAuditOptions& options = {});

// Smoothed cap profile F_i (throws InternalError when the plan's order is infeasible).
ProfileSolution cap_solution(const ClosingPlan& plan, int order);

}  // namespace cuspclose
