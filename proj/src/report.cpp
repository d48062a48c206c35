#include "cuspclose/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cuspclose/errors.hpp"
#include "cuspclose/hyperbolic.hpp"
#include "cuspclose/surface.hpp"

namespace cuspclose {

using json = nlohmann::ordered_json;

namespace {

constexpr double kHyperbolicTol = 1e-3;
constexpr double kNestingTol = 1e-12;
constexpr int kNestingChains = 100;
constexpr int kUnboundedSearch = 1'000'000;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw UsageError("config: " + key + " expects a number, got '" + v + "'");
  }
  if (used != v.size()) throw UsageError("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw UsageError("config: " + key + " expects an integer, got '" + v + "'");
  }
  if (used != v.size()) throw UsageError("config: " + key + " expects an integer, got '" + v + "'");
  return out;
}

int parse_small_int(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw UsageError("config: " + key + " out of range");
  return static_cast<int>(x);
}

std::string hex64(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << x;
  return os.str();
}

json vec_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(v(j));
  return out;
}

std::string csv_of(const ProfileSamples& samples) {
  std::ostringstream os;
  write_profile_csv(os, samples);
  return os.str();
}

CommandResult finish(int code, std::string message, json body, const RunConfig& config) {
  body["exit_code"] = code;
  body["message"] = message;
  return {code, std::move(message), finalize_report(std::move(body), config), {}};
}

ClosingPlan plan_for(const RunConfig& config, int i_max) {
  CuspedManifoldSpec spec;
  spec.n = config.dim;
  spec.k = config.rank;
  spec.L = config.core_length;
  return plan_closing(spec, config.epsilon, i_max, config.mode);
}

}  // namespace

void RunConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw UsageError("config: epsilon must be positive");
  if (dim < 4) throw UsageError("config: dim must be >= 4");
  if (rank < 1) throw UsageError("config: rank must be >= 1");
  if (!(core_length > 0.0) || !std::isfinite(core_length)) throw UsageError("config: core_length must be positive");
  if (i_max && *i_max < 2) throw UsageError("config: i_max must be >= 2");
  if (samples < 1) throw UsageError("config: samples must be positive");
  if (!(fd_step > 0.0)) throw UsageError("config: fd_step must be positive");
  if (fd_step > kMaxFdStep) throw UsageError("config: fd_step must be <= 1e-2 (step too large)");
  if (!(tol > 0.0)) throw UsageError("config: tol must be positive");
  if (order && *order < 2) throw UsageError("config: order must be >= 2");
  if (debug_corrupt_curvature < 0.0) throw UsageError("config: debug_corrupt_curvature must be >= 0");
}

void apply_setting(RunConfig& config, std::string key, const std::string& raw) {
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw);
  if (key == "epsilon")
    config.epsilon = parse_double(key, value);
  else if (key == "dim" || key == "n")
    config.dim = parse_small_int(key, value);
  else if (key == "rank" || key == "k")
    config.rank = parse_small_int(key, value);
  else if (key == "core_length" || key == "L")
    config.core_length = parse_double(key, value);
  else if (key == "i_max")
    config.i_max = parse_small_int(key, value);
  else if (key == "mode")
    config.mode = parse_window_mode(value);
  else if (key == "samples")
    config.samples = parse_small_int(key, value);
  else if (key == "fd_step")
    config.fd_step = parse_double(key, value);
  else if (key == "tol")
    config.tol = parse_double(key, value);
  else if (key == "seed") {
    std::size_t used = 0;
    try {
      config.seed = std::stoull(value, &used, 0);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size() || value.front() == '-')
      throw UsageError("config: seed expects a 64-bit unsigned integer");
  } else if (key == "output_dir" || key == "out")
    config.output_dir = value;
  else if (key == "order")
    config.order = parse_small_int(key, value);
  else if (key == "debug_corrupt_curvature")
    config.debug_corrupt_curvature = parse_double(key, value);
  else
    throw UsageError("config: unknown key '" + key + "'");
}

void apply_config_text(RunConfig& config, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("config: line " + std::to_string(lineno) + " is not key=value");
    apply_setting(config, trim(std::string_view(t).substr(0, eq)), t.substr(eq + 1));
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["epsilon"] = c.epsilon;
  j["dim"] = c.dim;
  j["rank"] = c.rank;
  j["core_length"] = c.core_length;
  j["i_max"] = c.i_max ? json(*c.i_max) : json(nullptr);
  j["mode"] = to_string(c.mode);
  j["samples"] = c.samples;
  j["fd_step"] = c.fd_step;
  j["tol"] = c.tol;
  j["seed"] = c.seed;
  j["order"] = c.order ? json(*c.order) : json(nullptr);
  if (c.debug_corrupt_curvature != 0.0) j["debug_corrupt_curvature"] = c.debug_corrupt_curvature;
  return j;
}

json to_json(const InfeasibilityCertificate& c) {
  json j;
  j["kind"] = c.kind;
  j["detail"] = c.detail;
  j["terminal_bound"] = c.terminal_bound;
  j["required_terminal"] = c.required_terminal;
  j["candidates_checked"] = c.candidates_checked;
  j["min_comparison_margin"] = c.min_comparison_margin;
  return j;
}

json to_json(const ScanResult& s) {
  json j;
  j["region"] = s.region;
  j["samples"] = s.samples;
  j["seed"] = s.seed;
  j["h"] = s.h;
  j["K_min"] = s.K_min;
  j["K_max"] = s.K_max;
  j["argmin"] = vec_json(s.argmin);
  j["argmax"] = vec_json(s.argmax);
  json v = json::array();
  for (const auto& x : s.violations) v.push_back({{"point", vec_json(x.point)}, {"K", x.K}});
  j["violations"] = std::move(v);
  return j;
}

json solution_sidecar(const ProfileSolution& s, double epsilon) {
  json j;
  j["i"] = s.order;
  j["a"] = s.a;
  j["r"] = s.r;
  j["epsilon"] = epsilon;
  j["mode"] = to_string(s.window.mode);
  j["K_min"] = s.K_min;
  j["K_max"] = s.K_max;
  j["boundary_mismatch"] = s.boundary_mismatch;
  j["switch_times"] = {s.control.switch1, s.control.switch2};
  return j;
}

json assembly_report(const OrbifoldAssembly& as, const CurvatureAudit& curv, const CompletenessAudit& comp,
                     const TorsionReport& tors) {
  const ClosingPlan& p = as.plan;
  json j;
  j["n"] = p.spec.n;
  j["k"] = p.spec.k;
  j["L"] = p.spec.L;
  j["epsilon"] = p.epsilon;
  j["mode"] = to_string(p.mode);
  j["a"] = p.a;
  j["r"] = p.r;
  j["i_eps"] = p.i_eps ? json(*p.i_eps) : json(nullptr);
  j["i_max"] = p.i_max;

  json rel = json::array();
  for (const auto& r : as.presentation.relators)
    rel.push_back({{"word", r.word}, {"exponent", r.exponent}, {"text", r.text()}, {"input_required", r.input_required}});
  j["presentation"] = {{"generators", as.presentation.generators}, {"relators", std::move(rel)}};

  json pieces = json::array();
  for (const auto& pc : as.pieces) pieces.push_back({{"id", pc.id}, {"kind", pc.kind}, {"order", pc.order}});
  j["pieces"] = std::move(pieces);
  json edges = json::array();
  for (const auto& [u, v] : as.edges) edges.push_back({u, v});
  j["edges"] = std::move(edges);

  json ifs = json::array();
  for (const auto& f : as.interfaces) ifs.push_back({{"i", f.cusp}, {"width", f.width}, {"residual", f.residual}});
  j["interfaces"] = std::move(ifs);
  json lg = json::array();
  for (const auto& g : as.local_groups) lg.push_back({{"cap", g.cap}, {"group", g.name()}});
  j["local_groups"] = std::move(lg);
  j["kept_cusps"] = p.kept_cusps().size();

  j["torsion_orders"] = tors.orders;
  j["torsion_verdict"] = tors.verdict;

  json regions = json::array();
  for (const auto& r : curv.regions)
    regions.push_back({{"region", r.region}, {"K_min", r.K_min}, {"K_max", r.K_max}, {"violations", r.violations},
                       {"pass", r.pass}});
  j["curvature_audit"] = {{"K_min", curv.K_min}, {"K_max", curv.K_max}, {"pass", curv.pass}, {"regions", regions}};
  j["completeness"] = {{"min_width", comp.min_width ? json(*comp.min_width) : json(nullptr)}, {"pass", comp.pass}};
  if (p.certificate) j["certificate"] = to_json(*p.certificate);
  return j;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string finalize_report(json body, const RunConfig& config) {
  json out;
  out["schema"] = 1;
  out["config"] = to_json(config);
  for (auto& [k, v] : body.items()) out[k] = std::move(v);
  out["content_hash"] = hex64(fnv1a64(out.dump()));
  return out.dump(2) + "\n";
}

CommandResult cmd_verify_hyperbolic(const RunConfig& config) {
  json body;
  body["command"] = "verify-hyperbolic";
  bool pass = true;

  // Nesting of projections along random chains S'' in S' in H^n.
  std::uint64_t state = config.seed;
  const Eigen::Index n = config.dim;
  double worst_nesting = 0.0;
  for (int c = 0; c < kNestingChains; ++c) {
    const Eigen::Index k2 = 2 + static_cast<Eigen::Index>(uniform01(state) * static_cast<double>(n - 1));
    const Eigen::Index k1 = k2 + static_cast<Eigen::Index>(uniform01(state) * static_cast<double>(n - k2 + 1));
    Eigen::VectorXd x(n);
    for (Eigen::Index j = 0; j + 1 < n; ++j) x(j) = 4.0 * uniform01(state) - 2.0;
    x(n - 1) = std::exp(4.0 * uniform01(state) - 2.0);
    const UhsPointd p(x);
    const VerticalSubspace s1(n, std::min(k1, n)), s2(n, std::min(k2, n));
    const UhsPointd twice = project(project(p, s1), s2);
    const UhsPointd once = project(p, s2);
    worst_nesting = std::max(worst_nesting, (twice.coords() - once.coords()).norm() / (1.0 + once.coords().norm()));
  }
  const bool nesting_ok = worst_nesting <= kNestingTol;
  pass = pass && nesting_ok;
  body["nesting"] = {{"chains", kNestingChains}, {"max_error", worst_nesting}, {"pass", nesting_ok}};

  std::vector<int> dims{3, 4, 7};
  if (std::find(dims.begin(), dims.end(), config.dim) == dims.end()) dims.push_back(config.dim);
  json scans = json::array();
  for (int d : dims) {
    const WarpedStack stack(d - 2, FiberSurface(hyperbolic_plane_profile()));
    const ScanRegion region = stack_region(stack, 1.0, -1.0, 1.0, "H^" + std::to_string(d));
    ScanOptions opt;
    opt.h = config.fd_step;
    const ScanResult scan = pinch_scan(stack, region, config.samples, config.seed, opt);
    const bool ok = std::abs(scan.K_min + 1.0) <= kHyperbolicTol && std::abs(scan.K_max + 1.0) <= kHyperbolicTol;
    pass = pass && ok;
    json s = to_json(scan);
    s["dim"] = d;
    s["pass"] = ok;
    scans.push_back(std::move(s));
  }
  body["scans"] = std::move(scans);
  return finish(pass ? kExitPass : kExitAuditFailure, pass ? "hyperbolic checks pass" : "hyperbolic checks failed",
                std::move(body), config);
}

CommandResult cmd_min_order(const RunConfig& config) {
  const auto [a, r] = closing_parameters(config.core_length);
  const int bound = config.i_max.value_or(kUnboundedSearch);
  const MinOrderResult mo = min_order(config.epsilon, a, r, config.mode, bound);
  json body;
  body["command"] = "min-order";
  body["a"] = a;
  body["r"] = r;
  body["search_bound"] = mo.search_bound;
  if (mo.i_eps) {
    body["i_eps"] = *mo.i_eps;
    body["infeasible_below"] = mo.infeasible_below;
    json up = json::array();
    for (const auto& [i, ok] : mo.upward_samples) up.push_back({{"i", i}, {"feasible", ok}});
    body["upward_samples"] = std::move(up);
    return finish(kExitPass, "i_eps = " + std::to_string(*mo.i_eps), std::move(body), config);
  }
  body["i_eps"] = nullptr;
  body["certificate"] = to_json(mo.certificate);
  if (config.mode == WindowMode::TwoSided && config.i_max)
    return finish(kExitCapacity, "no feasible order up to i_max = " + std::to_string(bound), std::move(body), config);
  return finish(kExitInfeasible, "certified infeasible: " + mo.certificate.kind, std::move(body), config);
}

CommandResult cmd_solve_smoothing(const RunConfig& config) {
  const auto [a, r] = closing_parameters(config.core_length);
  int order = 0;
  if (config.order) {
    order = *config.order;
  } else {
    const MinOrderResult mo = min_order(config.epsilon, a, r, config.mode, config.i_max.value_or(kUnboundedSearch));
    if (!mo.i_eps) {
      json body{{"command", "solve-smoothing"}, {"certificate", to_json(mo.certificate)}};
      return finish(kExitInfeasible, "certified infeasible: " + mo.certificate.kind, std::move(body), config);
    }
    order = *mo.i_eps;
  }
  RunConfig resolved = config;
  resolved.order = order;
  const SmoothingProblem problem =
      make_smoothing_problem(build_splice(a, order, r), PinchWindow::for_mode(config.mode, config.epsilon));
  const SynthesisResult res = synthesize_profile(problem);
  json body;
  body["command"] = "solve-smoothing";
  if (!res.solution) {
    body["i"] = order;
    body["certificate"] = to_json(res.certificate);
    return finish(kExitInfeasible, "certified infeasible at i = " + std::to_string(order), std::move(body), resolved);
  }
  const WindowReport rep = verify_window(*res.solution, config.tol);
  body["solution"] = solution_sidecar(*res.solution, config.epsilon);
  body["verification"] = {{"K_min", rep.K_min},
                          {"K_max", rep.K_max},
                          {"boundary_mismatch", rep.boundary_mismatch},
                          {"violations", rep.violations.size()},
                          {"pass", rep.pass}};
  const std::string csv_name = "profile_" + std::to_string(order) + ".csv";
  body["csv"] = csv_name;
  CommandResult out = finish(rep.pass ? kExitPass : kExitAuditFailure,
                             rep.pass ? "smoothing verified at i = " + std::to_string(order) : "window check failed",
                             std::move(body), resolved);
  out.files.emplace_back(csv_name, csv_of(res.solution->samples));
  return out;
}

CommandResult cmd_curvature_scan(const RunConfig& config) {
  const ClosingPlan plan = plan_for(config, config.i_max.value_or(kUnboundedSearch));
  json body;
  body["command"] = "curvature-scan";
  if (!plan.has_caps()) {
    body["certificate"] = to_json(*plan.certificate);
    return finish(kExitInfeasible, "certified infeasible: no smoothed fiber to scan", std::move(body), config);
  }
  const int order = config.order.value_or(*plan.i_eps);
  const ProfileSolution sol = cap_solution(plan, order);
  const WarpedStack stack(config.dim - 2, FiberSurface(smoothed_surface(sol)));
  const ScanRegion region = stack_region(stack, 1.0, sol.s1, sol.s2, "O_" + std::to_string(order));
  ScanOptions opt;
  opt.h = config.fd_step;
  opt.window = plan.window();
  opt.tol = config.tol;
  const ScanResult scan = pinch_scan(stack, region, config.samples, config.seed, opt);
  const bool pass = scan.violations.empty();
  body["window"] = {plan.window().K_lo, plan.window().K_hi};
  body["scan"] = to_json(scan);
  body["pass"] = pass;
  return finish(pass ? kExitPass : kExitAuditFailure, pass ? "curvature within window" : "curvature audit failed",
                std::move(body), config);
}

CommandResult cmd_assemble(const RunConfig& config) {
  ClosingPlan plan = plan_for(config, config.i_max.value_or(kUnboundedSearch));
  json body;
  body["command"] = "assemble";
  if (!plan.has_caps()) {
    body["certificate"] = to_json(*plan.certificate);
    return finish(kExitInfeasible, "certified infeasible: no caps can be built", std::move(body), config);
  }
  if (!config.i_max) plan.i_max = *plan.i_eps + 10;
  RunConfig resolved = config;
  resolved.i_max = plan.i_max;

  AssembleOptions aopt;
  aopt.seed = config.seed;
  const OrbifoldAssembly as = assemble(plan, aopt);

  CurvatureAuditOptions copt;
  copt.samples = config.samples;
  copt.seed = config.seed;
  copt.h = config.fd_step;
  copt.tol = config.tol;
  copt.corrupt_log_f = config.debug_corrupt_curvature;
  const CurvatureAudit curv = curvature_audit(as, copt);
  const CompletenessAudit comp = completeness_audit(as);
  const TorsionReport tors = torsion_report(as);

  bool collar_ok = true;
  for (const auto& f : as.interfaces) collar_ok = collar_ok && f.residual <= kCollarTolerance;
  const std::vector<int> expected = plan.cap_orders();
  const bool torsion_ok = tors.unbounded_at_scale && tors.orders == expected &&
                          as.presentation.relators.size() == expected.size();

  std::vector<std::string> failed;
  if (!curv.pass) failed.push_back("curvature");
  if (!collar_ok) failed.push_back("collar");
  if (!comp.pass) failed.push_back("completeness");
  if (!torsion_ok) failed.push_back("torsion");

  body["report"] = assembly_report(as, curv, comp, tors);
  body["collar_pass"] = collar_ok;
  body["failed_audits"] = failed;
  json csvs = json::array();
  std::vector<std::pair<std::string, std::string>> files;
  for (int i : expected) {
    const std::string name = "profile_O_" + std::to_string(i) + ".csv";
    files.emplace_back(name, csv_of(cap_solution(plan, i).samples));
    csvs.push_back(name);
  }
  body["csv"] = std::move(csvs);

  std::string message = "all audits pass";
  if (!failed.empty()) {
    message = "audit failure:";
    for (const auto& f : failed) message += " " + f;
  }
  CommandResult out = finish(failed.empty() ? kExitPass : kExitAuditFailure, message, std::move(body), resolved);
  out.files = std::move(files);
  return out;
}

CommandResult run_command(const std::string& name, const RunConfig& config) {
  try {
    config.validate();
    if (name == "verify-hyperbolic") return cmd_verify_hyperbolic(config);
    if (name == "min-order") return cmd_min_order(config);
    if (name == "solve-smoothing") return cmd_solve_smoothing(config);
    if (name == "curvature-scan") return cmd_curvature_scan(config);
    if (name == "assemble") return cmd_assemble(config);
    throw UsageError("unknown subcommand '" + name + "'");
  } catch (const CapacityError& e) {
    return finish(kExitCapacity, e.what(), json{{"command", name}}, config);
  } catch (const UsageError& e) {
    return finish(kExitConfigError, e.what(), json{{"command", name}}, config);
  } catch (const PreconditionError& e) {
    return finish(kExitConfigError, e.what(), json{{"command", name}}, config);
  }
}

void write_artifacts(const CommandResult& result, const std::string& name, const std::string& output_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(output_dir);
  fs::create_directories(dir);
  auto put = [&](const std::string& file, const std::string& content) {
    std::ofstream os(dir / file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / file).string());
    os << content;
  };
  put(name + ".json", result.json);
  for (const auto& [file, content] : result.files) put(file, content);
}

}  // namespace cuspclose
