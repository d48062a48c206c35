#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cuspclose/assembly.hpp"
#include "cuspclose/smoothing.hpp"
#include "cuspclose/warped.hpp"

namespace cuspclose {

enum ExitCode : int {
  kExitPass = 0,
  kExitAuditFailure = 1,
  kExitConfigError = 2,
  kExitInfeasible = 3,
  kExitCapacity = 4,
};

struct RunConfig {
  double epsilon = 0.1;
  int dim = 4;
  int rank = 2;
  double core_length = 1.0;
  std::optional<int> i_max;  // default: i_eps + 10
  WindowMode mode = WindowMode::TwoSided;
  int samples = 1000;
  double fd_step = 1e-3;
  double tol = 1e-2;
  std::uint64_t seed = 1;
  std::string output_dir;  // empty: no files written
  std::optional<int> order;          // solve-smoothing: default i_eps
  double debug_corrupt_curvature = 0.0;

  // UsageError naming the offending field.
  void validate() const;
};

// Sets one field from its textual form; keys accept '-' or '_' separators.
void apply_setting(RunConfig& config, std::string key, const std::string& value);
// Flat "key = value" lines; '#' starts a comment.
void apply_config_text(RunConfig& config, std::string_view text);

nlohmann::ordered_json to_json(const RunConfig& config);
nlohmann::ordered_json to_json(const InfeasibilityCertificate& cert);
nlohmann::ordered_json to_json(const ScanResult& scan);
nlohmann::ordered_json solution_sidecar(const ProfileSolution& solution, double epsilon);
nlohmann::ordered_json assembly_report(const OrbifoldAssembly& assembly, const CurvatureAudit& curvature,
                                       const CompletenessAudit& completeness, const TorsionReport& torsion);

std::uint64_t fnv1a64(std::string_view bytes);

// Adds "schema": 1 and "config", then a "content_hash" (FNV-1a 64 over the
// compact dump of everything else). Returns the indented text.
std::string finalize_report(nlohmann::ordered_json body, const RunConfig& config);

struct CommandResult {
  int exit_code = kExitPass;
  std::string message;                                    // one-line human summary
  std::string json;                                       // finalized report
  std::vector<std::pair<std::string, std::string>> files; // extra artifacts (name, content)
};

CommandResult cmd_verify_hyperbolic(const RunConfig& config);
CommandResult cmd_min_order(const RunConfig& config);
CommandResult cmd_solve_smoothing(const RunConfig& config);
CommandResult cmd_curvature_scan(const RunConfig& config);
CommandResult cmd_assemble(const RunConfig& config);

// Dispatches by subcommand name; config errors become exit 2.
CommandResult run_command(const std::string& name, const RunConfig& config);

// Writes <name>.json and the extra files into config.output_dir.
void write_artifacts(const CommandResult& result, const std::string& name, const std::string& output_dir);

}  // namespace cuspclose
