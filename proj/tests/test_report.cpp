#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cuspclose/errors.hpp"
#include "cuspclose/report.hpp"

using namespace cuspclose;
using json = nlohmann::json;

namespace {

RunConfig quick() {
  RunConfig c;
  c.samples = 100;
  return c;
}

json parse(const CommandResult& r) { return json::parse(r.json); }

}  // namespace

TEST_CASE("config parsing") {
  RunConfig c;
  apply_config_text(c, "# comment\nepsilon = 0.2\ncore-length=2.5  # trailing\n\nmode = one-sided\nseed=0xff\n");
  CHECK(c.epsilon == 0.2);
  CHECK(c.core_length == 2.5);
  CHECK(c.mode == WindowMode::OneSided);
  CHECK(c.seed == 255);
  apply_setting(c, "i-max", "30");
  CHECK(c.i_max == 30);
  CHECK_THROWS_AS(apply_setting(c, "nope", "1"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "samples", "12x"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "seed", "-1"), UsageError);
  CHECK_THROWS_AS(apply_config_text(c, "epsilon 0.1"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "mode", "sideways"), UsageError);

  RunConfig v;
  CHECK_NOTHROW(v.validate());
  v.fd_step = 1.0;
  CHECK_THROWS_AS(v.validate(), UsageError);
  v = RunConfig{};
  v.dim = 3;
  CHECK_THROWS_AS(v.validate(), UsageError);
  v = RunConfig{};
  v.epsilon = -0.1;
  CHECK_THROWS_AS(v.validate(), UsageError);
}

TEST_CASE("content hash") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  const std::string a = finalize_report(nlohmann::ordered_json{{"x", 1}}, RunConfig{});
  const json j = json::parse(a);
  CHECK(j["schema"] == 1);
  CHECK(j["config"]["epsilon"] == 0.1);
  CHECK(j["content_hash"].get<std::string>().size() == 16);
  const std::string b = finalize_report(nlohmann::ordered_json{{"x", 2}}, RunConfig{});
  CHECK(json::parse(b)["content_hash"] != j["content_hash"]);
}

TEST_CASE("verify-hyperbolic") {
  const CommandResult r = run_command("verify-hyperbolic", quick());
  CHECK(r.exit_code == kExitPass);
  const json j = parse(r);
  CHECK(j["nesting"]["pass"] == true);
  CHECK(j["scans"].size() == 3);

  RunConfig other = quick();
  other.seed = 12345;
  CHECK(run_command("verify-hyperbolic", other).exit_code == kExitPass);

  RunConfig bad = quick();
  bad.fd_step = 1.0;
  CHECK(run_command("verify-hyperbolic", bad).exit_code == kExitConfigError);
}

TEST_CASE("min-order exit codes") {
  const CommandResult ok = run_command("min-order", quick());
  CHECK(ok.exit_code == kExitPass);
  CHECK(parse(ok)["i_eps"] == 44);

  RunConfig one = quick();
  one.mode = WindowMode::OneSided;
  const CommandResult inf = run_command("min-order", one);
  CHECK(inf.exit_code == kExitInfeasible);
  CHECK(parse(inf)["certificate"]["kind"] == "riccati_comparison");

  RunConfig cap = quick();
  cap.i_max = 2;
  cap.epsilon = 0.01;
  CHECK(run_command("min-order", cap).exit_code == kExitCapacity);
}

TEST_CASE("solve-smoothing and curvature-scan") {
  const CommandResult s = run_command("solve-smoothing", quick());
  CHECK(s.exit_code == kExitPass);
  const json j = parse(s);
  CHECK(j["solution"]["i"] == 44);
  CHECK(j["solution"]["switch_times"].size() == 2);
  CHECK(j["config"]["order"] == 44);
  REQUIRE(s.files.size() == 1);
  CHECK(s.files[0].second.rfind("s,f,fp,fpp,K\n", 0) == 0);

  RunConfig below = quick();
  below.order = 43;
  CHECK(run_command("solve-smoothing", below).exit_code == kExitInfeasible);

  const CommandResult c = run_command("curvature-scan", quick());
  CHECK(c.exit_code == kExitPass);
  CHECK(parse(c)["scan"]["samples"] == 100);
}

TEST_CASE("assemble") {
  const CommandResult a = run_command("assemble", quick());
  CHECK(a.exit_code == kExitPass);
  const json j = parse(a);
  const json& rep = j["report"];
  CHECK(rep["i_max"] == rep["i_eps"].get<int>() + 10);
  CHECK(rep["presentation"]["relators"].size() == 11);
  CHECK(rep["torsion_orders"].size() == 11);
  CHECK(a.files.size() == 11);
  CHECK(run_command("assemble", quick()).json == a.json);

  RunConfig corrupt = quick();
  corrupt.debug_corrupt_curvature = 0.1;
  const CommandResult bad = run_command("assemble", corrupt);
  CHECK(bad.exit_code == kExitAuditFailure);
  CHECK(bad.message.find("curvature") != std::string::npos);
  CHECK(parse(bad)["failed_audits"] == json::array({"curvature"}));

  RunConfig one = quick();
  one.mode = WindowMode::OneSided;
  CHECK(run_command("assemble", one).exit_code == kExitInfeasible);

  RunConfig tight = quick();
  tight.i_max = 10;
  CHECK(run_command("assemble", tight).exit_code == kExitCapacity);
  CHECK(run_command("frobnicate", quick()).exit_code == kExitConfigError);
}

TEST_CASE("artifacts on disk") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cuspclose_report_test";
  fs::remove_all(dir);
  const CommandResult s = run_command("solve-smoothing", quick());
  write_artifacts(s, "solve-smoothing", dir.string());
  CHECK(fs::exists(dir / "solve-smoothing.json"));
  CHECK(fs::exists(dir / "profile_44.csv"));
  std::ifstream in(dir / "solve-smoothing.json");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == s.json);
  fs::remove_all(dir);
}
