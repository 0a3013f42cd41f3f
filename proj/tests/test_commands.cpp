#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "ndf/commands.hpp"
#include "ndf/potential.hpp"

using namespace ndf;
using nlohmann::json;

namespace {

std::string read_data(const std::string& name) {
  std::ifstream in(std::string(NDF_DATA_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CommandResult run(const std::string& cmd, const std::string& file, CommandFlags flags = {}) {
  const std::string text = read_data(file);
  return run_command(cmd, parse_problem(text), text, flags);
}

}  // namespace

TEST_SUITE("commands") {

TEST_CASE("classify a critical sample") {
  const auto r = run("classify", "critical_cycle.json");
  REQUIRE(r.exit_code == kExitOk);
  const auto env = json::parse(r.envelope);
  CHECK(env["command"] == "classify");
  CHECK(env["result"]["verdict"] == "critical");
  CHECK(env["input_digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);
  CHECK(env["seed"] == kDefaultSeed);
  CHECK_FALSE(env.contains("wall_time_ms"));
}

TEST_CASE("envelope is deterministic") {
  CommandFlags f;
  f.seed = 11;
  CHECK(run("classify", "five_vertex.json", f).envelope == run("classify", "five_vertex.json", f).envelope);
  f.timing = true;
  CHECK(json::parse(run("classify", "five_vertex.json", f).envelope).contains("wall_time_ms"));
}

TEST_CASE("seed from the problem file") {
  CHECK(json::parse(run("classify", "five_vertex.json").envelope)["seed"] == 3);
}

TEST_CASE("capacity delegates to the library") {
  CommandFlags f;
  f.set = "a,c";
  const auto r = run("capacity", "five_vertex.json", f);
  REQUIRE(r.exit_code == kExitOk);
  const auto p = parse_problem(read_data("five_vertex.json"));
  const PointSet a = parse_set_arg(p.spec.space(), "a,c");
  const auto ref = capacity(p.spec, a, p.spec.space().constant(1.0));
  CHECK(json::parse(r.envelope)["result"]["capacity"].get<double>() == ref.value);
}

TEST_CASE("error mapping") {
  CommandFlags bad;
  bad.set = "v4";
  CHECK(run("capacity", "dirichlet_path.json", bad).exit_code == kExitInfeasible);
  CHECK(run("hardy-weight", "critical_cycle.json").exit_code == kExitInfeasible);
  CommandFlags budget;
  budget.field = "3";
  budget.alpha = 1e-3;
  budget.max_iterations = 1;
  CHECK(run("resolvent", "mixed_exponents.json", budget).exit_code == kExitNonConvergence);
  CommandFlags shallow;
  shallow.schedule_depth = 2;
  CHECK(run("green", "weak_kill.json", shallow).exit_code == kExitInconclusive);
  CHECK(run("no-such-command", "five_vertex.json").exit_code == kExitUsage);
  CommandFlags unknown;
  unknown.set = "zz";
  CHECK(run("capacity", "five_vertex.json", unknown).exit_code != kExitOk);
}

TEST_CASE("field and set arguments") {
  const auto p = parse_problem(read_data("five_vertex.json"));
  const Field c = parse_field_arg(p.spec.space(), "2.5");
  CHECK(c.size() == 5);
  CHECK(c.minCoeff() == 2.5);
  const Field f = parse_field_arg(p.spec.space(), "b=1,e=-2");
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 1.0);
  CHECK(f[4] == -2.0);
  const PointSet s = parse_set_arg(p.spec.space(), "a,e");
  CHECK(s == PointSet{true, false, false, false, true});
}

TEST_CASE("other commands produce envelopes") {
  CommandFlags f;
  f.field = "1";
  CHECK(run("green", "killed_path.json", f).exit_code == kExitOk);
  CHECK(run("resolvent", "killed_path.json", f).exit_code == kExitOk);
  CommandFlags lf;
  lf.field = "a=2";
  const auto lux = json::parse(run("luxemburg", "five_vertex.json", lf).envelope);
  CHECK(lux["result"]["norm"].get<double>() > 0.0);
  const auto hw = json::parse(run("hardy-weight", "killed_path.json").envelope);
  CHECK(hw["result"]["hardy_inequality"]["pass"] == true);
  CHECK(run("profile", "killed_path.json").exit_code == kExitOk);
  CommandFlags csv = f;
  csv.csv = "unused";
  const auto table = run("green", "killed_path.json", csv);
  CHECK(table.csv.rfind("point,", 0) == 0);
}

TEST_CASE("verify passes on the corpus") {
  for (const char* name : {"critical_cycle.json", "killed_path.json", "five_vertex.json"}) {
    const auto r = run("verify", name);
    CHECK_MESSAGE(r.exit_code == kExitOk, name << ": " << r.envelope);
  }
}

}
