#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ndf/commands.hpp"
#include "ndf/errors.hpp"

namespace {

int run(const std::string& command, const std::string& path, const ndf::CommandFlags& flags) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open problem file '" << path << "'\n";
    return ndf::kExitUsage;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  ndf::ProblemFile problem;
  try {
    problem = ndf::parse_problem(text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << path << ": " << e.what() << '\n';
    return ndf::kExitUsage;
  }

  const ndf::CommandResult res = ndf::run_command(command, problem, text, flags);
  if (!res.error.empty()) std::cerr << "error: " << res.error << '\n';
  std::cout << res.envelope;
  if (flags.csv && !res.csv.empty()) {
    std::ofstream csv(*flags.csv, std::ios::binary);
    if (!csv) {
      std::cerr << "error: cannot write '" << *flags.csv << "'\n";
      return ndf::kExitUsage;
    }
    csv << res.csv;
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear Dirichlet forms on finite weighted graphs"};
  app.require_subcommand(1);

  ndf::CommandFlags flags;
  std::string path;
  std::uint64_t seed = ndf::kDefaultSeed;
  double tol = 0, alpha0 = 0, threshold = 0;
  std::size_t depth = 0, terms = 0, max_iterations = 0;
  std::string csv, field, set;

  const std::map<std::string, std::string> help{
      {"classify", "critical / subcritical / reducible verdict with witness"},
      {"capacity", "capacity and equilibrium potential of --set (h from --field, default 1)"},
      {"hardy-weight", "constructive Hardy weight of a subcritical form"},
      {"resolvent", "G_alpha f for --field and --alpha"},
      {"green", "Green potential of --field (default 1)"},
      {"luxemburg", "Luxemburg seminorm of --field at level --r"},
      {"profile", "weak Hardy (--kind hardy) or weak Poincare (--kind poincare) profile"},
      {"verify", "run the property suite; nonzero exit on any failure"}};

  for (const std::string& name : ndf::command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("problem", path, "problem file (JSON)")->required();
    sub->add_option("--seed", seed, "RNG seed")->default_val(ndf::kDefaultSeed);
    sub->add_option("--tol", tol, "residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--alpha0", alpha0, "first Green schedule step")->check(CLI::PositiveNumber);
    sub->add_option("--schedule-depth", depth, "Green schedule length K");
    sub->add_option("--divergence-threshold", threshold, "Green divergence threshold")->check(CLI::PositiveNumber);
    sub->add_option("--csv", csv, "write per-point tables to this CSV file");
    sub->add_option("--terms", terms, "Hardy series terms")->check(CLI::PositiveNumber);
    sub->add_option("--max-iterations", max_iterations, "solver iteration budget")->check(CLI::PositiveNumber);
    sub->add_option("--field", field, "a number, or id=value,... (others 0)");
    sub->add_option("--set", set, "id,id,...");
    sub->add_option("--alpha", flags.alpha, "resolvent parameter")->check(CLI::PositiveNumber);
    sub->add_option("--r", flags.r, "Luxemburg level")->check(CLI::PositiveNumber);
    sub->add_option("--p", flags.p, "profile exponent");
    sub->add_option("--kind", flags.kind, "profile kind")->check(CLI::IsMember({"hardy", "poincare"}));
    sub->add_option("--r-grid", flags.r_grid, "comma-separated profile grid");
    sub->add_flag("--timing", flags.timing, "include wall time in the envelope");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ndf::kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  auto given = [&](const char* opt) { return chosen->count(opt) > 0; };
  flags.seed = seed;
  if (given("--tol")) flags.tol = tol;
  if (given("--alpha0")) flags.alpha0 = alpha0;
  if (given("--schedule-depth")) flags.schedule_depth = depth;
  if (given("--divergence-threshold")) flags.divergence_threshold = threshold;
  if (given("--terms")) flags.terms = terms;
  if (given("--max-iterations")) flags.max_iterations = max_iterations;
  if (given("--csv")) flags.csv = csv;
  if (given("--field")) flags.field = field;
  if (given("--set")) flags.set = set;
  if (!given("--seed")) flags.seed.reset();
  return run(chosen->get_name(), path, flags);
}
