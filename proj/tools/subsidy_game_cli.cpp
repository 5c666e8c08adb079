#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subsidy_game/subsidy_game.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sg::ParseError(0, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

sg::Scenario load(const std::string& path, const std::vector<std::string>& overrides) {
  auto scenario = sg::load_scenario(read_file(path));
  for (const auto& o : overrides) sg::apply_override(scenario, o);
  sg::require_valid(scenario);
  return scenario;
}

int to_int(sg::ExitCode code) { return static_cast<int>(code); }

void print_summary(const sg::RunResult& result) {
  const auto& r = result.report;
  if (r.value("status", "") == "error") {
    std::cerr << "error: " << r["error"]["message"].get<std::string>() << "\n";
    return;
  }
  std::cout << "status: " << r["status"].get<std::string>() << "\n";
  std::cout << "solver: " << r["solver"].get<std::string>() << "\n";
  if (r.contains("error")) {
    std::cout << "message: " << r["error"]["message"].get<std::string>() << "\n";
    return;
  }
  std::cout << "schedule: " << r["schedule"].dump() << "\n";
  if (!r["government_cost"].is_null()) {
    std::cout << "government_cost: " << r["government_cost"].dump() << "\n";
    std::cout << "firm_profit: " << r["firm_profit"].dump() << "\n";
    std::cout << "x_at_end_date: " << r["x_at_end_date"].dump() << "\n";
  }
  if (r.contains("cross_check")) std::cout << "cross_check: " << r["cross_check"].dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium subsidy schedules for a durable-technology pricing game"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::vector<std::string> overrides;
  std::string output;
  std::string solver;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    cmd->add_option("--override", overrides, "key=value, repeatable");
    cmd->add_option("-o,--output", output, "Output directory (default: the scenario's output_dir)");
  };

  auto* solve = app.add_subcommand("solve", "Solve a single scenario");
  add_common(solve);
  solve->add_option("--solver", solver, "enumeration | dp | both")->check(CLI::IsMember({"enumeration", "dp", "both"}));

  auto* sweep = app.add_subcommand("sweep", "Run the scenario's [sweep] section");
  add_common(sweep);

  auto* run = app.add_subcommand("run", "Solve, or sweep when the scenario has a [sweep] section");
  add_common(run);

  std::string baseline_path, current_path;
  double tolerance = 1e-6;
  auto* compare = app.add_subcommand("compare", "Field-by-field comparison of two report.json files");
  compare->add_option("baseline", baseline_path)->required();
  compare->add_option("current", current_path)->required();
  compare->add_option("--tolerance", tolerance, "Relative tolerance")->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("scenario", scenario_path)->required();
  validate->add_option("--override", overrides, "key=value, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : to_int(sg::ExitCode::parse_or_validation);
  }

  try {
    if (compare->parsed()) {
      const auto baseline = sg::Json::parse(read_file(baseline_path));
      const auto current = sg::Json::parse(read_file(current_path));
      const auto diffs = sg::compare_reports(baseline, current, tolerance);
      for (const auto& d : diffs) {
        std::cout << d.path << ": " << d.baseline << " -> " << d.current << " (relative " << d.relative << ")\n";
      }
      return to_int(diffs.empty() ? sg::ExitCode::ok : sg::ExitCode::tolerance_exceeded);
    }

    if (validate->parsed()) {
      auto scenario = sg::load_scenario(read_file(scenario_path));
      for (const auto& o : overrides) sg::apply_override(scenario, o);
      const auto diagnostics = sg::validate(scenario);
      for (const auto& d : diagnostics) {
        std::cout << (d.severity == sg::Severity::error ? "error: " : "warning: ") << d.field << ": " << d.message
                  << "\n";
      }
      if (sg::has_errors(diagnostics)) return to_int(sg::ExitCode::parse_or_validation);
      std::cout << "ok\n";
      return 0;
    }

    auto scenario = load(scenario_path, overrides);
    const std::filesystem::path out_dir = output.empty() ? scenario.output_dir : output;

    if (solve->parsed() || (run->parsed() && !scenario.sweep)) {
      scenario.sweep.reset();
      if (solve->parsed() && !solver.empty()) sg::apply_override(scenario, "solver=" + solver);
      const auto result = sg::solve_scenario(scenario);
      sg::write_artifacts(out_dir, scenario, result);
      print_summary(result);
      return to_int(result.code);
    }

    if (!scenario.sweep) throw sg::ValidationError("scenario has no [sweep] section");
    const auto code = sg::run(scenario, out_dir);
    std::cout << "summary written to " << (out_dir / "summary.csv").string() << "\n";
    return to_int(code);
  } catch (const sg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return to_int(e.exit_code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return to_int(sg::ExitCode::parse_or_validation);
  }
}
