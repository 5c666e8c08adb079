#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "subsidy_game/artifacts.hpp"
#include "subsidy_game/equilibrium.hpp"
#include "subsidy_game/scenario.hpp"

namespace sg {

struct RunResult {
  ExitCode code = ExitCode::ok;
  Json report;
  std::optional<SolveReport> primary;  // enumeration when available, else dp
  std::optional<SolveReport> dp;
  std::optional<PolicyTable> policy;
};

inline SolverOptions solver_options(const Numerics& numerics, std::size_t workers) {
  SolverOptions options;
  options.integrator.step = numerics.step;
  options.workers = workers;
  return options;
}

namespace detail {

inline Json scenario_json(const Scenario& sc) {
  const auto& p = sc.params;
  const auto& g = sc.program;
  Json j;
  j["parameters"] = {{"alpha1", p.alpha1}, {"alpha2", p.alpha2}, {"beta", p.beta}, {"p_a", p.p_a},
                     {"x0", p.x0},         {"b1", p.b1},         {"b2", p.b2},     {"rho", p.rho},
                     {"T", p.T},           {"w1", p.w1()},       {"w2", p.w2()}};
  j["program"] = {{"decision_dates", to_json(g.decision_dates)},
                  {"end_date", g.end_date},
                  {"subsidy_set", to_json(g.subsidy_set)},
                  {"fixed_cost", g.fixed_cost},
                  {"target", g.target},
                  {"initial_subsidy", g.initial_subsidy}};
  j["numerics"] = {{"step", sc.numerics.step}, {"grid_nodes", sc.numerics.grid_nodes}};
  return j;
}

}  // namespace detail

// Solves one (non-sweep) scenario without touching the filesystem.
inline RunResult solve_scenario(const Scenario& sc, std::size_t workers = 0) {
  RunResult result;
  const auto options = solver_options(sc.numerics, workers == 0 ? sc.numerics.workers : workers);
  Json report;
  report["schema_version"] = report_schema_version;
  try {
    require_valid(sc);
    if (sc.solver != SolverChoice::dp) result.primary = enumerate(sc.params, sc.program, options);
    if (sc.solver != SolverChoice::enumeration) {
      auto [policy, dp] = dp_solve(sc.params, sc.program, GridSpec{sc.numerics.grid_nodes, 0.0}, options);
      result.policy = std::move(policy);
      result.dp = std::move(dp);
      if (!result.primary) result.primary = result.dp;
    }
    const auto& primary = *result.primary;
    report["status"] = primary.feasible ? "ok" : "infeasible";
    report["scenario"] = detail::scenario_json(sc);
    const auto body = report_json(primary);
    for (const auto& [key, value] : body.items()) report[key] = value;
    if (sc.solver == SolverChoice::both) {
      const auto& dp = *result.dp;
      Json cross;
      cross["solver"] = "dp";
      cross["feasible"] = dp.feasible;
      cross["schedule"] = detail::to_json(dp.best_schedule.levels());
      cross["government_cost"] =
          detail::number_or_null(dp.best_outcome ? dp.best_outcome->government_cost : infinity);
      cross["value_estimate"] = detail::number_or_null(dp.value_estimate);
      cross["agrees"] = dp.feasible == primary.feasible && dp.best_schedule == primary.best_schedule;
      report["cross_check"] = std::move(cross);
    }
    if (!primary.feasible) report["error"] = {{"kind", "infeasible"}, {"message", primary.message}};
    result.code = primary.feasible ? ExitCode::ok : ExitCode::infeasible;
  } catch (const ValidationError& e) {
    report = error_json("validation", e.what());
    result.code = e.exit_code();
  } catch (const Error& e) {
    report = error_json(e.exit_code() == ExitCode::numerical_failure ? "numerical" : "error", e.what());
    result.code = e.exit_code();
  }
  result.report = std::move(report);
  return result;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace detail

// trajectory.csv, coefficients.csv, report.json and, for DP runs, policy.csv.
inline void write_artifacts(const std::filesystem::path& dir, const Scenario& sc, const RunResult& result) {
  std::filesystem::create_directories(dir);
  detail::write_text(dir / "report.json", result.report.dump(2) + "\n");
  if (result.primary && result.primary->best_outcome) {
    const auto& o = *result.primary->best_outcome;
    std::ostringstream traj, coeffs;
    write_trajectory_csv(traj, sc.params, o.trajectory);
    write_coefficients_csv(coeffs, o.coefficients);
    detail::write_text(dir / "trajectory.csv", traj.str());
    detail::write_text(dir / "coefficients.csv", coeffs.str());
  }
  if (result.policy) {
    std::ostringstream policy;
    write_policy_csv(policy, *result.policy);
    detail::write_text(dir / "policy.csv", policy.str());
  }
}

struct SweepResult {
  ExitCode code = ExitCode::ok;
  std::vector<double> values;
  std::vector<RunResult> points;
  std::vector<SummaryRow> rows;
};

inline std::string sweep_point_dir(const Sweep& sweep, double value) {
  return sweep.parameter + "_" + format_number(value);
}

// Runs every sweep point (concurrently up to numerics.workers); results are
// collected in sweep order.
inline SweepResult run_sweep(const Scenario& sc) {
  SweepResult out;
  out.values = sc.sweep->values;
  out.points.resize(out.values.size());
  std::vector<Scenario> scenarios;
  for (double v : out.values) scenarios.push_back(sweep_point(sc, v));
  parallel_for(scenarios.size(), sc.numerics.workers,
               [&](std::size_t i) { out.points[i] = solve_scenario(scenarios[i], 1); });

  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const auto& point = out.points[i];
    SummaryRow row;
    row.value = out.values[i];
    if (point.primary) {
      row.feasible = point.primary->feasible;
      row.schedule = schedule_text(point.primary->best_schedule);
      if (point.primary->best_outcome) {
        row.government_cost = point.primary->best_outcome->government_cost;
        row.firm_profit = point.primary->best_outcome->firm_profit;
      }
    }
    out.rows.push_back(row);
    if (static_cast<int>(point.code) > static_cast<int>(out.code)) out.code = point.code;
  }
  return out;
}

// Full run: single solve or sweep, artifacts written under output_dir.
inline ExitCode run(const Scenario& sc, const std::filesystem::path& output_dir) {
  if (!sc.sweep) {
    const auto result = solve_scenario(sc);
    write_artifacts(output_dir, sc, result);
    return result.code;
  }
  const auto sweep = run_sweep(sc);
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    write_artifacts(output_dir / sweep_point_dir(*sc.sweep, sweep.values[i]), sweep_point(sc, sweep.values[i]),
                    sweep.points[i]);
  }
  std::ostringstream summary;
  write_summary_csv(summary, sweep.rows);
  std::filesystem::create_directories(output_dir);
  detail::write_text(output_dir / "summary.csv", summary.str());
  return sweep.code;
}

}  // namespace sg
