#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "subsidy_game/dynamics.hpp"
#include "subsidy_game/equilibrium.hpp"
#include "subsidy_game/riccati.hpp"
#include "subsidy_game/scenario.hpp"

namespace sg {

inline constexpr int report_schema_version = 1;

using Json = nlohmann::ordered_json;

// 12 significant digits, the fixed precision of every CSV artifact.
inline std::string csv_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

inline std::string schedule_text(const SubsidySchedule& schedule, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0) out += sep;
    out += format_number(schedule[i]);
  }
  return out;
}

inline void write_trajectory_csv(std::ostream& out, const GameParameters& params, const Trajectory& traj) {
  out << "t,x,producer_price,consumer_price,subsidy,demand_rate,unit_cost\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << csv_number(traj.times[i]) << ',' << csv_number(traj.x[i]) << ',' << csv_number(traj.producer_price[i])
        << ',' << csv_number(traj.consumer_price[i]) << ',' << csv_number(traj.subsidy[i]) << ','
        << csv_number(traj.demand_rate[i]) << ',' << csv_number(unit_cost(params, traj.x[i])) << '\n';
  }
}

inline void write_coefficients_csv(std::ostream& out, const CoefficientPath& path) {
  out << "t,k2,k1,k0,segment_index\n";
  const auto& segments = path.segments();
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    for (std::size_t i = 0; i < seg.times.size(); ++i) {
      out << csv_number(seg.times[i]) << ',' << csv_number(seg.values[i].k2) << ',' << csv_number(seg.values[i].k1)
          << ',' << csv_number(seg.values[i].k0) << ',' << s << '\n';
    }
  }
}

inline void write_policy_csv(std::ostream& out, const PolicyTable& policy) {
  out << "tau,s,x,eta,value\n";
  for (std::size_t j = 0; j < policy.entries.size(); ++j) {
    for (std::size_t si = 0; si < policy.levels.size(); ++si) {
      for (std::size_t node = 0; node < policy.grid.size(); ++node) {
        const auto& e = policy.at(j, si, node);
        out << csv_number(policy.dates[j]) << ',' << csv_number(policy.levels[si]) << ','
            << csv_number(policy.grid[node]) << ',' << csv_number(e.eta) << ',' << csv_number(e.value) << '\n';
      }
    }
  }
}

struct SummaryRow {
  double value = 0.0;
  double government_cost = infinity;
  double firm_profit = 0.0;
  std::string schedule;
  bool feasible = false;
};

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "value,government_cost,firm_profit,schedule,feasible\n";
  for (const auto& r : rows) {
    out << csv_number(r.value) << ',' << csv_number(r.government_cost) << ',' << csv_number(r.firm_profit) << ','
        << r.schedule << ',' << (r.feasible ? "true" : "false") << '\n';
  }
}

namespace detail {

// JSON has no infinity; infeasible costs are written as null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace detail

inline Json report_json(const SolveReport& report) {
  Json j;
  j["solver"] = to_string(report.solver);
  j["feasible"] = report.feasible;
  j["schedule"] = detail::to_json(report.best_schedule.levels());
  j["adjustments"] = detail::to_json(report.best_schedule.adjustments());
  if (report.best_outcome) {
    const auto& o = *report.best_outcome;
    j["government_cost"] = o.government_cost;
    j["subsidy_expenditure"] = o.payoff.subsidy_expenditure;
    j["fixed_costs"] = o.payoff.fixed_costs;
    j["firm_profit"] = o.firm_profit;
    j["x_at_end_date"] = o.x_at_end_date;
    Json diags = Json::array();
    for (const auto& d : o.trajectory.diagnostics) diags.push_back(d);
    j["diagnostics"] = diags;
  } else {
    j["government_cost"] = nullptr;
  }
  j["value_estimate"] = detail::number_or_null(report.value_estimate);
  if (!report.message.empty()) j["message"] = report.message;
  Json candidates = Json::array();
  for (const auto& c : report.all_candidates) {
    Json row;
    row["schedule"] = detail::to_json(c.schedule.levels());
    row["government_cost"] = c.government_cost;
    row["firm_profit"] = c.firm_profit;
    row["x_at_end_date"] = c.x_at_end_date;
    row["feasible"] = c.feasible;
    candidates.push_back(std::move(row));
  }
  j["candidates"] = std::move(candidates);
  return j;
}

inline Json error_json(const std::string& kind, const std::string& message) {
  Json j;
  j["schema_version"] = report_schema_version;
  j["status"] = "error";
  j["error"] = {{"kind", kind}, {"message", message}};
  return j;
}

// One entry per field whose values differ by more than the tolerance.
struct FieldDifference {
  std::string path;
  std::string baseline;
  std::string current;
  double relative = 0.0;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::parse_or_validation; }
};

namespace detail {

inline void compare_into(const Json& a, const Json& b, const std::string& path, double tolerance,
                         std::vector<FieldDifference>& out) {
  const bool a_num = a.is_number(), b_num = b.is_number();
  if (a_num && b_num) {
    const double x = a.get<double>(), y = b.get<double>();
    const double scale = std::max(std::abs(x), std::abs(y));
    const double rel = scale == 0.0 ? 0.0 : std::abs(x - y) / scale;
    if (rel > tolerance) out.push_back({path, a.dump(), b.dump(), rel});
    return;
  }
  // A null (infeasible) cost against a number is a value difference.
  if ((a_num && b.is_null()) || (a.is_null() && b_num)) {
    out.push_back({path, a.dump(), b.dump(), std::numeric_limits<double>::infinity()});
    return;
  }
  if (a.type() != b.type()) throw ShapeMismatch("shape mismatch at " + path);
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) throw ShapeMismatch("shape mismatch at " + path + "/" + it.key());
    }
    for (auto it = b.begin(); it != b.end(); ++it) {
      if (!a.contains(it.key())) throw ShapeMismatch("shape mismatch at " + path + "/" + it.key());
      compare_into(a.at(it.key()), it.value(), path + "/" + it.key(), tolerance, out);
    }
  } else if (a.is_array()) {
    if (a.size() != b.size()) throw ShapeMismatch("shape mismatch at " + path + " (array length)");
    for (std::size_t i = 0; i < a.size(); ++i) {
      compare_into(a[i], b[i], path + "/" + std::to_string(i), tolerance, out);
    }
  } else if (a != b) {
    out.push_back({path, a.dump(), b.dump(), std::numeric_limits<double>::infinity()});
  }
}

}  // namespace detail

inline std::vector<FieldDifference> compare_reports(const Json& baseline, const Json& current, double tolerance) {
  std::vector<FieldDifference> out;
  detail::compare_into(baseline, current, "", tolerance, out);
  return out;
}

}  // namespace sg
