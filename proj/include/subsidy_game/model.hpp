#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "subsidy_game/error.hpp"

namespace sg {

// Market, cost and horizon primitives. w1 and w2 are always derived from the
// primitives so they can never drift out of sync with them.
struct GameParameters {
  double alpha1 = 6.0;   // demand intercept
  double alpha2 = 0.01;  // word-of-mouth coefficient
  double beta = 0.1;     // price sensitivity
  double p_a = 1.0;      // price of the incumbent technology
  double x0 = 10.0;      // initial cumulative sales
  double b1 = 50.0;      // initial unit cost
  double b2 = 0.8;       // learning speed
  double rho = 0.1;      // discount rate
  double T = 18.0;       // firm horizon

  double w1() const noexcept { return alpha1 + beta * (p_a - b1); }
  double w2() const noexcept { return alpha2 + beta * b2; }

  friend bool operator==(const GameParameters&, const GameParameters&) = default;
};

// The government's intervention calendar and instrument.
struct SubsidyProgram {
  std::vector<double> decision_dates{0.0, 5.0};  // tau_1 < ... < tau_N
  double end_date = 10.0;                        // tau_{N+1}
  std::vector<double> subsidy_set{0.0, 5.0, 10.0, 15.0};
  double fixed_cost = 10.0;
  double target = 40.0;
  double initial_subsidy = 0.0;  // s(0-)

  std::size_t num_dates() const noexcept { return decision_dates.size(); }

  bool admissible(double level) const noexcept {
    return std::find(subsidy_set.begin(), subsidy_set.end(), level) != subsidy_set.end();
  }

  friend bool operator==(const SubsidyProgram&, const SubsidyProgram&) = default;
};

// Subsidy level in force on each [tau_i, tau_{i+1}), together with the
// adjustments eta_i that produced it.
class SubsidySchedule {
 public:
  SubsidySchedule() = default;

  SubsidySchedule(std::vector<double> levels, double initial_subsidy)
      : levels_{std::move(levels)}, initial_{initial_subsidy} {
    adjustments_.reserve(levels_.size());
    double previous = initial_;
    for (double level : levels_) {
      adjustments_.push_back(level - previous);
      previous = level;
    }
  }

  // Schedule for a program, checked against its admissible set.
  static SubsidySchedule for_program(const SubsidyProgram& program, std::vector<double> levels) {
    if (levels.size() != program.num_dates()) {
      throw ValidationError("schedule has " + std::to_string(levels.size()) + " levels but program has " +
                            std::to_string(program.num_dates()) + " decision dates");
    }
    for (double level : levels) {
      if (!program.admissible(level)) {
        throw ValidationError("subsidy level " + std::to_string(level) + " is not in the admissible set");
      }
    }
    return SubsidySchedule(std::move(levels), program.initial_subsidy);
  }

  const std::vector<double>& levels() const noexcept { return levels_; }
  const std::vector<double>& adjustments() const noexcept { return adjustments_; }
  double initial_subsidy() const noexcept { return initial_; }
  std::size_t size() const noexcept { return levels_.size(); }
  double operator[](std::size_t i) const { return levels_[i]; }

  std::size_t positive_adjustments() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(adjustments_.begin(), adjustments_.end(), [](double eta) { return eta > 0.0; }));
  }

  double total_level() const noexcept {
    double sum = 0.0;
    for (double level : levels_) sum += level;
    return sum;
  }

  friend bool operator==(const SubsidySchedule&, const SubsidySchedule&) = default;

 private:
  std::vector<double> levels_;
  std::vector<double> adjustments_;
  double initial_ = 0.0;
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string field;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline double unit_cost(const GameParameters& params, double x) noexcept { return params.b1 - params.b2 * x; }

inline std::vector<Diagnostic> validate(const GameParameters& params, const SubsidyProgram& program) {
  std::vector<Diagnostic> out;
  auto error = [&out](std::string field, std::string message) {
    out.push_back({Severity::error, std::move(field), std::move(message)});
  };
  auto positive = [&](const char* name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) error(name, std::string(name) + " must be positive");
  };

  positive("alpha1", params.alpha1);
  positive("alpha2", params.alpha2);
  positive("beta", params.beta);
  positive("b2", params.b2);
  positive("rho", params.rho);
  positive("T", params.T);
  if (!(params.x0 >= 0.0) || !std::isfinite(params.x0)) error("x0", "x0 must be nonnegative");
  if (!std::isfinite(params.p_a)) error("p_a", "p_a must be finite");
  if (!std::isfinite(params.b1)) error("b1", "b1 must be finite");

  const auto& dates = program.decision_dates;
  if (!dates.empty() && !(dates.front() >= 0.0)) error("decision_dates", "decision dates must be nonnegative");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      error("decision_dates", "decision dates must be strictly increasing");
      break;
    }
  }
  if (!dates.empty() && !(dates.back() < program.end_date)) {
    error("end_date", "end_date must be after the last decision date");
  }
  if (!(program.end_date > 0.0)) error("end_date", "end_date must be positive");
  if (!(program.end_date < params.T)) error("end_date", "end_date must be before the firm horizon T");

  const auto& levels = program.subsidy_set;
  if (std::find(levels.begin(), levels.end(), 0.0) == levels.end()) {
    error("subsidy_set", "subsidy_set must contain 0");
  }
  if (std::any_of(levels.begin(), levels.end(), [](double s) { return !(s >= 0.0) || !std::isfinite(s); })) {
    error("subsidy_set", "subsidy levels must be nonnegative");
  }
  auto sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    error("subsidy_set", "subsidy levels must be pairwise distinct");
  }

  if (!(program.fixed_cost >= 0.0)) error("fixed_cost", "fixed_cost must be nonnegative");
  if (!(program.target > 0.0)) error("target", "target must be positive");
  if (!(program.initial_subsidy >= 0.0)) error("initial_subsidy", "initial_subsidy must be nonnegative");

  if (unit_cost(params, program.target) <= 0.0) {
    out.push_back({Severity::warning, "target", "unit cost nonpositive at target"});
  }
  return out;
}

inline bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

// Throws ValidationError listing every error-level diagnostic.
inline void require_valid(const GameParameters& params, const SubsidyProgram& program) {
  auto diagnostics = validate(params, program);
  if (!has_errors(diagnostics)) return;
  std::string message;
  for (const auto& d : diagnostics) {
    if (d.severity != Severity::error) continue;
    if (!message.empty()) message += "; ";
    message += d.message;
  }
  throw ValidationError(message);
}

}  // namespace sg
