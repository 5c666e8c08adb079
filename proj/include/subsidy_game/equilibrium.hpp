#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subsidy_game/dynamics.hpp"
#include "subsidy_game/error.hpp"
#include "subsidy_game/model.hpp"
#include "subsidy_game/parallel.hpp"
#include "subsidy_game/riccati.hpp"

namespace sg {

enum class SolverKind { enumeration, dp };

inline const char* to_string(SolverKind kind) noexcept {
  return kind == SolverKind::enumeration ? "enumeration" : "dp";
}

struct SolverOptions {
  IntegratorOptions integrator{};
  std::size_t workers = 1;
  double max_candidates = 1e7;
};

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct EquilibriumOutcome {
  SubsidySchedule schedule;
  CoefficientPath coefficients;
  Trajectory trajectory;
  PayoffBreakdown payoff;
  double firm_profit = 0.0;
  double government_cost = 0.0;
  double undiscounted_expenditure = 0.0;
  double x_at_end_date = 0.0;
  bool feasible = false;
  std::vector<double> unit_cost_path;
};

// Undiscounted subsidy outlay, used only to break cost ties.
inline double undiscounted_expenditure(const SubsidyProgram& program, const Trajectory& traj) {
  double total = 0.0;
  for (std::size_t s = 0; s < traj.segment_begin.size(); ++s) {
    if (traj.intervals[s].t_end > program.end_date || traj.intervals[s].subsidy == 0.0) continue;
    total += simpson(traj, traj.segment_begin[s], traj.segment_end(s),
                     [&](std::size_t i) { return traj.subsidy[i] * traj.demand_rate[i]; });
  }
  return total;
}

inline EquilibriumOutcome evaluate_schedule(const GameParameters& params, const SubsidyProgram& program,
                                            const SubsidySchedule& schedule, const IntegratorOptions& options = {}) {
  auto sim = simulate(params, program, schedule, options);
  EquilibriumOutcome out;
  out.schedule = schedule;
  out.payoff = sim.payoff;
  out.firm_profit = sim.payoff.firm_profit;
  out.government_cost = sim.payoff.government_cost;
  out.undiscounted_expenditure = undiscounted_expenditure(program, sim.trajectory);
  out.x_at_end_date = sim.trajectory.x_at_end_date();
  out.feasible = out.x_at_end_date >= program.target;
  out.unit_cost_path.reserve(sim.trajectory.size());
  for (double x : sim.trajectory.x) out.unit_cost_path.push_back(unit_cost(params, x));
  out.coefficients = std::move(sim.coefficients);
  out.trajectory = std::move(sim.trajectory);
  return out;
}

struct Candidate {
  SubsidySchedule schedule;
  double government_cost = 0.0;
  double firm_profit = 0.0;
  double undiscounted_expenditure = 0.0;
  double x_at_end_date = 0.0;
  bool feasible = false;
};

struct SolveReport {
  SolverKind solver = SolverKind::enumeration;
  bool feasible = false;
  SubsidySchedule best_schedule;
  std::optional<EquilibriumOutcome> best_outcome;
  std::vector<Candidate> all_candidates;
  double value_estimate = infinity;  // solver's own estimate of the optimal cost
  std::string message;
};

namespace detail {

inline bool nearly_equal(double a, double b) noexcept {
  if (a == b) return true;
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-10 * scale;
}

// Strict preference: lower cost, then lower undiscounted outlay, then the
// lexicographically smaller level sequence.
inline bool preferred(double cost_a, double outlay_a, std::span<const double> levels_a, double cost_b,
                      double outlay_b, std::span<const double> levels_b) {
  if (!nearly_equal(cost_a, cost_b)) return cost_a < cost_b;
  if (!nearly_equal(outlay_a, outlay_b)) return outlay_a < outlay_b;
  return std::lexicographical_compare(levels_a.begin(), levels_a.end(), levels_b.begin(), levels_b.end());
}

inline std::vector<double> sorted_levels(const SubsidyProgram& program) {
  auto levels = program.subsidy_set;
  std::sort(levels.begin(), levels.end());
  return levels;
}

inline std::size_t power(std::size_t base, std::size_t exponent) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) out *= base;
  return out;
}

// Level sequence for a base-|S| code, most significant digit first.
inline std::vector<double> decode(std::size_t code, std::size_t length, std::span<const double> levels) {
  std::vector<double> out(length);
  const std::size_t m = levels.size();
  for (std::size_t i = length; i > 0; --i) {
    out[i - 1] = levels[code % m];
    code /= m;
  }
  return out;
}

inline void guard_enumeration_size(const SubsidyProgram& program, double max_candidates) {
  const double count =
      std::pow(static_cast<double>(program.subsidy_set.size()), static_cast<double>(program.num_dates()));
  if (count > max_candidates) {
    throw ValidationError("enumeration of " + std::to_string(count) + " schedules exceeds the limit of " +
                          std::to_string(max_candidates));
  }
}

}  // namespace detail

// Exact reference solver: evaluates every schedule in S^N.
inline SolveReport enumerate(const GameParameters& params, const SubsidyProgram& program,
                             const SolverOptions& options = {}) {
  require_valid(params, program);
  detail::guard_enumeration_size(program, options.max_candidates);

  const auto levels = detail::sorted_levels(program);
  const std::size_t n = program.num_dates();
  const std::size_t count = detail::power(levels.size(), n);

  SolveReport report;
  report.solver = SolverKind::enumeration;
  report.all_candidates.resize(count);
  parallel_for(count, options.workers, [&](std::size_t code) {
    auto schedule = SubsidySchedule::for_program(program, detail::decode(code, n, levels));
    const auto outcome = evaluate_schedule(params, program, schedule, options.integrator);
    report.all_candidates[code] = {std::move(schedule), outcome.government_cost, outcome.firm_profit,
                                   outcome.undiscounted_expenditure, outcome.x_at_end_date, outcome.feasible};
  });

  const Candidate* best = nullptr;
  for (const auto& c : report.all_candidates) {
    if (!c.feasible) continue;
    if (best == nullptr || detail::preferred(c.government_cost, c.undiscounted_expenditure, c.schedule.levels(),
                                             best->government_cost, best->undiscounted_expenditure,
                                             best->schedule.levels())) {
      best = &c;
    }
  }
  if (best == nullptr) {
    report.message = "program infeasible";
    return report;
  }
  report.feasible = true;
  report.best_schedule = best->schedule;
  report.value_estimate = best->government_cost;
  report.best_outcome = evaluate_schedule(params, program, best->schedule, options.integrator);
  return report;
}

// ---------------------------------------------------------------------------
// Grid dynamic program over decision dates.
//
// A "suffix" is the sequence of levels chosen from date j to date N-1. The
// firm's coefficients on [tau_j, tau_{j+1}] depend on the whole suffix, so
// value tables are kept per suffix and the government minimizes over suffixes
// sharing a first level.

struct GridSpec {
  std::size_t nodes = 200;
  double x_max = 0.0;  // 0 selects the automatic bound
};

struct StageResult {
  double x_next = 0.0;
  double discounted = 0.0;    // discounted subsidy outlay on the stage
  double undiscounted = 0.0;
};

// Closed-loop propagation over a single stage with fixed coefficients.
// Identical arithmetic to propagate() on the same grid.
class StageKernel {
 public:
  StageKernel(const GameParameters& params, const CoefficientSegment& segment)
      : params_{params}, subsidy_{segment.subsidy}, times_{segment.times}, k_{segment.values} {
    k_mid_.reserve(times_.size() - 1);
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
      k_mid_.push_back(segment.at(times_[i] + 0.5 * (times_[i + 1] - times_[i])));
    }
    discount_.reserve(times_.size());
    for (double t : times_) discount_.push_back(std::exp(-params.rho * t));
  }

  StageResult run(double x) const {
    const double s = subsidy_;
    const std::size_t n = times_.size() - 1;
    const double width = (times_.back() - times_.front()) / static_cast<double>(n);
    double disc_sum = 0.0, plain_sum = 0.0;
    auto accumulate = [&](std::size_t i, double rate) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      disc_sum += w * discount_[i] * s * rate;
      plain_sum += w * s * rate;
    };
    accumulate(0, closed_loop_rate(params_, k_[0], x, s));
    for (std::size_t i = 0; i < n; ++i) {
      const double h = times_[i + 1] - times_[i];
      const double r1 = closed_loop_rate(params_, k_[i], x, s);
      const double r2 = closed_loop_rate(params_, k_mid_[i], x + 0.5 * h * r1, s);
      const double r3 = closed_loop_rate(params_, k_mid_[i], x + 0.5 * h * r2, s);
      const double r4 = closed_loop_rate(params_, k_[i + 1], x + h * r3, s);
      x += h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
      accumulate(i + 1, closed_loop_rate(params_, k_[i + 1], x, s));
    }
    return {x, disc_sum * width / 3.0, plain_sum * width / 3.0};
  }

 private:
  GameParameters params_;
  double subsidy_;
  std::vector<double> times_;
  std::vector<Coefficients> k_;
  std::vector<Coefficients> k_mid_;
  std::vector<double> discount_;
};

// Cost-to-go of following a suffix from (tau_j, x), excluding the fixed cost
// of entering its first level.
struct SuffixOutcome {
  double cost = 0.0;
  double undiscounted = 0.0;
  double x_end = 0.0;  // x(tau_{N+1})
};

// Per-suffix values on the x-grid at one decision date, or the terminal rule
// at tau_{N+1} (no grid: zero cost, x passes through).
class ContinuationTable {
 public:
  ContinuationTable() = default;  // terminal

  ContinuationTable(std::vector<double> grid, std::vector<std::vector<SuffixOutcome>> values)
      : grid_{std::move(grid)}, values_{std::move(values)} {}

  bool terminal() const noexcept { return grid_.empty(); }
  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<SuffixOutcome>& values(std::size_t code) const { return values_[code]; }

  // Piecewise-linear lookup. Every component is affine in x along a fixed
  // suffix, so no infinities are ever interpolated: feasibility is decided
  // afterwards from the interpolated x_end.
  SuffixOutcome lookup(std::size_t code, double x) const {
    if (terminal()) return {0.0, 0.0, x};
    const double lo = grid_.front(), hi = grid_.back();
    const double slack = 1e-12 * std::max(1.0, std::abs(hi));
    if (!(x >= lo - slack && x <= hi + slack)) {
      throw GridExtrapolation("state x=" + std::to_string(x) + " outside the value grid [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
    }
    const double step = (hi - lo) / static_cast<double>(grid_.size() - 1);
    auto i = static_cast<std::size_t>(std::clamp((x - lo) / step, 0.0, static_cast<double>(grid_.size() - 2)));
    const auto& row = values_[code];
    const auto& a = row[i];
    const auto& b = row[i + 1];
    if (std::isnan(a.cost) || std::isnan(b.cost)) {
      throw GridExtrapolation("value grid node near x=" + std::to_string(x) + " is unreachable");
    }
    const double u = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return {a.cost + u * (b.cost - a.cost), a.undiscounted + u * (b.undiscounted - a.undiscounted),
            a.x_end + u * (b.x_end - a.x_end)};
  }

 private:
  std::vector<double> grid_;
  std::vector<std::vector<SuffixOutcome>> values_;
};

// Everything the intervention at date j needs about dates j+1 onward.
struct Continuation {
  ContinuationTable table;
  std::vector<Coefficients> coefficients;  // k at tau_{j+1} for each suffix from j+1
};

struct InterventionChoice {
  double level = 0.0;
  double eta = 0.0;
  double value = infinity;
  double undiscounted = infinity;
  double x_end = 0.0;
  std::size_t suffix_code = 0;
  bool feasible = false;
};

namespace detail {

inline double stage_end(const SubsidyProgram& program, std::size_t j) {
  return j + 1 < program.num_dates() ? program.decision_dates[j + 1] : program.end_date;
}

inline double entry_cost(const GameParameters& params, const SubsidyProgram& program, std::size_t j, double from,
                         double to) {
  return to > from ? std::exp(-params.rho * program.decision_dates[j]) * program.fixed_cost : 0.0;
}

// First level of a suffix of the given length.
inline std::size_t head_digit(std::size_t code, std::size_t length, std::size_t m) {
  return code / power(m, length - 1);
}

}  // namespace detail

// Suffix value of starting suffix `code` at (tau_j, x) with its stage kernel.
inline SuffixOutcome suffix_value(const GameParameters& params, const SubsidyProgram& program, std::size_t j,
                                  std::size_t code, std::span<const double> levels, const StageKernel& kernel,
                                  const Continuation& next, double x) {
  const std::size_t m = levels.size();
  const std::size_t length = program.num_dates() - j;
  const std::size_t tail = code % detail::power(m, length - 1);
  const auto stage = kernel.run(x);
  const auto cont = next.table.lookup(tail, stage.x_next);
  double fixed = 0.0;
  if (length > 1) {
    const double now = levels[detail::head_digit(code, length, m)];
    const double then = levels[detail::head_digit(tail, length - 1, m)];
    fixed = detail::entry_cost(params, program, j + 1, now, then);
  }
  return {stage.discounted + fixed + cont.cost, stage.undiscounted + cont.undiscounted, cont.x_end};
}

// The intervention operator at (tau_j, s, x): minimizes stage outlay + fixed
// cost + continuation over every admissible adjustment and every suffix the
// firm may be told to expect.
inline InterventionChoice intervention_value(const GameParameters& params, const SubsidyProgram& program,
                                             std::size_t j, double subsidy, double x, const Continuation& next,
                                             const IntegratorOptions& options = {}) {
  const auto levels = detail::sorted_levels(program);
  const std::size_t m = levels.size();
  const std::size_t length = program.num_dates() - j;
  const std::size_t tail_count = detail::power(m, length - 1);
  const double t0 = program.decision_dates[j];
  const double t1 = detail::stage_end(program, j);

  InterventionChoice best;
  std::vector<double> best_levels;
  for (std::size_t code = 0; code < m * tail_count; ++code) {
    const double level = levels[code / tail_count];
    const auto segment = integrate_segment(params, {t0, t1, level, next.coefficients[code % tail_count]}, options);
    const StageKernel kernel(params, segment);
    const auto v = suffix_value(params, program, j, code, levels, kernel, next, x);
    if (!(v.x_end >= program.target)) continue;
    const double value = detail::entry_cost(params, program, j, subsidy, level) + v.cost;
    const auto suffix = detail::decode(code, length, levels);
    if (!best.feasible || detail::preferred(value, v.undiscounted, suffix, best.value, best.undiscounted, best_levels)) {
      best = {level, level - subsidy, value, v.undiscounted, v.x_end, code, true};
      best_levels = suffix;
    }
  }
  if (!best.feasible) {
    best.level = subsidy;
    best.eta = 0.0;
  }
  return best;
}

struct PolicyEntry {
  double eta = 0.0;
  double value = infinity;
};

// Optimal adjustment and value M v(tau_j, s, x) on the grid. NaN marks nodes
// whose evaluation would leave the grid (unreachable from x0).
struct PolicyTable {
  std::vector<double> dates;
  std::vector<double> levels;
  std::vector<double> grid;
  std::vector<double> terminal_values;                       // v at tau_{N+1} per node
  std::vector<std::vector<std::vector<PolicyEntry>>> entries;  // [date][level][node]

  const PolicyEntry& at(std::size_t date, std::size_t level, std::size_t node) const {
    return entries[date][level][node];
  }
};

namespace detail {

// Largest x(tau_{N+1}) over all schedules.
inline double reachable_x_max(const GameParameters& params, const SubsidyProgram& program,
                              const SolverOptions& options) {
  const auto levels = sorted_levels(program);
  const std::size_t n = program.num_dates();
  const std::size_t count = power(levels.size(), n);
  std::vector<double> x_end(count);
  parallel_for(count, options.workers, [&](std::size_t code) {
    const auto schedule = SubsidySchedule::for_program(program, decode(code, n, levels));
    const auto coeffs = solve_coefficients(params, program, schedule, options.integrator);
    x_end[code] = propagate(params, program, schedule, coeffs).x_at_end_date();
  });
  return *std::max_element(x_end.begin(), x_end.end());
}

}  // namespace detail

inline std::pair<PolicyTable, SolveReport> dp_solve(const GameParameters& params, const SubsidyProgram& program,
                                                    const GridSpec& grid_spec = {},
                                                    const SolverOptions& options = {}) {
  require_valid(params, program);
  detail::guard_enumeration_size(program, options.max_candidates);
  if (grid_spec.nodes < 2) throw ValidationError("grid needs at least 2 nodes");

  const auto levels = detail::sorted_levels(program);
  const std::size_t m = levels.size();
  const std::size_t n = program.num_dates();
  const auto& integ = options.integrator;

  SolveReport report;
  report.solver = SolverKind::dp;
  PolicyTable policy;
  policy.dates = program.decision_dates;
  policy.levels = levels;

  if (n == 0) {
    const SubsidySchedule empty({}, program.initial_subsidy);
    auto outcome = evaluate_schedule(params, program, empty, integ);
    report.feasible = outcome.feasible;
    report.value_estimate = outcome.feasible ? outcome.government_cost : infinity;
    report.best_schedule = empty;
    if (outcome.feasible) {
      report.best_outcome = std::move(outcome);
    } else {
      report.message = "program infeasible";
    }
    return {std::move(policy), std::move(report)};
  }

  const double x_max = grid_spec.x_max > 0.0 ? grid_spec.x_max : 1.1 * detail::reachable_x_max(params, program, options);
  if (!(x_max > params.x0)) throw ValidationError("grid upper bound must exceed x0");
  std::vector<double> grid(grid_spec.nodes);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = params.x0 + (x_max - params.x0) * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  grid.back() = x_max;
  policy.grid = grid;
  for (double x : grid) policy.terminal_values.push_back(x >= program.target ? 0.0 : infinity);

  const auto post = integrate_segment(params, {program.end_date, params.T, 0.0, {}}, integ);

  // continuations[j] describes dates j..N-1; continuations[N] is terminal.
  std::vector<Continuation> continuations(n + 1);
  continuations[n].coefficients = {post.front()};
  policy.entries.resize(n);

  for (std::size_t j = n; j > 0; --j) {
    const std::size_t date = j - 1;
    const std::size_t length = n - date;
    const std::size_t count = detail::power(m, length);
    const std::size_t tail_count = count / m;
    const auto& next = continuations[date + 1];
    const double t0 = program.decision_dates[date];
    const double t1 = detail::stage_end(program, date);

    std::vector<Coefficients> coeffs(count);
    std::vector<std::vector<SuffixOutcome>> values(count, std::vector<SuffixOutcome>(grid.size()));
    parallel_for(count, options.workers, [&](std::size_t code) {
      const double level = levels[code / tail_count];
      const auto segment = integrate_segment(params, {t0, t1, level, next.coefficients[code % tail_count]}, integ);
      coeffs[code] = segment.front();
      const StageKernel kernel(params, segment);
      for (std::size_t node = 0; node < grid.size(); ++node) {
        try {
          values[code][node] = suffix_value(params, program, date, code, levels, kernel, next, grid[node]);
        } catch (const GridExtrapolation&) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          values[code][node] = {nan, nan, nan};
        }
      }
    });

    // Policy rows: minimize over suffixes for each incoming level.
    auto& rows = policy.entries[date];
    rows.assign(m, std::vector<PolicyEntry>(grid.size()));
    for (std::size_t si = 0; si < m; ++si) {
      for (std::size_t node = 0; node < grid.size(); ++node) {
        PolicyEntry entry{std::numeric_limits<double>::quiet_NaN(), infinity};
        double best_outlay = infinity;
        std::vector<double> best_levels;
        bool unreachable = false;
        for (std::size_t code = 0; code < count; ++code) {
          const auto& v = values[code][node];
          if (std::isnan(v.cost)) {
            unreachable = true;
            break;
          }
          if (!(v.x_end >= program.target)) continue;
          const double level = levels[code / tail_count];
          const double value = detail::entry_cost(params, program, date, levels[si], level) + v.cost;
          const auto suffix = detail::decode(code, length, levels);
          if (std::isinf(entry.value) ||
              detail::preferred(value, v.undiscounted, suffix, entry.value, best_outlay, best_levels)) {
            entry = {level - levels[si], value};
            best_outlay = v.undiscounted;
            best_levels = suffix;
          }
        }
        if (unreachable) entry = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        rows[si][node] = entry;
      }
    }

    continuations[date].table = ContinuationTable(grid, std::move(values));
    continuations[date].coefficients = std::move(coeffs);
  }

  // Recover the plan announced from (0, s(0-), x0). The firm prices against
  // the whole announced suffix, so the schedule is read off the first
  // decision rather than re-optimized date by date.
  const double x = params.x0;
  const double s = program.initial_subsidy;
  const double first = program.decision_dates.front();
  const std::size_t full_count = detail::power(m, n);
  std::size_t plan = 0;
  bool found = false;
  if (first > 0.0) {
    // No decision before tau_1: pick the announced plan that is best from t=0.
    double best_value = infinity, best_outlay = infinity;
    std::vector<double> best_levels;
    for (std::size_t code = 0; code < full_count; ++code) {
      const auto pre = integrate_segment(params, {0.0, first, s, continuations[0].coefficients[code]}, integ);
      const auto stage = StageKernel(params, pre).run(x);
      const auto cont = continuations[0].table.lookup(code, stage.x_next);
      if (!(cont.x_end >= program.target)) continue;
      const double level = levels[code / (full_count / m)];
      const double value = stage.discounted + detail::entry_cost(params, program, 0, s, level) + cont.cost;
      const auto suffix = detail::decode(code, n, levels);
      if (!found || detail::preferred(value, stage.undiscounted + cont.undiscounted, suffix, best_value,
                                      best_outlay, best_levels)) {
        best_value = value;
        best_outlay = stage.undiscounted + cont.undiscounted;
        best_levels = suffix;
        plan = code;
        found = true;
      }
    }
    report.value_estimate = best_value;
  } else {
    const auto choice = intervention_value(params, program, 0, s, x, continuations[1], integ);
    found = choice.feasible;
    plan = choice.suffix_code;
    report.value_estimate = choice.feasible ? choice.value : infinity;
  }
  if (!found) {
    report.message = "program infeasible";
    return {std::move(policy), std::move(report)};
  }
  const auto chosen = detail::decode(plan, n, levels);

  report.best_schedule = SubsidySchedule::for_program(program, chosen);
  auto outcome = evaluate_schedule(params, program, report.best_schedule, integ);
  report.feasible = outcome.feasible;
  if (!outcome.feasible) report.message = "recovered policy misses the target";
  report.best_outcome = std::move(outcome);
  return {std::move(policy), std::move(report)};
}

}  // namespace sg
