#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "subsidy_game/error.hpp"
#include "subsidy_game/model.hpp"
#include "subsidy_game/riccati.hpp"

namespace sg {

// Producer price from the firm's first-order condition, before the
// positivity check. The subsidy enters with weight 1/2.
inline double price_rule(const GameParameters& params, const Coefficients& k, double x, double subsidy) noexcept {
  const double beta = params.beta;
  return 0.5 * ((params.alpha2 / beta - params.b2 - k.k2) * x + params.alpha1 / beta + params.p_a + subsidy +
                params.b1 - k.k1);
}

inline double equilibrium_price(const GameParameters& params, const Coefficients& k, double x, double subsidy) {
  const double p = price_rule(params, k, x, subsidy);
  if (!(p > 0.0)) throw NonInteriorPrice(p);
  return p;
}

// Instantaneous sales rate; negative values are returned as is.
inline double demand_rate(const GameParameters& params, double x, double price, double subsidy) noexcept {
  return params.alpha1 + params.alpha2 * x - params.beta * (price - subsidy - params.p_a);
}

// Sales rate once the equilibrium price is substituted into the demand:
//   x' = 1/2 (w1 + beta (s + k1) + (w2 + beta k2) x)
inline double closed_loop_rate(const GameParameters& params, const Coefficients& k, double x,
                               double subsidy) noexcept {
  const double beta = params.beta;
  return 0.5 * (params.w1() + beta * (subsidy + k.k1) + (params.w2() + beta * k.k2) * x);
}

// Closed-loop state, prices and rates on the integration grid. Each
// constant-subsidy segment owns a contiguous block of rows including both
// of its endpoints, so a breakpoint appears twice: left limit, then right
// limit.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> producer_price;
  std::vector<double> consumer_price;
  std::vector<double> subsidy;
  std::vector<double> demand_rate;
  std::vector<std::size_t> segment_begin;  // first row of each segment
  std::vector<SubsidyInterval> intervals;
  std::vector<std::string> diagnostics;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t segment_end(std::size_t s) const noexcept {
    return s + 1 < segment_begin.size() ? segment_begin[s + 1] : times.size();
  }

  // State at the close of the subsidy program.
  // The post-program segment is always last and its first row is tau_{N+1}.
  double x_at_end_date() const { return x[segment_begin.back()]; }

  double x_final() const { return x.back(); }
};

namespace detail {

inline void record_row(Trajectory& traj, const GameParameters& params, const Coefficients& k, double t, double x,
                       double s) {
  const double p = equilibrium_price(params, k, x, s);
  traj.times.push_back(t);
  traj.x.push_back(x);
  traj.producer_price.push_back(p);
  traj.consumer_price.push_back(p - s);
  traj.subsidy.push_back(s);
  traj.demand_rate.push_back(demand_rate(params, x, p, s));
}

}  // namespace detail

// Forward RK4 of the closed-loop rate on the coefficient grid. Coefficients
// at half steps come from the Hermite interpolant of the coefficient path.
inline Trajectory propagate(const GameParameters& params, const SubsidyProgram& program,
                            const SubsidySchedule& schedule, const CoefficientPath& coeffs) {
  Trajectory traj;
  traj.intervals = subsidy_intervals(params, program, schedule);
  const auto& segments = coeffs.segments();
  if (segments.size() != traj.intervals.size()) {
    throw ValidationError("coefficient path does not match the schedule's interval structure");
  }

  double x = params.x0;
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const auto& seg = segments[si];
    const auto& iv = traj.intervals[si];
    if (seg.subsidy != iv.subsidy || seg.t_start != iv.t_start || seg.t_end != iv.t_end) {
      throw ValidationError("coefficient path was built from a different schedule");
    }
    const double s = iv.subsidy;
    traj.segment_begin.push_back(traj.times.size());
    detail::record_row(traj, params, seg.values[0], seg.times[0], x, s);

    bool negative = traj.demand_rate.back() < 0.0;
    double negative_from = negative ? seg.times[0] : 0.0;
    for (std::size_t i = 0; i + 1 < seg.times.size(); ++i) {
      const double t = seg.times[i];
      const double h = seg.times[i + 1] - t;
      const Coefficients k_mid = seg.at(t + 0.5 * h);
      const double r1 = closed_loop_rate(params, seg.values[i], x, s);
      const double r2 = closed_loop_rate(params, k_mid, x + 0.5 * h * r1, s);
      const double r3 = closed_loop_rate(params, k_mid, x + 0.5 * h * r2, s);
      const double r4 = closed_loop_rate(params, seg.values[i + 1], x + h * r3, s);
      x += h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
      detail::record_row(traj, params, seg.values[i + 1], seg.times[i + 1], x, s);

      const bool now_negative = traj.demand_rate.back() < 0.0;
      if (now_negative && !negative) negative_from = seg.times[i + 1];
      if (!now_negative && negative) {
        traj.diagnostics.push_back("negative demand on [" + std::to_string(negative_from) + ", " +
                                   std::to_string(seg.times[i + 1]) + "]");
      }
      negative = now_negative;
    }
    if (negative) {
      traj.diagnostics.push_back("negative demand on [" + std::to_string(negative_from) + ", " +
                                 std::to_string(seg.t_end) + "]");
    }
  }
  return traj;
}

struct PayoffBreakdown {
  double firm_profit = 0.0;
  double subsidy_expenditure = 0.0;
  double fixed_costs = 0.0;
  double government_cost = 0.0;
};

// Composite Simpson over rows [begin, end) of a uniformly spaced segment.
template <typename Integrand>
double simpson(const Trajectory& traj, std::size_t begin, std::size_t end, Integrand&& f) {
  const std::size_t n = end - begin - 1;  // even by construction of the grid
  const double h = (traj.times[end - 1] - traj.times[begin]) / static_cast<double>(n);
  double sum = f(begin) + f(end - 1);
  for (std::size_t i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(begin + i);
  return sum * h / 3.0;
}

inline double discounted_fixed_costs(const GameParameters& params, const SubsidyProgram& program,
                                     const SubsidySchedule& schedule) {
  double total = 0.0;
  const auto& eta = schedule.adjustments();
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] > 0.0) total += std::exp(-params.rho * program.decision_dates[i]) * program.fixed_cost;
  }
  return total;
}

inline PayoffBreakdown payoffs(const GameParameters& params, const SubsidyProgram& program,
                               const SubsidySchedule& schedule, const Trajectory& traj) {
  PayoffBreakdown out;
  const double rho = params.rho;
  for (std::size_t s = 0; s < traj.segment_begin.size(); ++s) {
    const std::size_t begin = traj.segment_begin[s];
    const std::size_t end = traj.segment_end(s);
    out.firm_profit += simpson(traj, begin, end, [&](std::size_t i) {
      return std::exp(-rho * traj.times[i]) * (traj.producer_price[i] - unit_cost(params, traj.x[i])) *
             traj.demand_rate[i];
    });
    if (traj.intervals[s].t_end <= program.end_date && traj.intervals[s].subsidy != 0.0) {
      out.subsidy_expenditure += simpson(traj, begin, end, [&](std::size_t i) {
        return std::exp(-rho * traj.times[i]) * traj.subsidy[i] * traj.demand_rate[i];
      });
    }
  }
  out.fixed_costs = discounted_fixed_costs(params, program, schedule);
  out.government_cost = out.subsidy_expenditure + out.fixed_costs;
  return out;
}

struct Simulation {
  CoefficientPath coefficients;
  Trajectory trajectory;
  PayoffBreakdown payoff;
};

inline Simulation simulate(const GameParameters& params, const SubsidyProgram& program,
                           const SubsidySchedule& schedule, const IntegratorOptions& options = {}) {
  Simulation sim;
  sim.coefficients = solve_coefficients(params, program, schedule, options);
  sim.trajectory = propagate(params, program, schedule, sim.coefficients);
  sim.payoff = payoffs(params, program, schedule, sim.trajectory);
  return sim;
}

}  // namespace sg
