#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "subsidy_game/dynamics.hpp"

namespace {

using sg::Coefficients;
using sg::GameParameters;
using sg::IntegratorOptions;
using sg::SubsidyProgram;
using sg::SubsidySchedule;

struct Draw {
  GameParameters p;
  Coefficients k;
  double x = 0.0;
  double s = 0.0;
};

Draw random_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Draw d;
  d.p.alpha1 = 1.0 + 10.0 * u(rng);
  d.p.alpha2 = 0.001 + 0.05 * u(rng);
  d.p.beta = 0.01 + 0.5 * u(rng);
  d.p.p_a = 5.0 * u(rng);
  d.p.b1 = 10.0 + 90.0 * u(rng);
  d.p.b2 = 0.1 + 1.5 * u(rng);
  d.k = {3.0 * u(rng), 40.0 * (u(rng) - 0.5), 500.0 * u(rng)};
  d.x = 80.0 * u(rng);
  d.s = 20.0 * u(rng);
  return d;
}

TEST(Price, Examples) {
  const GameParameters p;
  EXPECT_DOUBLE_EQ(sg::equilibrium_price(p, {}, 0.0, 0.0), 55.5);
  EXPECT_DOUBLE_EQ(sg::equilibrium_price(p, {}, 0.0, 15.0), 63.0);
}

TEST(Price, NonInteriorThrows) {
  GameParameters p;
  p.b1 = -200.0;
  EXPECT_THROW(sg::equilibrium_price(p, {}, 0.0, 0.0), sg::NonInteriorPrice);
  EXPECT_LT(sg::price_rule(p, {}, 0.0, 0.0), 0.0);
}

TEST(Price, HalfPassThrough) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto d = random_draw(rng);
    const double delta = 1.0;
    const double dp = sg::price_rule(d.p, d.k, d.x, d.s + delta) - sg::price_rule(d.p, d.k, d.x, d.s);
    EXPECT_NEAR(dp / delta, 0.5, 1e-12 * std::max(1.0, std::abs(sg::price_rule(d.p, d.k, d.x, d.s))));
  }
}

TEST(Demand, Examples) {
  const GameParameters p;
  EXPECT_DOUBLE_EQ(sg::demand_rate(p, 10.0, p.p_a, 0.0), 6.1);
  const double choke = (p.alpha1 + p.alpha2 * 10.0) / p.beta + 3.0 + p.p_a;
  EXPECT_NEAR(sg::demand_rate(p, 10.0, choke, 3.0), 0.0, 1e-12);
}

TEST(ClosedLoop, Examples) {
  const GameParameters p;
  EXPECT_DOUBLE_EQ(sg::closed_loop_rate(p, {}, 0.0, 0.0), 0.55);
  const Coefficients k{0.2, -3.0, 0.0};
  const double delta = 4.0;
  EXPECT_NEAR(sg::closed_loop_rate(p, k, 20.0, 5.0 + delta) - sg::closed_loop_rate(p, k, 20.0, 5.0),
              p.beta * delta / 2.0, 1e-13);
}

TEST(ClosedLoop, BenchmarkInitialPoint) {
  const GameParameters p;
  const SubsidyProgram g;
  const SubsidySchedule sched({15.0, 0.0}, 0.0);
  const auto sim = sg::simulate(p, g, sched);
  const auto k = sim.coefficients.initial();
  const double price = sg::equilibrium_price(p, k, p.x0, 15.0);
  EXPECT_EQ(price, sim.trajectory.producer_price.front());
  EXPECT_NEAR(sg::demand_rate(p, p.x0, price, 15.0), sg::closed_loop_rate(p, k, p.x0, 15.0), 1e-12);
}

TEST(ClosedLoop, IdentityWithDemandAtEquilibriumPrice) {
  std::mt19937_64 rng(1);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto d = random_draw(rng);
    const double p = sg::price_rule(d.p, d.k, d.x, d.s);
    const double a = sg::demand_rate(d.p, d.x, p, d.s);
    const double b = sg::closed_loop_rate(d.p, d.k, d.x, d.s);
    ASSERT_LE(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(b))) << "draw " << i;
    ++checked;
  }
  EXPECT_EQ(checked, 10000);
}

TEST(Foc, StrictConcavityAndStationarity) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto d = random_draw(rng);
    const double vx = d.k.slope(d.x);
    auto profit = [&](double price) {
      return (price - sg::unit_cost(d.p, d.x) + vx) * sg::demand_rate(d.p, d.x, price, d.s);
    };
    const double p_star = sg::price_rule(d.p, d.k, d.x, d.s);
    // Exact derivatives of the quadratic in p.
    const double derivative = sg::demand_rate(d.p, d.x, p_star, d.s) -
                              d.p.beta * (p_star - sg::unit_cost(d.p, d.x) + vx);
    const double scale = std::max({1.0, std::abs(p_star), std::abs(sg::demand_rate(d.p, d.x, p_star, d.s))});
    EXPECT_LE(std::abs(derivative), 1e-10 * scale);
    const double h = 1.0;
    const double second = profit(p_star + h) - 2.0 * profit(p_star) + profit(p_star - h);
    EXPECT_NEAR(second, -2.0 * d.p.beta, 1e-8 * std::max(1.0, std::abs(profit(p_star))));
    EXPECT_LT(second, 0.0);
  }
}

TEST(Propagate, GridAndBreakpoints) {
  const GameParameters p;
  const SubsidyProgram g;
  const SubsidySchedule sched({15.0, 0.0}, 0.0);
  const auto sim = sg::simulate(p, g, sched);
  const auto& tr = sim.trajectory;
  ASSERT_EQ(tr.segment_begin.size(), 3u);
  EXPECT_EQ(tr.times[tr.segment_begin[1]], 5.0);
  EXPECT_EQ(tr.times[tr.segment_begin[2]], 10.0);
  EXPECT_EQ(tr.times[tr.segment_begin[1] - 1], 5.0);  // left limit row
  EXPECT_EQ(tr.x[tr.segment_begin[2] - 1], tr.x[tr.segment_begin[2]]);
  EXPECT_EQ(tr.times.back(), p.T);
  EXPECT_EQ(tr.x.front(), p.x0);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(tr.consumer_price[i], tr.producer_price[i] - tr.subsidy[i]);
    if (tr.times[i] >= 10.0 && i >= tr.segment_begin[2]) EXPECT_EQ(tr.subsidy[i], 0.0);
  }
  EXPECT_TRUE(tr.diagnostics.empty());
}

TEST(Propagate, TargetBelowInitialStateIsFeasible) {
  const GameParameters p;
  SubsidyProgram g;
  g.target = p.x0;
  for (double a : g.subsidy_set) {
    for (double b : g.subsidy_set) {
      const auto sim = sg::simulate(p, g, SubsidySchedule({a, b}, 0.0));
      EXPECT_GE(sim.trajectory.x_at_end_date(), g.target);
    }
  }
}

TEST(Propagate, NoSubsidyMissesBenchmarkTarget) {
  const GameParameters p;
  const SubsidyProgram g;
  const auto sim = sg::simulate(p, g, SubsidySchedule({0.0, 0.0}, 0.0));
  EXPECT_LT(sim.trajectory.x_at_end_date(), g.target);
}

TEST(Propagate, FlagsNegativeDemand) {
  GameParameters p;
  p.b1 = 200.0;  // unit cost far above the choke price at first
  const SubsidyProgram g;
  const auto sim = sg::simulate(p, g, SubsidySchedule({0.0, 0.0}, 0.0));
  ASSERT_FALSE(sim.trajectory.diagnostics.empty());
  EXPECT_EQ(sim.trajectory.diagnostics.front().rfind("negative demand on [", 0), 0u);
}

TEST(Propagate, MismatchedPathRejected) {
  const GameParameters p;
  const SubsidyProgram g;
  const auto coeffs = sg::solve_coefficients(p, g, SubsidySchedule({15.0, 0.0}, 0.0));
  EXPECT_THROW(sg::propagate(p, g, SubsidySchedule({5.0, 0.0}, 0.0), coeffs), sg::ValidationError);
}

TEST(Payoffs, AllZeroScheduleHasNoGovernmentCost) {
  const GameParameters p;
  const SubsidyProgram g;
  const auto sim = sg::simulate(p, g, SubsidySchedule({0.0, 0.0}, 0.0));
  EXPECT_EQ(sim.payoff.subsidy_expenditure, 0.0);
  EXPECT_EQ(sim.payoff.fixed_costs, 0.0);
  EXPECT_EQ(sim.payoff.government_cost, 0.0);
}

TEST(Payoffs, GovernmentCostConsistency) {
  const GameParameters p;
  const SubsidyProgram g;
  const auto sim = sg::simulate(p, g, SubsidySchedule({5.0, 15.0}, 0.0));
  EXPECT_EQ(sim.payoff.government_cost, sim.payoff.subsidy_expenditure + sim.payoff.fixed_costs);
  EXPECT_NEAR(sim.payoff.fixed_costs, g.fixed_cost * (1.0 + std::exp(-p.rho * 5.0)), 1e-12);
}

TEST(Payoffs, ZeroDiscountMatchesUndiscountedOracles) {
  GameParameters p;
  p.rho = 0.0;
  const SubsidyProgram g;
  const SubsidySchedule sched({15.0, 5.0}, 0.0);
  const auto sim = sg::simulate(p, g, sched);
  const auto& tr = sim.trajectory;

  // Exact: the outlay on a constant-subsidy interval is s times the sales gain.
  double exact = 0.0;
  for (std::size_t s = 0; s + 1 < tr.segment_begin.size(); ++s) {
    exact += tr.intervals[s].subsidy * (tr.x[tr.segment_end(s) - 1] - tr.x[tr.segment_begin[s]]);
  }
  EXPECT_NEAR(sim.payoff.subsidy_expenditure, exact, 1e-8 * exact);

  // Trapezoid on a 10x finer independent run.
  const auto fine = sg::simulate(p, g, sched, IntegratorOptions{1e-4});
  const auto& ft = fine.trajectory;
  double profit = 0.0, outlay = 0.0;
  for (std::size_t s = 0; s < ft.segment_begin.size(); ++s) {
    std::vector<double> t, fp, fs;
    for (std::size_t i = ft.segment_begin[s]; i < ft.segment_end(s); ++i) {
      t.push_back(ft.times[i]);
      fp.push_back((ft.producer_price[i] - sg::unit_cost(p, ft.x[i])) * ft.demand_rate[i]);
      fs.push_back(ft.subsidy[i] * ft.demand_rate[i]);
    }
    profit += sg::oracle::trapezoid(t, fp);
    if (ft.intervals[s].t_end <= g.end_date) outlay += sg::oracle::trapezoid(t, fs);
  }
  EXPECT_NEAR(sim.payoff.firm_profit, profit, 1e-8 * std::abs(profit));
  EXPECT_NEAR(sim.payoff.subsidy_expenditure, outlay, 1e-8 * outlay);
}

TEST(Payoffs, HjbVerification) {
  const GameParameters p;
  const SubsidyProgram g;
  for (double a : g.subsidy_set) {
    for (double b : g.subsidy_set) {
      const SubsidySchedule sched({a, b}, 0.0);
      const auto sim = sg::simulate(p, g, sched);
      const double v = sim.coefficients.firm_value(p.x0);
      EXPECT_NEAR(sim.payoff.firm_profit, v, 1e-4 * std::abs(v));

      const auto coarse = sg::simulate(p, g, sched, IntegratorOptions{0.2});
      const auto finer = sg::simulate(p, g, sched, IntegratorOptions{0.1});
      const double e1 = std::abs(coarse.payoff.firm_profit - coarse.coefficients.firm_value(p.x0));
      const double e2 = std::abs(finer.payoff.firm_profit - finer.coefficients.firm_value(p.x0));
      EXPECT_LT(e2, e1);
    }
  }
}

}  // namespace
