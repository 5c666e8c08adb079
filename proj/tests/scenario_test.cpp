#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "subsidy_game/scenario.hpp"

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(SCENARIO_DIR) + "/" + name);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

TEST(LoadScenario, ShippedBenchmark) {
  const auto sc = sg::load_scenario(slurp("benchmark.scn"));
  EXPECT_EQ(sc.params, sg::GameParameters{});
  EXPECT_EQ(sc.program, sg::SubsidyProgram{});
  EXPECT_EQ(sc.solver, sg::SolverChoice::enumeration);
  EXPECT_EQ(sc.numerics, sg::Numerics{});
  EXPECT_FALSE(sc.sweep.has_value());
  EXPECT_EQ(sc.output_dir, "out/benchmark");
}

TEST(LoadScenario, ShippedSweeps) {
  const auto t = sg::load_scenario(slurp("target_sweep.scn"));
  ASSERT_TRUE(t.sweep);
  EXPECT_EQ(t.sweep->parameter, "target");
  EXPECT_EQ(t.sweep->values, (std::vector<double>{36, 38, 42, 44}));
  EXPECT_EQ(sg::load_scenario(slurp("learning_speed_sweep.scn")).sweep->values,
            (std::vector<double>{0.72, 0.76, 0.84, 0.88}));
  EXPECT_EQ(sg::load_scenario(slurp("word_of_mouth_sweep.scn")).sweep->values,
            (std::vector<double>{0.009, 0.0095, 0.0105, 0.011}));
  EXPECT_EQ(sg::load_scenario(slurp("adjustment_count_sweep.scn")).sweep->values,
            (std::vector<double>{1, 3, 4, 5}));
}

TEST(LoadScenario, NegativeBetaNamesBeta) {
  try {
    sg::load_scenario(replace(slurp("benchmark.scn"), "beta = 0.1", "beta = -1"));
    FAIL() << "expected validation error";
  } catch (const sg::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
    EXPECT_EQ(e.exit_code(), sg::ExitCode::parse_or_validation);
  }
}

TEST(LoadScenario, UnknownKeyWithLineNumber) {
  const auto text = replace(slurp("benchmark.scn"), "T = 18\n", "T = 18\ngamma = 2\n");
  try {
    sg::load_scenario(text);
    FAIL() << "expected parse error";
  } catch (const sg::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown key gamma"), std::string::npos);
    EXPECT_EQ(e.line(), 15);
  }
}

TEST(LoadScenario, OtherParseErrors) {
  const auto base = slurp("benchmark.scn");
  EXPECT_THROW(sg::load_scenario(replace(base, "beta = 0.1", "beta = 0.1x")), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(replace(base, "beta = 0.1", "beta = 0.1\nbeta = 0.2")), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(replace(base, "beta = 0.1\n", "")), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(replace(base, "[numerics]", "[solver]")), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(replace(base, "[numerics]", "[numerics")), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(replace(base, "beta = 0.1", "beta 0.1")), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(replace(base, "solver = enumeration", "solver = magic")), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(replace(base, "[program]", "[program]\nnum_dates = 3")), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(base + "\n[sweep]\nparameter = rho\nvalues = 1\n"), sg::ParseError);
  EXPECT_THROW(sg::load_scenario(base + "\n[sweep]\nparameter = target\n"), sg::ParseError);
}

TEST(Overrides, BareAndQualifiedKeys) {
  auto sc = sg::load_scenario(slurp("benchmark.scn"));
  sg::apply_override(sc, "target=36");
  EXPECT_EQ(sc.program.target, 36.0);
  sg::apply_override(sc, "parameters.b2 = 0.72");
  EXPECT_EQ(sc.params.b2, 0.72);
  sg::apply_override(sc, "subsidy_set=0");
  EXPECT_EQ(sc.program.subsidy_set, (std::vector<double>{0.0}));
  sg::apply_override(sc, "num_dates=4");
  EXPECT_EQ(sc.program.decision_dates, (std::vector<double>{0.0, 2.5, 5.0, 7.5}));
  sg::apply_override(sc, "solver=dp");
  EXPECT_EQ(sc.solver, sg::SolverChoice::dp);
  EXPECT_THROW(sg::apply_override(sc, "gamma=2"), sg::ParseError);
  EXPECT_THROW(sg::apply_override(sc, "target"), sg::ParseError);
  sg::apply_override(sc, "beta=-1");
  EXPECT_THROW(sg::require_valid(sc), sg::ValidationError);
}

TEST(Serialize, RoundTripShipped) {
  for (const char* name : {"benchmark.scn", "target_sweep.scn", "adjustment_count_sweep.scn"}) {
    const auto sc = sg::load_scenario(slurp(name));
    EXPECT_EQ(sg::load_scenario(sg::serialize(sc)), sc) << name;
  }
}

TEST(Serialize, RoundTripRandomized) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    sg::Scenario sc;
    auto& p = sc.params;
    p.alpha1 = 0.1 + 20.0 * u(rng);
    p.alpha2 = 1e-4 + 0.1 * u(rng);
    p.beta = 1e-3 + u(rng);
    p.p_a = 10.0 * (u(rng) - 0.5);
    p.x0 = 50.0 * u(rng);
    p.b1 = 100.0 * u(rng);
    p.b2 = 1e-3 + 2.0 * u(rng);
    p.rho = 1e-3 + 0.3 * u(rng);
    p.T = 11.0 + 20.0 * u(rng);
    sc.program.target = p.x0 + 1.0 + 40.0 * u(rng);
    sc.program.fixed_cost = 100.0 * u(rng);
    sc.program.subsidy_set = {0.0, 20.0 * u(rng) + 0.1};
    sc.numerics.step = 1e-4 + 1e-2 * u(rng);
    if (i % 2 == 0) sc.sweep = sg::Sweep{"b2", {0.1 + u(rng), 1.2 + u(rng)}};
    const auto back = sg::load_scenario(sg::serialize(sc));
    ASSERT_EQ(back, sc) << sg::serialize(sc);
    EXPECT_EQ(back.params.w1(), p.alpha1 + p.beta * (p.p_a - p.b1));
    EXPECT_EQ(back.params.w2(), p.alpha2 + p.beta * p.b2);
  }
}

TEST(Sweep, PointScenarios) {
  auto sc = sg::load_scenario(slurp("adjustment_count_sweep.scn"));
  const auto two = sg::sweep_point(sc, 2.0);
  EXPECT_FALSE(two.sweep.has_value());
  EXPECT_EQ(two.program.decision_dates, (std::vector<double>{0.0, 5.0}));
  EXPECT_EQ(sg::sweep_point(sc, 5.0).program.decision_dates, (std::vector<double>{0.0, 2.0, 4.0, 6.0, 8.0}));
  EXPECT_THROW(sg::sweep_point(sc, 2.5), sg::ValidationError);

  sc.sweep = sg::Sweep{"alpha2", {0.011}};
  EXPECT_EQ(sg::sweep_point(sc, 0.011).params.alpha2, 0.011);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(sg::format_number(0.1), "0.1");
  EXPECT_EQ(sg::format_number(36.0), "36");
  EXPECT_EQ(sg::format_number(0.0095), "0.0095");
}

}  // namespace
