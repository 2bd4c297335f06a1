#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "needs/model.hpp"

using namespace needs;

namespace
{

// One store, one week; travel figures are two-way.
ScenarioInputs store_week(double A = 100.0, double tt = 1.0, double tc = 10.0)
{
  ScenarioInputs in;
  in.locations = {"store"};
  in.attractiveness = Grid(1, 7, A);
  in.travel_time = Grid(1, 7, tt);
  in.travel_cost = Grid(1, 7, tc);
  in.free_time = {2, 2, 2, 2, 2, 6, 6};
  return in;
}

ModelParams base_params() { return ModelParams(1.0, 1.2, 30.0, 30.0, 15.0, ProductionSpec::linear(0.0, 0.5, 0.4)); }

ActivityPattern only_day(int day, double d)
{
  ActivityPattern p;
  p.delta.assign(7, 0);
  p.d.assign(7, 0.0);
  p.loc.assign(7, -1);
  p.delta[day] = 1;
  p.d[day] = d;
  p.loc[day] = 0;
  return p;
}

}  // namespace

TEST(Horizon, WeeksMarkDaysSixAndSeven)
{
  const Horizon h = Horizon::weeks(2);
  EXPECT_EQ(h.days(), 14);
  for (int t = 0; t < 14; ++t) EXPECT_EQ(h.is_weekend(t), t % 7 >= 5) << t;
  EXPECT_EQ(h.repeated(2), Horizon::weeks(4));
  EXPECT_THROW(Horizon(7, {8}), model_error);
  EXPECT_THROW(Horizon::weeks(0), model_error);
}

TEST(ModelParams, RejectsUnboundedSafetyStockRate)
{
  const auto prod = ProductionSpec::linear(0.0, 0.5, 0.4);
  EXPECT_THROW(ModelParams(1.0, 1.2, 30.0, 15.0, 15.0, prod), model_error);
  EXPECT_THROW(ModelParams(1.0, 1.2, 30.0, 10.0, 15.0, prod), model_error);
  EXPECT_NO_THROW(ModelParams(1.0, 1.2, 30.0, 15.0001, 15.0, prod));
  EXPECT_THROW(ModelParams(1.0, 0.0, 30.0, 30.0, 15.0, prod), model_error);
}

TEST(ProductionSpec, ValidatesSegments)
{
  EXPECT_THROW(ProductionSpec::piecewise(0, 0.4, {}, {}), model_error);
  EXPECT_THROW(ProductionSpec::piecewise(0, 0.4, {0.5, 0.6}, {1.0}), model_error);
  EXPECT_THROW(ProductionSpec::piecewise(0, 0.4, {0.6, 0.5}, {}), model_error);
  EXPECT_THROW(ProductionSpec::piecewise(0, 0.4, {0.6, 0.5, 0.4}, {1.0, 0.5}), model_error);
  EXPECT_EQ(ProductionSpec::piecewise(0, 0.4, {0.6}, {}).kind(), ProductionSpec::Kind::linear);
}

TEST(Production, LinearPiecewiseAndCobbDouglasValues)
{
  const double A = 100.0;
  EXPECT_NEAR(production(ProductionSpec::linear(0.0, 0.5, 0.4), 2.0, A, true), std::pow(100.0, 0.4) * 0.5 * 2.0, 1e-12);
  EXPECT_NEAR(production(ProductionSpec::linear(-0.2, 0.5, 0.4), 2.0, A, true),
              std::exp(-0.2) * std::pow(100.0, 0.4) * 1.0, 1e-12);
  // Segments [0, .5), [.5, 1), [1, inf) with slopes .8, .5, .2.
  const auto pw = ProductionSpec::piecewise(0.0, 0.0, {0.8, 0.5, 0.2}, {0.5, 1.0});
  EXPECT_NEAR(production_shape(pw, 0.25), 0.2, 1e-15);
  EXPECT_NEAR(production_shape(pw, 0.75), 0.4 + 0.125, 1e-15);
  EXPECT_NEAR(production_shape(pw, 1.5), 0.4 + 0.25 + 0.1, 1e-15);
  const auto cd = ProductionSpec::cobb_douglas(0.1, 0.5, 0.4);
  EXPECT_NEAR(production(cd, 2.25, A, true), std::exp(0.1) * 1.5 * std::pow(100.0, 0.4), 1e-12);
  EXPECT_EQ(production(cd, 0.0, A, true), 0.0);
  EXPECT_EQ(production(pw, 0.0, A, false), 0.0);
  EXPECT_THROW(production(pw, 1.0, A, false), std::domain_error);
  EXPECT_THROW(production(pw, -1.0, A, true), std::domain_error);
  EXPECT_THROW(production(pw, 1.0, 0.0, true), std::domain_error);
}

TEST(Production, HoursInvertProduction)
{
  const auto pw = ProductionSpec::piecewise(0.0, 0.4, {0.8, 0.5, 0.2}, {0.5, 1.0});
  const auto cd = ProductionSpec::cobb_douglas(0.0, 0.5, 0.4);
  for (double d : {0.1, 0.5, 0.7, 1.0, 2.5, 6.0}) {
    for (const auto& spec : {pw, cd}) {
      const double C = production_scale(spec, 80.0);
      EXPECT_NEAR(hours_for_production(spec, C, production(spec, d, 80.0, true)), d, 1e-12);
    }
  }
  EXPECT_EQ(hours_for_production(pw, 2.0, 0.0), 0.0);
}

TEST(Consumption, WeekendScaledByGamma)
{
  const auto lam = consumption_vector(Horizon::weeks(1), base_params());
  const std::vector<double> expect{1, 1, 1, 1, 1, 1.2, 1.2};
  for (int t = 0; t < 7; ++t) EXPECT_DOUBLE_EQ(lam[t], expect[t]);
}

TEST(Trajectory, HandComputedSingleVisit)
{
  // A Sunday visit producing the week's 7.4 units: inventory falls by one
  // unit per weekday and 1.2 on Saturday, reaching zero on Sunday morning.
  const double C = std::pow(100.0, 0.4);
  const double d = 7.4 / (0.5 * C);
  const auto p = only_day(6, d);
  const auto in = store_week();
  const auto tr = reconstruct_trajectory(p, in, base_params(), Horizon::weeks(1));
  const std::vector<double> I{6.2, 5.2, 4.2, 3.2, 2.2, 1.2, 0.0};
  for (int t = 0; t < 7; ++t) EXPECT_NEAR(tr.I[t], I[t], 1e-12) << t;
  EXPECT_NEAR(tr.Q[6], 7.4, 1e-12);
  const auto anchored = trajectory_from_anchor(tr.Q, consumption_vector(Horizon::weeks(1), base_params()), 6);
  for (int t = 0; t < 7; ++t) EXPECT_NEAR(anchored.I[t], I[t], 1e-12);

  // benefit = sum(I) + sum(Q) - sum(lambda)/2 = 22.2 + 7.4 - 3.7
  const double expected = 15.0 / 7 * 25.9 - (30.0 / 7 * (d + 1.0) + 0.0 + 10.0 / 7);
  EXPECT_NEAR(evaluate_objective(p, tr, in, base_params(), Horizon::weeks(1)), expected, 1e-12);
  EXPECT_TRUE(check_feasibility(p, in, base_params(), Horizon::weeks(1)).ok());
}

TEST(Objective, SafetyStockPenaltyAndShift)
{
  const double C = std::pow(100.0, 0.4);
  const auto p = only_day(6, 7.4 / (0.5 * C));
  const auto in = store_week();
  const auto params = base_params();
  auto tr = reconstruct_trajectory(p, in, params, Horizon::weeks(1));
  const double base = evaluate_objective(p, tr, in, params, Horizon::weeks(1));
  for (double& v : tr.I) v += 2.0;
  // Every I_t grows by 2 (benefit +2 rho3) and so does I_min (cost +2 rho2).
  EXPECT_NEAR(evaluate_objective(p, tr, in, params, Horizon::weeks(1)) - base, 2.0 * (15.0 - 30.0), 1e-12);
}

TEST(Feasibility, ReportsEachConstraintFamily)
{
  const auto in = store_week();
  const auto params = base_params();
  const Horizon h = Horizon::weeks(1);
  const double C = std::pow(100.0, 0.4);

  auto short_week = only_day(6, 1.0);  // produces less than the week consumes
  EXPECT_TRUE(check_feasibility(short_week, in, params, h).has(Violation::Kind::periodicity));

  auto too_long = only_day(0, 7.4 / (0.5 * C));  // 4.69 h on a 2 h weekday
  const auto rep = check_feasibility(too_long, in, params, h);
  EXPECT_EQ(rep.days_with(Violation::Kind::daily_time), std::vector<int>{0});

  auto ghost = only_day(6, 7.4 / (0.5 * C));
  ghost.d[2] = 0.5;  // duration without participation
  EXPECT_TRUE(check_feasibility(ghost, in, params, h).has(Violation::Kind::pattern));

  auto zero = only_day(6, 0.0);
  EXPECT_TRUE(check_feasibility(zero, in, params, h).has(Violation::Kind::pattern));
  EXPECT_FALSE(check_feasibility(zero, in, params, h, {1e-9, true}).has(Violation::Kind::pattern));

  auto bad_loc = only_day(6, 1.0);
  bad_loc.loc[6] = 3;
  EXPECT_TRUE(check_feasibility(bad_loc, in, params, h).has(Violation::Kind::location));
}

TEST(Feasibility, BalancedTwoVisitWeek)
{
  // Monday and Sunday visits that together produce exactly the week's 7.4.
  ScenarioInputs in = store_week();
  const auto params = base_params();
  const double C = std::pow(100.0, 0.4);
  ActivityPattern p = only_day(6, 7.0 / (0.5 * C));
  p.delta[0] = 1;
  p.loc[0] = 0;
  p.d[0] = 0.4 / (0.5 * C);
  EXPECT_TRUE(check_feasibility(p, in, params, Horizon::weeks(1)).ok());
}

TEST(Scenario, ValidateAndRepeat)
{
  ScenarioInputs in = store_week();
  EXPECT_NO_THROW(in.validate());
  const auto twice = in.repeated(2);
  EXPECT_EQ(twice.days(), 14);
  EXPECT_EQ(twice.attractiveness(0, 13), 100.0);
  in.attractiveness(0, 3) = 0.0;
  EXPECT_THROW(in.validate(), model_error);
  in = store_week();
  in.free_time.push_back(2.0);
  EXPECT_THROW(in.validate(), model_error);
}
