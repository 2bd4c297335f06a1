#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "needs/conditioned.hpp"
#include "needs/oracle.hpp"
#include "needs/solver.hpp"
#include "needs/verify.hpp"

using namespace needs;
using verify::grid_bound;
using verify::uniform_week;

namespace
{

ModelParams base_params(ProductionSpec prod = ProductionSpec::linear(0.0, 0.5, 0.4))
{
  return ModelParams(1.0, 1.2, 30.0, 30.0, 15.0, std::move(prod));
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void expect_invariants(const SolveResult& r, const Horizon& h, const ModelParams& params)
{
  const auto lam = consumption_vector(h, params);
  EXPECT_NEAR(r.trajectory.I_min, 0.0, 1e-9);
  EXPECT_NEAR(std::accumulate(r.trajectory.Q.begin(), r.trajectory.Q.end(), 0.0),
              std::accumulate(lam.begin(), lam.end(), 0.0), 1e-9);
}

/// Two locations with day-specific attractiveness, for day-specific rates.
ScenarioInputs two_stores(int H)
{
  ScenarioInputs in;
  in.locations = {"near", "far"};
  in.attractiveness = Grid(2, H);
  in.travel_time = Grid(2, H);
  in.travel_cost = Grid(2, H);
  for (int t = 0; t < H; ++t) {
    in.attractiveness(0, t) = 60.0 + 10.0 * (t % 3);
    in.attractiveness(1, t) = 140.0 - 15.0 * (t % 2);
    in.travel_time(0, t) = 0.4;
    in.travel_time(1, t) = 1.1;
    in.travel_cost(0, t) = 4.0;
    in.travel_cost(1, t) = 11.0;
    in.free_time.push_back(t % 7 >= 5 ? 6.0 : 2.0 + 0.25 * (t % 4));
  }
  return in;
}

}  // namespace

TEST(SolveConditioned, WeekendPatternMatchesBothOracles)
{
  const Horizon h = Horizon::weeks(1);
  const ConditionedProblem prob({0, 0, 0, 0, 0, 1, 1}, std::vector<int>(7, 0), uniform_week(), base_params(), h);
  const auto r = solve_conditioned(prob);
  const auto g = oracle_gradient(prob);
  const auto grid = oracle_grid(prob, 1e-2);
  ASSERT_TRUE(r && g && grid);
  EXPECT_LE(rel_gap(r->objective, g->objective), 1e-6);
  EXPECT_LE(grid->objective, r->objective + 1e-9);
  EXPECT_LE(r->objective - grid->objective, grid_bound(prob, 1e-2));
  EXPECT_NEAR(evaluate_objective(r->pattern, r->trajectory, prob.inputs, prob.params, h), r->objective, 1e-9);
  expect_invariants(*r, h, prob.params);
}

TEST(SolveFull, BaseWeekPicksOneSundayVisit)
{
  // The cheapest plan visits once, on the day with the most free time whose
  // inventory then covers the whole week: Sunday, producing 7.4 units.
  const Horizon h = Horizon::weeks(1);
  const auto r = solve_full(uniform_week(), base_params(), h);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->pattern.delta, (std::vector<int>{0, 0, 0, 0, 0, 0, 1}));
  const double d = 7.4 / (0.5 * std::pow(100.0, 0.4));
  EXPECT_NEAR(r->pattern.d[6], d, 1e-9);
  const double expected = 15.0 / 7 * (22.2 + 7.4 - 3.7) - (30.0 / 7 * (d + 1.0) + 10.0 / 7);
  EXPECT_NEAR(r->objective, expected, 1e-9);
  EXPECT_EQ(r->weeks, 1);
  EXPECT_EQ(r->anchor, 6);
}

TEST(SolveConditioned, ConditionBasedAgreesWithMarginalGreedyAndOracle)
{
  const Horizon h = Horizon::weeks(1);
  int feasible = 0;
  for (int i = 0; i < 120; ++i) {
    Stream rng(5, {static_cast<std::uint64_t>(i)});
    const ModelParams params = verify::random_sweep_params(rng);
    const auto delta = verify::random_delta(rng, 7, 1, 7);
    const ConditionedProblem prob(delta, std::vector<int>(7, 0), uniform_week(), params, h);
    const auto a = solve_conditioned(prob, ConditionedMethod::condition_based);
    const auto b = solve_conditioned(prob, ConditionedMethod::marginal_greedy);
    const auto o = oracle_gradient(prob);
    ASSERT_EQ(bool(a), bool(o)) << i;
    ASSERT_EQ(bool(b), bool(o)) << i;
    if (!a) continue;
    ++feasible;
    EXPECT_LE(rel_gap(a->objective, o->objective), 1e-6) << i;
    EXPECT_LE(rel_gap(b->objective, o->objective), 1e-6) << i;
    expect_invariants(*a, h, params);
  }
  EXPECT_GT(feasible, 60);
}

TEST(SolveConditioned, DaySpecificRatesMatchGradientOracle)
{
  const Horizon h = Horizon::weeks(1);
  const auto in = two_stores(7);
  const auto prod = ProductionSpec::piecewise(0.0, 0.4, {0.8, 0.5, 0.2}, {0.5, 1.0});
  int feasible = 0;
  for (int i = 0; i < 80; ++i) {
    Stream rng(6, {static_cast<std::uint64_t>(i)});
    const auto delta = verify::random_delta(rng, 7, 1, 7);
    std::vector<int> loc(7);
    for (int& l : loc) l = static_cast<int>(rng.index(2));
    const ModelParams params(1.0, rng.uniform(0.6, 1.4), 30.0, 30.0, 15.0, prod.with_q0(rng.uniform(-0.4, 0.4)));
    const ConditionedProblem prob(delta, loc, in, params, h);
    const auto r = solve_conditioned(prob);
    const auto o = oracle_gradient(prob);
    ASSERT_EQ(bool(r), bool(o)) << i;
    if (!r) continue;
    ++feasible;
    EXPECT_LE(rel_gap(r->objective, o->objective), 1e-6) << i;
    EXPECT_TRUE(check_feasibility(r->pattern, in, params, h, {1e-9, true}).ok()) << i;
    expect_invariants(*r, h, params);
  }
  EXPECT_GT(feasible, 40);
  EXPECT_THROW(solve_conditioned(ConditionedProblem({1, 1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0, 0}, in,
                                                    base_params(prod), h),
                                 ConditionedMethod::condition_based),
               std::invalid_argument);
}

TEST(SolveConditioned, EmptyPatternHasNoSolution)
{
  const ConditionedProblem prob(std::vector<int>(7, 0), std::vector<int>(7, 0), uniform_week(), base_params(),
                                Horizon::weeks(1));
  EXPECT_FALSE(solve_conditioned(prob));
  EXPECT_FALSE(oracle_gradient(prob));
}

TEST(SolveConditioned, InsufficientTimeIsInfeasible)
{
  // One weekday visit cannot produce 7.4 units in 2 - 1 = 1 hour at rate 3.15.
  const ConditionedProblem prob({1, 0, 0, 0, 0, 0, 0}, std::vector<int>(7, 0), uniform_week(), base_params(),
                                Horizon::weeks(1));
  EXPECT_FALSE(solve_conditioned(prob));
  EXPECT_FALSE(oracle_grid(prob, 1e-2));
}

TEST(SolveConditioned, TravelBeyondFreeTimeIsInfeasible)
{
  // Weekend visits alone would be feasible; Monday's trip takes longer than
  // Monday's free time, so no duration makes the pattern feasible.
  ScenarioInputs in = uniform_week();
  in.travel_time(0, 0) = in.free_time[0] + 0.5;
  const std::vector<int> weekend{0, 0, 0, 0, 0, 1, 1}, with_monday{1, 0, 0, 0, 0, 1, 1};
  const std::vector<int> loc(7, 0);
  const ConditionedProblem ok(weekend, loc, in, base_params(), Horizon::weeks(1));
  const ConditionedProblem bad(with_monday, loc, in, base_params(), Horizon::weeks(1));
  ASSERT_TRUE(solve_conditioned(ok));
  EXPECT_FALSE(solve_conditioned(bad));
  EXPECT_FALSE(solve_conditioned(bad, ConditionedMethod::marginal_greedy));
  EXPECT_FALSE(oracle_gradient(bad));
  EXPECT_FALSE(oracle_grid(bad, 1e-2));
  // Travel exactly equal to free time leaves a zero-hour day, which is allowed.
  in.travel_time(0, 0) = in.free_time[0];
  const ConditionedProblem edge(with_monday, loc, in, base_params(), Horizon::weeks(1));
  const auto r = solve_conditioned(edge);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->pattern.d[0], 0.0);
}

TEST(SolveConditioned, CobbDouglasIsAKktPoint)
{
  const Horizon h = Horizon::weeks(1);
  const ConditionedProblem prob({0, 0, 1, 0, 0, 1, 1}, std::vector<int>(7, 0), uniform_week(),
                                base_params(ProductionSpec::cobb_douglas(0.0, 0.5, 0.4)), h);
  GradientDiagnostics diag;
  const auto g = oracle_gradient(prob, &diag);
  ASSERT_TRUE(g);
  EXPECT_LT(diag.kkt_residual, 1e-6);
  const auto r = solve_conditioned(prob);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->objective, g->objective, 1e-9);
  const auto grid = oracle_grid(prob, 1e-2);
  ASSERT_TRUE(grid);
  EXPECT_LE(grid->objective, g->objective + 1e-6);
}

TEST(SolveFull, MatchesBruteForceOnTinyHorizons)
{
  const Horizon h(4, {4});
  const auto in = two_stores(4);
  const auto prod = ProductionSpec::linear(0.0, 0.5, 0.4);
  for (double gamma : {0.8, 1.2}) {
    for (double q0 : {-0.3, 0.0, 0.3}) {
      const ModelParams params(1.0, gamma, 30.0, 30.0, 15.0, prod.with_q0(q0));
      const auto r = solve_full(in, params, h);
      const auto o = oracle_full_tiny(in, params, h, LocationPolicy::single(), 1e-2);
      ASSERT_EQ(bool(r), bool(o));
      if (!r) continue;
      const ConditionedProblem prob(r->pattern.delta, r->pattern.loc, in, params, h);
      EXPECT_LE(o->objective, r->objective + 1e-9);
      EXPECT_LE(r->objective - o->objective, grid_bound(prob, 1e-2)) << gamma << ' ' << q0;
    }
  }
}

TEST(SolveFull, BranchAndBoundMatchesEnumeration)
{
  const Horizon h = Horizon::weeks(2);
  const auto in = two_stores(14);
  const auto prod = ProductionSpec::piecewise(0.0, 0.4, {0.8, 0.5, 0.2}, {0.5, 1.0});
  for (double q0 : {-0.2, 0.2}) {
    const ModelParams params(1.0, 1.2, 25.0, 36.0, 18.0, prod.with_q0(q0));
    FullSolveOptions all;
    all.exhaustive_max_days = 14;
    FullSolveOptions bb;
    bb.exhaustive_max_days = 7;
    const auto a = solve_full(in, params, h, LocationPolicy::single(), all);
    const auto b = solve_full(in, params, h, LocationPolicy::single(), bb);
    ASSERT_TRUE(a && b);
    EXPECT_NEAR(a->objective, b->objective, 1e-9 * std::max(1.0, std::abs(a->objective)));
  }
}

TEST(SolveFull, ThreadCountDoesNotChangeTheAnswer)
{
  const Horizon h = Horizon::weeks(1);
  const auto in = two_stores(7);
  FullSolveOptions one, many;
  many.threads = 4;
  const auto a = solve_full(in, base_params(), h, LocationPolicy::single(), one);
  const auto b = solve_full(in, base_params(), h, LocationPolicy::single(), many);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->pattern, b->pattern);
  EXPECT_EQ(a->objective, b->objective);
}

TEST(SolveMultiweek, PositiveWeekStaysAtOneWeek)
{
  const auto r = solve_multiweek(uniform_week(), base_params(), Horizon::weeks(1));
  EXPECT_EQ(r.weeks, 1);
  EXPECT_GE(r.objective, 0.0);
}

TEST(SolveMultiweek, ExpensiveTripsStretchTheHorizon)
{
  // A 400-unit round trip makes every weekly plan negative; a visit every
  // second Sunday halves the trip cost per day.
  const auto in = uniform_week(100.0, 0.5, 200.0);
  const auto params = base_params();
  const auto week = solve_full(in, params, Horizon::weeks(1));
  ASSERT_TRUE(week);
  EXPECT_LT(week->objective, 0.0);
  const auto r = solve_multiweek(in, params, Horizon::weeks(1));
  EXPECT_GT(r.weeks, 1);
  EXPECT_GE(r.objective, 0.0);
  EXPECT_EQ(r.pattern.days(), 7 * r.weeks);
  MultiweekOptions capped;
  capped.max_weeks = 1;
  EXPECT_THROW(solve_multiweek(in, params, Horizon::weeks(1), capped), infeasible_error);
}

TEST(Slopes, MatchFiniteDifferences)
{
  const auto rep = verify::slope_suite(10, 9);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Slopes, AnchorWeights)
{
  // With the anchor on day 3 of 5, the order is 3, 4, 0, 1, 2.
  EXPECT_EQ(anchor_weight(3, 3, 5), 4);
  EXPECT_EQ(anchor_weight(4, 3, 5), 3);
  EXPECT_EQ(anchor_weight(0, 3, 5), 2);
  EXPECT_EQ(anchor_weight(2, 3, 5), 0);
  const auto s = slopes(0, 2.0, 0.5, base_params(), Horizon::weeks(1));
  EXPECT_NEAR(s[0], (6 * 2.0 * 0.5 * 15.0 - 30.0) / 7, 1e-12);
  EXPECT_NEAR(s[6], -30.0 / 7, 1e-12);
}
