#include <cmath>

#include <gtest/gtest.h>

#include "needs/estimate.hpp"
#include "needs/nelder_mead.hpp"
#include "needs/synth.hpp"

using namespace needs;

namespace
{

struct SmallSample
{
  ZoneSystem zones;
  std::vector<Observation> data;
};

const SmallSample& small_sample()
{
  static const SmallSample s = [] {
    SmallSample out;
    out.zones = generate_zones(4, 21);
    const auto people = generate_population(40, out.zones, 21);
    out.data = simulate_patterns(people, out.zones, grocery_population(), 21).observations;
    return out;
  }();
  return s;
}

LoglikOptions small_options()
{
  LoglikOptions opt;
  opt.draws = 60;
  opt.seed = 3;
  opt.choice_set_size = 32;
  return opt;
}

}  // namespace

TEST(NelderMead, MinimizesRosenbrock)
{
  NelderMeadOptions o;
  o.max_iterations = 5000;
  const auto r = NelderMead(o).minimize(
      [](const std::vector<double>& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); },
      {-1.2, 1.0}, {0.5, 0.5});
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(static_cast<int>(r.trace.size()), o.max_iterations);
}

TEST(NelderMead, IterationBudgetCapsTheTrace)
{
  NelderMeadOptions o;
  o.max_iterations = 7;
  const auto r = NelderMead(o).minimize([](const std::vector<double>& x) { return x[0] * x[0] + 3 * x[1] * x[1]; },
                                        {4.0, -2.0}, {1.0, 1.0});
  EXPECT_EQ(r.iterations, 7);
  EXPECT_EQ(r.trace.size(), 7u);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].best_f, r.trace[i - 1].best_f);
}

TEST(Parameters, TransformsRoundTrip)
{
  for (double v : {0.01, 0.3, 0.99}) EXPECT_NEAR(from_internal(to_internal(v, Transform::logistic), Transform::logistic), v, 1e-14);
  for (double v : {1e-3, 2.0, 50.0}) EXPECT_NEAR(from_internal(to_internal(v, Transform::log), Transform::log), v, 1e-12);
  EXPECT_EQ(parameter_transform("q2"), Transform::logistic);
  EXPECT_EQ(parameter_transform("mu_q0"), Transform::identity);
  EXPECT_EQ(parameter_transform("p1"), Transform::log);
  EXPECT_EQ(parameter_transform("omega_rho1"), Transform::log);
}

TEST(Parameters, GetAndSetByName)
{
  PopulationParams pop = grocery_population();
  EXPECT_EQ(get_parameter(pop, "p1"), 0.8);
  EXPECT_EQ(get_parameter(pop, "q2"), 0.5);
  EXPECT_EQ(get_parameter(pop, "beta2"), 1.0);
  EXPECT_EQ(get_parameter(pop, "mu_q0"), -0.5);
  EXPECT_EQ(get_parameter(pop, "omega_kappa"), 0.25);
  set_parameter(pop, "p1", 0.6);
  set_parameter(pop, "mu_rho1", 2.5);
  EXPECT_EQ(get_parameter(pop, "p1"), 0.6);
  EXPECT_EQ(pop.mu_D[0], 2.5);
  EXPECT_THROW(get_parameter(pop, "q1"), model_error);
  EXPECT_THROW(get_parameter(pop, "beta3"), model_error);
  EXPECT_THROW(set_parameter(pop, "zeta", 1.0), model_error);

  // p1 scales every piecewise slope.
  pop.xi.production = ProductionSpec::piecewise(0.0, 0.5, {0.8, 0.4}, {1.0});
  set_parameter(pop, "p1", 1.2);
  EXPECT_NEAR(pop.xi.production.slopes()[1], 0.6, 1e-15);

  const ParameterVector pv(grocery_population(), {"p1", "q2", "mu_q0"});
  const auto x = pv.internal(grocery_population());
  EXPECT_NEAR(x[0], std::log(0.8), 1e-15);
  EXPECT_NEAR(x[1], 0.0, 1e-15);
  EXPECT_EQ(x[2], -0.5);
  EXPECT_EQ(pv.natural(pv.params(x)), (std::vector<double>{get_parameter(grocery_population(), "p1"), 0.5, -0.5}));
}

TEST(Linspace, EndpointsAndShortDecimals)
{
  const auto v = linspace(0.3, 0.7, 9);
  ASSERT_EQ(v.size(), 9u);
  EXPECT_EQ(v[0], 0.3);
  EXPECT_EQ(v[2], 0.4);
  EXPECT_EQ(v[8], 0.7);
  EXPECT_EQ(linspace(2.0, 5.0, 1), std::vector<double>{2.0});
  EXPECT_THROW(linspace(0.0, 1.0, 0), model_error);
}

TEST(Maximize, ZeroBudgetReturnsTheStart)
{
  const auto& s = small_sample();
  EstimateOptions opt;
  opt.loglik = small_options();
  opt.budget = 0;
  const auto r = maximize(s.zones, s.data, grocery_population(), {"p1", "q2"}, opt);
  EXPECT_EQ(r.estimates, (std::vector<double>{0.8, 0.5}));
  EXPECT_EQ(r.loglik, simulated_loglik(s.zones, s.data, grocery_population(), opt.loglik).total);
  EXPECT_TRUE(r.trace.empty());
}

TEST(Maximize, ImprovesTheLikelihoodWithinBudget)
{
  const auto& s = small_sample();
  PopulationParams init = grocery_population();
  set_parameter(init, "q2", 0.45);
  EstimateOptions opt;
  opt.loglik = small_options();
  opt.budget = 8;
  const auto r = maximize(s.zones, s.data, init, {"p1", "q2"}, opt);
  const double start = simulated_loglik(s.zones, s.data, init, opt.loglik).total;
  ASSERT_TRUE(std::isfinite(start));
  EXPECT_GE(r.loglik, start);
  EXPECT_LE(static_cast<int>(r.trace.size()), 8);
  // The reported optimum is the likelihood at the reported parameters.
  EXPECT_EQ(r.loglik, simulated_loglik(s.zones, s.data, r.params, opt.loglik).total);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i].loglik, r.trace[i - 1].loglik);
}

TEST(Surface, CellsEqualDirectEvaluationAndArgmaxIsTheBest)
{
  const auto& s = small_sample();
  const auto opt = small_options();
  const auto surf = loglik_surface(s.zones, s.data, grocery_population(), {"p1", {0.7, 0.8}}, {"q2", {0.45, 0.5, 0.55}}, opt);
  double best = -INFINITY;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      PopulationParams pop = grocery_population();
      set_parameter(pop, "p1", surf.axis1.values[i]);
      set_parameter(pop, "q2", surf.axis2.values[j]);
      const double ll = simulated_loglik(s.zones, s.data, pop, opt).total;
      EXPECT_EQ(surf.loglik(i, j), ll);
      if (ll > best) {
        best = ll;
        bi = i;
        bj = j;
      }
    }
  EXPECT_EQ(surf.argmax1, bi);
  EXPECT_EQ(surf.argmax2, bj);
  EXPECT_THROW(loglik_surface(s.zones, s.data, grocery_population(), {"p1", {0.8}}, {"p1", {0.8}}, opt), model_error);
}
