#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "config.hpp"

using namespace needs;
using namespace needs::cli;
namespace fs = std::filesystem;

namespace
{

Config from_text(const std::string& text)
{
  const fs::path p = fs::temp_directory_path() / "needs_config_test.toml";
  std::ofstream(p) << text;
  return load_config(p);
}

}  // namespace

TEST(Config, BaseSample)
{
  const Config c = load_config(fs::path(NEEDS_SAMPLES_DIR) / "base.toml");
  const ModelParams p = model_from_config(c);
  EXPECT_EQ(p, ModelParams(1.0, 1.2, 30.0, 30.0, 15.0, ProductionSpec::linear(0.0, 0.5, 0.4)));
  const ScenarioInputs s = scenario_from_config(c);
  EXPECT_EQ(s.free_time, (std::vector<double>{2, 2, 2, 2, 2, 6, 6}));
  EXPECT_EQ(s.travel_time, Grid(1, 7, 1.0));
  EXPECT_EQ(s.travel_cost, Grid(1, 7, 10.0));
}

TEST(Config, MatrixForms)
{
  const Config c = load_config(fs::path(NEEDS_SAMPLES_DIR) / "two_locations.toml");
  const ScenarioInputs s = scenario_from_config(c);
  EXPECT_EQ(s.attractiveness(0, 3), 80.0);
  EXPECT_EQ(s.attractiveness(1, 5), 150.0);
  EXPECT_EQ(s.travel_time(1, 0), 1.2);
  EXPECT_EQ(model_from_config(c).production().segments(), 3u);
  EXPECT_EQ(model_from_config(c).rho2(), 30.0);  // defaults to twice rho3
}

TEST(Config, RejectsUnknownOrMalformedEntries)
{
  EXPECT_THROW(from_text("[modle]\ngamma = 1\n"), config_error);
  EXPECT_THROW(from_text("[model\n"), config_error);
  const Config typo = from_text("[model]\ngama = 1.2\n");
  EXPECT_THROW(model_from_config(typo), config_error);
  const Config missing = from_text("[model]\ngamma = 1.2\nrho1 = 30.0\n");
  EXPECT_THROW(model_from_config(missing), config_error);
  const Config bad_type = from_text("[model]\ngamma = \"x\"\nrho1 = 30.0\nrho3 = 15.0\n");
  EXPECT_THROW(model_from_config(bad_type), config_error);
  const Config rows = from_text("[scenario]\nlocations = [\"a\"]\nfree_time = [1.0, 2.0]\n"
                                "attractiveness = [[1.0]]\ntravel_time = 0.1\ntravel_cost = 1.0\n");
  EXPECT_THROW(scenario_from_config(rows), config_error);
}

TEST(Config, PopulationOverrides)
{
  const Config c = from_text("[population]\np1 = 0.7\nmu_q0 = -0.2\nbeta = [0.4, 0.9]\nzero_duration = \"keep\"\n");
  const PopulationParams p = population_from_config(c, grocery_population());
  EXPECT_EQ(get_parameter(p, "p1"), 0.7);
  EXPECT_EQ(p.mu_D[2], -0.2);
  EXPECT_EQ(p.xi.beta, (std::vector<double>{0.4, 0.9}));
  EXPECT_EQ(p.xi.zero_duration, ZeroDurationPolicy::keep);
  EXPECT_THROW(population_from_config(from_text("[population]\nzero_duration = \"drop\"\n"), grocery_population()),
               config_error);
}
