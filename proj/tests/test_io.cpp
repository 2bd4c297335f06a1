#include <filesystem>

#include <gtest/gtest.h>

#include "needs/io.hpp"

using namespace needs;
namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("needs_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ScenarioInputs two_location_scenario()
{
  ScenarioInputs s;
  s.locations = {"a", "b"};
  s.attractiveness = Grid(2, 7, 1.0 / 3.0);
  s.travel_time = Grid(2, 7, 0.1);
  s.travel_cost = Grid(2, 7, 2.5);
  s.attractiveness(1, 6) = 123.456789012345;
  s.free_time = {2, 2, 2, 2, 2.5, 6, 6.125};
  s.size_measure_names = {"retail"};
  s.size_measures = Grid(2, 1, 70.0);
  return s;
}

}  // namespace

TEST(Text, DoublesRoundTripExactly)
{
  Stream rng(1, {2});
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(parse_double("-inf"), -INFINITY);
  EXPECT_THROW(parse_double("1.5x"), io_error);
  EXPECT_THROW(parse_int("7.0"), io_error);
}

TEST(Json, ScenarioRoundTrip)
{
  const auto s = two_location_scenario();
  EXPECT_EQ(scenario_from_json(json::parse(scenario_to_json(s).dump())), s);
  json bad = scenario_to_json(s);
  bad["free_time"].push_back(1.0);
  EXPECT_THROW(scenario_from_json(bad), model_error);
}

TEST(Csv, ScenarioDirectoryRoundTrip)
{
  const auto dir = scratch_dir("scenario");
  const auto s = two_location_scenario();
  write_scenario_csv(dir, s);
  EXPECT_EQ(read_scenario_csv(dir), s);
}

TEST(Json, ParamsAndProductionRoundTrip)
{
  for (const auto& prod : {ProductionSpec::linear(0.1, 0.5, 0.4), ProductionSpec::cobb_douglas(0.0, 0.5, 0.4),
                           ProductionSpec::piecewise(-0.2, 0.3, {0.9, 0.4, 0.1}, {0.5, 2.0})}) {
    const ModelParams p(1.0, 1.2, 30.0, 31.0, 15.0, prod);
    EXPECT_EQ(params_from_json(json::parse(params_to_json(p).dump())), p);
  }
  EXPECT_THROW(production_from_json({{"type", "quadratic"}, {"q2", 0.4}}), io_error);
}

TEST(Json, PatternByNameOrIndex)
{
  const std::vector<std::string> locs{"a", "b"};
  const auto p = pattern_from_json(json::parse(R"({"delta":[0,1,0,0,0,0,1],"loc":[null,"b",null,null,null,null,0]})"),
                                   locs);
  EXPECT_EQ(p.loc, (std::vector<int>{-1, 1, -1, -1, -1, -1, 0}));
  EXPECT_EQ(p.d, std::vector<double>(7, 0.0));
  EXPECT_THROW(pattern_from_json(json::parse(R"({"delta":[0,1],"loc":[null,"c"]})"), locs), io_error);
  EXPECT_THROW(pattern_from_json(json::parse(R"({"delta":[0,2]})"), locs), io_error);
  ActivityPattern q{{1, 0}, {1.5, 0.0}, {1, -1}};
  EXPECT_EQ(pattern_from_json(pattern_to_json(q, locs), locs), q);
}

TEST(Json, ZonesRoundTrip)
{
  ZoneSystem z;
  z.names = {"z1", "z2"};
  z.attractiveness = {10.0, 20.5};
  z.travel_time = Grid(2, 2, 0.3);
  z.travel_cost = Grid(2, 2, 4.0);
  z.size_measure_names = {"retail", "area"};
  z.size_measures = Grid(2, 2, 1.5);
  z.round_trip = false;
  EXPECT_EQ(zones_from_json(json::parse(zones_to_json(z).dump())), z);
}

TEST(Csv, ObservationsRoundTrip)
{
  std::vector<Observation> obs;
  obs.push_back({{1, 2.25, 5.125, 3}, {0, 1, 0, 0, 0, 0, 1}, {0, 0.7123456789, 0, 0, 0, 0, 1.1}, {-1, 2, -1, -1, -1, -1, 2}});
  obs.push_back({{4, 1.0, 6.0, 0}, {1, 0, 0, 0, 0, 0, 0}, {2.0, 0, 0, 0, 0, 0, 0}, {0, -1, -1, -1, -1, -1, -1}});
  const std::string text = observations_to_csv(obs);
  EXPECT_EQ(text.substr(0, text.find('\n')), "person,ft_weekday,ft_weekend,home,day,delta,d,loc");
  EXPECT_EQ(observations_from_csv(text), obs);
  EXPECT_THROW(observations_from_csv("person,a,b,c,d,e,f,g\n1,2,3,1,1,1,0,1\n"), io_error);
  EXPECT_THROW(observations_from_csv("person,a,b,c,d,e,f,g\n1,2,3,1,9,0,0,0\n"), io_error);
}

TEST(Csv, SurfaceIsAMatrix)
{
  Surface s{{"p1", {0.6, 0.7}}, {"q2", {0.3, 0.4, 0.5}}, Grid(2, 3, -1.5), 0, 0};
  s.loglik(1, 2) = -INFINITY;
  EXPECT_EQ(surface_to_csv(s), "p1\\q2,0.3,0.4,0.5\n0.6,-1.5,-1.5,-1.5\n0.7,-1.5,-1.5,-inf\n");
  const json j = surface_to_json(s);
  EXPECT_TRUE(j["loglik"][1][2].is_null());
}
