#ifndef NEEDS_POPULATION_HPP_
#define NEEDS_POPULATION_HPP_

#include <string>
#include <vector>

#include "types.hpp"

namespace needs
{

/// Zone attributes shared by every individual. Travel matrices are one-way,
/// origin x destination.
struct ZoneSystem
{
  std::vector<std::string> names;
  std::vector<double> attractiveness;
  Grid travel_time;  // hours
  Grid travel_cost;  // money
  std::vector<std::string> size_measure_names;
  Grid size_measures;  // zone x measure
  // The model charges home->zone plus zone->home. When false, the matrix
  // entry home->zone is taken as the whole trip.
  bool round_trip = true;

  std::size_t size() const { return names.size(); }

  void validate() const
  {
    const std::size_t n = names.size();
    if (n == 0) throw model_error("zone system needs at least one zone");
    if (attractiveness.size() != n) throw model_error("one attractiveness value per zone is required");
    for (double a : attractiveness)
      if (!(a > 0.0)) throw model_error("attractiveness must be positive");
    if (travel_time.rows() != n || travel_time.cols() != n) throw model_error("travel_time must be zones x zones");
    if (travel_cost.rows() != n || travel_cost.cols() != n) throw model_error("travel_cost must be zones x zones");
    for (double v : travel_time.data())
      if (!(v >= 0.0)) throw model_error("travel_time must be non-negative");
    for (double v : travel_cost.data())
      if (!(v >= 0.0)) throw model_error("travel_cost must be non-negative");
    if (size_measures.rows() != 0 || size_measures.cols() != 0) {
      if (size_measures.rows() != n || size_measures.cols() != size_measure_names.size())
        throw model_error("size_measures must be zones x measure names");
    }
  }

  bool operator==(const ZoneSystem&) const = default;
};

/// Independent variables of one individual.
struct Person
{
  int id = 0;
  double ft_weekday = 0.0;  // hours
  double ft_weekend = 0.0;  // hours
  int home = 0;

  bool operator==(const Person&) const = default;
};

/// One observed week. `loc` is -1 on days without participation.
struct Observation
{
  Person person;
  std::vector<int> delta;
  std::vector<double> d;
  std::vector<int> loc;

  int participations() const
  {
    int n = 0;
    for (int x : delta) n += x;
    return n;
  }

  bool operator==(const Observation&) const = default;
};

/// Scenario faced by a person over `h`: two-way travel from home, free time
/// by weekday/weekend.
inline ScenarioInputs person_inputs(const Person& p, const ZoneSystem& zones, const Horizon& h)
{
  const std::size_t L = zones.size();
  const auto H = static_cast<std::size_t>(h.days());
  if (p.home < 0 || static_cast<std::size_t>(p.home) >= L) throw model_error("home zone out of range");
  const auto home = static_cast<std::size_t>(p.home);
  ScenarioInputs in;
  in.locations = zones.names;
  in.attractiveness = Grid(L, H);
  in.travel_time = Grid(L, H);
  in.travel_cost = Grid(L, H);
  for (std::size_t j = 0; j < L; ++j)
    for (std::size_t t = 0; t < H; ++t) {
      in.attractiveness(j, t) = zones.attractiveness[j];
      in.travel_time(j, t) = zones.travel_time(home, j) + (zones.round_trip ? zones.travel_time(j, home) : 0.0);
      in.travel_cost(j, t) = zones.travel_cost(home, j) + (zones.round_trip ? zones.travel_cost(j, home) : 0.0);
    }
  in.free_time.resize(H);
  for (std::size_t t = 0; t < H; ++t)
    in.free_time[t] = h.is_weekend(static_cast<int>(t)) ? p.ft_weekend : p.ft_weekday;
  in.size_measure_names = zones.size_measure_names;
  in.size_measures = zones.size_measures;
  return in;
}

}  // namespace needs

#endif
