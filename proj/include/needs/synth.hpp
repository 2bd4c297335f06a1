#ifndef NEEDS_SYNTH_HPP_
#define NEEDS_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "empirical.hpp"
#include "parallel.hpp"
#include "population.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace needs
{

/// Zones with uniform retail employment and area, attractiveness equal to
/// retail density, and travel times built in three steps: uniform draws,
/// symmetrization from the upper triangle, elementwise perturbation. When
/// `symmetric_stage` is given it receives the matrix after step two.
inline ZoneSystem generate_zones(std::size_t n_zones, std::uint64_t seed, Grid* symmetric_stage = nullptr)
{
  if (n_zones == 0) throw model_error("at least one zone is required");
  Stream rng(seed, {0x7a6f6e6573ULL});
  ZoneSystem z;
  z.size_measure_names = {"retail", "area"};
  z.size_measures = Grid(n_zones, 2);
  for (std::size_t j = 0; j < n_zones; ++j) {
    z.names.push_back("z" + std::to_string(j + 1));
    const double retail = rng.uniform(50.0, 100.0);
    const double area = rng.uniform(0.1, 2.0);
    z.size_measures(j, 0) = retail;
    z.size_measures(j, 1) = area;
    z.attractiveness.push_back(retail / area);
  }
  Grid tt(n_zones, n_zones);
  for (std::size_t i = 0; i < n_zones; ++i)
    for (std::size_t j = 0; j < n_zones; ++j) tt(i, j) = rng.uniform(5.0 / 60.0, 1.0);
  for (std::size_t i = 0; i < n_zones; ++i)
    for (std::size_t j = i + 1; j < n_zones; ++j) tt(j, i) = tt(i, j);
  if (symmetric_stage) *symmetric_stage = tt;
  for (std::size_t i = 0; i < n_zones; ++i)
    for (std::size_t j = 0; j < n_zones; ++j) tt(i, j) *= rng.uniform(0.9, 1.1);
  Grid tc(n_zones, n_zones);
  for (std::size_t i = 0; i < n_zones; ++i)
    for (std::size_t j = 0; j < n_zones; ++j) tc(i, j) = tt(i, j) * rng.uniform(0.9, 1.1) * 12.8;
  z.travel_time = tt;
  z.travel_cost = tc;
  return z;
}

/// Free time on logistic transforms of normal draws; uniform home zone.
inline std::vector<Person> generate_population(std::size_t n_persons, const ZoneSystem& zones, std::uint64_t seed)
{
  zones.validate();
  std::vector<Person> out(n_persons);
  for (std::size_t n = 0; n < n_persons; ++n) {
    Stream rng(seed, {0x706572736f6eULL, static_cast<std::uint64_t>(n)});
    Person& p = out[n];
    p.id = static_cast<int>(n + 1);
    p.ft_weekday = 8.0 / (1.0 + std::exp(rng.normal(1.0, 0.5)));
    p.ft_weekend = 16.0 / (1.0 + std::exp(rng.normal(0.8, 0.4)));
    p.home = static_cast<int>(rng.index(zones.size()));
  }
  return out;
}

struct SynthResult
{
  std::vector<Observation> observations;
  std::vector<int> excluded;  // person ids without any available alternative
};

/// Draws each person's random coefficients and nest errors, adds Gumbel noise
/// of scale 1/mu to every alternative and keeps the best. Observed durations
/// are the chosen alternative's optimum for a uniformly drawn week of its
/// horizon, times lognormal measurement error.
inline SynthResult simulate_patterns(const std::vector<Person>& persons, const ZoneSystem& zones,
                                     const PopulationParams& pop, std::uint64_t seed, unsigned threads = 1,
                                     bool single_location = true)
{
  pop.validate();
  zones.validate();
  const Horizon week = Horizon::weeks(1);
  const AlternativeUniverse u = build_universe(zones.size(), week.days(), single_location);
  const auto log_size = log_size_terms(u, zones, pop.xi);
  std::vector<std::optional<Observation>> slots(persons.size());
  parallel_for(persons.size(), threads, [&](std::size_t n) {
    const Person& person = persons[n];
    Stream rng(seed, {0x73796e7468ULL, static_cast<std::uint64_t>(person.id)});
    RandomParams zeta;
    zeta.r_rho1 = pop.mu_D[0] + std::sqrt(pop.omega_diag[0]) * rng.normal();
    zeta.r_kappa = pop.mu_D[1] + std::sqrt(pop.omega_diag[1]) * rng.normal();
    zeta.q0 = pop.mu_D[2] + std::sqrt(pop.omega_diag[2]) * rng.normal();
    std::vector<double> eta(u.n_nests);
    for (double& e : eta) e = pop.xi.sigma_nest * rng.normal();
    std::vector<double> noise(u.alternatives.size());
    for (double& g : noise) g = rng.gumbel() / pop.xi.mu;
    const double week_pick = rng.uniform();
    std::vector<double> nu(week.days());
    for (double& v : nu) v = pop.xi.sigma_dur * rng.normal();

    AlternativeEvaluator ev(person_inputs(person, zones, week), week);
    try {
      const Behavior b = transform_random(zeta, person.ft_weekday, person.ft_weekend);
      ev.set_params(behavior_params(b, pop.xi), pop.xi.max_weeks, pop.xi.zero_duration);
    } catch (const model_error&) {
      return;
    }
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    AlternativeSolution sol;
    for (std::size_t i = 0; i < u.alternatives.size(); ++i) {
      ev.evaluate(u.alternatives[i], sol, false);
      if (!sol.available) continue;
      const double util = sol.v_tilde + log_size[i] + eta[u.alternatives[i].nest] + noise[i];
      if (util > best) {
        best = util;
        best_idx = i;
      }
    }
    if (best == -std::numeric_limits<double>::infinity()) return;
    const Alternative& a = u.alternatives[best_idx];
    ev.evaluate(a, sol, true);
    const int k = std::min(sol.weeks - 1, static_cast<int>(week_pick * sol.weeks));
    Observation obs;
    obs.person = person;
    obs.delta.assign(week.days(), 0);
    obs.d.assign(week.days(), 0.0);
    obs.loc.assign(week.days(), -1);
    for (int t = 0; t < week.days(); ++t) {
      if (!a.active(t)) continue;
      obs.delta[t] = 1;
      obs.loc[t] = a.loc[t];
      obs.d[t] = sol.d_star[k * week.days() + t] * std::exp(nu[t]);
    }
    slots[n] = std::move(obs);
  });
  SynthResult res;
  for (std::size_t n = 0; n < slots.size(); ++n) {
    if (slots[n])
      res.observations.push_back(std::move(*slots[n]));
    else
      res.excluded.push_back(persons[n].id);
  }
  return res;
}

/// Table-style defaults of the grocery experiment.
inline PopulationParams grocery_population()
{
  return PopulationParams{};
}

struct Preset
{
  ZoneSystem zones;
  PopulationParams pop;
};

/// One online location with no travel, no size measures.
inline Preset ecommerce_preset()
{
  Preset p;
  p.zones.names = {"online"};
  p.zones.attractiveness = {100.0};
  p.zones.travel_time = Grid(1, 1, 0.0);
  p.zones.travel_cost = Grid(1, 1, 0.0);
  p.pop.xi.gamma = 1.4;
  p.pop.xi.mu = 0.1;
  p.pop.xi.use_size_measures = false;
  p.pop.xi.beta.clear();
  return p;
}

/// Data series of a synthesized sample.
struct SynthSummary
{
  std::size_t persons = 0;
  std::size_t excluded = 0;
  double mean_weekly_participation = 0.0;
  double mean_one_way_travel_minutes = 0.0;  // over participation days
  double mean_duration_weekday = 0.0;
  double mean_duration_weekend = 0.0;
  std::vector<int> participation_by_day;       // 7 entries
  std::vector<int> participations_per_week;    // histogram, index = count
  std::vector<double> durations;               // every observed duration
  std::vector<double> one_way_travel_minutes;  // every participation day
};

inline SynthSummary summarize(const SynthResult& r, const ZoneSystem& zones)
{
  SynthSummary s;
  s.persons = r.observations.size();
  s.excluded = r.excluded.size();
  s.participation_by_day.assign(7, 0);
  s.participations_per_week.assign(8, 0);
  const Horizon week = Horizon::weeks(1);
  double total_part = 0.0, wd_sum = 0.0, we_sum = 0.0;
  int wd_n = 0, we_n = 0;
  for (const auto& o : r.observations) {
    const int n = o.participations();
    total_part += n;
    ++s.participations_per_week[n];
    for (int t = 0; t < 7; ++t) {
      if (!o.delta[t]) continue;
      ++s.participation_by_day[t];
      s.durations.push_back(o.d[t]);
      s.one_way_travel_minutes.push_back(60.0 * zones.travel_time(static_cast<std::size_t>(o.person.home),
                                                                  static_cast<std::size_t>(o.loc[t])));
      if (week.is_weekend(t)) {
        we_sum += o.d[t];
        ++we_n;
      } else {
        wd_sum += o.d[t];
        ++wd_n;
      }
    }
  }
  if (s.persons) s.mean_weekly_participation = total_part / s.persons;
  if (!s.one_way_travel_minutes.empty()) {
    double sum = 0.0;
    for (double v : s.one_way_travel_minutes) sum += v;
    s.mean_one_way_travel_minutes = sum / s.one_way_travel_minutes.size();
  }
  if (wd_n) s.mean_duration_weekday = wd_sum / wd_n;
  if (we_n) s.mean_duration_weekend = we_sum / we_n;
  return s;
}

}  // namespace needs

#endif
