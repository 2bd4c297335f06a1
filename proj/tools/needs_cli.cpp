// Command-line front end: solve, synth, loglik, estimate, verify.
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 infeasible problem,
// 4 verification failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "needs/needs.hpp"
#include "needs/verify.hpp"

namespace fs = std::filesystem;
using namespace needs;
using needs::cli::Config;
using needs::cli::config_error;

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_infeasible = 3;
constexpr int exit_verify = 4;

struct Common
{
  std::optional<fs::path> config;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c)
{
  app->add_option("--config,-c", c.config, "TOML configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

void emit(const std::optional<fs::path>& out, const std::string& text)
{
  if (out) {
    if (out->has_parent_path()) fs::create_directories(out->parent_path());
    write_text(*out, text);
  } else {
    std::cout << text;
  }
}

// ---------------------------------------------------------------- solve

struct SolveArgs
{
  Common common;
  std::optional<fs::path> scenario;
  std::optional<fs::path> conditioned;
  bool multiweek = false;
  int max_weeks = 8;
  std::optional<fs::path> out;
};

void print_summary(const SolveResult& r, const ScenarioInputs& in)
{
  std::ostringstream s;
  s << "participation days:";
  for (int t = 0; t < r.pattern.days(); ++t)
    if (r.pattern.delta[t]) s << ' ' << t + 1 << '@' << in.locations.at(static_cast<std::size_t>(r.pattern.loc[t]));
  s << "\ndurations (h):";
  for (int t = 0; t < r.pattern.days(); ++t)
    if (r.pattern.delta[t]) s << ' ' << verify::fmt(r.pattern.d[t], 6);
  s << "\nobjective: " << verify::fmt(r.objective, 10) << "\nweeks (K*): " << r.weeks << '\n';
  std::cerr << s.str();
}

int run_solve(const SolveArgs& a)
{
  const Config cfg = cli::load_config(a.common.config);
  const ModelParams params = cli::model_from_config(cfg);
  const ScenarioInputs inputs = a.scenario ? (fs::is_directory(*a.scenario) ? read_scenario_csv(*a.scenario)
                                                                            : scenario_from_json(read_json(*a.scenario)))
                                           : cli::scenario_from_config(cfg);
  const Horizon h(inputs.days(), cli::weekend_days_from_config(cfg, inputs.days()));
  FullSolveOptions fo;
  fo.threads = a.common.threads;

  std::optional<SolveResult> result;
  if (a.conditioned) {
    const ActivityPattern p = pattern_from_json(read_json(*a.conditioned), inputs.locations);
    std::vector<int> loc = p.loc;
    for (int& l : loc) l = std::max(l, 0);
    const ConditionedProblem prob(p.delta, loc, inputs, params, h);
    if (prob.active_days() == 0) throw infeasible_error("the pattern has no participation day");
    result = a.multiweek ? solve_conditioned_multiweek(prob, a.max_weeks) : solve_conditioned(prob);
    if (!result) throw infeasible_error("the activity days cannot produce the required inventory");
  } else if (a.multiweek) {
    MultiweekOptions mo;
    mo.max_weeks = a.max_weeks;
    mo.full = fo;
    result = solve_multiweek(inputs, params, h, mo);
  } else {
    result = solve_full(inputs, params, h, LocationPolicy::single(), fo);
    if (!result) throw infeasible_error("no participation pattern is feasible");
  }
  std::vector<std::string> locations = inputs.locations;
  json j = result_to_json(*result, locations);
  j["params"] = params_to_json(params);
  emit(a.out, j.dump(2) + "\n");
  print_summary(*result, inputs);
  return exit_ok;
}

// ---------------------------------------------------------------- synth

struct SynthArgs
{
  Common common;
  std::optional<std::string> preset;
  std::optional<std::size_t> persons;
  std::optional<std::size_t> zones;
  fs::path out;
};

Preset make_preset(const std::string& name, std::size_t zones, std::uint64_t seed)
{
  if (name == "grocery") return {generate_zones(zones, seed), grocery_population()};
  if (name == "ecommerce") return ecommerce_preset();
  throw config_error("unknown preset '" + name + "' (grocery or ecommerce)");
}

std::string histogram_csv(const char* column, const std::vector<double>& values)
{
  std::string s = std::string(column) + '\n';
  for (double v : values) s += format_double(v) + '\n';
  return s;
}

int run_synth(const SynthArgs& a)
{
  const Config cfg = cli::load_config(a.common.config);
  const std::string preset = a.preset ? *a.preset : cli::text(cfg, "scenario", "preset").value_or("grocery");
  const std::size_t persons =
      a.persons.value_or(static_cast<std::size_t>(cli::integer(cfg, "scenario", "persons").value_or(1500)));
  const std::size_t n_zones =
      a.zones.value_or(static_cast<std::size_t>(cli::integer(cfg, "scenario", "zones").value_or(10)));
  Preset p = make_preset(preset, n_zones, a.common.seed);
  p.pop = cli::population_from_config(cfg, p.pop);

  const auto people = generate_population(persons, p.zones, a.common.seed);
  const auto res = simulate_patterns(people, p.zones, p.pop, a.common.seed, a.common.threads);
  const auto summary = summarize(res, p.zones);
  if (!res.excluded.empty())
    std::cerr << "warning: " << res.excluded.size() << " person(s) without a feasible alternative were excluded\n";

  fs::create_directories(a.out);
  write_text(a.out / "observations.csv", observations_to_csv(res.observations));
  write_json(a.out / "zones.json", zones_to_json(p.zones));
  write_json(a.out / "population.json", population_to_json(p.pop));
  json sj = summary_to_json(summary);
  sj["excluded_ids"] = res.excluded;
  write_json(a.out / "summary.json", sj);
  std::string by_day = "day,participations\n";
  for (int t = 0; t < 7; ++t) by_day += std::to_string(t + 1) + ',' + std::to_string(summary.participation_by_day[t]) + '\n';
  write_text(a.out / "participation_by_day.csv", by_day);
  write_text(a.out / "durations.csv", histogram_csv("hours", summary.durations));
  write_text(a.out / "travel_time.csv", histogram_csv("one_way_minutes", summary.one_way_travel_minutes));
  std::cerr << "persons " << summary.persons << ", mean weekly participation "
            << verify::fmt(summary.mean_weekly_participation, 4) << ", mean one-way travel "
            << verify::fmt(summary.mean_one_way_travel_minutes, 4) << " min\n";
  return exit_ok;
}

// ---------------------------------------------------------------- loglik / estimate

struct DataArgs
{
  Common common;
  std::optional<fs::path> data;
  std::optional<int> draws;
  std::optional<std::size_t> choice_set;
  std::optional<std::string> preset;
  fs::path out;
};

struct Dataset
{
  ZoneSystem zones;
  std::vector<Observation> observations;
  PopulationParams pop;
  LoglikOptions opt;
};

Dataset load_dataset(const DataArgs& a, const Config& cfg)
{
  cli::check_estimation_keys(cfg);
  fs::path dir;
  if (a.data)
    dir = *a.data;
  else if (auto d = cli::text(cfg, "estimation", "data"))
    dir = cfg.resolve(*d);
  else
    throw config_error("no data directory (use --data or [estimation] data)");
  Dataset ds;
  ds.zones = zones_from_json(read_json(dir / "zones.json"));
  ds.observations = observations_from_csv(read_text(dir / "observations.csv"));
  if (ds.observations.empty()) throw config_error("the data set has no observations");
  PopulationParams base = grocery_population();
  if (a.preset) base = make_preset(*a.preset, ds.zones.size(), a.common.seed).pop;
  ds.pop = cli::population_from_config(cfg, base);
  ds.opt.seed = a.common.seed;
  ds.opt.threads = a.common.threads;
  ds.opt.draws = a.draws.value_or(static_cast<int>(cli::integer(cfg, "estimation", "draws").value_or(100)));
  ds.opt.choice_set_size = a.choice_set.value_or(
      static_cast<std::size_t>(cli::integer(cfg, "estimation", "choice_set_size").value_or(128)));
  return ds;
}

SurfaceAxis parse_axis(const std::string& spec)
{
  // name=lo:hi:n
  const auto eq = spec.find('=');
  const auto c1 = spec.find(':', eq == std::string::npos ? 0 : eq);
  const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (eq == std::string::npos || c1 == std::string::npos || c2 == std::string::npos)
    throw config_error("surface axis must look like name=lo:hi:n, got '" + spec + "'");
  try {
    const double lo = parse_double(spec.substr(eq + 1, c1 - eq - 1));
    const double hi = parse_double(spec.substr(c1 + 1, c2 - c1 - 1));
    const int n = parse_int(spec.substr(c2 + 1));
    return {spec.substr(0, eq), linspace(lo, hi, n)};
  } catch (const std::exception& e) {
    throw config_error("bad surface axis '" + spec + "': " + e.what());
  }
}

struct LoglikArgs
{
  DataArgs data;
  std::vector<std::string> surface;
};

int run_loglik(const LoglikArgs& a)
{
  const Config cfg = cli::load_config(a.data.common.config);
  const Dataset ds = load_dataset(a.data, cfg);
  std::vector<std::string> axes = a.surface;
  if (axes.empty())
    if (auto s = cli::text_list(cfg, "estimation", "surface")) axes = *s;
  fs::create_directories(a.data.out);
  if (axes.empty()) {
    const auto r = simulated_loglik(ds.zones, ds.observations, ds.pop, ds.opt);
    write_json(a.data.out / "loglik.json", loglik_to_json(r, ds.observations));
    std::cerr << "log-likelihood " << verify::fmt(r.total, 10) << '\n';
    return exit_ok;
  }
  if (axes.size() != 2) throw config_error("a surface needs exactly two axes");
  const auto s = loglik_surface(ds.zones, ds.observations, ds.pop, parse_axis(axes[0]), parse_axis(axes[1]), ds.opt);
  write_text(a.data.out / "surface.csv", surface_to_csv(s));
  write_json(a.data.out / "surface.json", surface_to_json(s));
  std::cerr << "argmax " << s.axis1.name << '=' << verify::fmt(s.axis1.values[s.argmax1]) << ", " << s.axis2.name
            << '=' << verify::fmt(s.axis2.values[s.argmax2]) << '\n';
  return exit_ok;
}

struct EstimateArgs
{
  DataArgs data;
  std::optional<std::string> free;
  std::optional<int> budget;
  std::optional<double> step;
  std::vector<std::string> init;
};

std::vector<std::string> split_names(const std::string& s)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int run_estimate(const EstimateArgs& a)
{
  const Config cfg = cli::load_config(a.data.common.config);
  Dataset ds = load_dataset(a.data, cfg);
  std::vector<std::string> free;
  if (a.free)
    free = split_names(*a.free);
  else if (auto f = cli::text_list(cfg, "estimation", "free"))
    free = *f;
  std::vector<std::string> init = a.init;
  if (init.empty())
    if (auto i = cli::text_list(cfg, "estimation", "init")) init = *i;
  for (const auto& kv : init) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw config_error("--init entries must look like name=value");
    try {
      set_parameter(ds.pop, kv.substr(0, eq), parse_double(kv.substr(eq + 1)));
    } catch (const io_error& e) {
      throw config_error(std::string("bad --init value: ") + e.what());
    }
  }
  EstimateOptions eo;
  eo.loglik = ds.opt;
  eo.budget = a.budget.value_or(static_cast<int>(cli::integer(cfg, "estimation", "budget").value_or(40)));
  eo.step = a.step.value_or(cli::real(cfg, "estimation", "step").value_or(0.1));
  const auto r = maximize(ds.zones, ds.observations, ds.pop, free, eo);
  fs::create_directories(a.data.out);
  write_text(a.data.out / "trace.csv", trace_to_csv(r));
  write_json(a.data.out / "estimate.json", estimate_to_json(r));
  std::ostringstream s;
  for (std::size_t i = 0; i < r.names.size(); ++i) s << r.names[i] << '=' << verify::fmt(r.estimates[i]) << ' ';
  std::cerr << "estimates: " << s.str() << "log-likelihood " << verify::fmt(r.loglik, 10) << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs
{
  Common common;
  std::vector<std::string> suites{"fast"};
  std::optional<fs::path> out;
};

int run_verify(const VerifyArgs& a)
{
  std::vector<std::string> names;
  for (const auto& s : a.suites) {
    if (s == "fast")
      names.insert(names.end(), {"solver", "speedup", "invariants", "slopes", "density"});
    else if (s == "all")
      names.insert(names.end(), {"solver", "speedup", "invariants", "slopes", "density", "pwl", "synth", "ecommerce",
                                 "surface", "recovery"});
    else
      names.push_back(s);
  }
  const unsigned th = a.common.threads;
  std::string record;
  bool ok = true;
  for (const auto& n : names) {
    std::optional<verify::Report> r;
    if (n == "solver") r = verify::solver_suite(200, a.common.seed);
    else if (n == "speedup") r = verify::speedup_suite(50, a.common.seed + 1);
    else if (n == "invariants") r = verify::invariants_suite(a.common.seed + 2);
    else if (n == "slopes") r = verify::slope_suite(50, a.common.seed + 3);
    else if (n == "density") r = verify::density_suite(20, a.common.seed + 6);
    else if (n == "pwl") r = verify::pwl_suite(th);
    else if (n == "synth") r = verify::synth_suite(1500, th);
    else if (n == "ecommerce") r = verify::ecommerce_suite(1500, th);
    else if (n == "surface") r = verify::surface_suite(300, 200, 0.05, 0.05, th);
    else if (n == "recovery") r = verify::recovery_suite(300, 200, 40, th);
    else throw config_error("unknown suite '" + n + "'");
    std::cout << "[" << r->suite << "] " << (r->passed() ? "PASS" : "FAIL") << " (" << verify::fmt(r->seconds, 3)
              << " s)\n";
    for (const auto& note : r->notes) std::cout << "    " << note << '\n';
    for (const auto& c : r->checks) {
      std::cout << "  " << (c.passed ? "pass" : "FAIL") << "  " << c.name << (c.detail.empty() ? "" : ": ")
                << c.detail << '\n';
      record += std::string(c.passed ? "PASS " : "FAIL ") + r->suite + ": " + c.name + '\n';
    }
    ok = ok && r->passed();
  }
  if (a.out) write_text(*a.out, record);
  return ok ? exit_ok : exit_verify;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Multi-day needs-based activity model"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "solve the deterministic model for one individual");
  add_common(solve, sa.common);
  solve->add_option("--scenario", sa.scenario, "scenario JSON file or CSV directory (overrides [scenario])")
      ->check(CLI::ExistingPath);
  solve->add_option("--conditioned", sa.conditioned, "JSON pattern fixing participation and locations")
      ->check(CLI::ExistingFile);
  solve->add_flag("--multiweek", sa.multiweek, "extend the horizon a week at a time until utility is non-negative");
  solve->add_option("--max-weeks", sa.max_weeks, "multi-week cap");
  solve->add_option("--out,-o", sa.out, "result JSON (default stdout)");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "generate a synthetic sample");
  add_common(synth, ya.common);
  synth->add_option("--preset", ya.preset, "grocery or ecommerce")->check(CLI::IsMember({"grocery", "ecommerce"}));
  synth->add_option("--persons,-n", ya.persons, "number of individuals");
  synth->add_option("--zones", ya.zones, "number of zones (grocery)");
  synth->add_option("--out,-o", ya.out, "output directory")->required();

  auto add_data = [](CLI::App* cmd, DataArgs& d) {
    add_common(cmd, d.common);
    cmd->add_option("--data,-d", d.data, "directory with observations.csv and zones.json");
    cmd->add_option("--draws,-R", d.draws, "simulation draws per person");
    cmd->add_option("--choice-set", d.choice_set, "sampled choice-set size (0 = full)");
    cmd->add_option("--preset", d.preset, "parameter preset of the data")->check(CLI::IsMember({"grocery", "ecommerce"}));
    cmd->add_option("--out,-o", d.out, "output directory")->required();
  };

  LoglikArgs la;
  auto* loglik = app.add_subcommand("loglik", "simulated log-likelihood or a two-parameter surface");
  add_data(loglik, la.data);
  loglik->add_option("--surface", la.surface, "two axes name=lo:hi:n")->expected(2);

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "simulated maximum likelihood");
  add_data(estimate, ea.data);
  estimate->add_option("--free", ea.free, "comma-separated free parameters");
  estimate->add_option("--budget", ea.budget, "Nelder-Mead iterations");
  estimate->add_option("--step", ea.step, "initial simplex size (transformed scale)");
  estimate->add_option("--init", ea.init, "starting values name=value");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "run verification suites");
  add_common(ver, va.common);
  ver->add_option("--suite", va.suites, "fast, all, or suite names (comma separated)")->delimiter(',');
  ver->add_option("--out,-o", va.out, "write pass/fail lines to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*solve) return run_solve(sa);
    if (*synth) return run_synth(ya);
    if (*loglik) return run_loglik(la);
    if (*estimate) return run_estimate(ea);
    if (*ver) return run_verify(va);
  } catch (const infeasible_error& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return exit_infeasible;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const io_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_config;
  } catch (const model_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return exit_config;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_ok;
}
