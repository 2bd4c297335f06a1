#ifndef NEEDS_TOOLS_CONFIG_HPP_
#define NEEDS_TOOLS_CONFIG_HPP_

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <toml.hpp>

#include "needs/io.hpp"
#include "needs/synth.hpp"

// TOML configuration for the command-line tool. One file with [model],
// [scenario], [population] and [estimation] sections; every section is
// optional and command-line flags override file values.

namespace needs::cli
{

class config_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Config
{
  toml::table table;
  std::filesystem::path dir = ".";  // relative paths resolve against this

  const toml::table* section(const char* name) const { return table[name].as_table(); }
  std::filesystem::path resolve(const std::string& p) const
  {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : dir / path;
  }
};

inline Config load_config(const std::optional<std::filesystem::path>& file)
{
  Config c;
  if (!file) return c;
  try {
    c.table = toml::parse_file(file->string());
  } catch (const toml::parse_error& e) {
    throw config_error(file->string() + ": " + std::string(e.description()));
  }
  c.dir = file->parent_path().empty() ? std::filesystem::path(".") : file->parent_path();
  static const std::set<std::string> sections{"model", "scenario", "population", "estimation"};
  for (const auto& [key, node] : c.table) {
    if (!sections.count(std::string(key.str())))
      throw config_error("unknown config section [" + std::string(key.str()) + "]");
    if (!node.is_table()) throw config_error("[" + std::string(key.str()) + "] must be a table");
  }
  return c;
}

namespace detail
{

inline void allow_keys(const toml::table& t, const char* where, const std::set<std::string>& keys)
{
  for (const auto& [key, node] : t)
    if (!keys.count(std::string(key.str())))
      throw config_error(std::string("unknown key '") + std::string(key.str()) + "' in " + where);
}

inline std::optional<double> number(const toml::table& t, const char* key)
{
  const auto* n = t.get(key);
  if (!n) return std::nullopt;
  if (auto v = n->value<double>()) return *v;
  throw config_error(std::string("'") + key + "' must be a number");
}

inline double number_or(const toml::table& t, const char* key, double fallback)
{
  return number(t, key).value_or(fallback);
}

inline double required(const toml::table& t, const char* key, const char* where)
{
  if (auto v = number(t, key)) return *v;
  throw config_error(std::string("missing '") + key + "' in " + where);
}

inline std::vector<double> numbers(const toml::node& n, const char* key)
{
  const auto* arr = n.as_array();
  if (!arr) throw config_error(std::string("'") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *arr) {
    auto v = e.value<double>();
    if (!v) throw config_error(std::string("'") + key + "' must be an array of numbers");
    out.push_back(*v);
  }
  return out;
}

inline std::vector<std::string> strings(const toml::node& n, const char* key)
{
  const auto* arr = n.as_array();
  if (!arr) throw config_error(std::string("'") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : *arr) {
    auto v = e.value<std::string>();
    if (!v) throw config_error(std::string("'") + key + "' must be an array of strings");
    out.push_back(*v);
  }
  return out;
}

/// A location x day matrix given as one number, one number per location,
/// or a full array of rows.
inline Grid matrix(const toml::node& n, const char* key, std::size_t L, std::size_t H)
{
  if (auto v = n.value<double>()) return Grid(L, H, *v);
  const auto* arr = n.as_array();
  if (!arr || arr->size() != L) throw config_error(std::string("'") + key + "' needs one entry per location");
  Grid g(L, H);
  for (std::size_t j = 0; j < L; ++j) {
    const auto& row = *arr->get(j);
    if (auto v = row.value<double>()) {
      for (std::size_t t = 0; t < H; ++t) g(j, t) = *v;
      continue;
    }
    const auto vals = numbers(row, key);
    if (vals.size() != H) throw config_error(std::string("'") + key + "' rows need one entry per day");
    for (std::size_t t = 0; t < H; ++t) g(j, t) = vals[t];
  }
  return g;
}

}  // namespace detail

/// [model.production]: type = "linear" | "piecewise" | "cobb_douglas".
inline ProductionSpec production_from_config(const toml::table& t, const char* where)
{
  detail::allow_keys(t, where, {"type", "q0", "q1", "q2", "p1", "slopes", "breakpoints"});
  const std::string type = t["type"].value_or(std::string("linear"));
  const double q0 = detail::number_or(t, "q0", 0.0);
  const double q2 = detail::required(t, "q2", where);
  if (type == "linear") return ProductionSpec::linear(q0, detail::required(t, "p1", where), q2);
  if (type == "cobb_douglas") return ProductionSpec::cobb_douglas(q0, detail::required(t, "q1", where), q2);
  if (type == "piecewise") {
    if (!t.get("slopes")) throw config_error(std::string("missing 'slopes' in ") + where);
    std::vector<double> breaks;
    if (const auto* b = t.get("breakpoints")) breaks = detail::numbers(*b, "breakpoints");
    return ProductionSpec::piecewise(q0, q2, detail::numbers(*t.get("slopes"), "slopes"), breaks);
  }
  throw config_error("unknown production type '" + type + "'");
}

/// [model]: lambda_weekday, gamma, rho1, rho3, rho2 (default 2 rho3),
/// [model.production].
inline ModelParams model_from_config(const Config& c)
{
  const toml::table* t = c.section("model");
  if (!t) throw config_error("missing [model] section");
  detail::allow_keys(*t, "[model]", {"lambda_weekday", "gamma", "rho1", "rho2", "rho3", "production"});
  const double rho3 = detail::required(*t, "rho3", "[model]");
  const auto* prod = (*t)["production"].as_table();
  if (!prod) throw config_error("missing [model.production] table");
  return ModelParams(detail::number_or(*t, "lambda_weekday", 1.0), detail::required(*t, "gamma", "[model]"),
                     detail::required(*t, "rho1", "[model]"), detail::number_or(*t, "rho2", 2.0 * rho3), rho3,
                     production_from_config(*prod, "[model.production]"));
}

/// Weekend days (1-based within the horizon); default the last two days of
/// every week.
inline std::set<int> weekend_days_from_config(const Config& c, int days)
{
  const toml::table* t = c.section("scenario");
  if (t && t->get("weekend_days")) {
    std::set<int> out;
    for (double v : detail::numbers(*t->get("weekend_days"), "weekend_days")) out.insert(static_cast<int>(v));
    return out;
  }
  std::set<int> out;
  for (int d = 1; d <= days; ++d)
    if ((d - 1) % 7 >= 5) out.insert(d);
  return out;
}

/// [scenario]: either `file` (JSON document or directory of CSV files) or
/// inline `locations`, `free_time` (one entry per day, or `ft_weekday` /
/// `ft_weekend` with `days`), `attractiveness`, `travel_time`, `travel_cost`
/// (two-way), optional `size_measure_names` / `size_measures`.
inline ScenarioInputs scenario_from_config(const Config& c)
{
  const toml::table* t = c.section("scenario");
  if (!t) throw config_error("missing [scenario] section");
  detail::allow_keys(*t, "[scenario]",
                     {"file", "locations", "free_time", "ft_weekday", "ft_weekend", "days", "attractiveness",
                      "travel_time", "travel_cost", "size_measure_names", "size_measures", "weekend_days", "zones",
                      "persons", "preset"});
  if (auto file = (*t)["file"].value<std::string>()) {
    const auto path = c.resolve(*file);
    if (std::filesystem::is_directory(path)) return read_scenario_csv(path);
    return scenario_from_json(read_json(path));
  }
  ScenarioInputs s;
  if (!t->get("locations")) throw config_error("[scenario] needs 'file' or 'locations'");
  s.locations = detail::strings(*t->get("locations"), "locations");
  if (const auto* ft = t->get("free_time")) {
    s.free_time = detail::numbers(*ft, "free_time");
  } else {
    const int days = static_cast<int>(detail::number_or(*t, "days", 7));
    const Horizon h(days, weekend_days_from_config(c, days));
    const double wd = detail::required(*t, "ft_weekday", "[scenario]");
    const double we = detail::required(*t, "ft_weekend", "[scenario]");
    for (int d = 0; d < days; ++d) s.free_time.push_back(h.is_weekend(d) ? we : wd);
  }
  const std::size_t L = s.locations.size(), H = s.free_time.size();
  for (const char* key : {"attractiveness", "travel_time", "travel_cost"})
    if (!t->get(key)) throw config_error(std::string("missing '") + key + "' in [scenario]");
  s.attractiveness = detail::matrix(*t->get("attractiveness"), "attractiveness", L, H);
  s.travel_time = detail::matrix(*t->get("travel_time"), "travel_time", L, H);
  s.travel_cost = detail::matrix(*t->get("travel_cost"), "travel_cost", L, H);
  if (const auto* names = t->get("size_measure_names")) {
    s.size_measure_names = detail::strings(*names, "size_measure_names");
    if (!t->get("size_measures")) throw config_error("size_measure_names given without size_measures");
    s.size_measures = detail::matrix(*t->get("size_measures"), "size_measures", L, s.size_measure_names.size());
  }
  s.validate();
  return s;
}

/// [population]: random-coefficient hyperparameters and fixed parameters,
/// on top of `base`.
inline PopulationParams population_from_config(const Config& c, PopulationParams base)
{
  const toml::table* t = c.section("population");
  if (!t) return base;
  detail::allow_keys(*t, "[population]",
                     {"mu_rho1", "mu_kappa", "mu_q0", "omega_rho1", "omega_kappa", "omega_q0", "gamma", "p1", "q1",
                      "q2", "production", "mu", "beta", "sigma_nest", "sigma_dur", "use_size_measures", "max_weeks",
                      "zero_duration"});
  if (const auto* prod = (*t)["production"].as_table())
    base.xi.production = production_from_config(*prod, "[population.production]");
  for (const char* name : {"mu_rho1", "mu_kappa", "mu_q0", "omega_rho1", "omega_kappa", "omega_q0", "gamma", "p1",
                           "q1", "q2", "mu", "sigma_nest", "sigma_dur"})
    if (auto v = detail::number(*t, name)) set_parameter(base, name, *v);
  if (const auto* beta = t->get("beta")) base.xi.beta = detail::numbers(*beta, "beta");
  if (const auto* n = t->get("use_size_measures")) {
    auto v = n->value<bool>();
    if (!v) throw config_error("'use_size_measures' must be a boolean");
    base.xi.use_size_measures = *v;
  }
  if (auto v = detail::number(*t, "max_weeks")) base.xi.max_weeks = static_cast<int>(*v);
  if (const auto* n = t->get("zero_duration")) {
    const std::string v = n->value_or(std::string());
    if (v == "exclude")
      base.xi.zero_duration = ZeroDurationPolicy::exclude;
    else if (v == "keep")
      base.xi.zero_duration = ZeroDurationPolicy::keep;
    else
      throw config_error("'zero_duration' must be \"exclude\" or \"keep\"");
  }
  base.validate();
  return base;
}

/// Integer or string settings of one section.
inline std::optional<long long> integer(const Config& c, const char* section, const char* key)
{
  const toml::table* t = c.section(section);
  if (!t || !t->get(key)) return std::nullopt;
  if (auto v = t->get(key)->value<long long>()) return *v;
  throw config_error(std::string("'") + key + "' in [" + section + "] must be an integer");
}

inline std::optional<std::string> text(const Config& c, const char* section, const char* key)
{
  const toml::table* t = c.section(section);
  if (!t || !t->get(key)) return std::nullopt;
  if (auto v = t->get(key)->value<std::string>()) return *v;
  throw config_error(std::string("'") + key + "' in [" + section + "] must be a string");
}

inline std::optional<double> real(const Config& c, const char* section, const char* key)
{
  const toml::table* t = c.section(section);
  if (!t) return std::nullopt;
  return detail::number(*t, key);
}

inline std::optional<std::vector<std::string>> text_list(const Config& c, const char* section, const char* key)
{
  const toml::table* t = c.section(section);
  if (!t || !t->get(key)) return std::nullopt;
  return detail::strings(*t->get(key), key);
}

inline void check_estimation_keys(const Config& c)
{
  if (const toml::table* t = c.section("estimation"))
    detail::allow_keys(*t, "[estimation]",
                       {"data", "draws", "choice_set_size", "budget", "free", "step", "surface", "init"});
}

}  // namespace needs::cli

#endif
