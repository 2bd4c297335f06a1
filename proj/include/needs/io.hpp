#ifndef NEEDS_IO_HPP_
#define NEEDS_IO_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "empirical.hpp"
#include "estimate.hpp"
#include "population.hpp"
#include "synth.hpp"
#include "types.hpp"

namespace needs
{

using json = nlohmann::json;

/// Malformed or unreadable input file.
class io_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double.
inline std::string format_double(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s)
{
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw io_error("not a number: '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s)
{
  int v = 0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw io_error("not an integer: '" + s + "'");
  return v;
}

inline std::string read_text(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw io_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
  std::ofstream out(p, std::ios::binary);
  if (!out) throw io_error("cannot write " + p.string());
  out << text;
  if (!out) throw io_error("failed writing " + p.string());
}

inline json read_json(const std::filesystem::path& p)
{
  try {
    return json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw io_error(p.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

// ---------------------------------------------------------------- JSON

inline json grid_to_json(const Grid& g)
{
  json rows = json::array();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Grid grid_from_json(const json& j, const char* what)
{
  if (!j.is_array()) throw io_error(std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Grid g(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw io_error(std::string(what) + " rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) g(r, c) = j[r][c].get<double>();
  }
  return g;
}

inline json production_to_json(const ProductionSpec& p)
{
  switch (p.kind()) {
  case ProductionSpec::Kind::cobb_douglas:
    return {{"type", "cobb_douglas"}, {"q0", p.q0()}, {"q1", p.q1()}, {"q2", p.q2()}};
  case ProductionSpec::Kind::linear:
    return {{"type", "linear"}, {"q0", p.q0()}, {"p1", p.slopes()[0]}, {"q2", p.q2()}};
  default:
    return {{"type", "piecewise"},
            {"q0", p.q0()},
            {"q2", p.q2()},
            {"slopes", p.slopes()},
            {"breakpoints", p.breakpoints()}};
  }
}

inline ProductionSpec production_from_json(const json& j)
{
  const std::string type = j.at("type").get<std::string>();
  const double q0 = j.value("q0", 0.0);
  const double q2 = j.at("q2").get<double>();
  if (type == "cobb_douglas") return ProductionSpec::cobb_douglas(q0, j.at("q1").get<double>(), q2);
  if (type == "linear") return ProductionSpec::linear(q0, j.at("p1").get<double>(), q2);
  if (type == "piecewise")
    return ProductionSpec::piecewise(q0, q2, j.at("slopes").get<std::vector<double>>(),
                                     j.value("breakpoints", std::vector<double>{}));
  throw io_error("unknown production type: " + type);
}

inline json params_to_json(const ModelParams& p)
{
  return {{"lambda_weekday", p.lambda_weekday()}, {"gamma", p.gamma()}, {"rho1", p.rho1()},
          {"rho2", p.rho2()}, {"rho3", p.rho3()}, {"production", production_to_json(p.production())}};
}

inline ModelParams params_from_json(const json& j)
{
  return ModelParams(j.value("lambda_weekday", 1.0), j.at("gamma").get<double>(), j.at("rho1").get<double>(),
                     j.at("rho2").get<double>(), j.at("rho3").get<double>(), production_from_json(j.at("production")));
}

inline json horizon_to_json(const Horizon& h)
{
  return {{"days", h.days()}, {"weekend_days", h.weekend_days()}};
}

inline Horizon horizon_from_json(const json& j)
{
  return Horizon(j.at("days").get<int>(), j.value("weekend_days", std::set<int>{}));
}

/// Location x day matrices; days are columns.
inline json scenario_to_json(const ScenarioInputs& s)
{
  json j{{"locations", s.locations},
         {"attractiveness", grid_to_json(s.attractiveness)},
         {"travel_time", grid_to_json(s.travel_time)},
         {"travel_cost", grid_to_json(s.travel_cost)},
         {"free_time", s.free_time}};
  if (!s.size_measure_names.empty()) {
    j["size_measure_names"] = s.size_measure_names;
    j["size_measures"] = grid_to_json(s.size_measures);
  }
  return j;
}

inline ScenarioInputs scenario_from_json(const json& j)
{
  ScenarioInputs s;
  s.locations = j.at("locations").get<std::vector<std::string>>();
  s.attractiveness = grid_from_json(j.at("attractiveness"), "attractiveness");
  s.travel_time = grid_from_json(j.at("travel_time"), "travel_time");
  s.travel_cost = grid_from_json(j.at("travel_cost"), "travel_cost");
  s.free_time = j.at("free_time").get<std::vector<double>>();
  if (j.contains("size_measure_names")) {
    s.size_measure_names = j.at("size_measure_names").get<std::vector<std::string>>();
    s.size_measures = grid_from_json(j.at("size_measures"), "size_measures");
  }
  s.validate();
  return s;
}

/// Day-indexed vectors; `loc` holds location names, null on inactive days.
inline json pattern_to_json(const ActivityPattern& p, const std::vector<std::string>& locations)
{
  json loc = json::array();
  for (std::size_t t = 0; t < p.delta.size(); ++t)
    loc.push_back(p.delta[t] ? json(locations.at(static_cast<std::size_t>(p.loc[t]))) : json(nullptr));
  return {{"delta", p.delta}, {"d", p.d}, {"loc", loc}};
}

/// Reads a pattern; `d` is optional (zeros) since conditioned solves ignore it.
inline ActivityPattern pattern_from_json(const json& j, const std::vector<std::string>& locations)
{
  ActivityPattern p;
  p.delta = j.at("delta").get<std::vector<int>>();
  p.d = j.value("d", std::vector<double>(p.delta.size(), 0.0));
  p.loc.assign(p.delta.size(), -1);
  const json& loc = j.contains("loc") ? j.at("loc") : json::array();
  if (!loc.empty() && loc.size() != p.delta.size()) throw io_error("loc must have one entry per day");
  for (std::size_t t = 0; t < p.delta.size(); ++t) {
    if (p.delta[t] != 0 && p.delta[t] != 1) throw io_error("delta entries must be 0 or 1");
    if (!p.delta[t]) continue;
    if (loc.empty()) {
      if (locations.size() != 1) throw io_error("loc is required when there are several locations");
      p.loc[t] = 0;
      continue;
    }
    if (loc[t].is_number_integer()) {
      p.loc[t] = loc[t].get<int>();
    } else {
      const auto name = loc[t].get<std::string>();
      const auto it = std::find(locations.begin(), locations.end(), name);
      if (it == locations.end()) throw io_error("unknown location: " + name);
      p.loc[t] = static_cast<int>(it - locations.begin());
    }
    if (p.loc[t] < 0 || static_cast<std::size_t>(p.loc[t]) >= locations.size())
      throw io_error("location index out of range");
  }
  if (p.d.size() != p.delta.size()) throw io_error("d must have one entry per day");
  return p;
}

inline json result_to_json(const SolveResult& r, const std::vector<std::string>& locations)
{
  return {{"objective", r.objective},
          {"weeks", r.weeks},
          {"days", r.pattern.days()},
          {"participations", r.pattern.participations()},
          {"anchor_day", r.anchor + 1},
          {"pattern", pattern_to_json(r.pattern, locations)},
          {"trajectory", {{"I", r.trajectory.I}, {"Q", r.trajectory.Q}, {"I_min", r.trajectory.I_min}}}};
}

inline json zones_to_json(const ZoneSystem& z)
{
  json j{{"names", z.names},
         {"attractiveness", z.attractiveness},
         {"travel_time", grid_to_json(z.travel_time)},
         {"travel_cost", grid_to_json(z.travel_cost)},
         {"round_trip", z.round_trip}};
  if (!z.size_measure_names.empty()) {
    j["size_measure_names"] = z.size_measure_names;
    j["size_measures"] = grid_to_json(z.size_measures);
  }
  return j;
}

inline ZoneSystem zones_from_json(const json& j)
{
  ZoneSystem z;
  z.names = j.at("names").get<std::vector<std::string>>();
  z.attractiveness = j.at("attractiveness").get<std::vector<double>>();
  z.travel_time = grid_from_json(j.at("travel_time"), "travel_time");
  z.travel_cost = grid_from_json(j.at("travel_cost"), "travel_cost");
  z.round_trip = j.value("round_trip", true);
  if (j.contains("size_measure_names")) {
    z.size_measure_names = j.at("size_measure_names").get<std::vector<std::string>>();
    z.size_measures = grid_from_json(j.at("size_measures"), "size_measures");
  }
  z.validate();
  return z;
}

inline json population_to_json(const PopulationParams& p)
{
  const FixedParams& xi = p.xi;
  return {{"mu_rho1", p.mu_D[0]},
          {"mu_kappa", p.mu_D[1]},
          {"mu_q0", p.mu_D[2]},
          {"omega_rho1", p.omega_diag[0]},
          {"omega_kappa", p.omega_diag[1]},
          {"omega_q0", p.omega_diag[2]},
          {"lambda", xi.lambda},
          {"gamma", xi.gamma},
          {"production", production_to_json(xi.production)},
          {"mu", xi.mu},
          {"beta", xi.beta},
          {"sigma_nest", xi.sigma_nest},
          {"sigma_dur", xi.sigma_dur},
          {"use_size_measures", xi.use_size_measures},
          {"max_weeks", xi.max_weeks},
          {"zero_duration", xi.zero_duration == ZeroDurationPolicy::exclude ? "exclude" : "keep"}};
}

// ---------------------------------------------------------------- CSV

inline std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

/// One row per person-day: person,ft_weekday,ft_weekend,home,day,delta,d,loc
/// with 1-based day and loc (0 when inactive).
inline std::string observations_to_csv(const std::vector<Observation>& obs)
{
  std::string s = "person,ft_weekday,ft_weekend,home,day,delta,d,loc\n";
  for (const auto& o : obs)
    for (std::size_t t = 0; t < o.delta.size(); ++t) {
      s += std::to_string(o.person.id) + ',' + format_double(o.person.ft_weekday) + ',' +
           format_double(o.person.ft_weekend) + ',' + std::to_string(o.person.home + 1) + ',' +
           std::to_string(t + 1) + ',' + std::to_string(o.delta[t]) + ',' + format_double(o.d[t]) + ',' +
           std::to_string(o.delta[t] ? o.loc[t] + 1 : 0) + '\n';
    }
  return s;
}

inline std::vector<Observation> observations_from_csv(const std::string& text, int days = 7)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw io_error("observations file is empty");
  if (split_csv_line(line).size() != 8) throw io_error("observations header must have 8 columns");
  std::vector<Observation> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw io_error("observations line " + std::to_string(line_no) + ": expected 8 fields");
    try {
      const int id = parse_int(f[0]);
      if (out.empty() || out.back().person.id != id) {
        Observation o;
        o.person = {id, parse_double(f[1]), parse_double(f[2]), parse_int(f[3]) - 1};
        o.delta.assign(days, 0);
        o.d.assign(days, 0.0);
        o.loc.assign(days, -1);
        out.push_back(std::move(o));
      }
      Observation& o = out.back();
      const int t = parse_int(f[4]) - 1;
      if (t < 0 || t >= days) throw io_error("day out of range");
      o.delta[t] = parse_int(f[5]);
      o.d[t] = parse_double(f[6]);
      o.loc[t] = parse_int(f[7]) - 1;
      if (o.delta[t] != 0 && o.delta[t] != 1) throw io_error("delta must be 0 or 1");
      if (o.delta[t] && (!(o.d[t] > 0.0) || o.loc[t] < 0)) throw io_error("active days need d > 0 and a location");
      if (!o.delta[t]) o.loc[t] = -1;
    } catch (const io_error& e) {
      throw io_error("observations line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

/// Header `name,<col names>` then one row per name.
inline std::string matrix_to_csv(const std::vector<std::string>& row_names, const std::vector<std::string>& col_names,
                                 const Grid& g)
{
  std::string s = "name";
  for (const auto& c : col_names) s += ',' + c;
  s += '\n';
  for (std::size_t r = 0; r < g.rows(); ++r) {
    s += row_names[r];
    for (std::size_t c = 0; c < g.cols(); ++c) s += ',' + format_double(g(r, c));
    s += '\n';
  }
  return s;
}

inline Grid matrix_from_csv(const std::string& text, std::vector<std::string>* row_names,
                            std::vector<std::string>* col_names)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw io_error("matrix file is empty");
  auto header = split_csv_line(line);
  header.erase(header.begin());
  std::vector<std::vector<double>> rows;
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size() + 1) throw io_error("matrix row has the wrong number of fields");
    names.push_back(f[0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < f.size(); ++c) row.push_back(parse_double(f[c]));
    rows.push_back(std::move(row));
  }
  Grid g(rows.size(), header.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < header.size(); ++c) g(r, c) = rows[r][c];
  if (row_names) *row_names = names;
  if (col_names) *col_names = header;
  return g;
}

/// Scenario as a directory of CSV files: attractiveness, travel_time,
/// travel_cost (location x day), free_time (one row), size_measures
/// (location x measure, optional).
inline void write_scenario_csv(const std::filesystem::path& dir, const ScenarioInputs& s)
{
  std::filesystem::create_directories(dir);
  std::vector<std::string> days;
  for (int t = 1; t <= s.days(); ++t) days.push_back("day" + std::to_string(t));
  write_text(dir / "attractiveness.csv", matrix_to_csv(s.locations, days, s.attractiveness));
  write_text(dir / "travel_time.csv", matrix_to_csv(s.locations, days, s.travel_time));
  write_text(dir / "travel_cost.csv", matrix_to_csv(s.locations, days, s.travel_cost));
  Grid ft(1, s.free_time.size());
  for (std::size_t t = 0; t < s.free_time.size(); ++t) ft(0, t) = s.free_time[t];
  write_text(dir / "free_time.csv", matrix_to_csv({"free_time"}, days, ft));
  if (!s.size_measure_names.empty())
    write_text(dir / "size_measures.csv", matrix_to_csv(s.locations, s.size_measure_names, s.size_measures));
}

inline ScenarioInputs read_scenario_csv(const std::filesystem::path& dir)
{
  ScenarioInputs s;
  s.attractiveness = matrix_from_csv(read_text(dir / "attractiveness.csv"), &s.locations, nullptr);
  s.travel_time = matrix_from_csv(read_text(dir / "travel_time.csv"), nullptr, nullptr);
  s.travel_cost = matrix_from_csv(read_text(dir / "travel_cost.csv"), nullptr, nullptr);
  const Grid ft = matrix_from_csv(read_text(dir / "free_time.csv"), nullptr, nullptr);
  if (ft.rows() != 1) throw io_error("free_time.csv must have exactly one row");
  s.free_time = ft.data();
  if (std::filesystem::exists(dir / "size_measures.csv"))
    s.size_measures = matrix_from_csv(read_text(dir / "size_measures.csv"), nullptr, &s.size_measure_names);
  s.validate();
  return s;
}

// ---------------------------------------------------------------- reports

/// One row per axis-1 value, one column per axis-2 value; the corner cell
/// names both axes as axis1\axis2.
inline std::string surface_to_csv(const Surface& s)
{
  std::string out = s.axis1.name + '\\' + s.axis2.name;
  for (double v : s.axis2.values) out += ',' + format_double(v);
  out += '\n';
  for (std::size_t i = 0; i < s.axis1.values.size(); ++i) {
    out += format_double(s.axis1.values[i]);
    for (std::size_t j = 0; j < s.axis2.values.size(); ++j) out += ',' + format_double(s.loglik(i, j));
    out += '\n';
  }
  return out;
}

/// Non-finite values are written as null.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json surface_to_json(const Surface& s)
{
  json m = json::array();
  for (std::size_t i = 0; i < s.loglik.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < s.loglik.cols(); ++j) row.push_back(finite_or_null(s.loglik(i, j)));
    m.push_back(std::move(row));
  }
  return {{"axis1", {{"name", s.axis1.name}, {"values", s.axis1.values}}},
          {"axis2", {{"name", s.axis2.name}, {"values", s.axis2.values}}},
          {"loglik", m},
          {"argmax", {{s.axis1.name, s.axis1.values[s.argmax1]}, {s.axis2.name, s.axis2.values[s.argmax2]}}},
          {"max_loglik", finite_or_null(s.loglik(s.argmax1, s.argmax2))}};
}

inline std::string trace_to_csv(const EstimateResult& r)
{
  std::string out = "iteration,step";
  for (const auto& n : r.names) out += ',' + n;
  out += ",loglik\n";
  for (const auto& row : r.trace) {
    out += std::to_string(row.iteration) + ',' + row.step;
    for (double v : row.values) out += ',' + format_double(v);
    out += ',' + format_double(row.loglik) + '\n';
  }
  return out;
}

inline json estimate_to_json(const EstimateResult& r)
{
  json est = json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) est[r.names[i]] = r.estimates[i];
  return {{"estimates", est},
          {"loglik", finite_or_null(r.loglik)},
          {"iterations", r.trace.size()},
          {"evaluations", r.evaluations},
          {"params", population_to_json(r.params)}};
}

inline json loglik_to_json(const LoglikResult& r, const std::vector<Observation>& data)
{
  json per = json::array();
  for (std::size_t n = 0; n < r.per_person.size(); ++n)
    per.push_back({{"person", data[n].person.id}, {"loglik", finite_or_null(r.per_person[n])}});
  return {{"loglik", finite_or_null(r.total)}, {"persons", r.per_person.size()}, {"per_person", per}};
}

inline json summary_to_json(const SynthSummary& s)
{
  return {{"persons", s.persons},
          {"excluded", s.excluded},
          {"mean_weekly_participation", s.mean_weekly_participation},
          {"mean_one_way_travel_minutes", s.mean_one_way_travel_minutes},
          {"mean_duration_weekday", s.mean_duration_weekday},
          {"mean_duration_weekend", s.mean_duration_weekend},
          {"participation_by_day", s.participation_by_day},
          {"participations_per_week", s.participations_per_week}};
}

}  // namespace needs

#endif
