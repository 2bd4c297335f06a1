#ifndef NEEDS_MODEL_HPP_
#define NEEDS_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "types.hpp"

namespace needs
{

/// Constant factor C = e^{q0} A^{q2} of the production function at attractiveness A.
inline double production_scale(const ProductionSpec& spec, double A)
{
  if (!(A > 0.0)) throw std::domain_error("attractiveness must be positive");
  return std::exp(spec.q0() + spec.q2() * std::log(A));
}

/// Production per unit scale: d^{q1} or the piecewise-linear shape.
inline double production_shape(const ProductionSpec& spec, double d)
{
  if (spec.is_cobb_douglas()) return d == 0.0 ? 0.0 : std::pow(d, spec.q1());
  double total = 0.0;
  for (std::size_t i = 0; i < spec.segments(); ++i) {
    const double lo = spec.segment_begin(i);
    if (d <= lo) break;
    total += spec.slopes()[i] * (std::min(d, spec.segment_end(i)) - lo);
  }
  return total;
}

inline double production(const ProductionSpec& spec, double d, double A, bool participate)
{
  if (!(d >= 0.0)) throw std::domain_error("duration must be non-negative");
  if (!(A > 0.0)) throw std::domain_error("attractiveness must be positive");
  if (!participate) {
    if (d != 0.0) throw std::domain_error("duration must be zero without participation");
    return 0.0;
  }
  if (spec.is_cobb_douglas()) {
    if (d == 0.0) return 0.0;
    return std::exp(spec.q0() + spec.q1() * std::log(d) + spec.q2() * std::log(A));
  }
  return production_scale(spec, A) * production_shape(spec, d);
}

/// Hours needed to produce `q` at scale C (inverse of the production function).
inline double hours_for_production(const ProductionSpec& spec, double C, double q)
{
  if (q <= 0.0) return 0.0;
  const double shape = q / C;
  if (spec.is_cobb_douglas()) return std::pow(shape, 1.0 / spec.q1());
  double remaining = shape;
  double hours = 0.0;
  for (std::size_t i = 0; i < spec.segments(); ++i) {
    const double len = spec.segment_end(i) - spec.segment_begin(i);
    const double seg_cap = spec.slopes()[i] * len;
    if (remaining <= seg_cap) return hours + remaining / spec.slopes()[i];
    remaining -= seg_cap;
    hours += len;
  }
  return hours;  // unreachable: the last segment is unbounded
}

/// Daily consumption rates over the horizon.
inline std::vector<double> consumption_vector(const Horizon& h, const ModelParams& params)
{
  std::vector<double> lam(h.days());
  for (int t = 0; t < h.days(); ++t)
    lam[t] = h.is_weekend(t) ? params.gamma() * params.lambda_weekday() : params.lambda_weekday();
  return lam;
}

namespace detail
{

inline void check_pattern_dims(const ActivityPattern& p, const ScenarioInputs& in, const Horizon& h)
{
  const auto H = static_cast<std::size_t>(h.days());
  if (p.delta.size() != H || p.d.size() != H || p.loc.size() != H)
    throw model_error("pattern length does not match the horizon");
  if (in.free_time.size() != H || in.attractiveness.cols() != H)
    throw model_error("scenario inputs do not match the horizon");
}

inline std::size_t loc_index(const ActivityPattern& p, const ScenarioInputs& in, int t)
{
  const int j = p.loc[t];
  if (j < 0 || static_cast<std::size_t>(j) >= in.n_locations())
    throw model_error("location index out of range on day " + std::to_string(t + 1));
  return static_cast<std::size_t>(j);
}

}  // namespace detail

/// Daily production Q_t of a pattern.
inline std::vector<double> production_vector(const ActivityPattern& p, const ScenarioInputs& in,
                                             const ModelParams& params, const Horizon& h)
{
  detail::check_pattern_dims(p, in, h);
  std::vector<double> Q(h.days(), 0.0);
  for (int t = 0; t < h.days(); ++t) {
    if (!p.delta[t]) continue;
    Q[t] = production(params.production(), p.d[t], in.attractiveness(detail::loc_index(p, in, t), t), true);
  }
  return Q;
}

/// Trajectory from conservation, anchored so that the minimum inventory is 0.
/// Periodicity holds exactly when total production equals total consumption.
inline InventoryTrajectory reconstruct_trajectory(const ActivityPattern& p, const ScenarioInputs& in,
                                                  const ModelParams& params, const Horizon& h)
{
  InventoryTrajectory tr;
  tr.Q = production_vector(p, in, params, h);
  const auto lam = consumption_vector(h, params);
  tr.I.assign(h.days(), 0.0);
  for (int t = 0; t + 1 < h.days(); ++t) tr.I[t + 1] = tr.I[t] + tr.Q[t] - lam[t];
  const double lo = *std::min_element(tr.I.begin(), tr.I.end());
  for (double& v : tr.I) v -= lo;
  tr.I_min = 0.0;
  return tr;
}

/// Trajectory from a production vector with I[anchor] = 0, by forward recursion.
inline InventoryTrajectory trajectory_from_anchor(const std::vector<double>& Q, const std::vector<double>& lam,
                                                  int anchor)
{
  const int H = static_cast<int>(Q.size());
  InventoryTrajectory tr;
  tr.Q = Q;
  tr.I.assign(H, 0.0);
  for (int s = 0; s + 1 < H; ++s) {
    const int t = (anchor + s) % H;
    tr.I[(t + 1) % H] = tr.I[t] + Q[t] - lam[t];
  }
  tr.I_min = *std::min_element(tr.I.begin(), tr.I.end());
  return tr;
}

/// Average daily utility of a pattern and its inventory trajectory.
inline double evaluate_objective(const ActivityPattern& p, const InventoryTrajectory& tr, const ScenarioInputs& in,
                                 const ModelParams& params, const Horizon& h)
{
  detail::check_pattern_dims(p, in, h);
  const int H = h.days();
  if (tr.I.size() != static_cast<std::size_t>(H) || tr.Q.size() != static_cast<std::size_t>(H))
    throw model_error("trajectory length does not match the horizon");
  const auto lam = consumption_vector(h, params);
  double benefit = 0.0;
  double time = 0.0;
  double money = 0.0;
  for (int t = 0; t < H; ++t) {
    benefit += tr.I[t] + tr.Q[t] - 0.5 * lam[t];
    time += p.d[t];
    if (p.delta[t]) {
      const std::size_t j = detail::loc_index(p, in, t);
      time += in.travel_time(j, t);
      money += in.travel_cost(j, t);
    }
  }
  const double i_min = *std::min_element(tr.I.begin(), tr.I.end());
  return params.rho3() / H * benefit - (params.rho1() / H * time + params.rho2() * i_min + money / H);
}

struct Violation
{
  enum class Kind { pattern, location, periodicity, replenish, daily_time };
  Kind kind;
  int day;  // 0-based; -1 when the violation is not tied to a day
  std::string message;
};

struct FeasibilityReport
{
  std::vector<Violation> violations;
  InventoryTrajectory trajectory;

  bool ok() const { return violations.empty(); }
  bool has(Violation::Kind k) const
  {
    return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
  }
  std::vector<int> days_with(Violation::Kind k) const
  {
    std::vector<int> out;
    for (const auto& v : violations)
      if (v.kind == k) out.push_back(v.day);
    return out;
  }
};

struct FeasibilityOptions
{
  double tol = 1e-9;  // absolute slack on every inequality
  // Accept participation with zero duration (the closure of d > 0).
  bool allow_zero_duration = false;
};

/// Checks the four constraint families plus participation/duration consistency.
inline FeasibilityReport check_feasibility(const ActivityPattern& p, const ScenarioInputs& in, const ModelParams& params,
                                           const Horizon& h, FeasibilityOptions opt = {})
{
  const double tol = opt.tol;
  detail::check_pattern_dims(p, in, h);
  FeasibilityReport rep;
  const int H = h.days();
  bool consistent = true;
  for (int t = 0; t < H; ++t) {
    const std::string day = " on day " + std::to_string(t + 1);
    if (p.delta[t] != 0 && p.delta[t] != 1) {
      rep.violations.push_back({Violation::Kind::pattern, t, "participation must be 0 or 1" + day});
      consistent = false;
    } else if (p.delta[t] == 0 && p.d[t] != 0.0) {
      rep.violations.push_back({Violation::Kind::pattern, t, "positive duration without participation" + day});
      consistent = false;
    } else if (p.delta[t] == 1 && !(p.d[t] > 0.0) && !(opt.allow_zero_duration && p.d[t] == 0.0)) {
      rep.violations.push_back({Violation::Kind::pattern, t, "participation without positive duration" + day});
      consistent = false;
    }
    if (p.delta[t] == 1 && (p.loc[t] < 0 || static_cast<std::size_t>(p.loc[t]) >= in.n_locations())) {
      rep.violations.push_back({Violation::Kind::location, t, "location index out of range" + day});
      consistent = false;
    }
  }
  if (!consistent) return rep;

  rep.trajectory = reconstruct_trajectory(p, in, params, h);
  const auto lam = consumption_vector(h, params);
  const auto& I = rep.trajectory.I;
  const auto& Q = rep.trajectory.Q;
  const double total_q = std::accumulate(Q.begin(), Q.end(), 0.0);
  const double total_l = std::accumulate(lam.begin(), lam.end(), 0.0);
  if (std::abs(I[H - 1] + Q[H - 1] - lam[H - 1] - I[0]) > tol * std::max(1.0, total_l))
    rep.violations.push_back({Violation::Kind::periodicity, -1,
                              "total production " + std::to_string(total_q) + " differs from total consumption " +
                                  std::to_string(total_l)});
  for (int t = 0; t < H; ++t) {
    if (I[t] + Q[t] < lam[t] - tol * std::max(1.0, lam[t]))
      rep.violations.push_back({Violation::Kind::replenish, t, "inventory cannot cover consumption on day " +
                                                                   std::to_string(t + 1)});
    if (p.delta[t]) {
      const double tt = in.travel_time(static_cast<std::size_t>(p.loc[t]), t);
      if (p.d[t] + tt > in.free_time[t] + tol)
        rep.violations.push_back({Violation::Kind::daily_time, t, "activity and travel exceed free time on day " +
                                                                      std::to_string(t + 1)});
    }
  }
  return rep;
}

}  // namespace needs

#endif
