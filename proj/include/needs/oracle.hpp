#ifndef NEEDS_ORACLE_HPP_
#define NEEDS_ORACLE_HPP_

// Slow reference solvers for the conditioned duration problem. They share
// nothing with the production solver beyond model-core evaluation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "conditioned.hpp"
#include "model.hpp"
#include "types.hpp"

namespace needs
{

/// Location handling when the participation vector is enumerated.
struct LocationPolicy
{
  enum class Kind { single_location, fixed_vector };
  Kind kind = Kind::single_location;
  std::vector<int> loc;  // used by fixed_vector

  static LocationPolicy single() { return {}; }
  static LocationPolicy fixed(std::vector<int> loc) { return {Kind::fixed_vector, std::move(loc)}; }
};

namespace detail
{

inline SolveResult finish_from_durations(const ConditionedProblem& prob, std::vector<double> d, int anchor)
{
  SolveResult r;
  r.pattern.delta = prob.delta;
  r.pattern.loc = prob.loc;
  r.pattern.d = std::move(d);
  r.trajectory = reconstruct_trajectory(r.pattern, prob.inputs, prob.params, prob.horizon);
  r.objective = evaluate_objective(r.pattern, r.trajectory, prob.inputs, prob.params, prob.horizon);
  r.weeks = prob.horizon.whole_weeks() ? prob.horizon.days() / 7 : 1;
  r.anchor = anchor;
  return r;
}

}  // namespace detail

/// Exhaustive search over durations on {0, step, 2 step, ..., FT - TT} for
/// every active day but the last, whose duration is pinned by total balance.
/// Optimal up to O(step).
inline std::optional<SolveResult> oracle_grid(const ConditionedProblem& prob, double step = 1e-2)
{
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  const int H = prob.horizon.days();
  std::vector<int> active;
  for (int t = 0; t < H; ++t)
    if (prob.delta[t]) active.push_back(t);
  if (active.empty()) return std::nullopt;
  if (active.size() > 5) throw std::invalid_argument("oracle_grid handles at most 5 active days");

  const auto& spec = prob.params.production();
  const auto lam = consumption_vector(prob.horizon, prob.params);
  const double total = std::accumulate(lam.begin(), lam.end(), 0.0);
  std::vector<double> cap(H, 0.0), scale(H, 0.0);
  std::vector<std::vector<double>> grid(H);
  for (int t : active) {
    const auto j = static_cast<std::size_t>(prob.loc[t]);
    cap[t] = activity_capacity(prob.inputs.free_time[t], prob.inputs.travel_time(j, t));
    if (cap[t] < 0.0) return std::nullopt;
    scale[t] = production_scale(spec, prob.inputs.attractiveness(j, t));
    for (int g = 0; g * step < cap[t]; ++g) grid[t].push_back(g * step);
    grid[t].push_back(cap[t]);
  }

  ActivityPattern p;
  p.delta = prob.delta;
  p.loc = prob.loc;
  p.d.assign(H, 0.0);
  const FeasibilityOptions opt{1e-9, true};
  std::optional<SolveResult> best;

  const std::size_t free_days = active.size() - 1;
  const int pinned = active.back();
  auto visit = [&](auto&& self, std::size_t level, double produced) -> void {
    if (level == free_days) {
      const double rest = total - produced;
      const double d = hours_for_production(spec, scale[pinned], rest);
      if (d > cap[pinned] + 1e-12) return;
      p.d[pinned] = std::min(d, cap[pinned]);
      const auto rep = check_feasibility(p, prob.inputs, prob.params, prob.horizon, opt);
      if (!rep.ok()) return;
      const double v = evaluate_objective(p, rep.trajectory, prob.inputs, prob.params, prob.horizon);
      if (!best || v > best->objective) {
        best = SolveResult{};
        best->pattern = p;
        best->trajectory = rep.trajectory;
        best->objective = v;
        best->weeks = prob.horizon.whole_weeks() ? H / 7 : 1;
        const auto it = std::find(rep.trajectory.I.begin(), rep.trajectory.I.end(), 0.0);
        best->anchor = static_cast<int>(it - rep.trajectory.I.begin());
      }
      return;
    }
    const int t = active[level];
    for (double d : grid[t]) {
      const double q = production_scale(spec, prob.inputs.attractiveness(static_cast<std::size_t>(prob.loc[t]), t)) *
                       production_shape(spec, d);
      if (produced + q > total * (1.0 + 1e-12)) break;
      p.d[t] = d;
      self(self, level + 1, produced + q);
    }
    p.d[t] = 0.0;
  };
  visit(visit, 0, 0.0);
  return best;
}

struct GradientDiagnostics
{
  double kkt_residual = 0.0;  // sup-norm of x - P(x + grad f) at the returned anchor
  int iterations = 0;
  int anchor = -1;
};

namespace detail
{

// Concave maximization over {0 <= x <= u, sum x = total, prefix sums >= L}
// in production space, one variable per (active day, segment) or per active
// day for Cobb-Douglas.
class ProductionPolytopeAscent
{
public:
  struct Var
  {
    int day;
    int pos;       // position of the day in the cyclic order starting at the anchor
    double upper;  // production capacity
    double linear; // benefit per unit of production
    double rate;   // production per hour (piecewise) or the scale C (Cobb-Douglas)
  };

  ProductionPolytopeAscent(std::vector<Var> vars, std::vector<double> prefix_need, double total, double time_value,
                           const ProductionSpec& spec)
    : vars_(std::move(vars)), need_(std::move(prefix_need)), total_(total), time_value_(time_value), spec_(spec)
  {
  }

  bool feasible() const
  {
    // Filling the earliest positions first maximizes every prefix sum.
    const int H = static_cast<int>(need_.size()) + 1;
    std::vector<double> cap_at(H, 0.0);
    for (const auto& v : vars_) cap_at[v.pos] += v.upper;
    double cum = 0.0;
    for (int j = 0; j + 1 < H; ++j) {
      cum += cap_at[j];
      if (std::min(cum, total_) < need_[j] - 1e-9 * std::max(1.0, total_)) return false;
    }
    return cum + cap_at[H - 1] >= total_ - 1e-9 * std::max(1.0, total_);
  }

  double value(const std::vector<double>& x) const
  {
    double f = 0.0;
    for (std::size_t i = 0; i < vars_.size(); ++i) f += vars_[i].linear * x[i] - time_value_ * hours(i, x[i]);
    return f;
  }

  double hours(std::size_t i, double q) const
  {
    if (q <= 0.0) return 0.0;
    if (spec_.is_cobb_douglas()) return std::pow(q / vars_[i].rate, 1.0 / spec_.q1());
    return q / vars_[i].rate;
  }

  std::vector<double> gradient(const std::vector<double>& x) const
  {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double dh;
      if (spec_.is_cobb_douglas()) {
        const double e = 1.0 / spec_.q1();
        dh = x[i] <= 0.0 ? 0.0 : e * std::pow(x[i] / vars_[i].rate, e - 1.0) / vars_[i].rate;
      } else {
        dh = 1.0 / vars_[i].rate;
      }
      g[i] = vars_[i].linear - time_value_ * dh;
    }
    return g;
  }

  /// Euclidean projection by Dykstra's alternating projections.
  std::vector<double> project(const std::vector<double>& y0) const
  {
    const std::size_t n = vars_.size();
    const std::size_t n_sets = 2 + need_.size();
    std::vector<std::vector<double>> incr(n_sets, std::vector<double>(n, 0.0));
    std::vector<double> x = y0, y(n), prev(n);
    const double scale = std::max(1.0, total_);
    for (int sweep = 0; sweep < 200000; ++sweep) {
      prev = x;
      for (std::size_t s = 0; s < n_sets; ++s) {
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + incr[s][i];
        project_onto(s, y, x);
        for (std::size_t i = 0; i < n; ++i) incr[s][i] = y[i] - x[i];
      }
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(x[i] - prev[i]));
      if (change <= 1e-15 * scale && max_violation(x) <= 1e-12 * scale) break;
    }
    return x;
  }

  double max_violation(const std::vector<double>& x) const
  {
    double viol = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      viol = std::max({viol, -x[i], x[i] - vars_[i].upper});
      sum += x[i];
    }
    viol = std::max(viol, std::abs(sum - total_));
    for (std::size_t j = 0; j < need_.size(); ++j) viol = std::max(viol, need_[j] - prefix(x, static_cast<int>(j)));
    return viol;
  }

  std::vector<double> front_fill() const
  {
    std::vector<std::size_t> order(vars_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vars_[a].pos < vars_[b].pos; });
    std::vector<double> x(vars_.size(), 0.0);
    double left = total_;
    for (auto i : order) {
      x[i] = std::min(vars_[i].upper, left);
      left -= x[i];
    }
    return x;
  }

  /// Projected gradient ascent with Armijo backtracking along the projection arc.
  std::vector<double> maximize(double& kkt, int& iterations) const
  {
    std::vector<double> x = project(front_fill());
    double fx = value(x);
    double alpha = 1.0;
    iterations = 0;
    for (; iterations < 20000; ++iterations) {
      const auto g = gradient(x);
      kkt = mapping_norm(x, g);
      if (kkt < 1e-8) break;
      alpha = std::min(alpha * 4.0, 1e6);
      bool moved = false;
      for (int bt = 0; bt < 80; ++bt) {
        std::vector<double> trial(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + alpha * g[i];
        trial = project(trial);
        double dir = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) dir += g[i] * (trial[i] - x[i]);
        const double ft = value(trial);
        if (ft >= fx + 1e-4 * dir) {
          moved = ft > fx || dir > 0.0;
          x = std::move(trial);
          fx = ft;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
    kkt = mapping_norm(x, gradient(x));
    return x;
  }

  const std::vector<Var>& vars() const { return vars_; }

private:
  double prefix(const std::vector<double>& x, int j) const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (vars_[i].pos <= j) s += x[i];
    return s;
  }

  double mapping_norm(const std::vector<double>& x, const std::vector<double>& g) const
  {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + g[i];
    const auto p = project(y);
    double r = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(x[i] - p[i]));
    return r;
  }

  void project_onto(std::size_t s, const std::vector<double>& y, std::vector<double>& x) const
  {
    const std::size_t n = y.size();
    if (s == 0) {
      for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(y[i], 0.0, vars_[i].upper);
      return;
    }
    if (s == 1) {
      const double shift = (total_ - std::accumulate(y.begin(), y.end(), 0.0)) / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = y[i] + shift;
      return;
    }
    const int j = static_cast<int>(s - 2);
    double dot = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (vars_[i].pos <= j) {
        dot += y[i];
        ++count;
      }
    x = y;
    if (dot >= need_[j] || count == 0) return;
    const double shift = (need_[j] - dot) / count;
    for (std::size_t i = 0; i < n; ++i)
      if (vars_[i].pos <= j) x[i] += shift;
  }

  std::vector<Var> vars_;
  std::vector<double> need_;
  double total_;
  double time_value_;
  const ProductionSpec& spec_;
};

}  // namespace detail

/// Projected gradient ascent on the conditioned problem, one concave program
/// per candidate anchor day (the day holding the inventory minimum).
inline std::optional<SolveResult> oracle_gradient(const ConditionedProblem& prob, GradientDiagnostics* diag = nullptr)
{
  const auto& spec = prob.params.production();
  const int H = prob.horizon.days();
  const auto lam = consumption_vector(prob.horizon, prob.params);
  const double total = std::accumulate(lam.begin(), lam.end(), 0.0);
  const auto terms = day_terms(prob);
  for (int t = 0; t < H; ++t)
    if (prob.delta[t] && terms[t].cap < 0.0) return std::nullopt;
  const double rho1 = prob.params.rho1(), rho3 = prob.params.rho3();

  std::optional<SolveResult> best;
  for (int k = 0; k < H; ++k) {
    if (!prob.delta[k]) continue;
    std::vector<detail::ProductionPolytopeAscent::Var> vars;
    for (int t = 0; t < H; ++t) {
      if (!prob.delta[t]) continue;
      const int pos = (t - k + H) % H;
      const double w = anchor_weight(t, k, H) * rho3 / H;
      const double cap = terms[t].cap;
      const double C = terms[t].scale;
      if (spec.is_cobb_douglas()) {
        vars.push_back({t, pos, C * std::pow(cap, spec.q1()), w, C});
      } else {
        for (std::size_t s = 0; s < spec.segments(); ++s) {
          const double len = std::max(0.0, std::min(spec.segment_end(s), cap) - spec.segment_begin(s));
          if (len <= 0.0) break;
          const double rate = C * spec.slopes()[s];
          vars.push_back({t, pos, rate * len, w, rate});
        }
      }
    }
    std::vector<double> need(H - 1);
    double cum = 0.0;
    for (int j = 0; j + 1 < H; ++j) {
      cum += lam[(k + j) % H];
      need[j] = cum;
    }
    detail::ProductionPolytopeAscent prog(vars, need, total, rho1 / H, spec);
    if (vars.empty() || !prog.feasible()) continue;
    double kkt = 0.0;
    int iters = 0;
    const auto x = prog.maximize(kkt, iters);
    std::vector<double> d(H, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) d[prog.vars()[i].day] += prog.hours(i, std::max(0.0, x[i]));
    for (int t = 0; t < H; ++t) d[t] = std::min(d[t], terms[t].cap);
    auto cand = detail::finish_from_durations(prob, std::move(d), k);
    if (!best || cand.objective > best->objective) {
      best = std::move(cand);
      if (diag) *diag = {kkt, iters, k};
    }
  }
  return best;
}

/// Full enumeration of participation (and, for the fixed policy, the given
/// locations) with oracle_grid on each pattern. Tiny instances only.
inline std::optional<SolveResult> oracle_full_tiny(const ScenarioInputs& inputs, const ModelParams& params,
                                                   const Horizon& h, const LocationPolicy& policy, double step = 1e-2)
{
  const int H = h.days();
  if (H > 4 || inputs.n_locations() > 3) throw std::invalid_argument("oracle_full_tiny is limited to H <= 4 and 3 locations");
  std::vector<std::vector<int>> loc_vectors;
  if (policy.kind == LocationPolicy::Kind::fixed_vector) {
    loc_vectors.push_back(policy.loc);
  } else {
    for (std::size_t j = 0; j < inputs.n_locations(); ++j) loc_vectors.emplace_back(H, static_cast<int>(j));
  }
  std::optional<SolveResult> best;
  for (unsigned mask = 1; mask < (1u << H); ++mask) {
    std::vector<int> delta(H);
    for (int t = 0; t < H; ++t) delta[t] = (mask >> (H - 1 - t)) & 1u;
    for (const auto& loc : loc_vectors) {
      const ConditionedProblem prob(delta, loc, inputs, params, h);
      auto r = oracle_grid(prob, step);
      if (r && (!best || r->objective > best->objective)) best = std::move(r);
    }
  }
  return best;
}

}  // namespace needs

#endif
