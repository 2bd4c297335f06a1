#ifndef NEEDS_SOLVER_HPP_
#define NEEDS_SOLVER_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "conditioned.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "types.hpp"

namespace needs
{

enum class ConditionedMethod
{
  automatic,        // condition-based algorithm when it applies, marginal greedy otherwise
  condition_based,  // linear production with one production rate on every active day
  marginal_greedy,  // any concave piecewise production, day-specific rates
};

class infeasible_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace detail
{

struct KernelResult
{
  bool feasible = false;
  double objective = -std::numeric_limits<double>::infinity();
  int anchor = -1;
  std::vector<double> d;
  std::vector<double> Q;
};

struct KernelScratch
{
  std::vector<int> active;
  std::vector<double> d;
  std::vector<double> Q;
  std::vector<double> I;
  std::vector<double> need;
  std::vector<double> at_pos;
  std::vector<double> suffix;

  struct Slot
  {
    int day;
    int pos;
    double rate;
    double upper;
    double value;
    double q;
  };
  std::vector<Slot> slots;
};

inline KernelScratch& scratch()
{
  thread_local KernelScratch s;
  return s;
}

/// Utility of a balanced production plan with I[anchor] = 0.
inline double kernel_objective(const KernelInput& in, const std::vector<double>& d, const std::vector<double>& Q,
                               int anchor, std::vector<double>& I)
{
  const int H = in.horizon();
  I.assign(H, 0.0);
  for (int s = 0; s + 1 < H; ++s) {
    const int t = (anchor + s) % H;
    I[(t + 1) % H] = I[t] + Q[t] - in.lam[t];
  }
  double benefit = 0.0, time = 0.0, money = 0.0, lo = 0.0;
  for (int t = 0; t < H; ++t) {
    benefit += I[t] + Q[t] - 0.5 * in.lam[t];
    lo = std::min(lo, I[t]);
    time += d[t];
    if (in.delta[t]) {
      time += in.days[t].tt;
      money += in.days[t].tc;
    }
  }
  return in.rho3 / H * benefit - (in.rho1 / H * time + in.rho2 * lo + money / H);
}

inline bool uniform_linear_rate(const KernelInput& in)
{
  if (in.production->segments() != 1) return false;
  double rate = -1.0;
  for (int t = 0; t < in.horizon(); ++t) {
    if (!in.delta[t]) continue;
    if (rate < 0.0)
      rate = in.days[t].scale;
    else if (in.days[t].scale != rate)
      return false;
  }
  return true;
}

/// Condition-based algorithm: for every active anchor day, start from the
/// minimum production that carries each active day to the next, push
/// excess beyond the daily time limit to earlier days, then move duration
/// toward days with larger slope (earlier in the cyclic order from the
/// anchor). The best anchor wins; ties keep the lowest day.
inline void kernel_condition_based(const KernelInput& in, KernelResult& out)
{
  const int H = in.horizon();
  auto& ws = scratch();
  ws.active.clear();
  for (int t = 0; t < H; ++t)
    if (in.delta[t]) ws.active.push_back(t);
  const auto& a = ws.active;
  const int m = static_cast<int>(a.size());
  out.feasible = false;
  out.objective = -std::numeric_limits<double>::infinity();
  if (m == 0) return;
  const double rate = in.days[a[0]].scale * in.production->slopes()[0];

  // Step 1-2 do not depend on the anchor: minimum production that carries
  // each participation day to the next one.
  auto& base = ws.need;
  base.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const int end = i + 1 < m ? a[i + 1] : a[0] + H;
    double q = 0.0;
    for (int t = a[i]; t < end; ++t) q += in.lam[t % H];
    base[i] = q / rate;
  }
  // Pieces of the anchored objective: with I[anchor] = 0 and total balance,
  // V = rho3/H [sum(lam)/2 + sum_t w_t (Q_t - lam_t)] - time and money costs.
  double total = 0.0, first_moment = 0.0, travel_time = 0.0, travel_cost = 0.0;
  for (int t = 0; t < H; ++t) {
    total += in.lam[t];
    first_moment += t * in.lam[t];
  }
  for (int t : a) {
    travel_time += in.days[t].tt;
    travel_cost += in.days[t].tc;
  }

  auto& d = ws.d;
  const int anchor_end = in.anchor_end();
  for (int l = 0; l < m && a[l] < anchor_end; ++l) {
    const int k = a[l];
    d.assign(base.begin(), base.end());
    auto cap = [&](int idx) { return in.days[a[idx]].cap; };
    auto for_each_u = [&](auto&& body) {
      for (int u = l - 1; u >= 0; --u) body(u);
      for (int u = m - 1; u > l; --u) body(u);
    };
    // Step 3: from the last day in cyclic order back toward the anchor, push
    // what exceeds the daily time limit to the preceding participation day.
    for_each_u([&](int u) {
      const int prev = (u - 1 + m) % m;
      const double over = d[u] - cap(u);
      if (over > 0.0) {
        d[prev] += over;
        d[u] = cap(u);
      }
    });
    if (d[l] > cap(l) + 1e-12 * std::max(1.0, cap(l))) continue;
    d[l] = std::min(d[l], cap(l));
    // Step 4: shift toward larger slopes, nearest earlier day first.
    for_each_u([&](int u) {
      auto try_move = [&](int j) {
        const double slack = cap(j) - d[j];
        if (slack > 0.0) {
          const double z = std::min(slack, d[u]);
          d[u] -= z;
          d[j] += z;
        }
        return d[u] > 0.0;
      };
      if (u < l) {
        for (int j = u - 1; j >= 0; --j)
          if (!try_move(j)) return;
        for (int j = m - 1; j >= l; --j)
          if (!try_move(j)) return;
      } else {
        for (int j = u - 1; j >= l; --j)
          if (!try_move(j)) return;
      }
    });
    // Step 5: objective with I[k] = 0.
    double prefix = 0.0;
    for (int t = 0; t < k; ++t) prefix += in.lam[t];
    const double lam_moment = (H - 1) * total - (first_moment - k * total + H * prefix);
    double weighted = 0.0, hours = 0.0;
    for (int i = 0; i < m; ++i) {
      weighted += anchor_weight(a[i], k, H) * rate * d[i];
      hours += d[i];
    }
    const double v = in.rho3 / H * (0.5 * total + weighted - lam_moment) -
                     (in.rho1 / H * (hours + travel_time) + travel_cost / H);
    if (v > out.objective) {
      out.feasible = true;
      out.objective = v;
      out.anchor = k;
      out.d.assign(H, 0.0);
      out.Q.assign(H, 0.0);
      for (int i = 0; i < m; ++i) {
        out.d[a[i]] = d[i];
        out.Q[a[i]] = rate * d[i];
      }
    }
  }
}

/// Greedy over (day, segment) production slots in decreasing marginal
/// utility, each filled as far as the inventory constraints allow. For a
/// fixed anchor the feasible productions form a polymatroid base polytope
/// (box plus nested suffix bounds), so the greedy fill is optimal.
inline void kernel_marginal_greedy(const KernelInput& in, KernelResult& out)
{
  const int H = in.horizon();
  const auto& spec = *in.production;
  auto& ws = scratch();
  out.feasible = false;
  out.objective = -std::numeric_limits<double>::infinity();
  const double total = std::accumulate(in.lam.begin(), in.lam.end(), 0.0);
  const double tol = 1e-12 * std::max(1.0, total);

  for (int k = 0; k < in.anchor_end(); ++k) {
    if (!in.delta[k]) continue;
    ws.slots.clear();
    for (int t = 0; t < H; ++t) {
      if (!in.delta[t]) continue;
      const int pos = (t - k + H) % H;
      const double w = anchor_weight(t, k, H) * in.rho3 / H;
      for (std::size_t s = 0; s < spec.segments(); ++s) {
        const double len = std::min(spec.segment_end(s), in.days[t].cap) - spec.segment_begin(s);
        if (len <= 0.0) break;
        const double rate = in.days[t].scale * spec.slopes()[s];
        ws.slots.push_back({t, pos, rate, rate * len, w - in.rho1 / (H * rate), 0.0});
      }
    }
    std::stable_sort(ws.slots.begin(), ws.slots.end(), [](const auto& x, const auto& y) {
      if (x.value != y.value) return x.value > y.value;
      return x.pos < y.pos;
    });
    ws.need.assign(H, 0.0);
    double cum = 0.0;
    for (int j = 0; j < H; ++j) {
      cum += in.lam[(k + j) % H];
      ws.need[j] = cum;
    }
    ws.at_pos.assign(H, 0.0);
    ws.suffix.assign(H + 1, 0.0);
    double placed = 0.0;
    for (auto& slot : ws.slots) {
      double allowed = std::min(slot.upper, total - placed);
      // Production at position p may only cover consumption at p or later:
      // for every j < p, production after j is bounded by consumption after j.
      ws.suffix[H] = 0.0;
      for (int j = H - 1; j >= 0; --j) ws.suffix[j] = ws.suffix[j + 1] + ws.at_pos[j];
      for (int j = 0; j < slot.pos; ++j) allowed = std::min(allowed, total - ws.need[j] - ws.suffix[j + 1]);
      slot.q = std::max(0.0, allowed);
      ws.at_pos[slot.pos] += slot.q;
      placed += slot.q;
    }
    if (placed < total - tol) continue;
    ws.d.assign(H, 0.0);
    ws.Q.assign(H, 0.0);
    for (const auto& slot : ws.slots) {
      ws.d[slot.day] += slot.q / slot.rate;
      ws.Q[slot.day] += slot.q;
    }
    for (int t = 0; t < H; ++t) ws.d[t] = std::min(ws.d[t], in.days[t].cap);
    const double v = kernel_objective(in, ws.d, ws.Q, k, ws.I);
    if (v > out.objective) {
      out.feasible = true;
      out.objective = v;
      out.anchor = k;
      out.d = ws.d;
      out.Q = ws.Q;
    }
  }
}

inline void solve_kernel(const KernelInput& in, ConditionedMethod method, KernelResult& out)
{
  if (!in.production->is_piecewise()) throw std::invalid_argument("solver kernels need piecewise production");
  for (std::size_t t = 0; t < in.delta.size(); ++t)
    if (in.delta[t] && in.days[t].cap < 0.0) {  // travel alone exceeds free time
      out.feasible = false;
      out.objective = -std::numeric_limits<double>::infinity();
      return;
    }
  if (method == ConditionedMethod::automatic)
    method = uniform_linear_rate(in) ? ConditionedMethod::condition_based : ConditionedMethod::marginal_greedy;
  if (method == ConditionedMethod::condition_based) {
    if (!uniform_linear_rate(in))
      throw std::invalid_argument("condition-based algorithm needs one linear production rate on all active days");
    kernel_condition_based(in, out);
  } else {
    kernel_marginal_greedy(in, out);
  }
}

inline SolveResult kernel_to_result(const ConditionedProblem& prob, const KernelResult& kr)
{
  SolveResult r;
  r.pattern.delta = prob.delta;
  r.pattern.loc = prob.loc;
  r.pattern.d = kr.d;
  const auto lam = consumption_vector(prob.horizon, prob.params);
  r.trajectory = trajectory_from_anchor(kr.Q, lam, kr.anchor);
  r.objective = evaluate_objective(r.pattern, r.trajectory, prob.inputs, prob.params, prob.horizon);
  r.weeks = prob.horizon.whole_weeks() ? prob.horizon.days() / 7 : 1;
  r.anchor = kr.anchor;
  return r;
}

}  // namespace detail

/// Optimal durations for fixed participation and locations; nullopt when no
/// anchor day admits a feasible plan. Cobb-Douglas production is handed to
/// the projected-gradient oracle.
inline std::optional<SolveResult> solve_conditioned(const ConditionedProblem& prob,
                                                    ConditionedMethod method = ConditionedMethod::automatic)
{
  if (prob.active_days() == 0) return std::nullopt;
  if (prob.params.production().is_cobb_douglas()) return oracle_gradient(prob);
  const auto terms = day_terms(prob);
  const auto lam = consumption_vector(prob.horizon, prob.params);
  KernelInput in{lam, prob.delta, terms, &prob.params.production(), prob.params.rho1(), prob.params.rho2(),
                 prob.params.rho3()};
  detail::KernelResult kr;
  detail::solve_kernel(in, method, kr);
  if (!kr.feasible) return std::nullopt;
  return detail::kernel_to_result(prob, kr);
}

/// Conditioned solve where the weekly participation and locations repeat
/// until the per-day objective is non-negative (or `max_weeks` is reached,
/// in which case the last horizon is returned).
inline std::optional<SolveResult> solve_conditioned_multiweek(const ConditionedProblem& week, int max_weeks = 8,
                                                              ConditionedMethod method = ConditionedMethod::automatic)
{
  auto r = solve_conditioned(week, method);
  for (int k = 2; k <= max_weeks && r && r->objective < 0.0; ++k) {
    std::vector<int> delta, loc;
    for (int w = 0; w < k; ++w) {
      delta.insert(delta.end(), week.delta.begin(), week.delta.end());
      loc.insert(loc.end(), week.loc.begin(), week.loc.end());
    }
    const ConditionedProblem longer(delta, loc, week.inputs.repeated(k), week.params, week.horizon.repeated(k));
    r = solve_conditioned(longer, method);
    if (r) r->weeks = k;
  }
  return r;
}

struct FullSolveOptions
{
  unsigned threads = 1;
  // Horizons up to this length enumerate every participation vector;
  // longer ones use branch and bound on the same anchored subproblems.
  int exhaustive_max_days = 14;
};

namespace detail
{

struct Candidate
{
  double objective = -std::numeric_limits<double>::infinity();
  std::vector<int> delta;
  std::vector<int> loc;
  bool found = false;
};

// Anchored branch and bound over participation for one location vector.
// The bound relaxes delta_t to d_t / cap_t, which charges the travel
// terms of undecided days per hour of activity.
class ParticipationSearch
{
public:
  ParticipationSearch(const ScenarioInputs& in, const ModelParams& params, const Horizon& h, std::vector<int> loc)
    : in_(in), params_(params), h_(h), loc_(std::move(loc)), lam_(consumption_vector(h, params))
  {
    const int H = h.days();
    terms_.resize(H);
    for (int t = 0; t < H; ++t) {
      const auto j = static_cast<std::size_t>(loc_[t]);
      DayTerm& dt = terms_[t];
      dt.tt = in.travel_time(j, t);
      dt.tc = in.travel_cost(j, t);
      dt.cap = activity_capacity(in.free_time[t], dt.tt);
      dt.scale = production_scale(params.production(), in.attractiveness(j, t));
    }
    total_ = std::accumulate(lam_.begin(), lam_.end(), 0.0);
  }

  void run(Candidate& best)
  {
    const int H = h_.days();
    state_.assign(H, -1);
    for (int k = 0; k < H; ++k) {
      if (terms_[k].cap <= 0.0) continue;
      std::fill(state_.begin(), state_.end(), -1);
      state_[k] = 1;
      // Days between k and the previous... every day before k in index order
      // could also be the minimum; anchoring at k covers plans whose minimum is k.
      branch(k, 1, best);
    }
  }

private:
  // Returns the relaxed bound for the current partial assignment.
  double bound(int anchor, bool& feasible) const
  {
    const int H = h_.days();
    const auto& spec = params_.production();
    struct Slot
    {
      int pos;
      double upper;
      double value;
    };
    std::vector<Slot> slots;
    double fixed = 0.0;
    for (int t = 0; t < H; ++t) {
      if (state_[t] == 0) continue;
      const DayTerm& dt = terms_[t];
      const double c = (params_.rho1() * dt.tt + dt.tc) / H;
      if (state_[t] == 1) fixed -= c;
      if (dt.cap <= 0.0) continue;
      const int pos = (t - anchor + H) % H;
      const double w = anchor_weight(t, anchor, H) * params_.rho3() / H;
      for (std::size_t s = 0; s < spec.segments(); ++s) {
        const double len = std::min(spec.segment_end(s), dt.cap) - spec.segment_begin(s);
        if (len <= 0.0) break;
        const double rate = dt.scale * spec.slopes()[s];
        double value = w - params_.rho1() / (H * rate);
        if (state_[t] == -1) value -= c / (dt.cap * rate);
        slots.push_back({pos, rate * len, value});
      }
    }
    std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
      if (a.value != b.value) return a.value > b.value;
      return a.pos < b.pos;
    });
    std::vector<double> need(H), at_pos(H, 0.0), suffix(H + 1, 0.0);
    double cum = 0.0;
    for (int j = 0; j < H; ++j) {
      cum += lam_[(anchor + j) % H];
      need[j] = cum;
    }
    double placed = 0.0, value = 0.0;
    for (const auto& s : slots) {
      double allowed = std::min(s.upper, total_ - placed);
      suffix[H] = 0.0;
      for (int j = H - 1; j >= 0; --j) suffix[j] = suffix[j + 1] + at_pos[j];
      for (int j = 0; j < s.pos; ++j) allowed = std::min(allowed, total_ - need[j] - suffix[j + 1]);
      allowed = std::max(0.0, allowed);
      at_pos[s.pos] += allowed;
      placed += allowed;
      value += allowed * s.value;
    }
    feasible = placed >= total_ - 1e-12 * std::max(1.0, total_);
    double constant = 0.0;
    for (int t = 0; t < H; ++t) constant += (0.5 - anchor_weight(t, anchor, H)) * lam_[t];
    return params_.rho3() / H * constant + value + fixed;
  }

  void branch(int anchor, int depth, Candidate& best)
  {
    const int H = h_.days();
    bool feasible = false;
    const double ub = bound(anchor, feasible);
    if (!feasible || ub <= best.objective + 1e-12 * std::max(1.0, std::abs(best.objective))) return;
    if (depth == H) {
      std::vector<int> delta(H);
      for (int t = 0; t < H; ++t) delta[t] = state_[t] == 1 ? 1 : 0;
      const ConditionedProblem prob(delta, loc_, in_, params_, h_);
      const auto r = solve_conditioned(prob, ConditionedMethod::marginal_greedy);
      if (r && r->objective > best.objective) {
        best.objective = r->objective;
        best.delta = delta;
        best.loc = loc_;
        best.found = true;
      }
      return;
    }
    const int t = (anchor + depth) % H;
    for (int choice : {1, 0}) {
      if (choice == 1 && terms_[t].cap <= 0.0) continue;
      state_[t] = choice;
      branch(anchor, depth + 1, best);
    }
    state_[t] = -1;
  }

  const ScenarioInputs& in_;
  const ModelParams& params_;
  const Horizon& h_;
  std::vector<int> loc_;
  std::vector<double> lam_;
  std::vector<DayTerm> terms_;
  std::vector<int> state_;
  double total_ = 0.0;
};

}  // namespace detail

/// Unconditioned optimum: best conditioned solution over every participation
/// vector (and every single location under the single-location policy).
/// Ties go to the lexicographically smallest participation vector, then the
/// smallest location index.
inline std::optional<SolveResult> solve_full(const ScenarioInputs& inputs, const ModelParams& params, const Horizon& h,
                                             const LocationPolicy& policy = LocationPolicy::single(),
                                             FullSolveOptions opt = {})
{
  inputs.validate();
  const int H = h.days();
  if (inputs.days() != H) throw model_error("scenario inputs do not match the horizon");
  std::vector<std::vector<int>> loc_vectors;
  if (policy.kind == LocationPolicy::Kind::fixed_vector) {
    if (policy.loc.size() != static_cast<std::size_t>(H)) throw model_error("location vector must span the horizon");
    loc_vectors.push_back(policy.loc);
  } else {
    for (std::size_t j = 0; j < inputs.n_locations(); ++j) loc_vectors.emplace_back(H, static_cast<int>(j));
  }

  detail::Candidate best;
  if (H <= opt.exhaustive_max_days || params.production().is_cobb_douglas()) {
    if (H > 24) throw std::invalid_argument("exhaustive participation search is limited to 24 days");
    const std::size_t n_masks = (std::size_t{1} << H) - 1;
    const std::size_t n_loc = loc_vectors.size();
    std::vector<double> values(n_masks * n_loc, -std::numeric_limits<double>::infinity());
    const auto lam = consumption_vector(h, params);
    parallel_for(n_masks, opt.threads, [&](std::size_t idx) {
      const std::size_t mask = idx + 1;
      std::vector<int> delta(H);
      for (int t = 0; t < H; ++t) delta[t] = static_cast<int>((mask >> (H - 1 - t)) & 1u);
      for (std::size_t li = 0; li < n_loc; ++li) {
        const auto& loc = loc_vectors[li];
        if (params.production().is_cobb_douglas()) {
          const ConditionedProblem prob(delta, loc, inputs, params, h);
          if (auto r = oracle_gradient(prob)) values[idx * n_loc + li] = r->objective;
          continue;
        }
        std::vector<DayTerm> terms(H);
        for (int t = 0; t < H; ++t) {
          if (!delta[t]) continue;
          const auto j = static_cast<std::size_t>(loc[t]);
          terms[t].tt = inputs.travel_time(j, t);
          terms[t].tc = inputs.travel_cost(j, t);
          terms[t].cap = activity_capacity(inputs.free_time[t], terms[t].tt);
          terms[t].scale = production_scale(params.production(), inputs.attractiveness(j, t));
        }
        KernelInput kin{lam, delta, terms, &params.production(), params.rho1(), params.rho2(), params.rho3()};
        detail::KernelResult kr;
        detail::solve_kernel(kin, ConditionedMethod::automatic, kr);
        if (kr.feasible) values[idx * n_loc + li] = kr.objective;
      }
    });
    // Masks increase in lexicographic order of the participation vector.
    for (std::size_t idx = 0; idx < n_masks; ++idx)
      for (std::size_t li = 0; li < n_loc; ++li)
        if (values[idx * n_loc + li] > best.objective) {
          best.objective = values[idx * n_loc + li];
          best.found = true;
          const std::size_t mask = idx + 1;
          best.delta.assign(H, 0);
          for (int t = 0; t < H; ++t) best.delta[t] = static_cast<int>((mask >> (H - 1 - t)) & 1u);
          best.loc = loc_vectors[li];
        }
  } else {
    for (const auto& loc : loc_vectors) {
      detail::ParticipationSearch search(inputs, params, h, loc);
      search.run(best);
    }
  }
  if (!best.found) return std::nullopt;
  const ConditionedProblem prob(best.delta, best.loc, inputs, params, h);
  return solve_conditioned(prob);
}

struct MultiweekOptions
{
  int max_weeks = 8;
  LocationPolicy policy = LocationPolicy::single();
  FullSolveOptions full;
};

/// Extends the horizon a week at a time, repeating the weekly inputs, until
/// the optimal per-day utility is non-negative.
inline SolveResult solve_multiweek(const ScenarioInputs& week_inputs, const ModelParams& params, const Horizon& base_week,
                                   MultiweekOptions opt = {})
{
  if (base_week.days() != 7) throw model_error("multi-week modeling starts from a 7-day horizon");
  for (int k = 1; k <= opt.max_weeks; ++k) {
    const Horizon h = base_week.repeated(k);
    const ScenarioInputs in = week_inputs.repeated(k);
    LocationPolicy policy = opt.policy;
    if (policy.kind == LocationPolicy::Kind::fixed_vector) {
      std::vector<int> loc;
      for (int w = 0; w < k; ++w) loc.insert(loc.end(), opt.policy.loc.begin(), opt.policy.loc.end());
      policy.loc = loc;
    }
    auto r = solve_full(in, params, h, policy, opt.full);
    if (!r) throw infeasible_error("no feasible participation pattern over " + std::to_string(7 * k) + " days");
    if (r->objective >= 0.0) {
      r->weeks = k;
      return *r;
    }
  }
  throw infeasible_error("no non-negative horizon found within " + std::to_string(opt.max_weeks) + " weeks");
}

}  // namespace needs

#endif
