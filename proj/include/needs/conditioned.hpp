#ifndef NEEDS_CONDITIONED_HPP_
#define NEEDS_CONDITIONED_HPP_

#include <algorithm>
#include <span>
#include <vector>

#include "model.hpp"
#include "types.hpp"

namespace needs
{

/// Deterministic model with participation and locations fixed; only
/// durations are free.
struct ConditionedProblem
{
  std::vector<int> delta;
  std::vector<int> loc;
  ScenarioInputs inputs;
  ModelParams params;
  Horizon horizon;

  ConditionedProblem(std::vector<int> delta_, std::vector<int> loc_, ScenarioInputs inputs_, ModelParams params_,
                     Horizon horizon_)
    : delta(std::move(delta_)), loc(std::move(loc_)), inputs(std::move(inputs_)), params(std::move(params_)),
      horizon(std::move(horizon_))
  {
    const auto H = static_cast<std::size_t>(horizon.days());
    if (delta.size() != H || loc.size() != H) throw model_error("participation/location vectors must span the horizon");
    inputs.validate();
    if (inputs.free_time.size() != H) throw model_error("scenario inputs do not match the horizon");
    for (std::size_t t = 0; t < H; ++t) {
      if (delta[t] != 0 && delta[t] != 1) throw model_error("participation must be 0 or 1");
      if (delta[t] && (loc[t] < 0 || static_cast<std::size_t>(loc[t]) >= inputs.n_locations()))
        throw model_error("location index out of range");
    }
  }

  int active_days() const
  {
    int n = 0;
    for (int x : delta) n += x;
    return n;
  }
};

/// Per-day terms of a conditioned problem. Inactive days carry zeros.
/// Hours left for the activity after travel. Negative when travel alone
/// exceeds free time, which makes participation on that day infeasible;
/// rounding noise around zero is treated as zero.
inline double activity_capacity(double free_time, double travel_time)
{
  const double c = free_time - travel_time;
  return c < 0.0 && c >= -1e-12 * std::max(1.0, free_time) ? 0.0 : c;
}

struct DayTerm
{
  double cap = 0.0;    // FT - TT; negative when the day cannot be used
  double scale = 0.0;  // C = e^{q0} A^{q2}
  double tt = 0.0;     // two-way travel time
  double tc = 0.0;     // two-way travel cost
};

/// Flat view consumed by the solver kernels.
struct KernelInput
{
  std::span<const double> lam;
  std::span<const int> delta;
  std::span<const DayTerm> days;
  const ProductionSpec* production = nullptr;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 0.0;
  // Anchors are tried on days [0, anchor_days). Inputs that repeat with a
  // period p only need anchors in the first period.
  int anchor_days = -1;

  int horizon() const { return static_cast<int>(lam.size()); }
  int anchor_end() const { return anchor_days < 0 ? horizon() : std::min(anchor_days, horizon()); }
};

inline std::vector<DayTerm> day_terms(const ConditionedProblem& prob)
{
  const int H = prob.horizon.days();
  std::vector<DayTerm> out(H);
  for (int t = 0; t < H; ++t) {
    if (!prob.delta[t]) continue;
    const auto j = static_cast<std::size_t>(prob.loc[t]);
    DayTerm& dt = out[t];
    dt.tt = prob.inputs.travel_time(j, t);
    dt.tc = prob.inputs.travel_cost(j, t);
    dt.cap = activity_capacity(prob.inputs.free_time[t], dt.tt);
    dt.scale = production_scale(prob.params.production(), prob.inputs.attractiveness(j, t));
  }
  return out;
}

/// Benefit weight of day t when I[anchor] = 0: the number of later days in
/// the cyclic order that still hold its production, i.e. H - 1 - position.
inline int anchor_weight(int t, int anchor, int H)
{
  const int pos = (t - anchor + H) % H;
  return H - 1 - pos;
}

/// Marginal utility of one more hour on each day for a linear production
/// rate C*p1 with the inventory minimum on `anchor` (0-based days). This is
/// the gradient on the balanced manifold, i.e. after eliminating total
/// production through total consumption.
inline std::vector<double> slopes(int anchor, double C, double p1, const ModelParams& params, const Horizon& h)
{
  const int H = h.days();
  if (anchor < 0 || anchor >= H) throw model_error("anchor day out of range");
  std::vector<double> out(H);
  for (int t = 0; t < H; ++t)
    out[t] = anchor_weight(t, anchor, H) * C * p1 * params.rho3() / H - params.rho1() / H;
  return out;
}

/// Objective written around the anchor day after substituting total
/// balance (valid at any pattern whose production equals consumption).
inline double reformed_objective(const ActivityPattern& p, const std::vector<double>& Q, int anchor, double I_anchor,
                                 const ScenarioInputs& in, const ModelParams& params, const Horizon& h)
{
  const int H = h.days();
  const auto lam = consumption_vector(h, params);
  double half_lam = 0.0;
  double weighted = 0.0;
  double time = 0.0;
  double money = 0.0;
  for (int t = 0; t < H; ++t) {
    half_lam += 0.5 * lam[t];
    weighted += anchor_weight(t, anchor, H) * (Q[t] - lam[t]);
    time += p.d[t];
    if (p.delta[t]) {
      time += in.travel_time(static_cast<std::size_t>(p.loc[t]), t);
      money += in.travel_cost(static_cast<std::size_t>(p.loc[t]), t);
    }
  }
  return params.rho3() / H * (H * I_anchor + half_lam + weighted) -
         (params.rho1() / H * time + params.rho2() * I_anchor + money / H);
}

}  // namespace needs

#endif
