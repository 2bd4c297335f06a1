#ifndef NEEDS_EMPIRICAL_HPP_
#define NEEDS_EMPIRICAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "conditioned.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "population.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "types.hpp"

namespace needs
{

/// What to do with an alternative whose best durations leave some
/// participation day at zero hours. Such a pattern has no optimum with
/// strictly positive durations (its supremum is approached but never met).
enum class ZeroDurationPolicy
{
  exclude,  // the alternative is unavailable (utility -inf)
  keep,     // use the supremum as its utility
};

/// Non-random parameters.
struct FixedParams
{
  double lambda = 1.0;
  double gamma = 1.2;
  ProductionSpec production = ProductionSpec::linear(0.0, 0.8, 0.5);  // q0 is drawn per person
  double mu = 0.2;
  std::vector<double> beta{0.5, 1.0};
  double sigma_nest = 5.0;
  double sigma_dur = 0.2;
  bool use_size_measures = true;
  int max_weeks = 8;
  ZeroDurationPolicy zero_duration = ZeroDurationPolicy::exclude;

  void validate() const
  {
    if (lambda != 1.0) throw model_error("the weekday consumption rate is normalized to 1");
    if (!(gamma > 0.0)) throw model_error("gamma must be positive");
    if (!(mu > 0.0)) throw model_error("mu must be positive");
    if (!(sigma_nest >= 0.0)) throw model_error("sigma_nest must be non-negative");
    if (!(sigma_dur > 0.0)) throw model_error("sigma_dur must be positive");
    if (max_weeks < 1) throw model_error("max_weeks must be at least 1");
  }
};

/// Raw draws of the random coefficients.
struct RandomParams
{
  double r_rho1 = 0.0;
  double r_kappa = 0.0;
  double q0 = 0.0;
};

/// Behavioral values implied by one draw.
struct Behavior
{
  double rho1;
  double rho2;
  double rho3;
  double q0;
};

struct PopulationParams
{
  std::array<double, 3> mu_D{3.0, 1.0, -0.5};      // (r_rho1, r_kappa, q0)
  std::array<double, 3> omega_diag{1.0, 0.25, 0.25};  // variances
  FixedParams xi;

  void validate() const
  {
    for (double v : omega_diag)
      if (!(v >= 0.0)) throw model_error("random-coefficient variances must be non-negative");
    xi.validate();
  }
};

inline Behavior transform_random(const RandomParams& z, double ft_weekday, double ft_weekend)
{
  if (!(ft_weekday > 0.0) || !(ft_weekend > 0.0)) throw model_error("free time must be positive");
  Behavior b;
  b.rho1 = std::exp(z.r_rho1);
  b.rho3 = b.rho1 * std::min(ft_weekday, ft_weekend) / (1.0 + std::exp(z.r_kappa));
  b.rho2 = 2.0 * b.rho3;
  b.q0 = z.q0;
  return b;
}

inline ModelParams behavior_params(const Behavior& b, const FixedParams& xi)
{
  return ModelParams(xi.lambda, xi.gamma, b.rho1, b.rho2, b.rho3, xi.production.with_q0(b.q0));
}

/// Joint location/participation alternative. `loc` is -1 on inactive days.
struct Alternative
{
  std::uint32_t mask = 0;  // bit t set when participating on day t
  std::vector<int> loc;
  int nest = 0;

  bool active(int t) const { return (mask >> t) & 1u; }
};

struct AlternativeUniverse
{
  int days = 7;
  bool single_location = true;
  int n_nests = 0;
  std::vector<Alternative> alternatives;

  /// Index of the alternative matching an observed pattern.
  std::size_t find(const std::vector<int>& delta, const std::vector<int>& loc) const
  {
    if (delta.size() != static_cast<std::size_t>(days) || loc.size() != delta.size())
      throw model_error("observation length does not match the universe");
    std::uint32_t mask = 0;
    for (int t = 0; t < days; ++t)
      if (delta[t]) mask |= 1u << t;
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
      const auto& a = alternatives[i];
      if (a.mask != mask) continue;
      bool same = true;
      for (int t = 0; t < days && same; ++t)
        if (a.active(t) && a.loc[t] != loc[t]) same = false;
      if (same) return i;
    }
    throw model_error("observed pattern is not in the alternative universe");
  }
};

/// Single-location universe: |zones| x (2^days - 1) alternatives with one nest
/// per zone. Otherwise every assignment of zones to participation days, with
/// one nest per set of visited zones (small instances only).
inline AlternativeUniverse build_universe(std::size_t n_zones, int days = 7, bool single_location = true)
{
  if (n_zones == 0) throw model_error("universe needs at least one zone");
  if (days < 1 || days > 16) throw model_error("universe horizon must be 1..16 days");
  AlternativeUniverse u;
  u.days = days;
  u.single_location = single_location;
  const std::uint32_t n_masks = (1u << days) - 1;
  if (single_location) {
    u.n_nests = static_cast<int>(n_zones);
    for (std::size_t j = 0; j < n_zones; ++j)
      for (std::uint32_t mask = 1; mask <= n_masks; ++mask) {
        Alternative a;
        a.mask = mask;
        a.loc.assign(days, -1);
        for (int t = 0; t < days; ++t)
          if ((mask >> t) & 1u) a.loc[t] = static_cast<int>(j);
        a.nest = static_cast<int>(j);
        u.alternatives.push_back(std::move(a));
      }
    return u;
  }
  std::map<std::vector<int>, int> nest_ids;
  for (std::uint32_t mask = 1; mask <= n_masks; ++mask) {
    std::vector<int> days_on;
    for (int t = 0; t < days; ++t)
      if ((mask >> t) & 1u) days_on.push_back(t);
    std::vector<int> digits(days_on.size(), 0);
    while (true) {
      Alternative a;
      a.mask = mask;
      a.loc.assign(days, -1);
      std::vector<int> visited;
      for (std::size_t i = 0; i < days_on.size(); ++i) {
        a.loc[days_on[i]] = digits[i];
        visited.push_back(digits[i]);
      }
      std::sort(visited.begin(), visited.end());
      visited.erase(std::unique(visited.begin(), visited.end()), visited.end());
      auto it = nest_ids.try_emplace(visited, static_cast<int>(nest_ids.size())).first;
      a.nest = it->second;
      u.alternatives.push_back(std::move(a));
      if (u.alternatives.size() > 200000) throw model_error("alternative universe too large");
      std::size_t i = 0;
      while (i < digits.size() && ++digits[i] == static_cast<int>(n_zones)) digits[i++] = 0;
      if (i == digits.size()) break;
    }
  }
  u.n_nests = static_cast<int>(nest_ids.size());
  return u;
}

/// Members are universe indices in increasing order; `chosen` is a position
/// within `members`.
struct ChoiceSet
{
  std::vector<std::size_t> members;
  std::size_t chosen = 0;
  bool sampled = false;
};

inline ChoiceSet full_choice_set(const AlternativeUniverse& u, std::size_t chosen_index)
{
  ChoiceSet cs;
  cs.members.resize(u.alternatives.size());
  for (std::size_t i = 0; i < cs.members.size(); ++i) cs.members[i] = i;
  cs.chosen = chosen_index;
  return cs;
}

/// Uniform sample without replacement of R-1 non-chosen alternatives plus the
/// chosen one. The draw depends only on (seed, key).
inline ChoiceSet sample_choice_set(const AlternativeUniverse& u, std::size_t chosen_index, std::size_t R,
                                   std::uint64_t seed, std::uint64_t key)
{
  if (chosen_index >= u.alternatives.size()) throw model_error("chosen alternative out of range");
  if (R == 0) throw model_error("choice set size must be positive");
  if (R >= u.alternatives.size()) return full_choice_set(u, chosen_index);
  std::vector<std::size_t> pool;
  pool.reserve(u.alternatives.size() - 1);
  for (std::size_t i = 0; i < u.alternatives.size(); ++i)
    if (i != chosen_index) pool.push_back(i);
  Stream rng(seed, {0x63686f696365ULL, key});
  for (std::size_t k = 0; k + 1 < R; ++k) {
    const std::size_t j = k + rng.index(pool.size() - k);
    std::swap(pool[k], pool[j]);
  }
  ChoiceSet cs;
  cs.sampled = true;
  cs.members.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(R - 1));
  cs.members.push_back(chosen_index);
  std::sort(cs.members.begin(), cs.members.end());
  cs.chosen = static_cast<std::size_t>(std::find(cs.members.begin(), cs.members.end(), chosen_index) - cs.members.begin());
  return cs;
}

/// Conditioned solution of one alternative, with the weekly pattern repeated
/// until the per-day utility is non-negative.
struct AlternativeSolution
{
  bool available = false;
  double v_tilde = -std::numeric_limits<double>::infinity();
  int weeks = 0;
  std::vector<double> d_star;  // 7 * weeks
};

/// Solves alternatives of one person for one parameter draw.
class AlternativeEvaluator
{
public:
  explicit AlternativeEvaluator(ScenarioInputs week_inputs, Horizon week = Horizon::weeks(1))
    : inputs_(std::move(week_inputs)), week_(std::move(week))
  {
    inputs_.validate();
    if (inputs_.days() != week_.days()) throw model_error("inputs do not match the week");
  }

  void set_params(const ModelParams& params, int max_weeks, ZeroDurationPolicy policy)
  {
    params_.emplace(params);
    max_weeks_ = max_weeks;
    policy_ = policy;
    const int H = week_.days();
    const std::size_t L = inputs_.n_locations();
    lam_week_ = consumption_vector(week_, params);
    terms_.assign(L * H, DayTerm{});
    for (std::size_t j = 0; j < L; ++j)
      for (int t = 0; t < H; ++t) {
        DayTerm& dt = terms_[j * H + t];
        dt.tt = inputs_.travel_time(j, t);
        dt.tc = inputs_.travel_cost(j, t);
        dt.cap = activity_capacity(inputs_.free_time[t], dt.tt);
        dt.scale = production_scale(params.production(), inputs_.attractiveness(j, t));
      }
  }

  const ScenarioInputs& inputs() const { return inputs_; }

  void evaluate(const Alternative& alt, AlternativeSolution& out, bool want_durations)
  {
    if (!params_) throw std::logic_error("set_params must be called before evaluate");
    const int H = week_.days();
    out.available = false;
    out.v_tilde = -std::numeric_limits<double>::infinity();
    out.weeks = 0;
    if (params_->production().is_cobb_douglas()) {
      evaluate_smooth(alt, out);
      return;
    }
    for (int k = 1; k <= max_weeks_; ++k) {
      lam_.resize(H * k);
      delta_.resize(H * k);
      day_.resize(H * k);
      for (int w = 0; w < k; ++w)
        for (int t = 0; t < H; ++t) {
          const int s = w * H + t;
          lam_[s] = lam_week_[t];
          delta_[s] = alt.active(t) ? 1 : 0;
          day_[s] = alt.active(t) ? terms_[static_cast<std::size_t>(alt.loc[t]) * H + t] : DayTerm{};
        }
      KernelInput in{lam_, delta_, day_, &params_->production(), params_->rho1(), params_->rho2(), params_->rho3(), H};
      detail::solve_kernel(in, ConditionedMethod::automatic, kr_);
      if (!kr_.feasible) return;  // more weeks of the same pattern cannot help
      if (kr_.objective >= 0.0 || k == max_weeks_) {
        out.weeks = k;
        break;
      }
    }
    if (policy_ == ZeroDurationPolicy::exclude)
      for (int s = 0; s < H * out.weeks; ++s)
        if (delta_[s] && !(kr_.d[s] > 1e-9)) return;
    out.available = true;
    out.v_tilde = kr_.objective;
    if (want_durations) out.d_star.assign(kr_.d.begin(), kr_.d.end());
  }

private:
  void evaluate_smooth(const Alternative& alt, AlternativeSolution& out)
  {
    const int H = week_.days();
    std::vector<int> delta(H), loc(H);
    for (int t = 0; t < H; ++t) {
      delta[t] = alt.active(t) ? 1 : 0;
      loc[t] = alt.active(t) ? alt.loc[t] : 0;
    }
    const ConditionedProblem prob(delta, loc, inputs_, *params_, week_);
    const auto r = solve_conditioned_multiweek(prob, max_weeks_);
    if (!r) return;
    if (policy_ == ZeroDurationPolicy::exclude)
      for (std::size_t s = 0; s < r->pattern.d.size(); ++s)
        if (r->pattern.delta[s] && !(r->pattern.d[s] > 1e-9)) return;
    out.available = true;
    out.v_tilde = r->objective;
    out.weeks = r->weeks;
    out.d_star = r->pattern.d;
  }

  ScenarioInputs inputs_;
  Horizon week_;
  std::optional<ModelParams> params_;
  int max_weeks_ = 8;
  ZeroDurationPolicy policy_ = ZeroDurationPolicy::exclude;
  std::vector<double> lam_week_;
  std::vector<DayTerm> terms_;
  std::vector<double> lam_;
  std::vector<int> delta_;
  std::vector<DayTerm> day_;
  detail::KernelResult kr_;
};

/// ln M for every alternative of a universe (0 when size measures are off).
inline std::vector<double> log_size_terms(const AlternativeUniverse& u, const ZoneSystem& zones, const FixedParams& xi)
{
  std::vector<double> out(u.alternatives.size(), 0.0);
  if (!xi.use_size_measures) return out;
  if (xi.beta.size() != zones.size_measure_names.size())
    throw model_error("one size-measure coefficient per measure is required");
  std::vector<double> M(zones.size(), 0.0);
  for (std::size_t j = 0; j < zones.size(); ++j) {
    for (std::size_t k = 0; k < xi.beta.size(); ++k) M[j] += xi.beta[k] * zones.size_measures(j, k);
    if (!(M[j] > 0.0)) throw std::domain_error("size measure must be positive to take its log");
  }
  for (std::size_t i = 0; i < u.alternatives.size(); ++i) {
    const auto& a = u.alternatives[i];
    double sum = 0.0;
    int n = 0;
    for (int t = 0; t < u.days; ++t)
      if (a.active(t)) {
        sum += M[static_cast<std::size_t>(a.loc[t])];
        ++n;
      }
    out[i] = std::log(sum / n);
  }
  return out;
}

/// Log of the logit probability of position `chosen` with scale mu.
/// Alternatives at -inf are left out of the denominator.
inline double log_choice_probability(const std::vector<double>& V, std::size_t chosen, double mu)
{
  if (chosen >= V.size()) throw model_error("chosen alternative out of range");
  double top = -std::numeric_limits<double>::infinity();
  for (double v : V)
    if (v > top) top = v;
  if (top == -std::numeric_limits<double>::infinity()) throw std::domain_error("no available alternative");
  if (V[chosen] == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double v : V)
    if (v != -std::numeric_limits<double>::infinity()) sum += std::exp(mu * (v - top));
  return mu * (V[chosen] - top) - std::log(sum);
}

inline double choice_probability(const std::vector<double>& V, std::size_t chosen, double mu)
{
  return std::exp(log_choice_probability(V, chosen, mu));
}

/// Lognormal density of one observed duration around the optimum d_star.
inline double log_duration_factor(double d, double d_star, double sigma)
{
  if (!(d > 0.0)) throw std::domain_error("observed duration must be positive on participation days");
  if (!(d_star > 0.0)) return -std::numeric_limits<double>::infinity();
  const double z = (std::log(d) - std::log(d_star)) / sigma;
  return -0.5 * z * z - std::log(d * sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Log of the average over the K weeks of the product of daily densities.
inline double log_duration_density(const std::vector<double>& d, const std::vector<int>& delta,
                                   const std::vector<double>& d_star, int weeks, double sigma)
{
  const std::size_t H = delta.size();
  if (d.size() != H) throw model_error("duration and participation lengths differ");
  if (weeks < 1 || d_star.size() != H * static_cast<std::size_t>(weeks))
    throw model_error("optimal durations must cover whole weeks");
  std::vector<double> per_week(weeks, 0.0);
  for (int k = 0; k < weeks; ++k)
    for (std::size_t t = 0; t < H; ++t)
      if (delta[t]) per_week[k] += log_duration_factor(d[t], d_star[k * H + t], sigma);
  const double top = *std::max_element(per_week.begin(), per_week.end());
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double sum = 0.0;
  for (double v : per_week) sum += std::exp(v - top);
  return top + std::log(sum / weeks);
}

inline double duration_density(const std::vector<double>& d, const std::vector<int>& delta,
                               const std::vector<double>& d_star, int weeks, double sigma)
{
  return std::exp(log_duration_density(d, delta, d_star, weeks, sigma));
}

/// Draw of the random coefficients and nest errors for one (person, draw).
/// The standard-normal stream depends only on (seed, person, draw).
struct PersonDraw
{
  RandomParams zeta;
  std::vector<double> eta;  // one per nest
};

inline PersonDraw draw_person(const PopulationParams& pop, int n_nests, std::uint64_t seed, int person, int draw)
{
  Stream rng(seed, {0x6472617773ULL, static_cast<std::uint64_t>(person), static_cast<std::uint64_t>(draw)});
  PersonDraw pd;
  const double z0 = rng.normal(), z1 = rng.normal(), z2 = rng.normal();
  pd.zeta.r_rho1 = pop.mu_D[0] + std::sqrt(pop.omega_diag[0]) * z0;
  pd.zeta.r_kappa = pop.mu_D[1] + std::sqrt(pop.omega_diag[1]) * z1;
  pd.zeta.q0 = pop.mu_D[2] + std::sqrt(pop.omega_diag[2]) * z2;
  pd.eta.resize(n_nests);
  for (double& e : pd.eta) e = pop.xi.sigma_nest * rng.normal();
  return pd;
}

/// Everything about one person that does not change with parameters.
struct PersonContext
{
  const Observation* obs = nullptr;
  ChoiceSet choice_set;
  AlternativeEvaluator evaluator;
};

inline PersonContext make_person_context(const Observation& obs, const ZoneSystem& zones, const AlternativeUniverse& u,
                                         std::size_t choice_set_size, std::uint64_t seed)
{
  const Horizon week = Horizon::weeks(1);
  if (u.days != week.days()) throw model_error("the alternative universe must cover one week");
  const std::size_t chosen = u.find(obs.delta, obs.loc);
  ChoiceSet cs = choice_set_size == 0 ? full_choice_set(u, chosen)
                                      : sample_choice_set(u, chosen, choice_set_size, seed,
                                                          static_cast<std::uint64_t>(obs.person.id));
  return {&obs, std::move(cs), AlternativeEvaluator(person_inputs(obs.person, zones, week), week)};
}

/// Per-draw pieces of the joint probability, in logs.
struct DrawTerms
{
  double log_choice = -std::numeric_limits<double>::infinity();
  double log_duration = -std::numeric_limits<double>::infinity();
  double log_joint() const { return log_choice + log_duration; }
};

/// Systematic utilities V = V~ + ln M + eta over the choice set, plus the
/// conditioned solution of the chosen alternative.
inline void choice_set_utilities(PersonContext& ctx, const AlternativeUniverse& u, const std::vector<double>& log_size,
                                 const PersonDraw& pd, const PopulationParams& pop, std::vector<double>& V,
                                 AlternativeSolution& chosen)
{
  const auto& obs = *ctx.obs;
  const Behavior b = transform_random(pd.zeta, obs.person.ft_weekday, obs.person.ft_weekend);
  ctx.evaluator.set_params(behavior_params(b, pop.xi), pop.xi.max_weeks, pop.xi.zero_duration);
  V.assign(ctx.choice_set.members.size(), -std::numeric_limits<double>::infinity());
  AlternativeSolution sol;
  for (std::size_t m = 0; m < V.size(); ++m) {
    const std::size_t idx = ctx.choice_set.members[m];
    const Alternative& a = u.alternatives[idx];
    const bool is_chosen = m == ctx.choice_set.chosen;
    AlternativeSolution& target = is_chosen ? chosen : sol;
    ctx.evaluator.evaluate(a, target, is_chosen);
    if (target.available) V[m] = target.v_tilde + log_size[idx] + pd.eta[a.nest];
  }
}

inline DrawTerms draw_terms(PersonContext& ctx, const AlternativeUniverse& u, const std::vector<double>& log_size,
                            const PersonDraw& pd, const PopulationParams& pop)
{
  DrawTerms out;
  std::vector<double> V;
  AlternativeSolution chosen;
  try {
    choice_set_utilities(ctx, u, log_size, pd, pop, V, chosen);
  } catch (const model_error&) {
    return out;  // parameters outside the model's domain for this draw
  }
  if (!chosen.available) return out;
  out.log_choice = log_choice_probability(V, ctx.choice_set.chosen, pop.xi.mu);
  out.log_duration =
      log_duration_density(ctx.obs->d, ctx.obs->delta, chosen.d_star, chosen.weeks, pop.xi.sigma_dur);
  return out;
}

/// Joint probability (choice x duration density) for one draw.
inline double joint_probability(PersonContext& ctx, const AlternativeUniverse& u, const std::vector<double>& log_size,
                                const PersonDraw& pd, const PopulationParams& pop)
{
  return std::exp(draw_terms(ctx, u, log_size, pd, pop).log_joint());
}

struct LoglikOptions
{
  int draws = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t choice_set_size = 128;  // 0 = full set
  bool single_location = true;
};

struct LoglikResult
{
  double total = 0.0;
  std::vector<double> per_person;
};

inline double log_mean_exp(const std::vector<double>& v)
{
  double top = -std::numeric_limits<double>::infinity();
  for (double x : v) top = std::max(top, x);
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - top);
  return top + std::log(sum / static_cast<double>(v.size()));
}

/// Reusable per-dataset state: universe, choice sets and evaluators.
class LikelihoodEvaluator
{
public:
  LikelihoodEvaluator(const ZoneSystem& zones, const std::vector<Observation>& data, LoglikOptions opt)
    : zones_(zones), opt_(opt), universe_(build_universe(zones.size(), 7, opt.single_location))
  {
    zones.validate();
    if (opt.draws < 1) throw model_error("at least one draw is required");
    contexts_.reserve(data.size());
    for (const auto& obs : data) contexts_.push_back(make_person_context(obs, zones, universe_, opt.choice_set_size, opt.seed));
  }

  const AlternativeUniverse& universe() const { return universe_; }
  std::size_t persons() const { return contexts_.size(); }

  LoglikResult operator()(const PopulationParams& pop)
  {
    pop.validate();
    const auto log_size = log_size_terms(universe_, zones_, pop.xi);
    LoglikResult res;
    res.per_person.assign(contexts_.size(), 0.0);
    parallel_for(contexts_.size(), opt_.threads, [&](std::size_t n) {
      PersonContext& ctx = contexts_[n];
      std::vector<double> lj(opt_.draws);
      for (int r = 0; r < opt_.draws; ++r) {
        const PersonDraw pd = draw_person(pop, universe_.n_nests, opt_.seed, ctx.obs->person.id, r);
        lj[r] = draw_terms(ctx, universe_, log_size, pd, pop).log_joint();
      }
      res.per_person[n] = log_mean_exp(lj);
    });
    for (double v : res.per_person) res.total += v;
    return res;
  }

private:
  const ZoneSystem& zones_;
  LoglikOptions opt_;
  AlternativeUniverse universe_;
  std::vector<PersonContext> contexts_;
};

/// Simulated sample log-likelihood with common random numbers.
inline LoglikResult simulated_loglik(const ZoneSystem& zones, const std::vector<Observation>& data,
                                     const PopulationParams& pop, const LoglikOptions& opt = {})
{
  LikelihoodEvaluator eval(zones, data, opt);
  return eval(pop);
}

}  // namespace needs

#endif
