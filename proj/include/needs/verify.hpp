#ifndef NEEDS_VERIFY_HPP_
#define NEEDS_VERIFY_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "conditioned.hpp"
#include "empirical.hpp"
#include "estimate.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "pwl_fit.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "synth.hpp"
#include "types.hpp"

// Verification suites: the fast solver/oracle checks are cheap enough for
// routine use; the empirical ones reproduce the desk-scale experiments.

namespace needs::verify
{

struct Check
{
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report
{
  std::string suite;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  double seconds = 0.0;

  explicit Report(std::string name) : suite(std::move(name)) {}

  bool passed() const
  {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  void check(std::string name, bool ok, std::string detail) { checks.push_back({std::move(name), ok, std::move(detail)}); }
};

inline std::string fmt(double v, int prec = 6)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

class Stopwatch
{
public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
  std::chrono::steady_clock::time_point t0_;
};

// ------------------------------------------------------------ instances

/// One location with equal attractiveness and two-way travel on every day;
/// free time per weekday/weekend day.
inline ScenarioInputs uniform_week(double A = 100.0, double tt_one_way = 0.5, double tc_one_way = 5.0,
                                   double ft_weekday = 2.0, double ft_weekend = 6.0)
{
  const Horizon h = Horizon::weeks(1);
  ScenarioInputs in;
  in.locations = {"loc"};
  in.attractiveness = Grid(1, 7, A);
  in.travel_time = Grid(1, 7, 2.0 * tt_one_way);
  in.travel_cost = Grid(1, 7, 2.0 * tc_one_way);
  for (int t = 0; t < 7; ++t) in.free_time.push_back(h.is_weekend(t) ? ft_weekend : ft_weekday);
  return in;
}

inline const std::vector<double>& sweep_gamma()
{
  static const std::vector<double> v{0.6, 0.8, 1.0, 1.2, 1.4};
  return v;
}
inline const std::vector<double>& sweep_q0()
{
  static const std::vector<double> v{-0.4, -0.2, 0.0, 0.2, 0.4};
  return v;
}
inline const std::vector<double>& sweep_q2()
{
  static const std::vector<double> v{0.2, 0.4, 0.6, 0.8};
  return v;
}

/// Sweep parameters (rho1 = 30, rho3 = 15, rho2 = 2 rho3) with a linear
/// production rate of 0.5 and gamma, q0, q2 drawn from the sweep values.
inline ModelParams random_sweep_params(Stream& rng)
{
  const double gamma = sweep_gamma()[rng.index(sweep_gamma().size())];
  const double q0 = sweep_q0()[rng.index(sweep_q0().size())];
  const double q2 = sweep_q2()[rng.index(sweep_q2().size())];
  return ModelParams(1.0, gamma, 30.0, 30.0, 15.0, ProductionSpec::linear(q0, 0.5, q2));
}

inline std::vector<int> random_delta(Stream& rng, int H, int min_active, int max_active)
{
  while (true) {
    std::vector<int> d(H);
    int n = 0;
    for (int& x : d) n += (x = rng.uniform() < 0.5);
    if (n >= min_active && n <= max_active) return d;
  }
}

/// Rough count of grid points the grid oracle visits (before feasibility).
inline double grid_work(const ConditionedProblem& prob, double step)
{
  const auto lam = consumption_vector(prob.horizon, prob.params);
  const double total = std::accumulate(lam.begin(), lam.end(), 0.0);
  double work = 1.0;
  int seen = 0;
  const int m = prob.active_days();
  for (int t = 0; t < prob.horizon.days(); ++t) {
    if (!prob.delta[t] || ++seen == m) continue;
    const auto j = static_cast<std::size_t>(prob.loc[t]);
    const double cap = std::max(0.0, prob.inputs.free_time[t] - prob.inputs.travel_time(j, t));
    const double C = production_scale(prob.params.production(), prob.inputs.attractiveness(j, t));
    const double need = hours_for_production(prob.params.production(), C, total);
    work *= 1.0 + std::min(cap, need) / step;
  }
  return work;
}

/// Objective error bound of the grid oracle: one step on each active day,
/// valued at the largest marginal rate.
inline double grid_bound(const ConditionedProblem& prob, double step)
{
  double cmax = 0.0;
  for (int t = 0; t < prob.horizon.days(); ++t)
    if (prob.delta[t])
      cmax = std::max(cmax, production_scale(prob.params.production(),
                                             prob.inputs.attractiveness(static_cast<std::size_t>(prob.loc[t]), t)));
  const double p1 = prob.params.production().slopes().front();
  return prob.active_days() * step * (prob.params.rho1() + prob.params.rho3() * cmax * p1);
}

/// Safety stock and total balance of a returned solution.
inline void solution_invariants(const SolveResult& r, const std::vector<double>& lam, double& worst_imin,
                                double& worst_balance)
{
  worst_imin = std::max(worst_imin, std::abs(r.trajectory.I_min));
  double q = 0.0, l = 0.0;
  for (double v : r.trajectory.Q) q += v;
  for (double v : lam) l += v;
  worst_balance = std::max(worst_balance, std::abs(q - l));
}

// ------------------------------------------------------------ suites

/// Conditioned solver against the gradient and grid oracles on random
/// one-week linear instances; also checks safety stock, balance and
/// feasibility of every solver output.
inline Report solver_suite(int instances = 200, std::uint64_t seed = 1, double grid_step = 1e-2,
                           double max_grid_work = 2e6)
{
  Report rep("solver");
  Stopwatch sw;
  const Horizon h = Horizon::weeks(1);
  int feasible = 0, disagreements = 0, grid_checked = 0, grid_violations = 0, infeasible_outputs = 0;
  int zero_duration = 0;
  double worst_rel = 0.0, worst_grid_excess = 0.0, worst_grid_gap = 0.0, worst_imin = 0.0, worst_balance = 0.0;
  for (int i = 0; i < instances; ++i) {
    Stream rng(seed, {0x736f6c76ULL, static_cast<std::uint64_t>(i)});
    const ModelParams params = random_sweep_params(rng);
    const auto delta = random_delta(rng, 7, 1, 7);
    const ConditionedProblem prob(delta, std::vector<int>(7, 0), uniform_week(), params, h);
    const auto a = solve_conditioned(prob);
    const auto b = oracle_gradient(prob);
    if (bool(a) != bool(b)) {
      ++disagreements;
      continue;
    }
    if (!a) continue;
    ++feasible;
    worst_rel = std::max(worst_rel, std::abs(a->objective - b->objective) / std::max(1.0, std::abs(b->objective)));
    const auto lam = consumption_vector(h, params);
    solution_invariants(*a, lam, worst_imin, worst_balance);
    // Active days may sit at zero hours (the supremum of the open problem).
    if (!check_feasibility(a->pattern, prob.inputs, params, h, FeasibilityOptions{1e-9, true}).ok())
      ++infeasible_outputs;
    for (int t = 0; t < 7; ++t)
      if (a->pattern.delta[t] && a->pattern.d[t] == 0.0) {
        ++zero_duration;
        break;
      }
    if (prob.active_days() <= 5 && grid_work(prob, grid_step) <= max_grid_work) {
      const auto g = oracle_grid(prob, grid_step);
      ++grid_checked;
      if (!g) {
        ++grid_violations;
        continue;
      }
      const double excess = g->objective - a->objective;  // grid must not beat the solver
      const double gap = a->objective - g->objective;     // nor trail it beyond its bound
      worst_grid_excess = std::max(worst_grid_excess, excess);
      worst_grid_gap = std::max(worst_grid_gap, gap);
      if (excess > 1e-9 * std::max(1.0, std::abs(a->objective)) || gap > grid_bound(prob, grid_step)) ++grid_violations;
    }
  }
  rep.seconds = sw.seconds();
  rep.notes.push_back(std::to_string(instances) + " instances, " + std::to_string(feasible) + " feasible, " +
                      std::to_string(grid_checked) + " also checked on the grid, " + std::to_string(zero_duration) +
                      " with an active day at zero hours");
  rep.check("feasibility agrees with gradient oracle", disagreements == 0, std::to_string(disagreements) + " mismatches");
  rep.check("objective matches gradient oracle (1e-6 rel)", worst_rel <= 1e-6, "max rel gap " + fmt(worst_rel));
  rep.check("grid oracle within its bound", grid_violations == 0,
            "max grid excess " + fmt(worst_grid_excess) + ", max shortfall " + fmt(worst_grid_gap) + ", " +
                std::to_string(grid_violations) + " violations");
  rep.check("I_min = 0 (1e-9)", worst_imin <= 1e-9, "max |I_min| " + fmt(worst_imin));
  rep.check("sum Q = sum lambda (1e-9)", worst_balance <= 1e-9, "max imbalance " + fmt(worst_balance));
  rep.check("solver outputs are feasible", infeasible_outputs == 0, std::to_string(infeasible_outputs) + " infeasible");
  rep.check("runtime < 30 s", rep.seconds < 30.0, fmt(rep.seconds, 3) + " s");
  return rep;
}

/// Median speed ratio of the grid oracle over the conditioned solver on
/// feasible instances with 3-5 active days.
inline Report speedup_suite(int instances = 50, std::uint64_t seed = 2, double grid_step = 1e-2,
                            double max_grid_work = 2e6)
{
  Report rep("speedup");
  Stopwatch sw;
  const Horizon h = Horizon::weeks(1);
  std::vector<double> ratios;
  double worst_imin = 0.0, worst_balance = 0.0;
  for (std::uint64_t i = 0; static_cast<int>(ratios.size()) < instances && i < 100000; ++i) {
    Stream rng(seed, {0x73706565ULL, i});
    const ModelParams params = random_sweep_params(rng);
    const auto delta = random_delta(rng, 7, 3, 5);
    const ConditionedProblem prob(delta, std::vector<int>(7, 0), uniform_week(), params, h);
    if (grid_work(prob, grid_step) > max_grid_work) continue;
    const auto a = solve_conditioned(prob);
    if (!a) continue;
    solution_invariants(*a, consumption_vector(h, params), worst_imin, worst_balance);
    int reps = 0;
    Stopwatch ts;
    double solver_s = 0.0;
    do {
      for (int k = 0; k < 50; ++k) {
        auto r = solve_conditioned(prob);
        if (!r) return rep;  // unreachable: deterministic
      }
      reps += 50;
      solver_s = ts.seconds();
    } while (solver_s < 2e-3);
    Stopwatch tg;
    const auto g = oracle_grid(prob, grid_step);
    const double grid_s = tg.seconds();
    if (!g) continue;
    ratios.push_back(grid_s / (solver_s / reps));
  }
  rep.seconds = sw.seconds();
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  double median = 0.0;
  if (!sorted.empty()) {
    const std::size_t n = sorted.size();
    median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  rep.notes.push_back(std::to_string(ratios.size()) + " instances; min ratio " + fmt(sorted.empty() ? 0 : sorted.front()) +
                      ", max ratio " + fmt(sorted.empty() ? 0 : sorted.back()));
  rep.check("enough instances", static_cast<int>(ratios.size()) == instances, std::to_string(ratios.size()));
  rep.check("median speedup >= 100x", median >= 100.0, "median " + fmt(median) + "x");
  rep.check("I_min = 0 (1e-9)", worst_imin <= 1e-9, "max |I_min| " + fmt(worst_imin));
  rep.check("sum Q = sum lambda (1e-9)", worst_balance <= 1e-9, "max imbalance " + fmt(worst_balance));
  return rep;
}

/// Constructor guard and the appendix identities on the objective.
inline Report invariants_suite(std::uint64_t seed = 3)
{
  Report rep("invariants");
  Stopwatch sw;
  bool rejects = false;
  try {
    ModelParams(1.0, 1.2, 30.0, 15.0, 15.0, ProductionSpec::linear(0.0, 0.5, 0.4));
  } catch (const model_error&) {
    rejects = true;
  }
  rep.check("rho2 <= rho3 rejected", rejects, rejects ? "model_error thrown" : "accepted");

  // Uniform inventory shift changes the objective by c (rho3 - rho2).
  const Horizon h = Horizon::weeks(1);
  double worst_shift = 0.0, worst_reformed = 0.0;
  for (int i = 0; i < 50; ++i) {
    Stream rng(seed, {0x696e76ULL, static_cast<std::uint64_t>(i)});
    const ModelParams params = random_sweep_params(rng);
    const auto delta = random_delta(rng, 7, 1, 7);
    const ConditionedProblem prob(delta, std::vector<int>(7, 0), uniform_week(), params, h);
    const auto r = solve_conditioned(prob);
    if (!r) continue;
    const double c = rng.uniform(0.0, 5.0);
    InventoryTrajectory shifted = r->trajectory;
    for (double& v : shifted.I) v += c;
    const double base = evaluate_objective(r->pattern, r->trajectory, prob.inputs, params, h);
    const double moved = evaluate_objective(r->pattern, shifted, prob.inputs, params, h);
    worst_shift = std::max(worst_shift, std::abs((moved - base) - c * (params.rho3() - params.rho2())));
    const double reformed =
        reformed_objective(r->pattern, r->trajectory.Q, r->anchor, 0.0, prob.inputs, params, h);
    worst_reformed = std::max(worst_reformed, std::abs(reformed - base) / std::max(1.0, std::abs(base)));
  }
  rep.check("inventory shift identity", worst_shift <= 1e-9, "max error " + fmt(worst_shift));
  rep.check("reformed objective equals evaluator", worst_reformed <= 1e-9, "max rel error " + fmt(worst_reformed));
  rep.seconds = sw.seconds();
  return rep;
}

/// Slope formula against central differences. On the balanced manifold the
/// objective is the reformed one, so single-day differences use it; the
/// evaluator itself is differenced along balance-preserving transfers.
inline Report slope_suite(int instances = 50, std::uint64_t seed = 4, double step = 1e-5)
{
  Report rep("slopes");
  Stopwatch sw;
  const Horizon h = Horizon::weeks(1);
  double worst_single = 0.0, worst_transfer = 0.0;
  int done = 0;
  for (std::uint64_t i = 0; done < instances && i < 100000; ++i) {
    Stream rng(seed, {0x736c6f70ULL, i});
    const ModelParams params = random_sweep_params(rng);
    const ScenarioInputs in = uniform_week(rng.uniform(20.0, 200.0), rng.uniform(0.1, 0.6), rng.uniform(1.0, 10.0),
                                           rng.uniform(1.5, 4.0), rng.uniform(3.0, 8.0));
    const auto delta = random_delta(rng, 7, 2, 7);
    const auto lam = consumption_vector(h, params);
    const double total = std::accumulate(lam.begin(), lam.end(), 0.0);
    const double p1 = params.production().slopes().front();
    std::vector<double> C(7, 0.0), cap(7, 0.0);
    ActivityPattern p;
    p.delta = delta;
    p.loc.assign(7, -1);
    p.d.assign(7, 0.0);
    double produced = 0.0;
    for (int t = 0; t < 7; ++t) {
      if (!delta[t]) continue;
      p.loc[t] = 0;
      C[t] = production_scale(params.production(), in.attractiveness(0, t));
      cap[t] = in.free_time[t] - in.travel_time(0, t);
      p.d[t] = rng.uniform(0.1, 0.9) * cap[t];
      produced += C[t] * p1 * p.d[t];
    }
    bool interior = true;
    for (int t = 0; t < 7; ++t) {
      if (!delta[t]) continue;
      p.d[t] *= total / produced;
      if (!(p.d[t] > 1e-3 && p.d[t] < cap[t] - 1e-3)) interior = false;
    }
    if (!interior) continue;
    const auto Q = production_vector(p, in, params, h);
    const auto tr = reconstruct_trajectory(p, in, params, h);
    std::vector<double> sortedI = tr.I;
    std::sort(sortedI.begin(), sortedI.end());
    if (sortedI[1] - sortedI[0] < 1e-3) continue;  // anchor must be strict
    const int k = static_cast<int>(std::min_element(tr.I.begin(), tr.I.end()) - tr.I.begin());
    ++done;

    auto reformed_at = [&](const ActivityPattern& q) {
      return reformed_objective(q, production_vector(q, in, params, h), k, 0.0, in, params, h);
    };
    auto evaluator_at = [&](const ActivityPattern& q) {
      const auto Qq = production_vector(q, in, params, h);
      return evaluate_objective(q, trajectory_from_anchor(Qq, lam, k), in, params, h);
    };
    for (int t = 0; t < 7; ++t) {
      if (!delta[t]) continue;
      const double slope_t = slopes(k, C[t], p1, params, h)[t];
      ActivityPattern up = p, down = p;
      up.d[t] += step;
      down.d[t] -= step;
      const double fd = (reformed_at(up) - reformed_at(down)) / (2.0 * step);
      worst_single = std::max(worst_single, std::abs(fd - slope_t));
      for (int s = 0; s < 7; ++s) {
        if (!delta[s] || s == t) continue;
        const double slope_s = slopes(k, C[s], p1, params, h)[s];
        const double ratio = C[t] / C[s];
        ActivityPattern a = p, b = p;
        a.d[t] += step;
        a.d[s] -= ratio * step;
        b.d[t] -= step;
        b.d[s] += ratio * step;
        const double fd2 = (evaluator_at(a) - evaluator_at(b)) / (2.0 * step);
        worst_transfer = std::max(worst_transfer, std::abs(fd2 - (slope_t - ratio * slope_s)));
      }
    }
    (void)Q;
  }
  rep.seconds = sw.seconds();
  rep.check("enough interior instances", done == instances, std::to_string(done));
  rep.check("single-day differences match slopes (1e-6)", worst_single <= 1e-6, "max error " + fmt(worst_single));
  rep.check("balanced transfers on the evaluator match slopes (1e-6)", worst_transfer <= 1e-6,
            "max error " + fmt(worst_transfer));
  return rep;
}

struct PwlSweepRow
{
  int segments;
  double duration_ratio;         // mean over tests of per-test ratios
  double duration_median;        // median per-test ratio
  double duration_mean_ratio;    // ratio of mean durations
  double participation_ratio;
  double objective_ratio;
  double fit_sse;
};

/// Piecewise fits with 1..max_segments against the Cobb-Douglas optimum over
/// the gamma x q0 x q2 sweep (q1 = 0.5); ratios averaged over the 100 tests.
inline std::vector<PwlSweepRow> pwl_sweep(int max_segments = 7, unsigned threads = 1)
{
  const Horizon h = Horizon::weeks(1);
  const ScenarioInputs in = uniform_week();
  const ProductionSpec cd = ProductionSpec::cobb_douglas(0.0, 0.5, 0.4);
  std::vector<PwlFit> fits;
  for (int n = 1; n <= max_segments; ++n) {
    PwlFitConfig cfg;
    cfg.n_segments = n;
    fits.push_back(fit_pwl_detailed(cd, 100.0, cfg));
  }
  std::vector<PwlSweepRow> rows;
  for (int n = 1; n <= max_segments; ++n) rows.push_back({n, 0.0, 0.0, 0.0, 0.0, 0.0, fits[n - 1].sse});
  std::vector<std::vector<double>> per_test(max_segments);
  std::vector<double> sum_d(max_segments, 0.0), sum_d0(max_segments, 0.0);
  int tests = 0;
  FullSolveOptions fo;
  fo.threads = threads;
  for (double g : sweep_gamma())
    for (double q0 : sweep_q0())
      for (double q2 : sweep_q2()) {
        const ModelParams params(1.0, g, 30.0, 30.0, 15.0, ProductionSpec::cobb_douglas(q0, 0.5, q2));
        const auto ref = solve_full(in, params, h, LocationPolicy::single(), fo);
        if (!ref) continue;
        ++tests;
        auto stats = [](const SolveResult& r, double& dur, double& part) {
          part = r.pattern.participations();
          dur = std::accumulate(r.pattern.d.begin(), r.pattern.d.end(), 0.0) / part;
        };
        double d0, n0;
        stats(*ref, d0, n0);
        for (int n = 1; n <= max_segments; ++n) {
          const auto spec = fits[n - 1].spec.with_q0(q0).with_q2(q2);
          const auto r = solve_full(in, params.with_production(spec), h, LocationPolicy::single(), fo);
          if (!r) continue;
          double d, part;
          stats(*r, d, part);
          rows[n - 1].duration_ratio += d / d0;
          per_test[n - 1].push_back(d / d0);
          sum_d[n - 1] += d;
          sum_d0[n - 1] += d0;
          rows[n - 1].participation_ratio += part / n0;
          rows[n - 1].objective_ratio += r->objective / ref->objective;
        }
      }
  for (auto& row : rows) {
    auto& v = per_test[row.segments - 1];
    if (!v.empty()) {
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size() / 2;
      row.duration_median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
      row.duration_mean_ratio = sum_d[row.segments - 1] / sum_d0[row.segments - 1];
    }
    row.duration_ratio /= tests;
    row.participation_ratio /= tests;
    row.objective_ratio /= tests;
  }
  return rows;
}

inline Report pwl_suite(unsigned threads = 1)
{
  Report rep("pwl");
  Stopwatch sw;
  const auto rows = pwl_sweep(7, threads);
  rep.seconds = sw.seconds();
  for (const auto& r : rows)
    rep.notes.push_back(std::to_string(r.segments) + " segment(s): duration " + fmt(r.duration_ratio, 4) + " (median " +
                        fmt(r.duration_median, 4) + ", ratio of means " + fmt(r.duration_mean_ratio, 4) +
                        "), participation " + fmt(r.participation_ratio, 4) + ", objective " +
                        fmt(r.objective_ratio, 4) + ", fit sse " + fmt(r.fit_sse, 4));
  const auto& three = rows[2];
  const auto& one = rows[0];
  auto within = [](double ratio) { return std::abs(ratio - 1.0) <= 0.05; };
  rep.check("3 segments: duration within 5%", within(three.duration_ratio), fmt(three.duration_ratio, 4));
  rep.check("3 segments: participation within 5%", within(three.participation_ratio),
            fmt(three.participation_ratio, 4));
  rep.check("3 segments: objective within 5%", within(three.objective_ratio), fmt(three.objective_ratio, 4));
  rep.check("1 segment objective worse than 3 segments",
            std::abs(one.objective_ratio - 1.0) > std::abs(three.objective_ratio - 1.0),
            fmt(one.objective_ratio, 4) + " vs " + fmt(three.objective_ratio, 4));
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].fit_sse <= rows[i - 1].fit_sse;
  rep.check("fit error non-increasing in segments", monotone, "");
  rep.check("runtime < 10 min", rep.seconds < 600.0, fmt(rep.seconds, 3) + " s");
  return rep;
}

/// Lognormal duration density integrates to one (Simpson's rule in log d).
inline Report density_suite(int cases = 20, std::uint64_t seed = 7)
{
  Report rep("density");
  Stopwatch sw;
  double worst = 0.0;
  for (int i = 0; i < cases; ++i) {
    Stream rng(seed, {0x64656e73ULL, static_cast<std::uint64_t>(i)});
    const double d_star = rng.uniform(0.05, 8.0);
    const double sigma = rng.uniform(0.05, 1.0);
    const double lo = std::log(d_star) - 14.0 * sigma, hi = std::log(d_star) + 14.0 * sigma;
    const int n = 20000;
    const double hstep = (hi - lo) / n;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double u = lo + k * hstep;
      const double d = std::exp(u);
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      sum += w * std::exp(log_duration_factor(d, d_star, sigma)) * d;  // dd = d du
    }
    worst = std::max(worst, std::abs(sum * hstep / 3.0 - 1.0));
  }
  rep.seconds = sw.seconds();
  rep.check("density integrates to 1 (1e-6)", worst <= 1e-6, "max error " + fmt(worst));
  return rep;
}

// ------------------------------------------------------------ experiments

struct SynthStats
{
  std::uint64_t seed;
  SynthSummary summary;
};

inline std::vector<SynthStats> synth_runs(const std::vector<std::uint64_t>& seeds, std::size_t persons,
                                          std::size_t zones, unsigned threads = 1)
{
  std::vector<SynthStats> out;
  for (std::uint64_t s : seeds) {
    const ZoneSystem z = generate_zones(zones, s);
    const auto people = generate_population(persons, z, s);
    const auto res = simulate_patterns(people, z, grocery_population(), s, threads);
    out.push_back({s, summarize(res, z)});
  }
  return out;
}

inline double weekday_per_day(const SynthSummary& s)
{
  return (s.participation_by_day[0] + s.participation_by_day[1] + s.participation_by_day[2] +
          s.participation_by_day[3] + s.participation_by_day[4]) /
         5.0;
}
inline double weekend_per_day(const SynthSummary& s)
{
  return (s.participation_by_day[5] + s.participation_by_day[6]) / 2.0;
}

inline Report synth_suite(std::size_t persons = 1500, unsigned threads = 1)
{
  Report rep("synth");
  Stopwatch sw;
  const auto runs = synth_runs({1, 2, 3, 4, 5}, persons, 10, threads);
  rep.seconds = sw.seconds();
  double part = 0.0, tt = 0.0, wd = 0.0, we = 0.0, wd_total = 0.0, we_total = 0.0;
  for (const auto& r : runs) {
    const auto& s = r.summary;
    part += s.mean_weekly_participation / runs.size();
    tt += s.mean_one_way_travel_minutes / runs.size();
    wd += weekday_per_day(s);
    we += weekend_per_day(s);
    wd_total += 5.0 * weekday_per_day(s);
    we_total += 2.0 * weekend_per_day(s);
    std::string by_day;
    for (int c : s.participation_by_day) by_day += ' ' + std::to_string(c);
    rep.notes.push_back("seed " + std::to_string(r.seed) + ": persons " + std::to_string(s.persons) + " (excluded " +
                        std::to_string(s.excluded) + "), participation " + fmt(s.mean_weekly_participation, 4) +
                        ", one-way travel " + fmt(s.mean_one_way_travel_minutes, 4) + " min, by day" + by_day);
  }
  rep.notes.push_back("weekday total " + fmt(wd_total) + ", weekend total " + fmt(we_total));
  rep.check("mean weekly participation in [1.03, 1.33]", part >= 1.03 && part <= 1.33, fmt(part, 4));
  rep.check("mean one-way travel time in [23.5, 29.5] min", tt >= 23.5 && tt <= 29.5, fmt(tt, 4) + " min");
  rep.check("weekend participation per day exceeds weekday", we > wd,
            "weekend " + fmt(we / runs.size(), 5) + " vs weekday " + fmt(wd / runs.size(), 5) + " per day per seed");
  rep.check("runtime < 20 min", rep.seconds < 1200.0, fmt(rep.seconds, 4) + " s");
  return rep;
}

inline Report ecommerce_suite(std::size_t persons = 1500, unsigned threads = 1)
{
  Report rep("ecommerce");
  Stopwatch sw;
  const Preset pre = ecommerce_preset();
  bool zero_travel = true;
  std::vector<long> pooled(7, 0);
  int monday_modal = 0;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  for (std::uint64_t s : seeds) {
    const auto people = generate_population(persons, pre.zones, s);
    for (const auto& p : people) {
      const auto in = person_inputs(p, pre.zones, Horizon::weeks(1));
      for (double v : in.travel_time.data()) zero_travel = zero_travel && v == 0.0;
      for (double v : in.travel_cost.data()) zero_travel = zero_travel && v == 0.0;
    }
    const auto res = simulate_patterns(people, pre.zones, pre.pop, s, threads);
    const auto sum = summarize(res, pre.zones);
    std::string by_day;
    for (int t = 0; t < 7; ++t) {
      pooled[t] += sum.participation_by_day[t];
      by_day += ' ' + std::to_string(sum.participation_by_day[t]);
    }
    const auto top = std::max_element(sum.participation_by_day.begin(), sum.participation_by_day.end());
    if (top == sum.participation_by_day.begin()) ++monday_modal;
    rep.notes.push_back("seed " + std::to_string(s) + ": participation " + fmt(sum.mean_weekly_participation, 4) +
                        ", by day" + by_day);
  }
  rep.seconds = sw.seconds();
  const auto top = std::max_element(pooled.begin(), pooled.end());
  rep.check("zero travel time and cost in every alternative", zero_travel, "");
  rep.check("Monday is the modal day (pooled over seeds)", top == pooled.begin(),
            "Monday modal in " + std::to_string(monday_modal) + " of " + std::to_string(seeds.size()) + " seeds");
  return rep;
}

struct RecoveryData
{
  ZoneSystem zones;
  std::vector<Observation> observations;
};

inline RecoveryData recovery_data(std::size_t persons, std::uint64_t seed = 7)
{
  RecoveryData d;
  d.zones = generate_zones(10, seed);
  const auto people = generate_population(persons, d.zones, seed);
  d.observations = simulate_patterns(people, d.zones, grocery_population(), seed).observations;
  return d;
}

/// Likelihood surface over (p1, q2) around the truth.
inline Report surface_suite(std::size_t persons = 300, int draws = 200, double step_p1 = 0.05,
                            double step_q2 = 0.05, unsigned threads = 1)
{
  Report rep("surface");
  Stopwatch sw;
  const auto data = recovery_data(persons);
  LoglikOptions opt;
  opt.draws = draws;
  opt.seed = 11;
  opt.threads = threads;
  const auto s = loglik_surface(data.zones, data.observations, grocery_population(),
                                {"p1", linspace(0.8 - 2 * step_p1, 0.8 + 2 * step_p1, 5)},
                                {"q2", linspace(0.5 - 2 * step_q2, 0.5 + 2 * step_q2, 5)}, opt);
  rep.seconds = sw.seconds();
  for (std::size_t i = 0; i < 5; ++i) {
    std::string row = "p1=" + fmt(s.axis1.values[i], 3) + ":";
    for (std::size_t j = 0; j < 5; ++j) row += ' ' + fmt(s.loglik(i, j), 7);
    rep.notes.push_back(row);
  }
  const double p1 = s.axis1.values[s.argmax1], q2 = s.axis2.values[s.argmax2];
  rep.check("argmax within one grid step of (0.8, 0.5)",
            std::abs(p1 - 0.8) <= step_p1 + 1e-12 && std::abs(q2 - 0.5) <= step_q2 + 1e-12,
            "argmax (" + fmt(p1, 4) + ", " + fmt(q2, 4) + ")");
  rep.check("runtime < 2 h", rep.seconds < 7200.0, fmt(rep.seconds, 4) + " s");
  return rep;
}

/// Simulated maximum likelihood of (p1, q2) from an offset start.
inline Report recovery_suite(std::size_t persons = 300, int draws = 200, int budget = 40, unsigned threads = 1,
                             double init_p1 = 0.7, double init_q2 = 0.4)
{
  Report rep("recovery");
  Stopwatch sw;
  const auto data = recovery_data(persons);
  PopulationParams init = grocery_population();
  set_parameter(init, "p1", init_p1);
  set_parameter(init, "q2", init_q2);
  EstimateOptions opt;
  opt.budget = budget;
  opt.loglik.draws = draws;
  opt.loglik.seed = 11;
  opt.loglik.threads = threads;
  const auto r = maximize(data.zones, data.observations, init, {"p1", "q2"}, opt);
  rep.seconds = sw.seconds();
  for (const auto& row : r.trace)
    rep.notes.push_back("iteration " + std::to_string(row.iteration) + ": p1 " + fmt(row.values[0], 5) + ", q2 " +
                        fmt(row.values[1], 5) + ", loglik " + fmt(row.loglik, 8));
  const double ll_truth = simulated_loglik(data.zones, data.observations, grocery_population(), opt.loglik).total;
  rep.notes.push_back("loglik at (0.8, 0.5): " + fmt(ll_truth, 8) + "; at estimate: " + fmt(r.loglik, 8));
  rep.check("trace has at most budget rows", static_cast<int>(r.trace.size()) <= budget,
            std::to_string(r.trace.size()));
  rep.check("p1 within 0.10 of 0.8", std::abs(r.estimates[0] - 0.8) <= 0.10, fmt(r.estimates[0], 5));
  rep.check("q2 within 0.10 of 0.5", std::abs(r.estimates[1] - 0.5) <= 0.10, fmt(r.estimates[1], 5));
  rep.check("runtime < 8 h", rep.seconds < 8 * 3600.0, fmt(rep.seconds, 5) + " s");
  return rep;
}

}  // namespace needs::verify

#endif
