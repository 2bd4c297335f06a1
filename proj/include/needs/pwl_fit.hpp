#ifndef NEEDS_PWL_FIT_HPP_
#define NEEDS_PWL_FIT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "nelder_mead.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace needs
{

struct PwlFitConfig
{
  int n_segments = 3;
  double grid_lo = 0.01;
  double grid_hi = 8.0;
  int grid_points = 800;
  int starts = 16;
  std::uint64_t seed = 0;
  int max_iterations = 4000;

  void validate() const
  {
    if (n_segments < 1) throw std::invalid_argument("n_segments must be at least 1");
    if (!(grid_lo > 0.0) || !(grid_hi > grid_lo)) throw std::invalid_argument("fit grid must satisfy 0 < lo < hi");
    if (grid_points < 2 * n_segments) throw std::invalid_argument("fit grid needs at least two points per segment");
    if (starts < 1) throw std::invalid_argument("at least one start is required");
  }
};

struct PwlFit
{
  ProductionSpec spec;
  double sse;  // squared error of the shape d^{q1} on the grid
};

namespace detail
{

struct PwlShape
{
  std::vector<double> slopes;
  std::vector<double> breaks;
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

// theta = (ln p1, logit s2..sn, ln b1, ln(b2-b1), ...): slopes decrease and
// breakpoints increase for every real theta.
inline PwlShape decode_shape(const std::vector<double>& theta, int n)
{
  PwlShape s;
  s.slopes.resize(n);
  s.slopes[0] = std::exp(theta[0]);
  for (int i = 1; i < n; ++i) s.slopes[i] = s.slopes[i - 1] * logistic(theta[i]);
  double b = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    b += std::exp(theta[n + i]);
    s.breaks.push_back(b);
  }
  return s;
}

inline std::vector<double> encode_shape(const PwlShape& s)
{
  const int n = static_cast<int>(s.slopes.size());
  std::vector<double> theta(2 * n - 1);
  theta[0] = std::log(s.slopes[0]);
  for (int i = 1; i < n; ++i) theta[i] = logit(s.slopes[i] / s.slopes[i - 1]);
  double prev = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    theta[n + i] = std::log(s.breaks[i] - prev);
    prev = s.breaks[i];
  }
  return theta;
}

inline double shape_sse(const PwlShape& s, const std::vector<double>& grid, const std::vector<double>& target)
{
  double sse = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double d = grid[k];
    double v = 0.0;
    for (std::size_t i = 0; i < s.slopes.size(); ++i) {
      const double lo = i == 0 ? 0.0 : s.breaks[i - 1];
      if (d <= lo) break;
      const double hi = i < s.breaks.size() ? s.breaks[i] : d;
      v += s.slopes[i] * (std::min(d, hi) - lo);
    }
    const double e = v - target[k];
    sse += e * e;
  }
  return sse;
}

inline bool valid_shape(const PwlShape& s)
{
  for (std::size_t i = 0; i < s.slopes.size(); ++i) {
    if (!(s.slopes[i] > 0.0) || !std::isfinite(s.slopes[i])) return false;
    if (i > 0 && !(s.slopes[i] < s.slopes[i - 1])) return false;
  }
  for (std::size_t i = 0; i < s.breaks.size(); ++i) {
    if (!(s.breaks[i] > 0.0) || !std::isfinite(s.breaks[i])) return false;
    if (i > 0 && !(s.breaks[i] > s.breaks[i - 1])) return false;
  }
  return true;
}

}  // namespace detail

/// Least-squares piecewise-linear approximation of a Cobb-Douglas production
/// curve. The fit is done on the shape d^{q1}; q0 and q2 carry over, so the
/// result does not depend on A (kept for interface symmetry). Fits with n
/// segments are warm-started from the n-1 fit, which makes the error
/// non-increasing in n.
inline PwlFit fit_pwl_detailed(const ProductionSpec& target, double A, const PwlFitConfig& cfg = {})
{
  if (!target.is_cobb_douglas()) throw std::invalid_argument("fit_pwl expects a Cobb-Douglas target");
  if (!(A > 0.0)) throw std::domain_error("attractiveness must be positive");
  cfg.validate();
  const double q1 = target.q1();
  std::vector<double> grid(cfg.grid_points), shape(cfg.grid_points);
  for (int k = 0; k < cfg.grid_points; ++k) {
    grid[k] = cfg.grid_lo + (cfg.grid_hi - cfg.grid_lo) * k / (cfg.grid_points - 1);
    shape[k] = std::pow(grid[k], q1);
  }

  // One segment: the normal equation.
  double num = 0.0, den = 0.0;
  for (int k = 0; k < cfg.grid_points; ++k) {
    num += grid[k] * shape[k];
    den += grid[k] * grid[k];
  }
  detail::PwlShape best{{num / den}, {}};
  double best_sse = detail::shape_sse(best, grid, shape);

  NelderMeadOptions nmo;
  nmo.max_iterations = cfg.max_iterations;
  nmo.ftol = 1e-14;
  nmo.xtol = 1e-9;
  const NelderMead nm(nmo);
  for (int n = 2; n <= cfg.n_segments; ++n) {
    auto objective = [&](const std::vector<double>& theta) {
      return detail::shape_sse(detail::decode_shape(theta, n), grid, shape);
    };
    // Warm start: the previous fit plus an inactive segment past the grid.
    detail::PwlShape warm = best;
    warm.slopes.push_back(warm.slopes.back() * 0.5);
    warm.breaks.push_back((warm.breaks.empty() ? 0.0 : warm.breaks.back()) + cfg.grid_hi);
    std::vector<std::vector<double>> starts{detail::encode_shape(warm)};
    Stream rng(cfg.seed, {0x70776cULL, static_cast<std::uint64_t>(n)});
    for (int s = 1; s < cfg.starts; ++s) {
      detail::PwlShape init;
      init.slopes.push_back(std::exp(rng.uniform(-1.0, 1.5)));
      for (int i = 1; i < n; ++i) init.slopes.push_back(init.slopes.back() * rng.uniform(0.1, 0.9));
      std::vector<double> cuts;
      for (int i = 0; i + 1 < n; ++i) cuts.push_back(rng.uniform(cfg.grid_lo, cfg.grid_hi));
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 1; i < cuts.size(); ++i) cuts[i] = std::max(cuts[i], cuts[i - 1] + 1e-3);
      init.breaks = cuts;
      starts.push_back(detail::encode_shape(init));
    }
    detail::PwlShape level_best;
    double level_sse = std::numeric_limits<double>::infinity();
    for (const auto& x0 : starts) {
      std::vector<double> x = x0;
      // Restarts shake the simplex out of premature collapse.
      double f = objective(x);
      for (int round = 0; round < 3; ++round) {
        const auto res = nm.minimize(objective, x, std::vector<double>(x.size(), 0.3));
        if (res.f >= f - 1e-15) break;
        x = res.x;
        f = res.f;
      }
      const auto cand = detail::decode_shape(x, n);
      if (f < level_sse && detail::valid_shape(cand)) {
        level_sse = f;
        level_best = cand;
      }
    }
    if (level_sse <= best_sse) {
      best = level_best;
      best_sse = level_sse;
    } else {
      best = warm;  // keeps the n-segment form at the previous error
    }
  }
  return {ProductionSpec::piecewise(target.q0(), target.q2(), best.slopes, best.breaks), best_sse};
}

inline ProductionSpec fit_pwl(const ProductionSpec& target, double A, const PwlFitConfig& cfg = {})
{
  return fit_pwl_detailed(target, A, cfg).spec;
}

/// Squared error of a piecewise spec's shape against d^{q1} on the fit grid.
inline double pwl_fit_error(const ProductionSpec& fitted, double q1, const PwlFitConfig& cfg = {})
{
  std::vector<double> grid(cfg.grid_points), shape(cfg.grid_points);
  for (int k = 0; k < cfg.grid_points; ++k) {
    grid[k] = cfg.grid_lo + (cfg.grid_hi - cfg.grid_lo) * k / (cfg.grid_points - 1);
    shape[k] = std::pow(grid[k], q1);
  }
  return detail::shape_sse({fitted.slopes(), fitted.breakpoints()}, grid, shape);
}

}  // namespace needs

#endif
