#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "needs/pwl_fit.hpp"

using namespace needs;

namespace
{

std::vector<double> fit_grid(const PwlFitConfig& cfg)
{
  std::vector<double> g(cfg.grid_points);
  for (int k = 0; k < cfg.grid_points; ++k) g[k] = cfg.grid_lo + (cfg.grid_hi - cfg.grid_lo) * k / (cfg.grid_points - 1);
  return g;
}

/// Best two-segment fit by scanning the breakpoint; for a fixed breakpoint
/// the slopes solve a 2x2 least-squares problem.
double brute_force_two_segment_sse(double q1, const PwlFitConfig& cfg)
{
  const auto grid = fit_grid(cfg);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i < 4000; ++i) {
    const double b = cfg.grid_lo + (cfg.grid_hi - cfg.grid_lo) * i / 4000.0;
    // f(d) = s1 * min(d, b) + s2 * max(d - b, 0)
    double a11 = 0, a12 = 0, a22 = 0, r1 = 0, r2 = 0;
    for (double d : grid) {
      const double u = std::min(d, b), v = std::max(d - b, 0.0), y = std::pow(d, q1);
      a11 += u * u;
      a12 += u * v;
      a22 += v * v;
      r1 += u * y;
      r2 += v * y;
    }
    const double det = a11 * a22 - a12 * a12;
    if (std::abs(det) < 1e-12) continue;
    const double s1 = (r1 * a22 - r2 * a12) / det, s2 = (a11 * r2 - a12 * r1) / det;
    double sse = 0.0;
    for (double d : grid) {
      const double e = s1 * std::min(d, b) + s2 * std::max(d - b, 0.0) - std::pow(d, q1);
      sse += e * e;
    }
    best = std::min(best, sse);
  }
  return best;
}

}  // namespace

TEST(PwlFit, OneSegmentIsTheLeastSquaresSlope)
{
  PwlFitConfig cfg;
  cfg.n_segments = 1;
  const auto fit = fit_pwl_detailed(ProductionSpec::cobb_douglas(0.1, 0.5, 0.4), 100.0, cfg);
  double num = 0, den = 0;
  for (double d : fit_grid(cfg)) {
    num += d * std::sqrt(d);
    den += d * d;
  }
  ASSERT_EQ(fit.spec.segments(), 1u);
  EXPECT_NEAR(fit.spec.slopes()[0], num / den, 1e-12);
  EXPECT_EQ(fit.spec.q0(), 0.1);
  EXPECT_EQ(fit.spec.q2(), 0.4);
}

TEST(PwlFit, TwoSegmentsReachTheBruteForceOptimum)
{
  PwlFitConfig cfg;
  cfg.n_segments = 2;
  cfg.grid_points = 200;
  for (double q1 : {0.3, 0.5, 0.7}) {
    const auto fit = fit_pwl_detailed(ProductionSpec::cobb_douglas(0.0, q1, 0.4), 100.0, cfg);
    const double oracle = brute_force_two_segment_sse(q1, cfg);
    EXPECT_LE(fit.sse, oracle * (1.0 + 1e-3) + 1e-12) << q1;
  }
}

TEST(PwlFit, ErrorShrinksWithSegmentsAndShapeIsConcave)
{
  const auto target = ProductionSpec::cobb_douglas(0.0, 0.5, 0.4);
  double prev = std::numeric_limits<double>::infinity();
  double one = 0.0;
  for (int n = 1; n <= 4; ++n) {
    PwlFitConfig cfg;
    cfg.n_segments = n;
    const auto fit = fit_pwl_detailed(target, 100.0, cfg);
    EXPECT_LE(fit.sse, prev) << n;
    EXPECT_NEAR(pwl_fit_error(fit.spec, 0.5, cfg), fit.sse, 1e-12 * std::max(1.0, fit.sse));
    prev = fit.sse;
    if (n == 1) one = fit.sse;
    if (n == 3) EXPECT_LT(fit.sse, one / 10.0);
    const auto& s = fit.spec.slopes();
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i], s[i - 1]);
    const auto& b = fit.spec.breakpoints();
    for (std::size_t i = 1; i < b.size(); ++i) EXPECT_GT(b[i], b[i - 1]);
  }
}

TEST(PwlFit, RejectsBadInput)
{
  EXPECT_THROW(fit_pwl(ProductionSpec::linear(0, 0.5, 0.4), 100.0), std::invalid_argument);
  EXPECT_THROW(fit_pwl(ProductionSpec::cobb_douglas(0, 0.5, 0.4), 0.0), std::domain_error);
  PwlFitConfig cfg;
  cfg.grid_lo = 0.0;
  EXPECT_THROW(fit_pwl(ProductionSpec::cobb_douglas(0, 0.5, 0.4), 100.0, cfg), std::invalid_argument);
}
