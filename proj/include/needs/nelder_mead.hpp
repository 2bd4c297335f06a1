#ifndef NEEDS_NELDER_MEAD_HPP_
#define NEEDS_NELDER_MEAD_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace needs
{

struct NelderMeadOptions
{
  int max_iterations = 1000;
  double ftol = 1e-12;  // stop when the simplex value spread falls below this
  double xtol = 1e-12;  // and its diameter falls below this
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadIteration
{
  int iteration;
  std::vector<double> best_x;
  double best_f;
  char step;  // 'r'eflect, 'e'xpand, 'o'utside / 'i'nside contraction, 's'hrink
};

struct NelderMeadResult
{
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<NelderMeadIteration> trace;
};

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of size `step`.
/// `batch`, when given, evaluates several points at once (used for the
/// initial simplex and for shrink steps) and must agree with `f`.
class NelderMead
{
public:
  using Objective = std::function<double(const std::vector<double>&)>;
  using BatchObjective = std::function<std::vector<double>(const std::vector<std::vector<double>>&)>;

  explicit NelderMead(NelderMeadOptions opt = {}) : opt_(opt) {}

  NelderMeadResult minimize(const Objective& f, const std::vector<double>& x0, const std::vector<double>& step,
                            const BatchObjective& batch = nullptr) const
  {
    const std::size_t n = x0.size();
    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
      ++res.evaluations;
      const double v = f(x);
      return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    auto eval_many = [&](const std::vector<std::vector<double>>& xs) {
      std::vector<double> out;
      if (batch) {
        res.evaluations += static_cast<int>(xs.size());
        out = batch(xs);
        for (double& v : out)
          if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
      } else {
        for (const auto& x : xs) out.push_back(eval(x));
      }
      return out;
    };

    if (n == 0) {
      res.x = x0;
      res.f = eval(x0);
      res.converged = true;
      return res;
    }

    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step.at(i);
    std::vector<double> vals = eval_many(pts);

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      std::vector<std::vector<double>> p2(n + 1);
      std::vector<double> v2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        p2[i] = pts[order[i]];
        v2[i] = vals[order[i]];
      }
      pts.swap(p2);
      vals.swap(v2);
    };

    auto blend = [&](const std::vector<double>& c, const std::vector<double>& x, double coef) {
      std::vector<double> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = c[i] + coef * (x[i] - c[i]);
      return out;
    };

    sort_simplex();
    while (res.iterations < opt_.max_iterations) {
      const double spread = vals[n] - vals[0];
      double diameter = 0.0;
      for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t i = 0; i < n; ++i) diameter = std::max(diameter, std::abs(pts[k][i] - pts[0][i]));
      if (std::isfinite(spread) && spread <= opt_.ftol && diameter <= opt_.xtol) {
        res.converged = true;
        break;
      }

      std::vector<double> centroid(n, 0.0);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);

      char step_kind = 'r';
      const auto xr = blend(centroid, pts[n], -opt_.reflection);
      const double fr = eval(xr);
      if (fr < vals[0]) {
        const auto xe = blend(centroid, pts[n], -opt_.reflection * opt_.expansion);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[n] = xe;
          vals[n] = fe;
          step_kind = 'e';
        } else {
          pts[n] = xr;
          vals[n] = fr;
        }
      } else if (fr < vals[n - 1]) {
        pts[n] = xr;
        vals[n] = fr;
      } else {
        const bool outside = fr < vals[n];
        const auto xc = outside ? blend(centroid, xr, opt_.contraction) : blend(centroid, pts[n], opt_.contraction);
        const double fc = eval(xc);
        if (fc < (outside ? fr : vals[n])) {
          pts[n] = xc;
          vals[n] = fc;
          step_kind = outside ? 'o' : 'i';
        } else {
          std::vector<std::vector<double>> shrunk;
          for (std::size_t k = 1; k <= n; ++k) shrunk.push_back(blend(pts[0], pts[k], opt_.shrink));
          const auto sv = eval_many(shrunk);
          for (std::size_t k = 1; k <= n; ++k) {
            pts[k] = shrunk[k - 1];
            vals[k] = sv[k - 1];
          }
          step_kind = 's';
        }
      }
      sort_simplex();
      ++res.iterations;
      res.trace.push_back({res.iterations, pts[0], vals[0], step_kind});
    }
    res.x = pts[0];
    res.f = vals[0];
    return res;
  }

private:
  NelderMeadOptions opt_;
};

}  // namespace needs

#endif
