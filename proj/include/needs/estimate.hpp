#ifndef NEEDS_ESTIMATE_HPP_
#define NEEDS_ESTIMATE_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "empirical.hpp"
#include "nelder_mead.hpp"
#include "types.hpp"

namespace needs
{

/// How a parameter is mapped to the unconstrained scale the optimizer sees.
enum class Transform
{
  identity,
  log,       // positive parameters
  logistic,  // parameters in (0, 1)
};

inline double to_internal(double v, Transform tr)
{
  switch (tr) {
  case Transform::log:
    if (!(v > 0.0)) throw model_error("log-transformed parameter must be positive");
    return std::log(v);
  case Transform::logistic:
    if (!(v > 0.0 && v < 1.0)) throw model_error("logistic-transformed parameter must lie in (0, 1)");
    return std::log(v / (1.0 - v));
  default:
    return v;
  }
}

inline double from_internal(double x, Transform tr)
{
  switch (tr) {
  case Transform::log:
    return std::exp(x);
  case Transform::logistic:
    return 1.0 / (1.0 + std::exp(-x));
  default:
    return x;
  }
}

/// Names accepted as free parameters:
///   p1, q1, q2, gamma, mu, beta<k> (1-based), sigma_nest, sigma_dur,
///   mu_rho1, mu_kappa, mu_q0, omega_rho1, omega_kappa, omega_q0.
inline std::vector<std::string> parameter_names(const PopulationParams& pop)
{
  std::vector<std::string> out{"p1", "q1", "q2", "gamma", "mu"};
  for (std::size_t k = 0; k < pop.xi.beta.size(); ++k) out.push_back("beta" + std::to_string(k + 1));
  for (const char* n : {"sigma_nest", "sigma_dur", "mu_rho1", "mu_kappa", "mu_q0", "omega_rho1", "omega_kappa",
                        "omega_q0"})
    out.emplace_back(n);
  return out;
}

namespace detail
{

inline int random_index(const std::string& name)
{
  if (name.ends_with("rho1")) return 0;
  if (name.ends_with("kappa")) return 1;
  return 2;
}

inline std::size_t beta_index(const std::string& name, const PopulationParams& pop)
{
  std::size_t k = 0;
  try {
    k = std::stoul(name.substr(4));
  } catch (const std::exception&) {
    throw model_error("unknown parameter: " + name);
  }
  if (k < 1 || k > pop.xi.beta.size()) throw model_error("no size-measure coefficient " + name);
  return k - 1;
}

inline bool is_random_param(const std::string& name)
{
  for (const char* n : {"mu_rho1", "mu_kappa", "mu_q0", "omega_rho1", "omega_kappa", "omega_q0"})
    if (name == n) return true;
  return false;
}

}  // namespace detail

inline Transform parameter_transform(const std::string& name)
{
  if (name == "q1" || name == "q2") return Transform::logistic;
  if (name.starts_with("mu_")) return Transform::identity;
  return Transform::log;
}

inline double get_parameter(const PopulationParams& pop, const std::string& name)
{
  const ProductionSpec& prod = pop.xi.production;
  if (name == "p1") {
    if (prod.is_cobb_douglas()) throw model_error("p1 applies to piecewise production only");
    return prod.slopes().front();
  }
  if (name == "q1") {
    if (!prod.is_cobb_douglas()) throw model_error("q1 applies to Cobb-Douglas production only");
    return prod.q1();
  }
  if (name == "q2") return prod.q2();
  if (name == "gamma") return pop.xi.gamma;
  if (name == "mu") return pop.xi.mu;
  if (name == "sigma_nest") return pop.xi.sigma_nest;
  if (name == "sigma_dur") return pop.xi.sigma_dur;
  if (name.starts_with("beta")) return pop.xi.beta[detail::beta_index(name, pop)];
  if (detail::is_random_param(name)) {
    const int i = detail::random_index(name);
    return name.starts_with("mu_") ? pop.mu_D[i] : pop.omega_diag[i];
  }
  throw model_error("unknown parameter: " + name);
}

inline void set_parameter(PopulationParams& pop, const std::string& name, double v)
{
  ProductionSpec& prod = pop.xi.production;
  if (name == "p1") {
    if (prod.is_cobb_douglas()) throw model_error("p1 applies to piecewise production only");
    prod = prod.with_slope_scale(v / prod.slopes().front());
    return;
  }
  if (name == "q1") {
    if (!prod.is_cobb_douglas()) throw model_error("q1 applies to Cobb-Douglas production only");
    prod = ProductionSpec::cobb_douglas(prod.q0(), v, prod.q2());
    return;
  }
  if (name == "q2") {
    prod = prod.with_q2(v);
    return;
  }
  if (name == "gamma") {
    pop.xi.gamma = v;
  } else if (name == "mu") {
    pop.xi.mu = v;
  } else if (name == "sigma_nest") {
    pop.xi.sigma_nest = v;
  } else if (name == "sigma_dur") {
    pop.xi.sigma_dur = v;
  } else if (name.starts_with("beta")) {
    pop.xi.beta[detail::beta_index(name, pop)] = v;
  } else if (detail::is_random_param(name)) {
    const int i = detail::random_index(name);
    (name.starts_with("mu_") ? pop.mu_D[i] : pop.omega_diag[i]) = v;
  } else {
    throw model_error("unknown parameter: " + name);
  }
}

/// Maps between PopulationParams and the optimizer's unconstrained vector.
class ParameterVector
{
public:
  ParameterVector(PopulationParams base, std::vector<std::string> names)
    : base_(std::move(base)), names_(std::move(names))
  {
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (names_[i] == names_[j]) throw model_error("parameter listed twice: " + names_[i]);
    for (const auto& n : names_) get_parameter(base_, n);
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  std::vector<double> natural(const PopulationParams& pop) const
  {
    std::vector<double> v;
    for (const auto& n : names_) v.push_back(get_parameter(pop, n));
    return v;
  }

  std::vector<double> internal(const PopulationParams& pop) const
  {
    std::vector<double> x;
    for (const auto& n : names_) x.push_back(to_internal(get_parameter(pop, n), parameter_transform(n)));
    return x;
  }

  PopulationParams params(const std::vector<double>& x) const
  {
    if (x.size() != names_.size()) throw model_error("parameter vector has the wrong length");
    PopulationParams pop = base_;
    for (std::size_t i = 0; i < x.size(); ++i)
      set_parameter(pop, names_[i], from_internal(x[i], parameter_transform(names_[i])));
    return pop;
  }

private:
  PopulationParams base_;
  std::vector<std::string> names_;
};

struct EstimateOptions
{
  int budget = 40;       // Nelder-Mead iterations
  double step = 0.1;     // initial simplex size on the transformed scale
  LoglikOptions loglik;  // draws, seed, threads, choice-set size
};

struct TraceRow
{
  int iteration;
  std::vector<double> values;  // natural units, in free-parameter order
  double loglik;
  char step;
};

struct EstimateResult
{
  std::vector<std::string> names;
  std::vector<double> estimates;
  double loglik = 0.0;
  int evaluations = 0;
  PopulationParams params;
  std::vector<TraceRow> trace;
};

namespace detail
{

inline std::string loglik_diagnostics(const LoglikResult& r, const std::vector<Observation>& data)
{
  std::size_t bad = 0;
  std::string ids;
  for (std::size_t n = 0; n < r.per_person.size(); ++n)
    if (!std::isfinite(r.per_person[n])) {
      if (bad < 10) ids += (ids.empty() ? "" : ",") + std::to_string(data[n].person.id);
      ++bad;
    }
  return std::to_string(bad) + " of " + std::to_string(r.per_person.size()) +
         " persons have zero simulated probability (ids " + ids + (bad > 10 ? ",..." : "") + ")";
}

}  // namespace detail

/// Simulated maximum likelihood over `free_params` by Nelder-Mead on
/// transformed coordinates. Draws and sampled choice sets are fixed for the
/// whole run, so every evaluation shares the same random numbers.
inline EstimateResult maximize(const ZoneSystem& zones, const std::vector<Observation>& data,
                               const PopulationParams& init, const std::vector<std::string>& free_params,
                               const EstimateOptions& opt = {})
{
  if (opt.budget < 0) throw model_error("budget must be non-negative");
  if (!(opt.step > 0.0)) throw model_error("simplex step must be positive");
  init.validate();
  const ParameterVector pv(init, free_params);
  LikelihoodEvaluator eval(zones, data, opt.loglik);

  const LoglikResult first = eval(init);
  if (!std::isfinite(first.total))
    throw model_error("log-likelihood is not finite at the initial point: " + detail::loglik_diagnostics(first, data));

  EstimateResult res;
  res.names = free_params;
  const std::vector<double> x0 = pv.internal(init);
  if (free_params.empty() || opt.budget == 0) {
    res.estimates = pv.natural(init);
    res.loglik = first.total;
    res.evaluations = 1;
    res.params = init;
    return res;
  }

  auto objective = [&](const std::vector<double>& x) {
    PopulationParams pop;
    try {
      pop = pv.params(x);
      pop.validate();
    } catch (const model_error&) {
      return std::numeric_limits<double>::infinity();
    }
    const double ll = eval(pop).total;
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };
  // The initial vertex is already known.
  auto batch = [&](const std::vector<std::vector<double>>& xs) {
    std::vector<double> out;
    for (const auto& x : xs) out.push_back(x == x0 ? -first.total : objective(x));
    return out;
  };

  NelderMeadOptions nmo;
  nmo.max_iterations = opt.budget;
  nmo.ftol = 1e-8;
  nmo.xtol = 1e-6;
  const auto nm = NelderMead(nmo).minimize(objective, x0, std::vector<double>(x0.size(), opt.step), batch);

  res.params = pv.params(nm.x);
  res.estimates = pv.natural(res.params);
  res.loglik = -nm.f;
  res.evaluations = nm.evaluations;
  for (const auto& it : nm.trace)
    res.trace.push_back({it.iteration, pv.natural(pv.params(it.best_x)), -it.best_f, it.step});
  return res;
}

struct SurfaceAxis
{
  std::string name;
  std::vector<double> values;
};

/// `lo:hi:n` with n >= 1 evenly spaced points (n = 1 gives lo).
inline std::vector<double> linspace(double lo, double hi, int n)
{
  if (n < 1) throw model_error("grid needs at least one point");
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw model_error("grid bounds must be finite");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    const double x = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    // Snap to 12 significant digits so 0.3:0.7:9 gives 0.4, not 0.39999999999999997.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    v[i] = std::strtod(buf, nullptr);
  }
  return v;
}

struct Surface
{
  SurfaceAxis axis1;
  SurfaceAxis axis2;
  Grid loglik;  // axis1 x axis2
  std::size_t argmax1 = 0;
  std::size_t argmax2 = 0;
};

/// Simulated log-likelihood on a two-parameter grid with common random numbers.
/// Cells are scanned row-major; the first maximal cell wins.
inline Surface loglik_surface(const ZoneSystem& zones, const std::vector<Observation>& data,
                              const PopulationParams& base, const SurfaceAxis& axis1, const SurfaceAxis& axis2,
                              const LoglikOptions& opt = {})
{
  if (axis1.values.empty() || axis2.values.empty()) throw model_error("surface axes need at least one value");
  for (const auto* ax : {&axis1, &axis2})
    for (double v : ax->values)
      if (!std::isfinite(v)) throw model_error("surface grid values must be finite");
  if (axis1.name == axis2.name) throw model_error("surface axes must differ");
  get_parameter(base, axis1.name);
  get_parameter(base, axis2.name);
  LikelihoodEvaluator eval(zones, data, opt);
  Surface s{axis1, axis2, Grid(axis1.values.size(), axis2.values.size()), 0, 0};
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < axis1.values.size(); ++i)
    for (std::size_t j = 0; j < axis2.values.size(); ++j) {
      PopulationParams pop = base;
      set_parameter(pop, axis1.name, axis1.values[i]);
      set_parameter(pop, axis2.name, axis2.values[j]);
      double ll = -std::numeric_limits<double>::infinity();
      try {
        ll = eval(pop).total;
      } catch (const model_error&) {
      }
      s.loglik(i, j) = ll;
      if (!any || ll > best) {
        best = ll;
        s.argmax1 = i;
        s.argmax2 = j;
        any = true;
      }
    }
  return s;
}

}  // namespace needs

#endif
