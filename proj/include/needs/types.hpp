#ifndef NEEDS_TYPES_HPP_
#define NEEDS_TYPES_HPP_

#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace needs
{

/// Thrown when a value object would violate one of its invariants.
class model_error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Planning horizon. Day indices are 0-based internally; the 1-based
/// convention only appears in file formats and the CLI.
class Horizon
{
public:
  Horizon() : Horizon(weeks(1)) {}

  /// `weekend_days` holds 1-based day indices.
  Horizon(int days, const std::set<int>& weekend_days) : days_(days), weekend_(days > 0 ? days : 0, false)
  {
    if (days < 1) throw model_error("horizon must have at least one day");
    for (int w : weekend_days) {
      if (w < 1 || w > days) throw model_error("weekend day index out of range: " + std::to_string(w));
      weekend_[w - 1] = true;
    }
  }

  /// K weeks with days 6 and 7 of every week as weekend.
  static Horizon weeks(int k)
  {
    if (k < 1) throw model_error("horizon must have at least one week");
    std::set<int> we;
    for (int w = 0; w < k; ++w) {
      we.insert(7 * w + 6);
      we.insert(7 * w + 7);
    }
    return Horizon(7 * k, we);
  }

  int days() const { return days_; }
  bool is_weekend(int t) const { return weekend_.at(t); }
  bool whole_weeks() const { return days_ % 7 == 0; }

  /// Horizon `times` as long, with the weekend flags repeated.
  Horizon repeated(int times) const
  {
    std::set<int> we;
    for (int r = 0; r < times; ++r)
      for (int t = 0; t < days_; ++t)
        if (weekend_[t]) we.insert(r * days_ + t + 1);
    return Horizon(days_ * times, we);
  }

  std::set<int> weekend_days() const
  {
    std::set<int> out;
    for (int t = 0; t < days_; ++t)
      if (weekend_[t]) out.insert(t + 1);
    return out;
  }

  bool operator==(const Horizon&) const = default;

private:
  int days_ = 7;
  std::vector<bool> weekend_;
};

/// Activity production function. Linear is a one-segment piecewise spec.
class ProductionSpec
{
public:
  enum class Kind { cobb_douglas, linear, piecewise };

  static ProductionSpec cobb_douglas(double q0, double q1, double q2)
  {
    if (!(q1 > 0.0 && q1 < 1.0)) throw model_error("Cobb-Douglas duration elasticity q1 must lie in (0, 1)");
    ProductionSpec s;
    s.kind_ = Kind::cobb_douglas;
    s.q0_ = q0;
    s.q1_ = q1;
    s.q2_ = q2;
    return s;
  }

  static ProductionSpec linear(double q0, double p1, double q2)
  {
    ProductionSpec s = piecewise(q0, q2, {p1}, {});
    s.kind_ = Kind::linear;
    return s;
  }

  /// `slopes` has one entry per segment, `breakpoints` one fewer.
  static ProductionSpec piecewise(double q0, double q2, std::vector<double> slopes, std::vector<double> breakpoints)
  {
    if (slopes.empty()) throw model_error("piecewise production needs at least one segment");
    if (breakpoints.size() + 1 != slopes.size())
      throw model_error("piecewise production needs exactly one breakpoint fewer than slopes");
    for (std::size_t i = 0; i < slopes.size(); ++i) {
      if (!(slopes[i] > 0.0) || !std::isfinite(slopes[i])) throw model_error("piecewise slopes must be positive");
      if (i > 0 && !(slopes[i] < slopes[i - 1])) throw model_error("piecewise slopes must be strictly decreasing");
    }
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      if (!(breakpoints[i] > 0.0) || !std::isfinite(breakpoints[i]))
        throw model_error("piecewise breakpoints must be positive");
      if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
        throw model_error("piecewise breakpoints must be strictly increasing");
    }
    ProductionSpec s;
    s.kind_ = slopes.size() == 1 ? Kind::linear : Kind::piecewise;
    s.q0_ = q0;
    s.q2_ = q2;
    s.slopes_ = std::move(slopes);
    s.breaks_ = std::move(breakpoints);
    return s;
  }

  Kind kind() const { return kind_; }
  bool is_cobb_douglas() const { return kind_ == Kind::cobb_douglas; }
  bool is_piecewise() const { return kind_ != Kind::cobb_douglas; }

  double q0() const { return q0_; }
  double q1() const { return q1_; }
  double q2() const { return q2_; }
  const std::vector<double>& slopes() const { return slopes_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  std::size_t segments() const { return slopes_.size(); }

  /// Start of segment i in hours.
  double segment_begin(std::size_t i) const { return i == 0 ? 0.0 : breaks_[i - 1]; }
  /// End of segment i in hours; the last segment is unbounded.
  double segment_end(std::size_t i) const { return i + 1 < slopes_.size() ? breaks_[i] : INFINITY; }

  ProductionSpec with_q0(double q0) const
  {
    ProductionSpec s = *this;
    s.q0_ = q0;
    return s;
  }
  ProductionSpec with_q2(double q2) const
  {
    ProductionSpec s = *this;
    s.q2_ = q2;
    return s;
  }
  /// Multiplies every slope by `factor` (> 0).
  ProductionSpec with_slope_scale(double factor) const
  {
    if (!is_piecewise()) throw model_error("slope scaling only applies to piecewise production");
    std::vector<double> sl = slopes_;
    for (double& p : sl) p *= factor;
    return piecewise(q0_, q2_, std::move(sl), breaks_);
  }

  bool operator==(const ProductionSpec&) const = default;

private:
  ProductionSpec() = default;

  Kind kind_ = Kind::linear;
  double q0_ = 0.0;
  double q1_ = 0.0;
  double q2_ = 0.0;
  std::vector<double> slopes_;
  std::vector<double> breaks_;
};

/// Behavioral parameters of one individual.
class ModelParams
{
public:
  ModelParams(double lambda_weekday, double gamma, double rho1, double rho2, double rho3, ProductionSpec production)
    : lambda_(lambda_weekday), gamma_(gamma), rho1_(rho1), rho2_(rho2), rho3_(rho3), production_(std::move(production))
  {
    if (!(lambda_ > 0.0)) throw model_error("lambda must be positive");
    if (!(gamma_ > 0.0)) throw model_error("gamma must be positive");
    if (!(rho1_ > 0.0)) throw model_error("rho1 must be positive");
    if (!(rho3_ > 0.0)) throw model_error("rho3 must be positive");
    if (!(rho2_ > rho3_)) throw model_error("rho2 must exceed rho3 for the objective to be bounded");
  }

  double lambda_weekday() const { return lambda_; }
  double gamma() const { return gamma_; }
  double rho1() const { return rho1_; }
  double rho2() const { return rho2_; }
  double rho3() const { return rho3_; }
  const ProductionSpec& production() const { return production_; }

  ModelParams with_production(ProductionSpec p) const
  {
    return ModelParams(lambda_, gamma_, rho1_, rho2_, rho3_, std::move(p));
  }
  ModelParams with_gamma(double g) const { return ModelParams(lambda_, g, rho1_, rho2_, rho3_, production_); }

  bool operator==(const ModelParams&) const = default;

private:
  double lambda_;
  double gamma_;
  double rho1_;
  double rho2_;
  double rho3_;
  ProductionSpec production_;
};

/// Row-major |rows| x |cols| matrix of doubles.
class Grid
{
public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Grid&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Attributes faced by one individual: location x day matrices are two-way
/// travel figures from home.
struct ScenarioInputs
{
  std::vector<std::string> locations;
  Grid attractiveness;  // A[j,t]
  Grid travel_time;     // TT[j,t], hours
  Grid travel_cost;     // TC[j,t], money
  std::vector<double> free_time;  // FT[t], hours
  std::vector<std::string> size_measure_names;
  Grid size_measures;   // x[j,k]

  std::size_t n_locations() const { return locations.size(); }
  int days() const { return static_cast<int>(free_time.size()); }

  /// Throws model_error on any invariant violation.
  void validate() const
  {
    const std::size_t L = locations.size();
    const std::size_t H = free_time.size();
    if (L == 0) throw model_error("scenario needs at least one location");
    if (H == 0) throw model_error("scenario needs at least one day");
    auto dims = [&](const Grid& g, const char* name) {
      if (g.rows() != L || g.cols() != H)
        throw model_error(std::string(name) + " must be |locations| x days");
    };
    dims(attractiveness, "attractiveness");
    dims(travel_time, "travel_time");
    dims(travel_cost, "travel_cost");
    for (double a : attractiveness.data())
      if (!(a > 0.0)) throw model_error("attractiveness must be positive");
    for (double v : travel_time.data())
      if (!(v >= 0.0)) throw model_error("travel_time must be non-negative");
    for (double v : travel_cost.data())
      if (!(v >= 0.0)) throw model_error("travel_cost must be non-negative");
    for (double f : free_time)
      if (!(f > 0.0)) throw model_error("free_time must be positive");
    if (size_measures.rows() != 0 || size_measures.cols() != 0) {
      if (size_measures.rows() != L) throw model_error("size_measures must have one row per location");
      if (size_measures.cols() != size_measure_names.size())
        throw model_error("size_measures must have one column per measure name");
    }
  }

  /// Inputs replicated `times` over consecutive horizons.
  ScenarioInputs repeated(int times) const
  {
    ScenarioInputs out = *this;
    const std::size_t L = locations.size();
    const std::size_t H = free_time.size();
    auto rep = [&](const Grid& g) {
      Grid r(L, H * times);
      for (std::size_t j = 0; j < L; ++j)
        for (int k = 0; k < times; ++k)
          for (std::size_t t = 0; t < H; ++t) r(j, k * H + t) = g(j, t);
      return r;
    };
    out.attractiveness = rep(attractiveness);
    out.travel_time = rep(travel_time);
    out.travel_cost = rep(travel_cost);
    out.free_time.clear();
    for (int k = 0; k < times; ++k) out.free_time.insert(out.free_time.end(), free_time.begin(), free_time.end());
    return out;
  }

  bool operator==(const ScenarioInputs&) const = default;
};

struct ActivityPattern
{
  std::vector<int> delta;
  std::vector<double> d;
  std::vector<int> loc;

  int days() const { return static_cast<int>(delta.size()); }
  int participations() const
  {
    int n = 0;
    for (int x : delta) n += x;
    return n;
  }

  bool operator==(const ActivityPattern&) const = default;
};

struct InventoryTrajectory
{
  std::vector<double> I;
  std::vector<double> Q;
  double I_min = 0.0;
};

struct SolveResult
{
  ActivityPattern pattern;
  InventoryTrajectory trajectory;
  double objective = 0.0;
  int weeks = 1;
  int anchor = -1;  // 0-based day with I = 0 fixed during the solve
};

}  // namespace needs

#endif
