#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skellam {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RateKind { constant, weibull, gompertz_makeham, tabulated };

std::string_view to_string(RateKind kind);
RateKind rate_kind_from_string(std::string_view name);

// A continuous cumulative intensity Lambda(t) with Lambda(0) = 0.
class RateFunction {
 public:
  static RateFunction constant(double rate);
  // Lambda(t) = (t/scale)^shape
  static RateFunction weibull(double scale, double shape);
  // Lambda(t) = (a/b)(e^{bt} - 1) + mu t
  static RateFunction gompertz_makeham(double a, double b, double mu);
  // Piecewise-linear through (times, values); times[0] = 0 and values[0] = 0.
  static RateFunction tabulated(std::vector<double> times, std::vector<double> values);

  RateKind kind() const noexcept { return kind_; }
  // constant: {rate}; weibull: {scale, shape}; gompertz_makeham: {a, b, mu}
  const std::vector<double>& params() const noexcept { return params_; }
  const std::vector<double>& knot_times() const noexcept { return knot_t_; }
  const std::vector<double>& knot_values() const noexcept { return knot_v_; }

  double cumulative(double t) const;
  double increment(double s, double t) const;
  // lambda(t); may be +inf (Weibull with shape < 1 at t = 0)
  double intensity(double t) const;
  // sup of lambda over [s, t]
  double max_intensity(double s, double t) const;
  // last time at which the function is defined
  double horizon() const noexcept;
  bool is_zero() const noexcept;

 private:
  RateKind kind_ = RateKind::constant;
  std::vector<double> params_;
  std::vector<double> knot_t_;
  std::vector<double> knot_v_;
};

enum class Variant {
  GCP, GFCP, NGCP, NGFCP, NHGFCP,
  GSP, GFSP, NGSP, NGFSP, NHGFSP,
  RUN_AVG_GCP, RUN_AVG_GSP
};

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

bool is_skellam(Variant v);
bool is_fractional(Variant v);
bool requires_constant_rates(Variant v);

struct ProcessSpec {
  Variant variant = Variant::NGSP;
  int k = 1;
  std::vector<RateFunction> up;
  std::vector<RateFunction> down;
  double alpha = 1.0;

  void validate() const;
  ProcessSpec with_variant(Variant v) const;
};

struct AggregateRates {
  double A = 0.0;
  double B = 0.0;
  double t = 0.0;
};

AggregateRates aggregate(const ProcessSpec& spec, double t);

// Lambda_j(t) for every j of one side.
std::vector<double> cumulative_values(std::span<const RateFunction> side, double t);
std::vector<double> increment_values(std::span<const RateFunction> side, double s, double t);
double total_cumulative(std::span<const RateFunction> side, double t);
double total_intensity_bound(std::span<const RateFunction> side, double s, double t);

// Smallest u in [0, t_max] with sum_j Lambda_j(u) >= target.
double inverse_total_cumulative(std::span<const RateFunction> side, double target, double t_max);

// Constant rates of one side; throws unless every entry is constant.
std::vector<double> constant_rates(std::span<const RateFunction> side);

}  // namespace skellam
