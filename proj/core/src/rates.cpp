#include "skellam/rates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace skellam {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw SpecError(msg);
}

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw SpecError("time must be finite and nonnegative");
}

}  // namespace

std::string_view to_string(RateKind kind) {
  switch (kind) {
    case RateKind::constant: return "constant";
    case RateKind::weibull: return "weibull";
    case RateKind::gompertz_makeham: return "gompertz_makeham";
    case RateKind::tabulated: return "tabulated";
  }
  return "constant";
}

RateKind rate_kind_from_string(std::string_view name) {
  if (name == "constant") return RateKind::constant;
  if (name == "weibull") return RateKind::weibull;
  if (name == "gompertz_makeham") return RateKind::gompertz_makeham;
  if (name == "tabulated") return RateKind::tabulated;
  throw SpecError("unknown rate kind: " + std::string(name));
}

RateFunction RateFunction::constant(double rate) {
  require(rate >= 0.0 && std::isfinite(rate), "constant rate must be finite and nonnegative");
  RateFunction rf;
  rf.kind_ = RateKind::constant;
  rf.params_ = {rate};
  return rf;
}

RateFunction RateFunction::weibull(double scale, double shape) {
  require(scale > 0.0 && std::isfinite(scale), "weibull scale must be positive");
  // shape 0 would give Lambda(t) = 1 for all t, breaking Lambda(0) = 0
  require(shape > 0.0 && std::isfinite(shape), "weibull shape must be positive");
  RateFunction rf;
  rf.kind_ = RateKind::weibull;
  rf.params_ = {scale, shape};
  return rf;
}

RateFunction RateFunction::gompertz_makeham(double a, double b, double mu) {
  require(a > 0.0 && b > 0.0 && mu > 0.0, "gompertz_makeham parameters must be positive");
  require(std::isfinite(a) && std::isfinite(b) && std::isfinite(mu),
          "gompertz_makeham parameters must be finite");
  RateFunction rf;
  rf.kind_ = RateKind::gompertz_makeham;
  rf.params_ = {a, b, mu};
  return rf;
}

RateFunction RateFunction::tabulated(std::vector<double> times, std::vector<double> values) {
  require(times.size() == values.size(), "tabulated knots: size mismatch");
  require(times.size() >= 2, "tabulated knots: need at least two knots");
  require(times.front() == 0.0 && values.front() == 0.0, "tabulated knots must start at (0, 0)");
  for (std::size_t i = 1; i < times.size(); ++i) {
    require(times[i] > times[i - 1], "tabulated knot times must be strictly increasing");
    require(values[i] >= values[i - 1], "tabulated cumulative values must be nondecreasing");
    require(std::isfinite(times[i]) && std::isfinite(values[i]), "tabulated knots must be finite");
  }
  RateFunction rf;
  rf.kind_ = RateKind::tabulated;
  rf.knot_t_ = std::move(times);
  rf.knot_v_ = std::move(values);
  return rf;
}

double RateFunction::horizon() const noexcept {
  if (kind_ == RateKind::tabulated) return knot_t_.back();
  return std::numeric_limits<double>::infinity();
}

bool RateFunction::is_zero() const noexcept {
  if (kind_ == RateKind::constant) return params_[0] == 0.0;
  if (kind_ == RateKind::tabulated) return knot_v_.back() == 0.0;
  return false;
}

double RateFunction::cumulative(double t) const {
  check_time(t);
  switch (kind_) {
    case RateKind::constant:
      return params_[0] * t;
    case RateKind::weibull:
      return std::pow(t / params_[0], params_[1]);
    case RateKind::gompertz_makeham: {
      const double a = params_[0], b = params_[1], mu = params_[2];
      return (a / b) * std::expm1(b * t) + mu * t;
    }
    case RateKind::tabulated: {
      if (t > knot_t_.back()) throw SpecError("tabulated rate queried beyond its last knot");
      const auto it = std::upper_bound(knot_t_.begin(), knot_t_.end(), t);
      if (it == knot_t_.end()) return knot_v_.back();
      const std::size_t i = static_cast<std::size_t>(it - knot_t_.begin());
      const double w = (t - knot_t_[i - 1]) / (knot_t_[i] - knot_t_[i - 1]);
      return knot_v_[i - 1] + w * (knot_v_[i] - knot_v_[i - 1]);
    }
  }
  return 0.0;
}

double RateFunction::increment(double s, double t) const {
  check_time(s);
  if (s > t) throw SpecError("increment requires s <= t");
  if (s == t) return 0.0;
  return std::max(0.0, cumulative(t) - cumulative(s));
}

double RateFunction::intensity(double t) const {
  check_time(t);
  switch (kind_) {
    case RateKind::constant:
      return params_[0];
    case RateKind::weibull: {
      const double b = params_[0], c = params_[1];
      if (t == 0.0) {
        if (c < 1.0) return std::numeric_limits<double>::infinity();
        return c == 1.0 ? 1.0 / b : 0.0;
      }
      return (c / b) * std::pow(t / b, c - 1.0);
    }
    case RateKind::gompertz_makeham:
      return params_[0] * std::exp(params_[1] * t) + params_[2];
    case RateKind::tabulated: {
      if (t > knot_t_.back()) throw SpecError("tabulated rate queried beyond its last knot");
      auto it = std::upper_bound(knot_t_.begin(), knot_t_.end(), t);
      std::size_t i = static_cast<std::size_t>(it - knot_t_.begin());
      if (i >= knot_t_.size()) i = knot_t_.size() - 1;  // last knot: backward segment
      return (knot_v_[i] - knot_v_[i - 1]) / (knot_t_[i] - knot_t_[i - 1]);
    }
  }
  return 0.0;
}

double RateFunction::max_intensity(double s, double t) const {
  check_time(s);
  if (s > t) throw SpecError("max_intensity requires s <= t");
  switch (kind_) {
    case RateKind::constant:
      return params_[0];
    case RateKind::weibull:
    case RateKind::gompertz_makeham:
      // monotone intensities: the sup sits at an endpoint
      return std::max(intensity(s), intensity(t));
    case RateKind::tabulated: {
      if (t > knot_t_.back()) throw SpecError("tabulated rate queried beyond its last knot");
      double best = 0.0;
      auto it = std::upper_bound(knot_t_.begin(), knot_t_.end(), s);
      std::size_t i = static_cast<std::size_t>(it - knot_t_.begin());
      if (i == 0) i = 1;
      for (; i < knot_t_.size(); ++i) {
        best = std::max(best, (knot_v_[i] - knot_v_[i - 1]) / (knot_t_[i] - knot_t_[i - 1]));
        if (knot_t_[i] >= t) break;
      }
      return best;
    }
  }
  return 0.0;
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::GCP: return "gcp";
    case Variant::GFCP: return "gfcp";
    case Variant::NGCP: return "ngcp";
    case Variant::NGFCP: return "ngfcp";
    case Variant::NHGFCP: return "nhgfcp";
    case Variant::GSP: return "gsp";
    case Variant::GFSP: return "gfsp";
    case Variant::NGSP: return "ngsp";
    case Variant::NGFSP: return "ngfsp";
    case Variant::NHGFSP: return "nhgfsp";
    case Variant::RUN_AVG_GCP: return "run_avg_gcp";
    case Variant::RUN_AVG_GSP: return "run_avg_gsp";
  }
  return "ngsp";
}

Variant variant_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Variant v : {Variant::GCP, Variant::GFCP, Variant::NGCP, Variant::NGFCP, Variant::NHGFCP,
                    Variant::GSP, Variant::GFSP, Variant::NGSP, Variant::NGFSP, Variant::NHGFSP,
                    Variant::RUN_AVG_GCP, Variant::RUN_AVG_GSP}) {
    if (to_string(v) == lower) return v;
  }
  throw SpecError("unknown variant: " + std::string(name));
}

bool is_skellam(Variant v) {
  switch (v) {
    case Variant::GSP:
    case Variant::GFSP:
    case Variant::NGSP:
    case Variant::NGFSP:
    case Variant::NHGFSP:
    case Variant::RUN_AVG_GSP:
      return true;
    default:
      return false;
  }
}

bool is_fractional(Variant v) {
  switch (v) {
    case Variant::GFCP:
    case Variant::NGFCP:
    case Variant::NHGFCP:
    case Variant::GFSP:
    case Variant::NGFSP:
    case Variant::NHGFSP:
      return true;
    default:
      return false;
  }
}

bool requires_constant_rates(Variant v) {
  switch (v) {
    case Variant::GCP:
    case Variant::GFCP:
    case Variant::GSP:
    case Variant::GFSP:
    case Variant::RUN_AVG_GCP:
    case Variant::RUN_AVG_GSP:
      return true;
    default:
      return false;
  }
}

void ProcessSpec::validate() const {
  require(k >= 1, "k must be at least 1");
  require(static_cast<int>(up.size()) == k, "up must hold exactly k rate functions");
  if (is_skellam(variant))
    require(static_cast<int>(down.size()) == k, "Skellam variants need k down rate functions");
  else
    require(down.empty(), "counting variants take no down rate functions");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
  if (!is_fractional(variant)) require(alpha == 1.0, "non-fractional variants need alpha = 1");
  if (requires_constant_rates(variant)) {
    for (const auto& rf : up) require(rf.kind() == RateKind::constant, "variant needs constant rates");
    for (const auto& rf : down)
      require(rf.kind() == RateKind::constant, "variant needs constant rates");
  }
}

ProcessSpec ProcessSpec::with_variant(Variant v) const {
  ProcessSpec out = *this;
  out.variant = v;
  return out;
}

std::vector<double> cumulative_values(std::span<const RateFunction> side, double t) {
  std::vector<double> out;
  out.reserve(side.size());
  for (const auto& rf : side) out.push_back(rf.cumulative(t));
  return out;
}

std::vector<double> increment_values(std::span<const RateFunction> side, double s, double t) {
  std::vector<double> out;
  out.reserve(side.size());
  for (const auto& rf : side) out.push_back(rf.increment(s, t));
  return out;
}

double total_cumulative(std::span<const RateFunction> side, double t) {
  double total = 0.0;
  for (const auto& rf : side) total += rf.cumulative(t);
  return total;
}

double total_intensity_bound(std::span<const RateFunction> side, double s, double t) {
  double total = 0.0;
  for (const auto& rf : side) total += rf.max_intensity(s, t);
  return total;
}

double inverse_total_cumulative(std::span<const RateFunction> side, double target, double t_max) {
  if (target <= 0.0) return 0.0;
  if (total_cumulative(side, t_max) < target) return std::numeric_limits<double>::infinity();
  // safeguarded Newton on a continuous nondecreasing function
  double lo = 0.0, hi = t_max;
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = total_cumulative(side, u) - target;
    if (f >= 0.0)
      hi = u;
    else
      lo = u;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    double slope = 0.0;
    for (const auto& rf : side) slope += rf.intensity(u);
    double next = (slope > 0.0 && std::isfinite(slope)) ? u - f / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - u) <= 1e-15 * std::max(1.0, u)) {
      u = next;
      break;
    }
    u = next;
  }
  return std::clamp(u, lo, hi);
}

std::vector<double> constant_rates(std::span<const RateFunction> side) {
  std::vector<double> out;
  out.reserve(side.size());
  for (const auto& rf : side) {
    require(rf.kind() == RateKind::constant, "constant rates required");
    out.push_back(rf.params()[0]);
  }
  return out;
}

AggregateRates aggregate(const ProcessSpec& spec, double t) {
  check_time(t);
  return AggregateRates{total_cumulative(spec.up, t), total_cumulative(spec.down, t), t};
}

}  // namespace skellam
