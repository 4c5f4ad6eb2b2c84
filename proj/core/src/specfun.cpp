#include "skellam/specfun.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace skellam {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Rounding-error estimate for a series whose largest term was max_term.
double series_abs_error(double max_term, int terms) {
  return kEps * max_term * std::sqrt(static_cast<double>(terms) + 1.0);
}

struct AsymptoticValue {
  double value = 0.0;
  double error = std::numeric_limits<double>::infinity();
};

// E^{delta}_{alpha,beta}(-x) ~ x^{-delta} sum_k (delta)_k/k! (-x)^{-k} / Gamma(beta - alpha(delta+k)),
// truncated at the smallest term.
AsymptoticValue prabhakar_asymptotic(double alpha, double beta, double delta, double x) {
  AsymptoticValue out;
  if (!(x > 0.0) || alpha >= 1.0) return out;
  CompensatedSum sum;
  double prev = std::numeric_limits<double>::infinity();
  const double log_x = std::log(x);
  for (int k = 0; k < 200; ++k) {
    const double log_coef = ln_gamma(delta + k) - ln_gamma(delta) - ln_gamma(k + 1.0) -
                            (delta + k) * log_x;
    const double y = beta - alpha * (delta + k);
    const double rg = reciprocal_gamma(y);
    // 1/Gamma has zeros at the non-positive integers; size terms by the envelope so a near-zero
    // term is not mistaken for convergence
    const double envelope = y > 0.0 ? rg : std::exp(ln_gamma(1.0 - y)) / std::numbers::pi;
    const double mag = std::exp(log_coef) * envelope;
    if (mag > prev && k > 1) break;
    const double term = (k % 2 == 0 ? 1.0 : -1.0) * std::exp(log_coef) * rg;
    sum.add(term);
    prev = mag;
    out.error = mag;
    if (mag < kEps * std::fabs(sum.value())) break;
  }
  out.value = sum.value();
  out.error = std::max(out.error, kEps * std::fabs(out.value));
  return out;
}

void check_ml_args(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("mittag_leffler: alpha must lie in (0,1]");
  if (!(beta > 0.0)) throw DomainError("mittag_leffler: beta must be positive");
}

}  // namespace

void SeriesControl::validate() const {
  if (!(rel_tol > 0.0)) throw DomainError("SeriesControl: rel_tol must be positive");
  if (max_terms < 1) throw DomainError("SeriesControl: max_terms must be at least 1");
}

double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("ln_gamma: argument must be positive");
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double reciprocal_gamma(double x) {
  if (x > 0.0) return std::exp(-ln_gamma(x));
  if (x == std::floor(x)) return 0.0;
  // reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
  return std::sin(std::numbers::pi * x) * std::exp(ln_gamma(1.0 - x)) / std::numbers::pi;
}

double beta_function(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta_function: arguments must be positive");
  return std::exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x must lie in [0,1]");
  if (x == 0.0) return 0.0;
  return boost::math::beta(a, b, x);
}

namespace {

double bessel_series(int n, double z, double log_prefactor, const SeriesControl& ctl) {
  ctl.validate();
  if (!(z >= 0.0)) throw DomainError("bessel_i: z must be nonnegative");
  const int m = n < 0 ? -n : n;
  if (z == 0.0) return m == 0 ? 1.0 : 0.0;

  const double half = 0.5 * z;
  const double q = half * half;
  double term = std::exp(m * std::log(half) - ln_gamma(m + 1.0) + log_prefactor);
  if (!std::isfinite(term)) throw SeriesError("bessel_i: leading term overflow", 0.0, 0);
  CompensatedSum sum;
  for (int k = 0; k < ctl.max_terms; ++k) {
    sum.add(term);
    const double ratio = q / ((k + 1.0) * (m + k + 1.0));
    term *= ratio;
    if (!std::isfinite(term)) throw SeriesError("bessel_i: term overflow", sum.value(), k + 1);
    if (ratio < 1.0 && term <= ctl.rel_tol * sum.value()) return sum.value() + term;
  }
  throw SeriesError("bessel_i: series did not converge", sum.value(), ctl.max_terms);
}

}  // namespace

double bessel_i(int n, double z, const SeriesControl& ctl) { return bessel_series(n, z, 0.0, ctl); }

double bessel_i_scaled(int n, double z, const SeriesControl& ctl) {
  return bessel_series(n, z, -z, ctl);
}

SeriesValue prabhakar_series(double alpha, double beta, double delta, double z,
                             const SeriesControl& ctl) {
  ctl.validate();
  check_ml_args(alpha, beta);
  if (!(delta > 0.0)) throw DomainError("mittag_leffler3: delta must be positive");
  SeriesValue out;
  if (z == 0.0) {
    out.value = reciprocal_gamma(beta);
    out.max_term = std::fabs(out.value);
    out.terms = 1;
    return out;
  }
  const double log_abs_z = std::log(std::fabs(z));
  const double lg_delta = ln_gamma(delta);
  CompensatedSum sum;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < ctl.max_terms; ++k) {
    const double log_mag = ln_gamma(delta + k) - lg_delta - ln_gamma(k + 1.0) -
                           ln_gamma(alpha * k + beta) + k * log_abs_z;
    const double mag = std::exp(log_mag);
    if (!std::isfinite(mag)) throw SeriesError("mittag_leffler: term overflow", sum.value(), k);
    sum.add((z < 0.0 && (k % 2 == 1)) ? -mag : mag);
    out.max_term = std::max(out.max_term, mag);
    out.terms = k + 1;
    if (k > 0 && mag < prev && mag <= ctl.rel_tol * std::fabs(sum.value())) {
      out.value = sum.value();
      return out;
    }
    // a vanishing term sequence with an exactly cancelled sum
    if (k > 0 && mag < prev && mag <= kEps * kEps * out.max_term) {
      out.value = sum.value();
      return out;
    }
    prev = mag;
  }
  throw SeriesError("mittag_leffler: series did not converge", sum.value(), ctl.max_terms);
}

namespace {

struct WideSeries {
  double value = 0.0;
  double error = std::numeric_limits<double>::infinity();
};

// Same power series in extended precision, for arguments where the double sum cancels.
template <class Real>
WideSeries prabhakar_series_wide(double alpha, double beta, double delta, double z, int max_terms) {
  using std::abs;
  using std::tgamma;
  const Real a(alpha), b(beta), d(delta), x(z);
  Real coef = 1, sum = 0, max_term = 0, prev = 0;
  for (int k = 0; k < max_terms; ++k) {
    if (k > 0) coef *= (d + (k - 1)) / k * x;
    const Real term = coef / tgamma(a * k + b);
    sum += term;
    const Real mag = abs(term);
    if (mag > max_term) max_term = mag;
    if (k > 0 && mag < prev && mag <= 1e-20 * abs(sum)) {
      const Real eps = std::numeric_limits<Real>::epsilon();
      WideSeries out;
      out.value = static_cast<double>(sum);
      out.error = static_cast<double>(eps * max_term * std::sqrt(k + 1.0)) + kEps * std::fabs(out.value);
      return out;
    }
    prev = mag;
  }
  return {};
}

}  // namespace

double mittag_leffler3(double alpha, double beta, double delta, double z,
                       const SeriesControl& ctl) {
  check_ml_args(alpha, beta);
  if (!(delta > 0.0)) throw DomainError("mittag_leffler3: delta must be positive");
  if (alpha == 1.0 && beta == 1.0 && delta == 1.0) return std::exp(z);

  SeriesValue series;
  bool series_ok = true;
  try {
    series = prabhakar_series(alpha, beta, delta, z, ctl);
  } catch (const SeriesError&) {
    if (z >= 0.0) throw;
    series_ok = false;
  }
  constexpr double kTarget = 1e-13;
  double best = series_ok ? series.value : std::numeric_limits<double>::quiet_NaN();
  double best_err = series_ok ? series_abs_error(series.max_term, series.terms)
                              : std::numeric_limits<double>::infinity();
  if (best_err <= kTarget * std::fabs(best) || (series_ok && z >= 0.0)) return best;

  if (z < 0.0) {
    const AsymptoticValue asym = prabhakar_asymptotic(alpha, beta, delta, -z);
    if (asym.error < best_err) {
      best = asym.value;
      best_err = asym.error;
    }
    if (best_err <= kTarget * std::fabs(best)) return best;
  }
  auto consider = [&](const WideSeries& w) {
    if (w.error < best_err) {
      best = w.value;
      best_err = w.error;
    }
    return best_err <= kTarget * std::fabs(best);
  };
  if (consider(prabhakar_series_wide<long double>(alpha, beta, delta, z, ctl.max_terms))) return best;
  if (consider(prabhakar_series_wide<boost::multiprecision::cpp_bin_float_50>(alpha, beta, delta, z, ctl.max_terms)))
    return best;
  if (consider(prabhakar_series_wide<boost::multiprecision::cpp_bin_float_100>(alpha, beta, delta, z, ctl.max_terms)))
    return best;
  if (std::isfinite(best_err)) return best;
  throw SeriesError("mittag_leffler: neither series nor asymptotic expansion converged", best, ctl.max_terms);
}

double mittag_leffler(double alpha, double beta, double z, const SeriesControl& ctl) {
  return mittag_leffler3(alpha, beta, 1.0, z, ctl);
}

}  // namespace skellam
