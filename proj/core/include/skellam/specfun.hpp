#pragma once

#include <stdexcept>
#include <string>

namespace skellam {

struct SeriesControl {
  double rel_tol = 1e-14;
  int max_terms = 10000;

  void validate() const;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a series cannot be summed to the requested accuracy.
class SeriesError : public std::runtime_error {
 public:
  SeriesError(const std::string& what, double partial, int terms)
      : std::runtime_error(what), partial_(partial), terms_(terms) {}
  double partial() const noexcept { return partial_; }
  int terms() const noexcept { return terms_; }

 private:
  double partial_;
  int terms_;
};

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (abs_ge(sum_, x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  static bool abs_ge(double a, double b) noexcept {
    return (a < 0 ? -a : a) >= (b < 0 ? -b : b);
  }
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// I_{|n|}(z) by its power series.
double bessel_i(int n, double z, const SeriesControl& ctl = {});
// e^{-z} I_{|n|}(z), summed with the exponential folded into every term.
double bessel_i_scaled(int n, double z, const SeriesControl& ctl = {});

// Two-parameter Mittag-Leffler E_{alpha,beta}(z).
double mittag_leffler(double alpha, double beta, double z, const SeriesControl& ctl = {});

// Prabhakar function E^{delta}_{alpha,beta}(z).
double mittag_leffler3(double alpha, double beta, double delta, double z,
                       const SeriesControl& ctl = {});

// Result of a raw Prabhakar series evaluation with its rounding-error scale.
struct SeriesValue {
  double value = 0.0;
  double max_term = 0.0;  // largest |term|; absolute error is about eps * max_term
  int terms = 0;
};

SeriesValue prabhakar_series(double alpha, double beta, double delta, double z,
                             const SeriesControl& ctl = {});

double ln_gamma(double x);
double reciprocal_gamma(double x);
double beta_function(double a, double b);
// Non-normalized: integral of u^{a-1}(1-u)^{b-1} over [0, x].
double incomplete_beta(double a, double b, double x);

}  // namespace skellam
