#include "skellam/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "skellam/parallel.hpp"
#include "skellam/samplers.hpp"
#include "skellam/specfun.hpp"

namespace skellam {

namespace {

constexpr long kRecurrenceCap = 1000000;
constexpr std::size_t kEnumerationBudget = 20000000;

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw SpecError("time must be finite and nonnegative");
}

double sum_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double weighted_sum(std::span<const double> v, int power) {
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) s += std::pow(static_cast<double>(j + 1), power) * v[j];
  return s;
}

void finish_tail(PmfTable& table) {
  double total = 0.0;
  for (double p : table.probs) total += p;
  table.tail_bound = std::max(0.0, 1.0 - total);
}

// q(n), n = 0..n_max; with n_max < 0 the recurrence runs until the upper tail is below tail_tol.
std::vector<double> ngcp_recurrence(std::span<const double> cum, long n_max, double tail_tol) {
  const double lam = sum_of(cum);
  const long k = static_cast<long>(cum.size());
  if (lam <= 0.0) {
    std::vector<double> out(static_cast<std::size_t>(std::max(0L, n_max)) + 1, 0.0);
    out[0] = 1.0;
    return out;
  }
  const double mean = weighted_sum(cum, 1);
  const double sd = std::sqrt(weighted_sum(cum, 2));
  const double stop_after = mean + 40.0 * sd + 10.0 * static_cast<double>(k);

  // raw values carry a common factor exp(-log_scale) so that large Lambda never underflows q(0)
  std::vector<double> raw;
  double log_scale = 0.0;
  if (lam < 700.0) {
    raw.push_back(std::exp(-lam));
  } else {
    raw.push_back(1.0);
    log_scale = -lam;
  }
  auto normalized = [&](double r) { return r > 0.0 ? std::exp(std::log(r) + log_scale) : 0.0; };
  double acc = normalized(raw[0]);
  for (long n = 1;; ++n) {
    if (n_max >= 0 && n > n_max) break;
    if (n_max < 0 && n > kRecurrenceCap)
      throw std::runtime_error("counting pmf: tail tolerance not reached within the iteration cap");
    double s = 0.0;
    for (long j = 1; j <= std::min(n, k); ++j)
      s += static_cast<double>(j) * cum[static_cast<std::size_t>(j - 1)] *
           raw[static_cast<std::size_t>(n - j)];
    raw.push_back(s / static_cast<double>(n));
    if (raw.back() > 1e250) {
      for (double& r : raw) r *= 1e-250;
      log_scale += 250.0 * std::numbers::ln10;
    }
    if (n_max < 0) {
      const double q = normalized(raw.back());
      acc += q;
      // 1 - acc bottoms out at rounding level, so the current term must also be below tail_tol
      if (static_cast<double>(n) > mean &&
          ((1.0 - acc <= tail_tol && q <= tail_tol) ||
           (static_cast<double>(n) > stop_after && q < 1e-3 * tail_tol)))
        break;
    }
  }
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = normalized(raw[i]);
  return out;
}

PmfTable counting_table(std::vector<double> probs, double t, PmfBackend backend) {
  PmfTable table;
  table.t = t;
  table.n_min = 0;
  table.n_max = static_cast<long>(probs.size()) - 1;
  table.probs = std::move(probs);
  table.backend = backend;
  finish_tail(table);
  return table;
}

PmfTable restrict_table(const PmfTable& full, long n_min, long n_max) {
  if (n_min > n_max) throw SpecError("pmf support: n_min must not exceed n_max");
  PmfTable out;
  out.t = full.t;
  out.n_min = n_min;
  out.n_max = n_max;
  out.backend = full.backend;
  out.note = full.note;
  out.probs.resize(static_cast<std::size_t>(n_max - n_min + 1));
  double inside = 0.0;
  for (long n = n_min; n <= n_max; ++n) {
    const double p = full.at(n);
    out.probs[static_cast<std::size_t>(n - n_min)] = p;
    inside += p;
  }
  out.tail_bound = std::max(0.0, full.tail_bound + (full.total() - inside));
  return out;
}

void require_two_sided_alpha_one(const ProcessSpec& spec, const char* what) {
  if (spec.down.size() != spec.up.size())
    throw SpecError(std::string(what) + ": needs a Skellam spec with k down rates");
  if (spec.alpha != 1.0) throw SpecError(std::string(what) + ": needs alpha = 1");
}

PmfTable convolution_from_values(std::span<const double> up, std::span<const double> down,
                                 double t, double tail_tol) {
  const PmfTable q1 = counting_table(ngcp_recurrence(up, -1, tail_tol), t, PmfBackend::recurrence);
  const PmfTable q2 = counting_table(ngcp_recurrence(down, -1, tail_tol), t, PmfBackend::recurrence);
  return difference_pmf(q1, q2, -q2.n_max, q1.n_max, PmfBackend::convolution);
}

PmfTable bessel_from_aggregates(double A, double B, double t, long n_min, long n_max) {
  PmfTable table;
  table.t = t;
  table.n_min = n_min;
  table.n_max = n_max;
  table.backend = PmfBackend::bessel;
  table.probs.assign(static_cast<std::size_t>(n_max - n_min + 1), 0.0);
  if (A <= 0.0 || B <= 0.0) {
    // I_n(z) ~ (z/2)^n / n! as B -> 0 leaves a Poisson(A) law (mirrored when A -> 0)
    const double m = A > 0.0 ? A : B;
    const long sign = A > 0.0 ? 1 : -1;
    table.note = A > 0.0 ? "one-sided limit B=0" : (B > 0.0 ? "one-sided limit A=0" : "A=B=0");
    for (long n = n_min; n <= n_max; ++n) {
      const long x = sign * n;
      double p = 0.0;
      if (m <= 0.0)
        p = (n == 0) ? 1.0 : 0.0;
      else if (x >= 0)
        p = std::exp(static_cast<double>(x) * std::log(m) - m - ln_gamma(static_cast<double>(x) + 1.0));
      table.probs[static_cast<std::size_t>(n - n_min)] = p;
    }
    finish_tail(table);
    return table;
  }
  const double z = 2.0 * std::sqrt(A * B);
  const double gap = std::pow(std::sqrt(A) - std::sqrt(B), 2);
  const double log_ratio = std::log(A / B);
  for (long n = n_min; n <= n_max; ++n) {
    const int m = static_cast<int>(n < 0 ? -n : n);
    const double prefactor = std::exp(-gap + 0.5 * static_cast<double>(n) * log_ratio);
    table.probs[static_cast<std::size_t>(n - n_min)] = prefactor * bessel_i_scaled(m, z);
  }
  finish_tail(table);
  return table;
}

double falling_factorial(double a, int q) {
  double out = 1.0;
  for (int i = 0; i < q; ++i) out *= (a - i);
  return out;
}

bool all_kind(const ProcessSpec& spec, RateKind kind) {
  for (const auto& rf : spec.up)
    if (rf.kind() != kind) return false;
  for (const auto& rf : spec.down)
    if (rf.kind() != kind) return false;
  return true;
}

struct SideMoments {
  double g = 0.0;  // sum_j j Lambda_j
  double v = 0.0;  // sum_j j^2 Lambda_j
};

SideMoments side_moments_at(std::span<const RateFunction> side, double y) {
  SideMoments m;
  for (std::size_t j = 0; j < side.size(); ++j) {
    const double c = side[j].cumulative(y);
    const double jj = static_cast<double>(j + 1);
    m.g += jj * c;
    m.v += jj * jj * c;
  }
  return m;
}

struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

// Closed-form moments of M(Y(t)) for a constant-rate side.
MomentSummary fractional_constant_side(std::span<const double> rates, double alpha, double t,
                                       std::optional<double> s) {
  const double a = weighted_sum(rates, 1);
  const double b = weighted_sum(rates, 2);
  MomentSummary m;
  m.mean = a * inverse_subordinator_mean(alpha, t);
  m.variance = b * inverse_subordinator_mean(alpha, t) + a * a * inverse_subordinator_variance(alpha, t);
  if (s) {
    const double lo = std::min(*s, t), hi = std::max(*s, t);
    m.covariance = b * inverse_subordinator_mean(alpha, lo) +
                   a * a * inverse_subordinator_covariance(alpha, lo, hi);
  }
  m.dispersion_index = m.variance - m.mean;
  return m;
}

std::vector<double> side_values(const ProcessSpec& spec, std::span<const RateFunction> side, double t) {
  if (spec.variant == Variant::GFCP || spec.variant == Variant::GFSP)
    return fractional_effective_values(side, spec.alpha, t);
  return cumulative_values(side, t);
}

double ntfpp_mean(double cum_total, double alpha) {
  return std::pow(cum_total, alpha) / std::exp(ln_gamma(alpha + 1.0));
}

// alpha B(alpha, 1/2) / 2^{2 alpha - 1} - 1, the NTFPP variance bracket
double ntfpp_bracket(double alpha) {
  return alpha * beta_function(alpha, 0.5) / std::pow(2.0, 2.0 * alpha - 1.0) - 1.0;
}

PmfTable ngfsp_mixture_pmf(const ProcessSpec& spec, double t, const McControl& mc) {
  const std::size_t n = std::max<std::size_t>(1, mc.samples);
  auto tables = farm(n, [&](std::size_t i) {
    RngStream rng(mc.seed, i);
    const double y = sample_inverse_subordinator_marginal(spec.alpha, t, rng);
    return convolution_from_values(cumulative_values(spec.up, y), cumulative_values(spec.down, y), y,
                                   kDefaultTailTol);
  });
  long lo = 0, hi = 0;
  for (const auto& tb : tables) {
    lo = std::min(lo, tb.n_min);
    hi = std::max(hi, tb.n_max);
  }
  PmfTable out;
  out.t = t;
  out.n_min = lo;
  out.n_max = hi;
  out.backend = PmfBackend::monte_carlo;
  out.note = "conditional mixture over " + std::to_string(n) + " subordinator draws";
  out.probs.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (const auto& tb : tables)
    for (long x = tb.n_min; x <= tb.n_max; ++x)
      out.probs[static_cast<std::size_t>(x - lo)] += tb.at(x) / static_cast<double>(n);
  finish_tail(out);
  return out;
}

PmfTable full_pmf(const ProcessSpec& spec, double t, std::optional<PmfBackend> backend) {
  check_time(t);
  switch (spec.variant) {
    case Variant::GCP:
    case Variant::NGCP: {
      if (backend && *backend != PmfBackend::recurrence && *backend != PmfBackend::convolution)
        throw SpecError("backend not available for counting variants");
      return ngcp_pmf_auto(cumulative_values(spec.up, t), t);
    }
    case Variant::GSP:
    case Variant::NGSP: {
      const PmfBackend b = backend.value_or(PmfBackend::convolution);
      PmfTable conv = convolution_from_values(cumulative_values(spec.up, t),
                                              cumulative_values(spec.down, t), t, kDefaultTailTol);
      conv.t = t;
      if (b == PmfBackend::convolution) return conv;
      if (b == PmfBackend::bessel) {
        const AggregateRates ag = aggregate(spec, t);
        return bessel_from_aggregates(ag.A, ag.B, t, conv.n_min, conv.n_max);
      }
      throw SpecError("backend not available for NGSP: " + std::string(to_string(b)));
    }
    case Variant::GFCP:
    case Variant::NHGFCP:
    case Variant::GFSP:
    case Variant::NHGFSP: {
      if (backend && *backend != PmfBackend::mittag_leffler)
        throw SpecError("only the mittag_leffler backend serves fractional compound variants");
      const PmfTable q1 = nhgfcp_pmf_auto(side_values(spec, spec.up, t), spec.alpha, t);
      if (spec.down.empty()) return q1;
      const PmfTable q2 = nhgfcp_pmf_auto(side_values(spec, spec.down, t), spec.alpha, t);
      PmfTable out = difference_pmf(q1, q2, -q2.n_max, q1.n_max, PmfBackend::mittag_leffler);
      out.t = t;
      return out;
    }
    case Variant::NGFCP:
    case Variant::NGFSP: {
      if (spec.alpha == 1.0)
        return full_pmf(spec.with_variant(spec.down.empty() ? Variant::NGCP : Variant::NGSP), t,
                        backend);
      if (backend && *backend != PmfBackend::monte_carlo)
        throw SpecError("NGFSP pmfs are only available from the monte_carlo backend");
      McControl mc;
      mc.samples = 4000;
      return ngfsp_mixture_pmf(spec, t, mc);
    }
    case Variant::RUN_AVG_GCP:
    case Variant::RUN_AVG_GSP:
      break;
  }
  throw SpecError("running averages are continuous; no pmf");
}

}  // namespace

// ---- PmfTable helpers -------------------------------------------------------------------

std::string_view to_string(DependenceClass c) {
  switch (c) {
    case DependenceClass::LRD: return "LRD";
    case DependenceClass::SRD: return "SRD";
    case DependenceClass::neither: return "neither";
  }
  return "neither";
}

// ---- generalized counting process -------------------------------------------------------

PmfTable ngcp_pmf_values(std::span<const double> cum, long n_max, double t) {
  if (n_max < 0) throw SpecError("n_max must be nonnegative");
  for (double c : cum)
    if (!(c >= 0.0)) throw SpecError("cumulative values must be nonnegative");
  return counting_table(ngcp_recurrence(cum, n_max, 0.0), t, PmfBackend::recurrence);
}

PmfTable ngcp_pmf(std::span<const RateFunction> up, double t, long n_max) {
  check_time(t);
  return ngcp_pmf_values(cumulative_values(up, t), n_max, t);
}

PmfTable ngcp_pmf_auto(std::span<const double> cum, double t, double tail_tol) {
  return counting_table(ngcp_recurrence(cum, -1, tail_tol), t, PmfBackend::recurrence);
}

// ---- NGSP --------------------------------------------------------------------------------

PmfTable difference_pmf(const PmfTable& q1, const PmfTable& q2, long n_min, long n_max,
                        PmfBackend backend) {
  if (n_min > n_max) throw SpecError("pmf support: n_min must not exceed n_max");
  PmfTable out;
  out.t = q1.t;
  out.n_min = n_min;
  out.n_max = n_max;
  out.backend = backend;
  out.probs.assign(static_cast<std::size_t>(n_max - n_min + 1), 0.0);
  for (long n = n_min; n <= n_max; ++n) {
    // m indexes the second component; the first sits at m + n
    const long m_lo = std::max({q2.n_min, q1.n_min - n, 0L});
    const long m_hi = std::min(q2.n_max, q1.n_max - n);
    double p = 0.0;
    for (long m = m_lo; m <= m_hi; ++m) p += q1.at(m + n) * q2.at(m);
    out.probs[static_cast<std::size_t>(n - n_min)] = p;
  }
  finish_tail(out);
  return out;
}

PmfTable ngsp_pmf_convolution(const ProcessSpec& spec, double t, long n_min, long n_max,
                              double tail_tol) {
  check_time(t);
  require_two_sided_alpha_one(spec, "ngsp_pmf_convolution");
  if (!(tail_tol > 0.0)) throw SpecError("tail_tol must be positive");
  const PmfTable q1 = ngcp_pmf_auto(cumulative_values(spec.up, t), t, tail_tol);
  const PmfTable q2 = ngcp_pmf_auto(cumulative_values(spec.down, t), t, tail_tol);
  PmfTable out = difference_pmf(q1, q2, n_min, n_max, PmfBackend::convolution);
  out.t = t;
  return out;
}

PmfTable ngsp_pmf_bessel(const ProcessSpec& spec, double t, long n_min, long n_max) {
  check_time(t);
  require_two_sided_alpha_one(spec, "ngsp_pmf_bessel");
  if (n_min > n_max) throw SpecError("pmf support: n_min must not exceed n_max");
  const AggregateRates ag = aggregate(spec, t);
  return bessel_from_aggregates(ag.A, ag.B, t, n_min, n_max);
}

double ngsp_pgf(const ProcessSpec& spec, double u, double t) {
  check_time(t);
  if (spec.alpha != 1.0) throw SpecError("ngsp_pgf: needs alpha = 1");
  if (u == 0.0) throw SpecError("ngsp_pgf: u = 0 is singular");
  double expo = 0.0;
  for (std::size_t j = 0; j < spec.up.size(); ++j)
    expo += spec.up[j].cumulative(t) * (std::pow(u, static_cast<double>(j + 1)) - 1.0);
  for (std::size_t j = 0; j < spec.down.size(); ++j)
    expo += spec.down[j].cumulative(t) * (std::pow(u, -static_cast<double>(j + 1)) - 1.0);
  return std::exp(expo);
}

double ngsp_mgf(const ProcessSpec& spec, double u, double t) {
  return ngsp_pgf(spec, std::exp(u), t);
}

MomentSummary ngsp_moments(const ProcessSpec& spec, double t, std::optional<double> s) {
  check_time(t);
  const SideMoments up = side_moments_at(spec.up, t);
  const SideMoments down = side_moments_at(spec.down, t);
  MomentSummary m;
  m.mean = up.g - down.g;
  m.variance = up.v + down.v;
  if (s) m.covariance = ngsp_covariance(spec, *s, t);
  m.dispersion_index = m.variance - m.mean;
  return m;
}

double ngsp_covariance(const ProcessSpec& spec, double s, double t) {
  check_time(s);
  check_time(t);
  const double lo = std::min(s, t);
  return side_moments_at(spec.up, lo).v + side_moments_at(spec.down, lo).v;
}

double factorial_moment(const ProcessSpec& spec, int r, double t) {
  check_time(t);
  if (r < 1) throw SpecError("factorial moment order must be at least 1");
  const std::vector<double> up = cumulative_values(spec.up, t);
  const std::vector<double> down = cumulative_values(spec.down, t);
  // c(q): q-th derivative at u = 1 of the log-pgf
  std::vector<double> c(static_cast<std::size_t>(r) + 1, 0.0);
  for (int q = 1; q <= r; ++q) {
    double v = 0.0;
    for (std::size_t j = 0; j < up.size(); ++j) v += up[j] * falling_factorial(static_cast<double>(j + 1), q);
    for (std::size_t j = 0; j < down.size(); ++j)
      v += down[j] * falling_factorial(-static_cast<double>(j + 1), q);
    c[static_cast<std::size_t>(q)] = v;
  }
  std::vector<double> psi(static_cast<std::size_t>(r) + 1, 0.0);
  psi[0] = 1.0;
  for (int n = 1; n <= r; ++n) {
    // binomial(n-1, m) built incrementally
    double binom = 1.0;
    double acc = 0.0;
    for (int m = 0; m < n; ++m) {
      acc += binom * psi[static_cast<std::size_t>(m)] * c[static_cast<std::size_t>(n - m)];
      binom = binom * static_cast<double>(n - 1 - m) / static_cast<double>(m + 1);
    }
    psi[static_cast<std::size_t>(n)] = acc;
  }
  return psi[static_cast<std::size_t>(r)];
}

DependenceReport classify_dependence_ngsp(const ProcessSpec& spec, double s) {
  check_time(s);
  if (!all_kind(spec, RateKind::weibull))
    throw SpecError("classify_dependence_ngsp: every rate function must be Weibull");
  double d = 0.0;
  for (const auto& rf : spec.up) d = std::max(d, rf.params()[1]);
  for (const auto& rf : spec.down) d = std::max(d, rf.params()[1]);
  // leading coefficient of V(t) ~ lead * t^d
  double lead = 0.0;
  auto add_lead = [&](std::span<const RateFunction> side) {
    for (std::size_t j = 0; j < side.size(); ++j) {
      const auto& p = side[j].params();
      if (p[1] == d) lead += std::pow(static_cast<double>(j + 1), 2) * std::pow(p[0], -d);
    }
  };
  add_lead(spec.up);
  add_lead(spec.down);
  DependenceReport rep;
  rep.theta = 0.5 * d;
  if (d > 0.0 && d < 2.0)
    rep.dependence = DependenceClass::LRD;
  else if (d > 2.0)
    rep.dependence = DependenceClass::SRD;
  else
    rep.dependence = DependenceClass::neither;
  rep.c_of_s = std::sqrt(ngsp_covariance(spec, s, s) / lead);
  return rep;
}

ProbabilityBound arrival_time_cdf(const ProcessSpec& spec, long n, double t, PmfBackend backend) {
  const PmfTable table = full_pmf(spec, t, backend);
  ProbabilityBound out;
  for (long x = std::max(n, table.n_min); x <= table.n_max; ++x) out.value += table.at(x);
  out.lower = out.value;
  out.upper = std::min(1.0, out.value + table.tail_bound);
  return out;
}

ProbabilityBound first_passage_survival(const ProcessSpec& spec, long n, double t,
                                        PmfBackend backend) {
  const PmfTable table = full_pmf(spec, t, backend);
  ProbabilityBound out;
  for (long x = std::max(0L, table.n_min); x <= std::min(n - 1, table.n_max); ++x)
    out.value += table.at(x);
  out.lower = out.value;
  out.upper = std::min(1.0, out.value + table.tail_bound);
  return out;
}

PmfTable increment_pmf(const ProcessSpec& spec, double t, double v, long n_min, long n_max,
                       PmfBackend backend) {
  check_time(t);
  check_time(v);
  if (spec.alpha != 1.0) throw SpecError("increment_pmf: needs alpha = 1");
  if (n_min > n_max) throw SpecError("pmf support: n_min must not exceed n_max");
  const std::vector<double> up = increment_values(spec.up, v, t + v);
  const std::vector<double> down = increment_values(spec.down, v, t + v);
  PmfTable out;
  if (backend == PmfBackend::convolution || backend == PmfBackend::recurrence) {
    out = restrict_table(convolution_from_values(up, down, t, kDefaultTailTol), n_min, n_max);
    out.backend = PmfBackend::convolution;
  } else if (backend == PmfBackend::bessel) {
    out = bessel_from_aggregates(sum_of(up), sum_of(down), t, n_min, n_max);
  } else {
    throw SpecError("increment_pmf: backend must be convolution or bessel");
  }
  out.t = t;
  return out;
}

// ---- NGFSP ----------------------------------------------------------------------------------

double inverse_subordinator_mean(double alpha, double t) {
  check_time(t);
  return std::pow(t, alpha) / std::exp(ln_gamma(alpha + 1.0));
}

double inverse_subordinator_variance(double alpha, double t) {
  check_time(t);
  const double g1 = std::exp(ln_gamma(alpha + 1.0));
  return (2.0 / std::exp(ln_gamma(2.0 * alpha + 1.0)) - 1.0 / (g1 * g1)) * std::pow(t, 2.0 * alpha);
}

double inverse_subordinator_covariance(double alpha, double s, double t) {
  check_time(s);
  check_time(t);
  const double lo = std::min(s, t), hi = std::max(s, t);
  if (lo == 0.0) return 0.0;
  if (lo == hi) return inverse_subordinator_variance(alpha, lo);
  const double g1 = std::exp(ln_gamma(alpha + 1.0));
  const double b = beta_function(alpha, alpha + 1.0);
  const double f = alpha * std::pow(hi, 2.0 * alpha) * incomplete_beta(alpha, alpha + 1.0, lo / hi) -
                   std::pow(lo * hi, alpha);
  return (alpha * std::pow(lo, 2.0 * alpha) * b + f) / (g1 * g1);
}

MomentSummary ngfsp_moments(const ProcessSpec& spec, double t, std::optional<double> s,
                            const McControl& mc) {
  check_time(t);
  if (s) check_time(*s);
  if (spec.alpha == 1.0) return ngsp_moments(spec, t, s);
  if (all_kind(spec, RateKind::constant)) {
    // one subordinator drives both sides, so S(Y) has aggregate rates sum_j j (lambda_j - mu_j)
    const std::vector<double> up = constant_rates(spec.up);
    const std::vector<double> down = constant_rates(spec.down);
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < up.size(); ++j) {
      const double jj = static_cast<double>(j + 1);
      a += jj * up[j];
      b += jj * jj * up[j];
    }
    for (std::size_t j = 0; j < down.size(); ++j) {
      const double jj = static_cast<double>(j + 1);
      a -= jj * down[j];
      b += jj * jj * down[j];
    }
    MomentSummary m;
    m.mean = a * inverse_subordinator_mean(spec.alpha, t);
    m.variance = b * inverse_subordinator_mean(spec.alpha, t) +
                 a * a * inverse_subordinator_variance(spec.alpha, t);
    if (s) {
      const double lo = std::min(*s, t), hi = std::max(*s, t);
      m.covariance = b * inverse_subordinator_mean(spec.alpha, lo) +
                     a * a * inverse_subordinator_covariance(spec.alpha, lo, hi);
    }
    m.dispersion_index = m.variance - m.mean;
    return m;
  }

  const std::size_t n = std::max<std::size_t>(2, mc.samples);
  struct Draw {
    double g_t = 0.0, v_t = 0.0, g_s = 0.0, v_min = 0.0;
  };
  auto conditional = [&](double y) {
    const SideMoments up = side_moments_at(spec.up, y);
    const SideMoments down = side_moments_at(spec.down, y);
    return std::pair<double, double>{up.g - down.g, up.v + down.v};
  };
  std::vector<Draw> draws;
  if (!s) {
    draws = farm(n, [&](std::size_t i) {
      RngStream rng(mc.seed, i);
      const auto [g, v] = conditional(sample_inverse_subordinator_marginal(spec.alpha, t, rng));
      return Draw{g, v, 0.0, 0.0};
    });
  } else {
    const double horizon = std::max(*s, t);
    const double h = mc.h > 0.0 ? mc.h : horizon / 1024.0;
    draws = farm(n, [&](std::size_t i) {
      RngStream rng(mc.seed, i);
      const SubordinatorPath y = sample_inverse_subordinator(spec.alpha, horizon, h, rng);
      const auto [gt, vt] = conditional(y.value_at(t));
      const auto [gs, vs] = conditional(y.value_at(*s));
      return Draw{gt, vt, gs, *s <= t ? vs : vt};
    });
  }
  RunningStats g_stats, gs_stats;
  for (const Draw& d : draws) {
    g_stats.add(d.g_t);
    gs_stats.add(d.g_s);
  }
  RunningStats var_terms, cov_terms;
  for (const Draw& d : draws) {
    var_terms.add(d.v_t + (d.g_t - g_stats.mean) * (d.g_t - g_stats.mean));
    if (s) cov_terms.add(d.v_min + (d.g_s - gs_stats.mean) * (d.g_t - g_stats.mean));
  }
  MomentSummary m;
  m.mean = g_stats.mean;
  m.mean_se = g_stats.se();
  m.variance = var_terms.mean;
  m.variance_se = var_terms.se();
  if (s) {
    m.covariance = cov_terms.mean;
    m.covariance_se = cov_terms.se();
  }
  m.dispersion_index = m.variance - m.mean;
  return m;
}

// ---- NTFPP / NHGFCP / NHGFSP ------------------------------------------------------------------

PmfTable ntfpp_pmf(double cum_total, double alpha, long n_max) {
  if (!(cum_total >= 0.0) || !std::isfinite(cum_total)) throw SpecError("Lambda(t) must be finite and nonnegative");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw SpecError("alpha must lie in (0,1]");
  if (n_max < 0) throw SpecError("n_max must be nonnegative");
  const double one[] = {cum_total};
  if (cum_total == 0.0 || alpha == 1.0) {
    PmfTable poisson = ngcp_pmf_values(one, n_max);
    poisson.backend = PmfBackend::mittag_leffler;
    return poisson;
  }
  std::vector<double> probs(static_cast<std::size_t>(n_max) + 1);
  const double x = std::pow(cum_total, alpha);
  const double log_x = std::log(x);
  for (long n = 0; n <= n_max; ++n) {
    const double nd = static_cast<double>(n);
    const SeriesValue sv = prabhakar_series(alpha, nd * alpha + 1.0, nd + 1.0, -x);
    const double scale = std::exp(nd * log_x);
    const double err = std::numeric_limits<double>::epsilon() * sv.max_term * scale *
                       std::sqrt(static_cast<double>(sv.terms) + 1.0);
    if (!(err < 1e-12))
      throw SeriesError("ntfpp_pmf: Mittag-Leffler series loses precision for Lambda(t) = " +
                            std::to_string(cum_total),
                        sv.value * scale, sv.terms);
    probs[static_cast<std::size_t>(n)] = std::max(0.0, sv.value * scale);
  }
  return counting_table(std::move(probs), 0.0, PmfBackend::mittag_leffler);
}

double ntfpp_pgf(double cum_total, double alpha, double u) {
  if (!(cum_total >= 0.0)) throw SpecError("Lambda(t) must be nonnegative");
  if (!(u >= 0.0 && u <= 1.0)) throw SpecError("ntfpp_pgf: u must lie in [0,1]");
  return mittag_leffler(alpha, 1.0, std::pow(cum_total, alpha) * (u - 1.0));
}

PmfTable nhgfcp_pmf_values(std::span<const double> cum, double alpha, long j_max, double t) {
  if (j_max < 0) throw SpecError("j_max must be nonnegative");
  const double lam = sum_of(cum);
  const int k = static_cast<int>(cum.size());
  if (lam <= 0.0) {
    PmfTable out = counting_table(std::vector<double>(static_cast<std::size_t>(j_max) + 1, 0.0), t,
                                  PmfBackend::mittag_leffler);
    out.probs[0] = 1.0;
    out.tail_bound = 0.0;
    return out;
  }
  // number of tuples visited: partitions of every j <= j_max into parts of size <= k
  {
    std::vector<double> ways(static_cast<std::size_t>(j_max) + 1, 0.0);
    ways[0] = 1.0;
    for (int s = 1; s <= k; ++s)
      for (long j = s; j <= j_max; ++j) ways[static_cast<std::size_t>(j)] += ways[static_cast<std::size_t>(j - s)];
    double total = 0.0;
    for (double w : ways) total += w;
    if (total > static_cast<double>(kEnumerationBudget))
      throw std::length_error("nhgfcp_pmf: composition enumeration budget exceeded (" + std::to_string(total) +
                              " tuples)");
  }
  const PmfTable counts = ntfpp_pmf(lam, alpha, j_max);
  std::vector<double> log_w(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s)
    log_w[static_cast<std::size_t>(s)] =
        cum[static_cast<std::size_t>(s)] > 0.0 ? std::log(cum[static_cast<std::size_t>(s)] / lam)
                                               : -std::numeric_limits<double>::infinity();

  std::vector<double> probs(static_cast<std::size_t>(j_max) + 1, 0.0);
  std::vector<long> x(static_cast<std::size_t>(k), 0);
  // tuples (x_1..x_k) with sum_s s x_s = j; x_1 absorbs the remainder
  std::function<void(int, long, long, double, double&)> visit = [&](int s, long rem, long r,
                                                                    double log_term, double& acc) {
    if (s == 1) {
      const long x1 = rem;
      if (x1 > 0 && !std::isfinite(log_w[0])) return;
      const long rr = r + x1;
      const double lt = log_term + (x1 > 0 ? static_cast<double>(x1) * log_w[0] : 0.0) -
                        ln_gamma(static_cast<double>(x1) + 1.0) + ln_gamma(static_cast<double>(rr) + 1.0);
      acc += std::exp(lt) * counts.at(rr);
      return;
    }
    const double lw = log_w[static_cast<std::size_t>(s - 1)];
    for (long xs = 0; xs * s <= rem; ++xs) {
      if (xs > 0 && !std::isfinite(lw)) break;
      const double lt = log_term + (xs > 0 ? static_cast<double>(xs) * lw : 0.0) -
                        ln_gamma(static_cast<double>(xs) + 1.0);
      visit(s - 1, rem - xs * s, r + xs, lt, acc);
    }
  };
  for (long j = 0; j <= j_max; ++j) {
    double acc = 0.0;
    visit(k, j, 0, 0.0, acc);
    probs[static_cast<std::size_t>(j)] = acc;
  }
  return counting_table(std::move(probs), t, PmfBackend::mittag_leffler);
}

PmfTable nhgfcp_pmf(std::span<const RateFunction> side, double alpha, double t, long j_max) {
  check_time(t);
  return nhgfcp_pmf_values(cumulative_values(side, t), alpha, j_max, t);
}

PmfTable nhgfcp_pmf_auto(std::span<const double> cum, double alpha, double t, double tail_tol) {
  const MomentSummary m = nhgfcp_moments(cum, alpha);
  const double k = static_cast<double>(cum.size());
  long j_max = static_cast<long>(std::ceil(m.mean + 10.0 * std::sqrt(m.variance) + 10.0 * k));
  for (int attempt = 0; attempt < 8; ++attempt) {
    PmfTable table = nhgfcp_pmf_values(cum, alpha, j_max, t);
    if (table.tail_bound <= tail_tol) return table;
    j_max = static_cast<long>(std::ceil(1.5 * static_cast<double>(j_max)));
  }
  throw std::runtime_error("nhgfcp_pmf: tail tolerance not reached");
}

PmfTable nhgfsp_pmf(const ProcessSpec& spec, double t, long n_min, long n_max) {
  if (spec.variant != Variant::NHGFSP && spec.variant != Variant::GFSP &&
      spec.variant != Variant::NHGFCP && spec.variant != Variant::GFCP)
    throw SpecError("nhgfsp_pmf: needs a fractional compound variant");
  return restrict_table(full_pmf(spec, t, PmfBackend::mittag_leffler), n_min, n_max);
}

namespace {

double nhgfsp_factor(std::span<const double> cum, double alpha, double s, double sign) {
  const double total = sum_of(cum);
  if (!(total > 0.0)) throw SpecError("nhgfsp_mgf: aggregate cumulative rate is zero");
  double arg = 0.0;
  for (std::size_t j = 0; j < cum.size(); ++j)
    arg += cum[j] * std::expm1(sign * s * static_cast<double>(j + 1));
  return mittag_leffler(alpha, 1.0, arg * std::pow(total, alpha - 1.0));
}

}  // namespace

double nhgfsp_mgf(const ProcessSpec& spec, double s, double t) {
  check_time(t);
  double out = nhgfsp_factor(side_values(spec, spec.up, t), spec.alpha, s, 1.0);
  if (!spec.down.empty()) out *= nhgfsp_factor(side_values(spec, spec.down, t), spec.alpha, s, 1.0);
  return out;
}

double nhgfsp_mgf_difference(const ProcessSpec& spec, double s, double t) {
  check_time(t);
  double out = nhgfsp_factor(side_values(spec, spec.up, t), spec.alpha, s, 1.0);
  if (!spec.down.empty()) out *= nhgfsp_factor(side_values(spec, spec.down, t), spec.alpha, s, -1.0);
  return out;
}

MomentSummary nhgfcp_moments(std::span<const double> cum, double alpha) {
  MomentSummary m;
  const double lam = sum_of(cum);
  if (lam <= 0.0) return m;
  const double en = ntfpp_mean(lam, alpha);
  const double ex = weighted_sum(cum, 1) / lam;
  const double ex2 = weighted_sum(cum, 2) / lam;
  m.mean = en * ex;
  m.variance = en * (ex2 + ex * ex * en * ntfpp_bracket(alpha));
  m.dispersion_index = m.variance - m.mean;
  return m;
}

MomentSummary nhgfsp_moments(const ProcessSpec& spec, double t, std::optional<double> s) {
  check_time(t);
  const MomentSummary up = nhgfcp_moments(side_values(spec, spec.up, t), spec.alpha);
  const MomentSummary down = nhgfcp_moments(side_values(spec, spec.down, t), spec.alpha);
  MomentSummary m;
  m.mean = up.mean - down.mean;
  m.variance = up.variance + down.variance;
  if (s) {
    // Cov(S(s), S(t)) = V(S(s ^ t)), the closed form as stated for this family
    const double lo = std::min(*s, t);
    m.covariance = nhgfcp_moments(side_values(spec, spec.up, lo), spec.alpha).variance +
                   nhgfcp_moments(side_values(spec, spec.down, lo), spec.alpha).variance;
  }
  m.dispersion_index = m.variance - m.mean;
  return m;
}

DependenceReport classify_dependence_nhgfsp(const ProcessSpec& spec, double s) {
  check_time(s);
  if (!all_kind(spec, RateKind::weibull) || spec.down.empty())
    throw SpecError("classify_dependence_nhgfsp: needs Weibull rates on both sides");
  double a = 0.0, c = 0.0;
  for (const auto& rf : spec.up) a = std::max(a, rf.params()[1]);
  for (const auto& rf : spec.down) c = std::max(c, rf.params()[1]);
  const double m = std::min(a, c);
  DependenceReport rep;
  rep.theta = spec.alpha * m;
  if (m < 1.0 / spec.alpha)
    rep.dependence = DependenceClass::LRD;
  else if (m > 1.0 / spec.alpha && m < 2.0 / spec.alpha)
    rep.dependence = DependenceClass::SRD;
  else
    rep.dependence = DependenceClass::neither;
  rep.c_of_s = std::sqrt(nhgfsp_moments(spec, s).variance);
  return rep;
}

WaitingTimeValue waiting_time_cdf(std::span<const RateFunction> side, double alpha, int j, double t) {
  check_time(t);
  if (j < 1 || j > static_cast<int>(side.size())) throw SpecError("jump size j must lie in [1, k]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw SpecError("alpha must lie in (0,1]");
  const double lam_j = side[static_cast<std::size_t>(j - 1)].cumulative(t);
  const double lam = total_cumulative(side, t);
  WaitingTimeValue out;
  if (lam_j <= 0.0) return out;
  const double x = lam_j * std::pow(lam, alpha - 1.0);
  const double raw = x * mittag_leffler(alpha, alpha + 1.0, -x);
  out.value = std::clamp(raw, 0.0, 1.0);
  out.clamped = raw != out.value;
  return out;
}

// ---- running averages -----------------------------------------------------------------------

namespace {

void require_constant_runavg(const ProcessSpec& spec) {
  if (!all_kind(spec, RateKind::constant))
    throw SpecError("running averages need constant rates (the non-homogeneous processes are not Levy)");
  if (spec.alpha != 1.0) throw SpecError("running averages need alpha = 1");
}

// (e^{iz} - 1)/(iz) - 1 with its Taylor expansion near zero
std::complex<double> up_kernel(double z) {
  using namespace std::complex_literals;
  if (std::fabs(z) < 1e-4) return 0.5i * z - z * z / 6.0 - 1i * z * z * z / 24.0;
  return (std::exp(1i * z) - 1.0) / (1i * z) - 1.0;
}

// (1 - e^{-iz})/(iz) - 1
std::complex<double> down_kernel(double z) {
  using namespace std::complex_literals;
  if (std::fabs(z) < 1e-4) return -0.5i * z - z * z / 6.0 + 1i * z * z * z / 24.0;
  return (1.0 - std::exp(-1i * z)) / (1i * z) - 1.0;
}

}  // namespace

std::complex<double> running_avg_cf(const ProcessSpec& spec, double u, double t) {
  check_time(t);
  require_constant_runavg(spec);
  if (u == 0.0) return {1.0, 0.0};
  const std::vector<double> up = constant_rates(spec.up);
  const std::vector<double> down = constant_rates(spec.down);
  std::complex<double> expo = 0.0;
  for (std::size_t j = 0; j < up.size(); ++j) expo += up[j] * up_kernel(u * static_cast<double>(j + 1));
  for (std::size_t j = 0; j < down.size(); ++j)
    expo += down[j] * down_kernel(u * static_cast<double>(j + 1));
  return std::exp(t * expo);
}

MomentSummary running_avg_moments(const ProcessSpec& spec, double t, std::optional<double> s) {
  check_time(t);
  require_constant_runavg(spec);
  const std::vector<double> up = constant_rates(spec.up);
  const std::vector<double> down = constant_rates(spec.down);
  double drift = weighted_sum(up, 1) - weighted_sum(down, 1);
  double sigma2 = weighted_sum(up, 2) + weighted_sum(down, 2);
  MomentSummary m;
  m.mean = 0.5 * t * drift;
  m.variance = t * sigma2 / 3.0;
  if (s) {
    // (1/(st)) int_0^s int_0^t sigma^2 min(u, v) dv du for s <= t
    const double lo = std::min(*s, t), hi = std::max(*s, t);
    m.covariance = hi > 0.0 ? sigma2 * (0.5 * lo - lo * lo / (6.0 * hi)) : 0.0;
  }
  m.dispersion_index = m.variance - m.mean;
  return m;
}

DependenceReport classify_dependence_runavg(const ProcessSpec& spec, double s) {
  check_time(s);
  require_constant_runavg(spec);
  DependenceReport rep;
  rep.theta = 0.5;
  rep.dependence = DependenceClass::LRD;
  // Corr(s, t) = (3/2) sqrt(s) t^{-1/2} (1 - s/(3t)) -> (3/2) sqrt(s) t^{-1/2}
  rep.c_of_s = 1.5 * std::sqrt(s);
  return rep;
}

// ---- dispatch ---------------------------------------------------------------------------------

std::vector<double> fractional_effective_values(std::span<const RateFunction> side, double alpha,
                                                double t) {
  check_time(t);
  const std::vector<double> rates = constant_rates(side);
  const double total = sum_of(rates);
  std::vector<double> out(rates.size(), 0.0);
  if (total <= 0.0) return out;
  const double eff = std::pow(total, 1.0 / alpha) * t;
  for (std::size_t j = 0; j < rates.size(); ++j) out[j] = eff * rates[j] / total;
  return out;
}

PmfTable marginal_pmf(const ProcessSpec& spec, double t, long n_min, long n_max,
                      std::optional<PmfBackend> backend) {
  spec.validate();
  if (backend == PmfBackend::bessel && n_min <= n_max &&
      (spec.variant == Variant::NGSP || spec.variant == Variant::GSP))
    return ngsp_pmf_bessel(spec, t, n_min, n_max);
  return restrict_table(full_pmf(spec, t, backend), n_min, n_max);
}

MomentSummary marginal_moments(const ProcessSpec& spec, double t, std::optional<double> s,
                               const McControl& mc) {
  spec.validate();
  switch (spec.variant) {
    case Variant::GCP:
    case Variant::NGCP:
    case Variant::GSP:
    case Variant::NGSP:
      return ngsp_moments(spec, t, s);
    case Variant::NGFCP:
    case Variant::NGFSP:
      return ngfsp_moments(spec, t, s, mc);
    case Variant::GFCP:
    case Variant::GFSP: {
      // independent clocks: the two sides add
      const MomentSummary up = fractional_constant_side(constant_rates(spec.up), spec.alpha, t, s);
      const MomentSummary down = fractional_constant_side(constant_rates(spec.down), spec.alpha, t, s);
      MomentSummary m;
      m.mean = up.mean - down.mean;
      m.variance = up.variance + down.variance;
      if (s) m.covariance = *up.covariance + *down.covariance;
      m.dispersion_index = m.variance - m.mean;
      return m;
    }
    case Variant::NHGFCP:
    case Variant::NHGFSP:
      return nhgfsp_moments(spec, t, s);
    case Variant::RUN_AVG_GCP:
    case Variant::RUN_AVG_GSP:
      return running_avg_moments(spec, t, s);
  }
  throw SpecError("unsupported variant");
}

}  // namespace skellam
