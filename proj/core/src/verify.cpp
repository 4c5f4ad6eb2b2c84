#include "skellam/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "skellam/analytics.hpp"
#include "skellam/io.hpp"
#include "skellam/parallel.hpp"
#include "skellam/samplers.hpp"

namespace skellam {

namespace {

using nlohmann::json;

struct Stats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

template <class T>
Stats stats_of(const std::vector<T>& xs) {
  Stats s;
  for (T x : xs) {
    ++s.n;
    const double d = static_cast<double>(x) - s.mean;
    s.mean += d / static_cast<double>(s.n);
    s.m2 += d * (static_cast<double>(x) - s.mean);
  }
  return s;
}

// Standard error of the sample variance from the fourth central moment.
template <class T>
double variance_se(const std::vector<T>& xs, const Stats& s) {
  double m4 = 0.0;
  for (T x : xs) m4 += std::pow(static_cast<double>(x) - s.mean, 4);
  m4 /= static_cast<double>(xs.size());
  const double v = s.variance();
  return std::sqrt(std::max(0.0, m4 - v * v) / static_cast<double>(xs.size()));
}

// Per-check seed derived from the check name (FNV-1a), so reports do not depend on run order.
std::uint64_t check_seed(std::string_view name, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h ^ seed;
}

std::size_t samples_or(const CheckConfig& c, std::size_t fallback) {
  return c.samples > 0 ? c.samples : fallback;
}

ProcessSpec spec_or(const CheckConfig& c, int default_k, Variant variant = Variant::NGSP) {
  if (c.spec) return *c.spec;
  return default_verify_spec(c.k > 0 ? c.k : default_k, variant);
}

json base_metadata(const ProcessSpec* spec, std::uint64_t seed, std::size_t samples) {
  json m = json::object();
  if (spec) m["spec"] = to_json(*spec);
  m["seed"] = seed;
  m["samples"] = samples;
  return m;
}

std::vector<long> sample_states(const ProcessSpec& spec, double t, std::size_t n, std::uint64_t seed,
                                const SamplerOptions& opts = {}) {
  return farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    return sample_path(spec, t, rng, opts).state_at(t);
  });
}

PmfTable full_support_pmf(const ProcessSpec& spec, double t) {
  // wide window; the reported tail bound accounts for anything outside it
  const MomentSummary m = marginal_moments(spec, t, {}, McControl{4000, 1, 0.0});
  const long half = static_cast<long>(std::ceil(std::fabs(m.mean) + 20.0 * std::sqrt(m.variance) + 20.0 * spec.k));
  return marginal_pmf(spec, t, spec.down.empty() ? 0 : -half, half);
}

Verdict verdict_of(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

// ---- checks ---------------------------------------------------------------------------------

VerificationReport check_moments(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 3);
  const double t = 1.0;
  const std::size_t n = samples_or(c, 100000);
  SamplerOptions opts;
  if (is_fractional(spec.variant)) opts.h = t / 2048.0;
  const auto xs = sample_states(spec, t, n, seed, opts);
  const Stats s = stats_of(xs);
  const MomentSummary m = marginal_moments(spec, t, {}, McControl{100000, seed ^ 0x5eedULL, 0.0});
  VerificationReport r;
  r.name = "moments";
  r.analytic = m.mean;
  r.estimate = s.mean;
  r.std_error = s.se();
  r.tolerance = 3.0 * std::sqrt(s.se() * s.se() + m.mean_se.value_or(0.0) * m.mean_se.value_or(0.0));
  const double var_rel = std::fabs(s.variance() - m.variance) / m.variance;
  r.verdict = verdict_of(std::fabs(r.analytic - r.estimate) <= r.tolerance && var_rel <= 0.05);
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["t"] = t;
  r.metadata["variance_analytic"] = m.variance;
  r.metadata["variance_estimate"] = s.variance();
  r.metadata["variance_rel_gap"] = var_rel;
  r.metadata["variance_rel_tolerance"] = 0.05;
  return r;
}

VerificationReport check_pmf_tv(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 2);
  const double t = 1.0;
  const std::size_t n = samples_or(c, 100000);
  SamplerOptions opts;
  if (is_fractional(spec.variant)) opts.h = t / 2048.0;
  const PmfTable analytic = full_support_pmf(spec, t);
  const PmfTable empirical = empirical_table(sample_states(spec, t, n, seed, opts), t);
  VerificationReport r;
  r.name = "pmf_tv";
  r.analytic = 0.0;
  r.estimate = total_variation(analytic, empirical);
  r.tolerance = 0.01;
  r.verdict = verdict_of(r.estimate <= r.tolerance);
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["t"] = t;
  r.metadata["backend"] = std::string(to_string(analytic.backend));
  r.metadata["tail_bound"] = analytic.tail_bound;
  return r;
}

VerificationReport check_martingale(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 3);
  if (spec.alpha != 1.0) throw SpecError("martingale check needs alpha = 1");
  const double t_end = 1.0;
  const std::size_t n = samples_or(c, 100000);
  const std::vector<double> checkpoints{0.2, 0.4, 0.6, 0.8, 1.0};
  const auto paths = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    const SamplePath p = sample_path(spec, t_end, rng);
    std::vector<double> out;
    for (double tc : checkpoints) out.push_back(static_cast<double>(p.state_at(tc)) - ngsp_moments(spec, tc).mean);
    return out;
  });
  VerificationReport r;
  r.name = "martingale";
  r.verdict = Verdict::pass;
  r.metadata = base_metadata(&spec, seed, n);
  json rows = json::array();
  double worst = -1.0;
  for (std::size_t q = 0; q < checkpoints.size(); ++q) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = paths[i][q];
    const Stats s = stats_of(col);
    const double z = s.se() > 0.0 ? std::fabs(s.mean) / s.se() : 0.0;
    rows.push_back({{"t", checkpoints[q]}, {"mean", s.mean}, {"se", s.se()}, {"z", z}});
    if (z > 4.0) r.verdict = Verdict::fail;
    if (z > worst) {
      worst = z;
      r.estimate = s.mean;
      r.std_error = s.se();
      r.tolerance = 4.0 * s.se();
    }
  }
  r.analytic = 0.0;
  r.metadata["checkpoints"] = rows;
  return r;
}

VerificationReport check_cutoff(const CheckConfig& c, std::uint64_t seed) {
  const double lambda_t = 1e4;
  const double alpha = (c.spec && c.spec->alpha < 1.0) ? c.spec->alpha : 0.7;
  const std::size_t n = samples_or(c, 10000);
  const double expected = std::pow(lambda_t, alpha) / std::tgamma(alpha + 1.0);
  const auto outside = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    // N(Y_alpha(Lambda)) for a unit-rate Poisson N
    const double y = sample_inverse_subordinator_marginal(alpha, lambda_t, rng);
    const double ratio = static_cast<double>(sample_poisson(y, rng)) / expected;
    return std::fabs(ratio - 1.0) > 0.1 ? 1 : 0;
  });
  const Stats s = stats_of(outside);
  VerificationReport r;
  r.name = "cutoff";
  r.analytic = 0.0;
  r.estimate = s.mean;
  r.std_error = s.se();
  r.tolerance = 0.05;
  r.verdict = verdict_of(r.estimate <= r.tolerance);
  r.metadata = base_metadata(nullptr, seed, n);
  r.metadata["lambda_t"] = lambda_t;
  r.metadata["alpha"] = alpha;
  r.metadata["expected_count"] = expected;
  r.metadata["statistic"] = "P(|N/E[N] - 1| > 0.1)";
  return r;
}

RateFunction random_rate(RngStream& rng, bool allow_weibull) {
  const double u = rng.uniform();
  if (u < 0.4 || !allow_weibull) return RateFunction::constant(rng.uniform(0.05, 2.0));
  if (u < 0.7) return RateFunction::weibull(rng.uniform(0.5, 3.0), rng.uniform(0.3, 3.0));
  return RateFunction::gompertz_makeham(rng.uniform(0.1, 1.0), rng.uniform(0.05, 0.5), rng.uniform(0.5, 5.0));
}

VerificationReport check_dispersion(const CheckConfig& c, std::uint64_t seed) {
  const std::size_t n = samples_or(c, 200);
  const std::vector<Variant> variants{Variant::NGSP, Variant::NGFSP, Variant::NHGFCP, Variant::NHGFSP};
  struct Outcome {
    double index;
    std::string variant;
  };
  const auto outcomes = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    const Variant v = variants[i % variants.size()];
    ProcessSpec spec;
    spec.variant = v;
    spec.k = 1 + static_cast<int>(rng.uniform() * 4.0);
    const bool general = v != Variant::NGFSP;
    for (int j = 0; j < spec.k; ++j) spec.up.push_back(random_rate(rng, general));
    if (is_skellam(v))
      for (int j = 0; j < spec.k; ++j) spec.down.push_back(random_rate(rng, general));
    spec.alpha = is_fractional(v) ? rng.uniform(0.3, 1.0) : 1.0;
    const double t = rng.uniform(0.1, 5.0);
    return Outcome{marginal_moments(spec, t).dispersion_index, std::string(to_string(v))};
  });
  long violations = 0;
  double min_index = std::numeric_limits<double>::infinity();
  for (const auto& o : outcomes) {
    if (!(o.index > 0.0)) ++violations;
    min_index = std::min(min_index, o.index);
  }
  VerificationReport r;
  r.name = "dispersion";
  r.analytic = 0.0;
  r.estimate = static_cast<double>(violations);
  r.tolerance = 0.0;
  r.verdict = verdict_of(violations == 0);
  r.metadata = base_metadata(nullptr, seed, n);
  r.metadata["statistic"] = "count of random specs with variance - mean <= 0";
  r.metadata["min_dispersion_index"] = min_index;
  return r;
}

VerificationReport check_bessel_vs_convolution(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 1);
  const double t = 1.0;
  const long lo = -15, hi = 15;
  const PmfTable conv = ngsp_pmf_convolution(spec, t, lo, hi);
  const PmfTable bessel = ngsp_pmf_bessel(spec, t, lo, hi);
  double gap = 0.0;
  long at = 0;
  for (long n = lo; n <= hi; ++n) {
    const double d = std::fabs(conv.at(n) - bessel.at(n));
    if (d > gap) {
      gap = d;
      at = n;
    }
  }
  const MomentSummary m = ngsp_moments(spec, t);
  const AggregateRates ag = aggregate(spec, t);
  VerificationReport r;
  r.name = "bessel_vs_convolution";
  r.analytic = conv.at(at);
  r.estimate = bessel.at(at);
  r.tolerance = 1e-10;
  if (spec.k == 1)
    r.verdict = verdict_of(gap <= r.tolerance);
  else
    r.verdict = gap > r.tolerance ? Verdict::discrepancy_documented : Verdict::pass;
  r.metadata = base_metadata(&spec, seed, 0);
  r.metadata["t"] = t;
  r.metadata["max_gap"] = gap;
  r.metadata["argmax_n"] = at;
  r.metadata["convolution_variance"] = m.variance;
  r.metadata["bessel_variance"] = ag.A + ag.B;
  if (spec.k > 1)
    r.metadata["note"] =
        "the aggregate Bessel form has variance A+B; the pgf gives sum_j j^2 (Lambda_j + T_j)";
  return r;
}

// Skellam pmf with means (a, b) on [-n_cap, n_cap] from two Poisson vectors.
std::vector<double> classical_skellam(double a, double b, long n_cap) {
  auto poisson = [](double m, long count) {
    std::vector<double> p(static_cast<std::size_t>(count) + 1, 0.0);
    for (long x = 0; x <= count; ++x)
      p[static_cast<std::size_t>(x)] =
          m > 0.0 ? std::exp(x * std::log(m) - m - std::lgamma(x + 1.0)) : (x == 0 ? 1.0 : 0.0);
    return p;
  };
  const auto pa = poisson(a, n_cap), pb = poisson(b, n_cap);
  std::vector<double> out(static_cast<std::size_t>(2 * n_cap + 1), 0.0);
  for (long x = 0; x <= n_cap; ++x)
    for (long y = 0; y <= n_cap; ++y) out[static_cast<std::size_t>(x - y + n_cap)] += pa[x] * pb[y];
  return out;
}

VerificationReport check_weighted_sum(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 3);
  const double t = 1.0;
  const std::vector<double> up = cumulative_values(spec.up, t), down = cumulative_values(spec.down, t);
  const long cap = 60;
  // distribution of sum_j j S_j with S_j ~ Skellam(Lambda_j, T_j) independent
  std::map<long, double> law{{0, 1.0}};
  for (int j = 0; j < spec.k; ++j) {
    const auto sk = classical_skellam(up[static_cast<std::size_t>(j)], down[static_cast<std::size_t>(j)], cap);
    std::map<long, double> next;
    for (const auto& [x, p] : law)
      for (long y = -cap; y <= cap; ++y) {
        const double q = sk[static_cast<std::size_t>(y + cap)];
        if (q < 1e-300) continue;
        next[x + (j + 1) * y] += p * q;
      }
    law.swap(next);
  }
  const long lo = -40, hi = 40;
  const PmfTable conv = ngsp_pmf_convolution(spec, t, lo, hi);
  double gap = 0.0;
  for (long n = lo; n <= hi; ++n) {
    const auto it = law.find(n);
    gap = std::max(gap, std::fabs(conv.at(n) - (it == law.end() ? 0.0 : it->second)));
  }
  VerificationReport r;
  r.name = "weighted_sum";
  r.analytic = 0.0;
  r.estimate = gap;
  r.tolerance = 1e-9;
  r.verdict = verdict_of(gap <= r.tolerance);
  r.metadata = base_metadata(&spec, seed, 0);
  r.metadata["t"] = t;
  r.metadata["statistic"] = "max |p_conv(n) - p_weighted(n)| on [-40, 40]";
  return r;
}

ProcessSpec default_runavg_spec() {
  ProcessSpec spec;
  spec.variant = Variant::RUN_AVG_GSP;
  spec.k = 2;
  spec.up = {RateFunction::constant(1.0), RateFunction::constant(0.5)};
  spec.down = {RateFunction::constant(0.2), RateFunction::constant(0.3)};
  return spec;
}

VerificationReport check_running_avg_ratios(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = c.spec ? *c.spec : default_runavg_spec();
  const double t = 4.0;
  const std::size_t n = samples_or(c, 100000);
  const auto xs = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    return sample_running_avg(spec, t, rng);
  });
  const Stats s = stats_of(xs);
  const MomentSummary m = running_avg_moments(spec, t);
  const MomentSummary base = ngsp_moments(spec.with_variant(spec.down.empty() ? Variant::GCP : Variant::GSP), t);
  VerificationReport r;
  r.name = "running_avg_ratios";
  r.analytic = m.mean;
  r.estimate = s.mean;
  r.std_error = s.se();
  r.tolerance = 3.0 * s.se();
  const double var_rel = std::fabs(s.variance() - m.variance) / m.variance;
  r.verdict = verdict_of(std::fabs(r.analytic - r.estimate) <= r.tolerance && var_rel <= 0.05);
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["t"] = t;
  r.metadata["variance_analytic"] = m.variance;
  r.metadata["variance_estimate"] = s.variance();
  r.metadata["variance_rel_gap"] = var_rel;
  r.metadata["mean_ratio_analytic"] = base.mean != 0.0 ? m.mean / base.mean : 0.0;
  r.metadata["variance_ratio_analytic"] = m.variance / base.variance;
  if (base.mean != 0.0) r.metadata["mean_ratio_estimate"] = s.mean / base.mean;
  r.metadata["variance_ratio_estimate"] = s.variance() / base.variance;
  return r;
}

VerificationReport check_waiting_time(const CheckConfig& c, std::uint64_t seed) {
  ProcessSpec spec;
  if (c.spec) {
    spec = *c.spec;
  } else {
    spec = default_verify_spec(c.k > 0 ? c.k : 2, Variant::NHGFCP);
    spec.alpha = 0.7;
  }
  const int j = 1;
  const double t_end = 5.0;
  const std::size_t n = samples_or(c, 100000);
  const auto first = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    const SamplePath p = sample_path(spec, t_end, rng);
    long prev = 0;
    for (std::size_t e = 0; e < p.times.size(); ++e) {
      if (p.states[e] - prev == j) return p.times[e];
      prev = p.states[e];
    }
    return std::numeric_limits<double>::infinity();
  });
  std::vector<double> sorted(first);
  std::sort(sorted.begin(), sorted.end());
  double sup = 0.0, at = 0.0, analytic_at = 0.0, empirical_at = 0.0;
  bool clamped = false;
  for (int g = 1; g <= 100; ++g) {
    const double t = t_end * g / 100.0;
    const WaitingTimeValue w = waiting_time_cdf(spec.up, spec.alpha, j, t);
    clamped = clamped || w.clamped;
    const double emp = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin()) /
                       static_cast<double>(n);
    if (std::fabs(emp - w.value) > sup) {
      sup = std::fabs(emp - w.value);
      at = t;
      analytic_at = w.value;
      empirical_at = emp;
    }
  }
  VerificationReport r;
  r.name = "waiting_time";
  r.analytic = analytic_at;
  r.estimate = empirical_at;
  r.tolerance = 0.02;
  r.verdict = verdict_of(sup <= r.tolerance);
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["jump_size"] = j;
  r.metadata["sup_gap"] = sup;
  r.metadata["argmax_t"] = at;
  r.metadata["clamped"] = clamped;
  return r;
}

double intensity_slope(const RateFunction& rf, double t) {
  const double h = 1e-3;
  return (rf.intensity(t + h) - rf.intensity(std::max(0.0, t - h))) / (t + h - std::max(0.0, t - h));
}

VerificationReport check_transition_rates(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 2);
  const double t0 = 1.0;
  const std::vector<double> deltas{1e-3, 2e-3, 5e-3, 1e-2};
  const std::size_t n = samples_or(c, 100000);
  const auto incs = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    const SamplePath p = sample_path(spec, t0 + deltas.back(), rng);
    const long base = p.state_at(t0);
    std::vector<long> out;
    for (double d : deltas) out.push_back(p.state_at(t0 + d) - base);
    return out;
  });
  double rate_total = 0.0, slope_total = 0.0;
  for (const auto& rf : spec.up) {
    rate_total += rf.intensity(t0);
    slope_total += std::fabs(intensity_slope(rf, t0));
  }
  for (const auto& rf : spec.down) {
    rate_total += rf.intensity(t0);
    slope_total += std::fabs(intensity_slope(rf, t0));
  }
  const double c_bound = rate_total * rate_total + slope_total;
  VerificationReport r;
  r.name = "transition_rates";
  r.analytic = 0.0;
  r.tolerance = 1.0;
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["t0"] = t0;
  r.metadata["c_bound"] = c_bound;
  json rows = json::array();
  double worst = 0.0;
  for (std::size_t q = 0; q < deltas.size(); ++q) {
    for (int side = 0; side < 2; ++side) {
      const auto& rates = side == 0 ? spec.up : spec.down;
      for (std::size_t j = 0; j < rates.size(); ++j) {
        const long jump = (side == 0 ? 1 : -1) * static_cast<long>(j + 1);
        double hits = 0.0;
        for (const auto& v : incs) hits += v[q] == jump ? 1.0 : 0.0;
        const double p_hat = hits / static_cast<double>(n);
        const double p_lin = rates[j].intensity(t0) * deltas[q];
        const double se = std::sqrt(std::max(p_lin, 1.0 / static_cast<double>(n)) / static_cast<double>(n));
        const double allowance = 4.0 * se + c_bound * deltas[q] * deltas[q];
        const double score = std::fabs(p_hat - p_lin) / allowance;
        worst = std::max(worst, score);
        rows.push_back({{"delta", deltas[q]}, {"jump", jump}, {"p_hat", p_hat}, {"p_linear", p_lin},
                        {"allowance", allowance}});
      }
    }
  }
  r.estimate = worst;
  r.verdict = verdict_of(worst <= r.tolerance);
  r.metadata["statistic"] = "max |p_hat - lambda delta| / (4 se + C delta^2)";
  r.metadata["rows"] = rows;
  return r;
}

VerificationReport check_ngcp_oracle(const CheckConfig& c, std::uint64_t seed) {
  ProcessSpec spec;
  if (c.spec) {
    spec = *c.spec;
  } else {
    spec.variant = Variant::NGCP;
    spec.k = 3;
    spec.up = {RateFunction::constant(0.1), RateFunction::constant(0.3), RateFunction::constant(0.2)};
  }
  const double t = 1.0;
  const long n_max = 20;
  const PmfTable oracle = ngcp_pmf_oracle(spec.up, t, n_max);
  const PmfTable rec = ngcp_pmf(spec.up, t, n_max);
  double gap = 0.0;
  for (long n = 0; n <= n_max; ++n) gap = std::max(gap, std::fabs(oracle.at(n) - rec.at(n)));
  VerificationReport r;
  r.name = "ngcp_oracle";
  r.analytic = 0.0;
  r.estimate = gap;
  r.tolerance = 1e-10;
  r.verdict = verdict_of(gap <= r.tolerance);
  r.metadata = base_metadata(&spec, seed, 0);
  r.metadata["t"] = t;
  r.metadata["n_max"] = n_max;
  return r;
}

VerificationReport check_recurrence(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 3);
  double gap = 0.0;
  json rows = json::array();
  for (double t : {0.5, 1.0, 2.0}) {
    const PmfTable p = ngsp_pmf_convolution(spec, t, -60, 60);
    const auto up = cumulative_values(spec.up, t), down = cumulative_values(spec.down, t);
    double g = 0.0;
    for (long n = 1; n <= 60 - spec.k; ++n) {
      double rhs = 0.0;
      for (int j = 1; j <= spec.k; ++j)
        rhs += j * (up[static_cast<std::size_t>(j - 1)] * p.at(n - j) -
                    down[static_cast<std::size_t>(j - 1)] * p.at(n + j));
      g = std::max(g, std::fabs(p.at(n) - rhs / static_cast<double>(n)));
    }
    rows.push_back({{"t", t}, {"max_gap", g}});
    gap = std::max(gap, g);
  }
  VerificationReport r;
  r.name = "recurrence";
  r.analytic = 0.0;
  r.estimate = gap;
  r.tolerance = 1e-8;
  r.verdict = verdict_of(gap <= r.tolerance);
  r.metadata = base_metadata(&spec, seed, 0);
  r.metadata["times"] = rows;
  return r;
}

VerificationReport check_hitting_time(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 1);
  const long level = 2;
  const double t = 1.0;
  const std::size_t n = samples_or(c, 100000);
  struct Hit {
    int at_t;
    int passed;
  };
  const auto hits = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    const SamplePath p = sample_path(spec, t, rng);
    int passed = 0;
    for (long s : p.states) passed |= s >= level ? 1 : 0;
    return Hit{p.state_at(t) >= level ? 1 : 0, passed};
  });
  std::vector<int> at_t(n), passed(n);
  for (std::size_t i = 0; i < n; ++i) {
    at_t[i] = hits[i].at_t;
    passed[i] = hits[i].passed;
  }
  const Stats s = stats_of(at_t);
  const Stats fp = stats_of(passed);
  const ProbabilityBound f = arrival_time_cdf(spec, level, t);
  VerificationReport r;
  r.name = "hitting_time";
  r.analytic = f.value;
  r.estimate = s.mean;
  r.std_error = s.se();
  r.tolerance = 0.01;
  r.verdict = verdict_of(std::fabs(r.analytic - r.estimate) <= r.tolerance);
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["level"] = level;
  r.metadata["t"] = t;
  r.metadata["analytic_enclosure"] = to_json(f);
  r.metadata["first_passage_fraction"] = fp.mean;
  r.metadata["first_passage_gap"] = fp.mean - f.value;
  r.metadata["note"] = "the closed form sums p(x,t) over x >= n, the law of S(t) rather than of its running maximum";
  return r;
}

VerificationReport check_ngfsp_moments(const CheckConfig& c, std::uint64_t seed) {
  ProcessSpec spec;
  if (c.spec) {
    spec = *c.spec;
  } else {
    spec = default_verify_spec(c.k > 0 ? c.k : 2, Variant::NGFSP);
    spec.alpha = 0.7;
  }
  const double t = 1.0;
  const std::size_t n = samples_or(c, 20000);
  SamplerOptions opts;
  opts.h = t / 2048.0;
  const auto xs = sample_states(spec, t, n, seed, opts);
  const Stats s = stats_of(xs);
  const double v_se = variance_se(xs, s);
  const MomentSummary m = ngfsp_moments(spec, t, {}, McControl{100000, seed ^ 0x5eedULL, 0.0});
  const double mean_tol = 3.0 * std::hypot(s.se(), m.mean_se.value_or(0.0));
  const double var_tol = 3.5 * std::hypot(v_se, m.variance_se.value_or(0.0));
  VerificationReport r;
  r.name = "ngfsp_moments";
  r.analytic = m.mean;
  r.estimate = s.mean;
  r.std_error = s.se();
  r.tolerance = mean_tol;
  r.verdict = verdict_of(std::fabs(m.mean - s.mean) <= mean_tol && std::fabs(m.variance - s.variance()) <= var_tol);
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["t"] = t;
  r.metadata["grid_step"] = opts.h;
  r.metadata["variance_analytic"] = m.variance;
  r.metadata["variance_estimate"] = s.variance();
  r.metadata["variance_tolerance"] = var_tol;
  return r;
}

VerificationReport check_increments(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 2);
  const double t = 1.0, v = 1.0;
  const std::size_t n = samples_or(c, 100000);
  const auto xs = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    const SamplePath p = sample_path(spec, t + v, rng);
    return p.state_at(t + v) - p.state_at(v);
  });
  const PmfTable analytic = increment_pmf(spec, t, v, -80, 80);
  const double tv = total_variation(analytic, empirical_table(xs, t));
  VerificationReport r;
  r.name = "increments";
  r.analytic = 0.0;
  r.estimate = tv;
  r.tolerance = 0.01;
  r.verdict = verdict_of(tv <= r.tolerance);
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["t"] = t;
  r.metadata["v"] = v;
  r.metadata["v_zero_gap"] = total_variation(increment_pmf(spec, t, 0.0, -80, 80),
                                             ngsp_pmf_convolution(spec, t, -80, 80));
  return r;
}

VerificationReport check_ntfpp_pmf(const CheckConfig& c, std::uint64_t seed) {
  const double lambda_t = 2.0, alpha = 0.7;
  const long n_max = 60;
  const std::size_t n = samples_or(c, 100000);
  const PmfTable table = ntfpp_pmf(lambda_t, alpha, n_max);
  const auto xs = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    return sample_poisson(sample_inverse_subordinator_marginal(alpha, lambda_t, rng), rng);
  });
  const double tv = total_variation(table, empirical_table(xs, 0.0));
  const double mass = table.total();
  VerificationReport r;
  r.name = "ntfpp_pmf";
  r.analytic = 0.0;
  r.estimate = tv;
  r.tolerance = 0.005;
  r.verdict = verdict_of(tv <= r.tolerance && std::fabs(mass - 1.0) <= 1e-6);
  r.metadata = base_metadata(nullptr, seed, n);
  r.metadata["lambda_t"] = lambda_t;
  r.metadata["alpha"] = alpha;
  r.metadata["n_max"] = n_max;
  r.metadata["table_mass"] = mass;
  return r;
}

VerificationReport check_nhgfsp_pmf(const CheckConfig& c, std::uint64_t seed) {
  ProcessSpec spec;
  if (c.spec) {
    spec = *c.spec;
  } else {
    spec.variant = Variant::NHGFSP;
    spec.k = 1;
    spec.alpha = 0.8;
    spec.up = {RateFunction::constant(1.0)};
    spec.down = {RateFunction::constant(1.0)};
  }
  const double t = 1.0;
  const std::size_t n = samples_or(c, 100000);
  const PmfTable analytic = full_support_pmf(spec, t);
  const PmfTable empirical = empirical_table(sample_states(spec, t, n, seed), t);
  const double tv = total_variation(analytic, empirical);
  VerificationReport r;
  r.name = "nhgfsp_pmf";
  r.analytic = 0.0;
  r.estimate = tv;
  r.tolerance = 0.01;
  r.verdict = verdict_of(tv <= r.tolerance);
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["t"] = t;
  r.metadata["tail_bound"] = analytic.tail_bound;
  return r;
}

VerificationReport check_nhgfsp_mgf_sign(const CheckConfig& c, std::uint64_t seed) {
  ProcessSpec spec;
  if (c.spec) {
    spec = *c.spec;
  } else {
    spec = default_verify_spec(c.k > 0 ? c.k : 2, Variant::NHGFSP);
    spec.alpha = 0.8;
  }
  const double t = 1.0, s = 0.3;
  const PmfTable table = nhgfsp_pmf(spec, t, -200, 200);
  double from_pmf = 0.0;
  for (long x = table.n_min; x <= table.n_max; ++x) from_pmf += std::exp(s * x) * table.at(x);
  const double printed = nhgfsp_mgf(spec, s, t);
  const double difference = nhgfsp_mgf_difference(spec, s, t);
  const double tol = 1e-8 * std::max(1.0, from_pmf);
  VerificationReport r;
  r.name = "nhgfsp_mgf_sign";
  r.analytic = printed;
  r.estimate = from_pmf;
  r.tolerance = tol;
  r.verdict = std::fabs(printed - from_pmf) <= tol ? Verdict::pass : Verdict::discrepancy_documented;
  r.metadata = base_metadata(&spec, seed, 0);
  r.metadata["t"] = t;
  r.metadata["s"] = s;
  r.metadata["printed_gap"] = std::fabs(printed - from_pmf);
  r.metadata["difference_form"] = difference;
  r.metadata["difference_form_gap"] = std::fabs(difference - from_pmf);
  return r;
}

VerificationReport check_sampler_fidelity(const CheckConfig& c, std::uint64_t seed) {
  const ProcessSpec spec = spec_or(c, 2);
  if (spec.alpha != 1.0) throw SpecError("sampler_fidelity compares the alpha = 1 samplers");
  const double t = 1.0;
  const std::size_t n = samples_or(c, 20000);
  SamplerOptions thin, paper;
  paper.paper_exact = true;
  const Stats a = stats_of(sample_states(spec, t, n, seed, thin));
  const Stats b = stats_of(sample_states(spec, t, n, seed ^ 0xfeedULL, paper));
  const double tol = 3.0 * std::hypot(a.se(), b.se());
  VerificationReport r;
  r.name = "sampler_fidelity";
  r.analytic = a.mean;
  r.estimate = b.mean;
  r.std_error = std::hypot(a.se(), b.se());
  r.tolerance = tol;
  r.verdict = std::fabs(a.mean - b.mean) <= tol ? Verdict::pass : Verdict::discrepancy_documented;
  r.metadata = base_metadata(&spec, seed, n);
  r.metadata["t"] = t;
  r.metadata["analytic_mean"] = ngsp_moments(spec, t).mean;
  r.metadata["thinning_variance"] = a.variance();
  r.metadata["frozen_rate_variance"] = b.variance();
  r.metadata["note"] = "frozen-rate method steps by -ln U / Lambda(t) with the cumulative rate frozen";
  return r;
}

VerificationReport check_subordinator_moments(const CheckConfig& c, std::uint64_t seed) {
  const double alpha = (c.spec && c.spec->alpha < 1.0) ? c.spec->alpha : 0.7;
  const double t = 1.0, h = 1.0 / 512.0;
  const std::size_t n = samples_or(c, 100000);
  const auto ys = farm(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    return sample_inverse_subordinator(alpha, t, h, rng).value_at(t);
  });
  const Stats s = stats_of(ys);
  const double mean = inverse_subordinator_mean(alpha, t);
  const double var = inverse_subordinator_variance(alpha, t);
  const double var_rel = std::fabs(s.variance() - var) / var;
  VerificationReport r;
  r.name = "subordinator_moments";
  r.analytic = mean;
  r.estimate = s.mean;
  r.std_error = s.se();
  r.tolerance = 0.02 * mean;
  r.verdict = verdict_of(std::fabs(s.mean - mean) <= r.tolerance && var_rel <= 0.05);
  r.metadata = base_metadata(nullptr, seed, n);
  r.metadata["alpha"] = alpha;
  r.metadata["t"] = t;
  r.metadata["grid_step"] = h;
  r.metadata["variance_analytic"] = var;
  r.metadata["variance_estimate"] = s.variance();
  r.metadata["variance_rel_gap"] = var_rel;
  return r;
}

using CheckFn = std::function<VerificationReport(const CheckConfig&, std::uint64_t)>;

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> table{
      {"moments", check_moments},
      {"pmf_tv", check_pmf_tv},
      {"martingale", check_martingale},
      {"cutoff", check_cutoff},
      {"dispersion", check_dispersion},
      {"bessel_vs_convolution", check_bessel_vs_convolution},
      {"weighted_sum", check_weighted_sum},
      {"running_avg_ratios", check_running_avg_ratios},
      {"waiting_time", check_waiting_time},
      {"transition_rates", check_transition_rates},
      {"ngcp_oracle", check_ngcp_oracle},
      {"recurrence", check_recurrence},
      {"hitting_time", check_hitting_time},
      {"ngfsp_moments", check_ngfsp_moments},
      {"increments", check_increments},
      {"ntfpp_pmf", check_ntfpp_pmf},
      {"nhgfsp_pmf", check_nhgfsp_pmf},
      {"nhgfsp_mgf_sign", check_nhgfsp_mgf_sign},
      {"sampler_fidelity", check_sampler_fidelity},
      {"subordinator_moments", check_subordinator_moments},
  };
  return table;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::discrepancy_documented: return "discrepancy_documented";
  }
  return "fail";
}

CompositionSet enumerate_compositions(int k, long n) {
  if (k < 1) throw std::invalid_argument("enumerate_compositions: k must be at least 1");
  if (n < 0) throw std::invalid_argument("enumerate_compositions: n must be nonnegative");
  CompositionSet set;
  set.k = k;
  set.n = n;
  std::vector<long> x(static_cast<std::size_t>(k), 0);
  std::function<void(int, long)> fill = [&](int j, long rem) {
    if (j == 1) {
      x[0] = rem;
      set.tuples.push_back(x);
      return;
    }
    for (long xj = rem / j; xj >= 0; --xj) {
      x[static_cast<std::size_t>(j - 1)] = xj;
      fill(j - 1, rem - xj * j);
    }
  };
  fill(k, n);
  return set;
}

PmfTable ngcp_pmf_oracle(std::span<const RateFunction> up, double t, long n_max) {
  if (n_max < 0 || n_max > 40) throw std::invalid_argument("ngcp_pmf_oracle: n_max must lie in [0, 40]");
  const std::vector<double> cum = cumulative_values(up, t);
  double lam = 0.0;
  for (double c : cum) lam += c;
  PmfTable table;
  table.t = t;
  table.n_min = 0;
  table.n_max = n_max;
  table.backend = PmfBackend::enumeration;
  table.probs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  const int k = static_cast<int>(cum.size());
  for (long n = 0; n <= n_max; ++n) {
    double p = 0.0;
    for (const auto& x : enumerate_compositions(k, n).tuples) {
      double log_term = -lam;
      bool zero = false;
      for (int j = 0; j < k; ++j) {
        const long xj = x[static_cast<std::size_t>(j)];
        if (xj == 0) continue;
        if (cum[static_cast<std::size_t>(j)] <= 0.0) {
          zero = true;
          break;
        }
        log_term += xj * std::log(cum[static_cast<std::size_t>(j)]) - std::lgamma(xj + 1.0);
      }
      if (!zero) p += std::exp(log_term);
    }
    table.probs[static_cast<std::size_t>(n)] = p;
  }
  table.tail_bound = std::max(0.0, 1.0 - table.total());
  return table;
}

ProcessSpec default_verify_spec(int k, Variant variant) {
  if (k < 1) throw SpecError("k must be at least 1");
  ProcessSpec spec;
  spec.variant = variant;
  spec.k = k;
  for (int j = 1; j <= k; ++j) {
    spec.up.push_back(RateFunction::constant(1.2 / j));
    if (is_skellam(variant)) spec.down.push_back(RateFunction::constant(0.8 / j));
  }
  return spec;
}

const std::vector<std::string>& required_checks() {
  static const std::vector<std::string> names{"moments",    "pmf_tv",         "martingale",
                                              "cutoff",     "dispersion",     "bessel_vs_convolution",
                                              "weighted_sum", "running_avg_ratios", "waiting_time",
                                              "transition_rates"};
  return names;
}

const std::vector<std::string>& check_catalog() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

VerificationReport run_check(std::string_view name, const CheckConfig& config) {
  for (const auto& [entry, fn] : registry())
    if (entry == name) {
      if (config.spec) config.spec->validate();
      return fn(config, check_seed(name, config.seed));
    }
  throw std::invalid_argument("unknown check: " + std::string(name));
}

std::vector<VerificationReport> run_all_checks(const CheckConfig& config) {
  std::vector<VerificationReport> out;
  for (const auto& name : check_catalog()) out.push_back(run_check(name, config));
  return out;
}

json to_json(const VerificationReport& r) {
  json out{{"name", r.name},
           {"analytic", r.analytic},
           {"estimate", r.estimate},
           {"tolerance", r.tolerance},
           {"verdict", std::string(to_string(r.verdict))},
           {"metadata", r.metadata}};
  out["std_error"] = r.std_error ? json(*r.std_error) : json(nullptr);
  return out;
}

std::string format_table(const std::vector<VerificationReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "check" << std::setw(24) << "verdict" << std::right << std::setw(14)
     << "analytic" << std::setw(14) << "estimate" << std::setw(12) << "std_error" << std::setw(12)
     << "tolerance" << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(24) << r.name << std::setw(24) << to_string(r.verdict) << std::right
       << std::setprecision(6) << std::setw(14) << r.analytic << std::setw(14) << r.estimate << std::setw(12);
    if (r.std_error)
      os << *r.std_error;
    else
      os << "-";
    os << std::setw(12) << r.tolerance << '\n';
  }
  return os.str();
}

bool any_failed(const std::vector<VerificationReport>& reports) {
  return std::any_of(reports.begin(), reports.end(),
                     [](const VerificationReport& r) { return r.verdict == Verdict::fail; });
}

}  // namespace skellam
