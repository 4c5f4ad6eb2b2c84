// Acceptance criteria, one PASS/FAIL line each.
// Usage: acceptance [--criterion N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "skellam/analytics.hpp"
#include "skellam/parallel.hpp"
#include "skellam/samplers.hpp"
#include "skellam/specfun.hpp"
#include "skellam/tickdata.hpp"
#include "skellam/verify.hpp"

using namespace skellam;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Stats {
  double mean = 0.0, var = 0.0;
  std::size_t n = 0;
  double se() const { return std::sqrt(var / static_cast<double>(n)); }
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  s.n = xs.size();
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  for (double x : xs) s.var += (x - s.mean) * (x - s.mean);
  s.var /= static_cast<double>(s.n - 1);
  return s;
}

ProcessSpec constant_spec(std::vector<double> up, std::vector<double> down, Variant v, double alpha = 1.0) {
  ProcessSpec s;
  s.variant = v;
  s.k = static_cast<int>(up.size());
  s.alpha = alpha;
  for (double r : up) s.up.push_back(RateFunction::constant(r));
  for (double r : down) s.down.push_back(RateFunction::constant(r));
  return s;
}

struct Gm {
  double a, b, mu;
  double cum(double t) const { return a / b * std::expm1(b * t) + mu * t; }
};
const Gm kGmUp[] = {{0.6, 0.1, 5}, {0.7, 0.2, 4}, {0.4, 0.3, 7}};
const Gm kGmDown[] = {{0.7, 0.2, 4}, {0.4, 0.3, 7}, {0.6, 0.1, 5}};

ProcessSpec gompertz_spec() {
  ProcessSpec s;
  s.variant = Variant::NGSP;
  s.k = 3;
  for (const Gm& g : kGmUp) s.up.push_back(RateFunction::gompertz_makeham(g.a, g.b, g.mu));
  for (const Gm& g : kGmDown) s.down.push_back(RateFunction::gompertz_makeham(g.a, g.b, g.mu));
  return s;
}

double skellam_pmf(double a, double b, long n) {
  return std::exp(-(a + b)) * std::pow(a / b, 0.5 * static_cast<double>(n)) *
         std::cyl_bessel_i(std::fabs(static_cast<double>(n)), 2.0 * std::sqrt(a * b));
}

// ---- criteria ---------------------------------------------------------------------------------

Outcome special_functions() {
  double exp_gap = 0.0, raw_gap = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double z = -5.0 + 0.1 * i;
    exp_gap = std::max(exp_gap, std::fabs(mittag_leffler(1.0, 1.0, z) - std::exp(z)));
    raw_gap = std::max(raw_gap, std::fabs(prabhakar_series(1.0, 1.0, 1.0, z).value - std::exp(z)));
  }
  double sym_gap = 0.0, deriv_rel = 0.0;
  const double h = 1e-5;
  for (int n = -10; n <= 10; ++n)
    for (int i = 0; i <= 40; ++i) {
      const double z = 0.5 * i;
      sym_gap = std::max(sym_gap, std::fabs(bessel_i(n, z) - bessel_i(-n, z)));
      if (z < 0.5) continue;
      const double fd = (bessel_i(n, z + h) - bessel_i(n, z - h)) / (2 * h);
      const double id = 0.5 * (bessel_i(n - 1, z) + bessel_i(n + 1, z));
      deriv_rel = std::max(deriv_rel, std::fabs(fd - id) / std::fabs(id));
    }
  // delta = 1 against a direct two-parameter sum; 50 digits absorb the cancellation at z = -3
  using big = boost::multiprecision::cpp_bin_float_50;
  double red_gap = 0.0;
  for (double a : {0.3, 0.6, 0.9})
    for (double b : {0.5, 1.0, 2.0})
      for (double z : {-3.0, -0.5, 0.0, 1.0}) {
        big direct = 0, zk = 1, term = 1;
        for (int k = 0; k < 20 || abs(term) > 1e-40 * abs(direct); ++k, zk *= z) {
          term = zk / boost::multiprecision::tgamma(big(a) * k + big(b));
          direct += term;
        }
        red_gap = std::max(red_gap, std::fabs(mittag_leffler3(a, b, 1.0, z) - direct.convert_to<double>()));
        red_gap = std::max(red_gap, std::fabs(mittag_leffler3(a, b, 1.0, z) - mittag_leffler(a, b, z)));
      }
  const bool ok = exp_gap <= 1e-12 && raw_gap <= 1e-12 && sym_gap <= 1e-6 && deriv_rel <= 1e-6 && red_gap <= 1e-12;
  return {ok, fmt("E11-exp %.2e, raw series %.2e, I_n symmetry %.2e, derivative rel %.2e, delta=1 %.2e", exp_gap,
                  raw_gap, sym_gap, deriv_rel, red_gap)};
}

Outcome backend_agreement() {
  const auto spec = constant_spec({1.2}, {0.8}, Variant::NGSP);
  const PmfTable bes = ngsp_pmf_bessel(spec, 1.0, -15, 15);
  const PmfTable conv = ngsp_pmf_convolution(spec, 1.0, -15, 15);
  double gap = 0.0, ref_gap = 0.0;
  for (long n = -15; n <= 15; ++n) {
    gap = std::max(gap, std::fabs(bes.at(n) - conv.at(n)));
    ref_gap = std::max(ref_gap, std::fabs(conv.at(n) - skellam_pmf(1.2, 0.8, n)));
  }
  return {gap < 1e-10 && ref_gap < 1e-10, fmt("max gap %.2e (convolution vs std Bessel %.2e)", gap, ref_gap)};
}

Outcome recurrence() {
  const ProcessSpec spec = default_verify_spec(3);
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    const PmfTable p = ngsp_pmf_convolution(spec, t, -60, 60);
    std::vector<double> up, down;
    for (int j = 1; j <= 3; ++j) {
      up.push_back(1.2 / j * t);
      down.push_back(0.8 / j * t);
    }
    for (long n = 1; n <= 57; ++n) {
      double rhs = 0.0;
      for (int j = 1; j <= 3; ++j) rhs += j * (up[j - 1] * p.at(n - j) - down[j - 1] * p.at(n + j));
      worst = std::max(worst, std::fabs(p.at(n) - rhs / static_cast<double>(n)));
    }
  }
  return {worst <= 1e-8, fmt("max residual %.2e over t in {0.5,1,2}", worst)};
}

Outcome oracle_equivalence() {
  const std::vector<RateFunction> up{RateFunction::constant(0.1), RateFunction::constant(0.3),
                                     RateFunction::constant(0.2)};
  const PmfTable rec = ngcp_pmf(up, 1.0, 20);
  const PmfTable ora = ngcp_pmf_oracle(up, 1.0, 20);
  double gap = 0.0;
  for (long n = 0; n <= 20; ++n) gap = std::max(gap, std::fabs(rec.at(n) - ora.at(n)));
  return {gap < 1e-10, fmt("max gap %.2e for n <= 20", gap)};
}

Outcome subordinator_moments() {
  const double alpha = 0.7;
  const std::size_t n = 100000;
  const double quad = boost::math::quadrature::exp_sinh<double>().integrate(
      [](double x) { return std::pow(x, 0.7) * std::exp(-x); });
  const double mean_ref = std::exp(-ln_gamma(1.0 + alpha));
  const double quad_gap = std::fabs(1.0 / quad - mean_ref);
  const double var_ref = 2.0 * std::exp(-ln_gamma(1.0 + 2 * alpha)) - mean_ref * mean_ref;
  auto run = [&](double h, std::uint64_t seed, std::size_t draws) {
    return stats(farm(draws, [&](std::size_t i) {
      RngStream rng(seed, i);
      return sample_inverse_subordinator(alpha, 1.0, h, rng).value_at(1.0);
    }));
  };
  const Stats s = run(1.0 / 512, 501, n);
  const double mean_rel = std::fabs(s.mean / mean_ref - 1.0);
  const double var_rel = std::fabs(s.var / var_ref - 1.0);
  // grid refinement: halving h moves the statistics by less than their tolerances;
  // a quarter of the draws keeps the mean SE near 0.4%, well inside the 2% band
  const Stats fine = run(1.0 / 1024, 502, n / 4);
  const double mean_shift = std::fabs(fine.mean / s.mean - 1.0), var_shift = std::fabs(fine.var / s.var - 1.0);
  const bool ok = quad_gap < 1e-10 && mean_rel <= 0.02 && var_rel <= 0.05 && mean_shift <= 0.02 && var_shift <= 0.05;
  return {ok, fmt("mean %.5f vs 1/Gamma(1.7) = %.5f (quadrature gap %.1e; the quoted 0.91906 is not 1/Gamma(1.7)), "
                  "rel %.4f; variance %.5f vs %.5f, rel %.4f; h/2 shifts %.4f, %.4f",
                  s.mean, mean_ref, quad_gap, mean_rel, s.var, var_ref, var_rel, mean_shift, var_shift)};
}

Outcome sampler_moments() {
  const ProcessSpec spec = gompertz_spec();
  const std::size_t n = 100000;
  const Stats s = stats(farm(n, [&](std::size_t i) {
    RngStream rng(601, i);
    return static_cast<double>(sample_ngsp(spec, 1.0, rng).state_at(1.0));
  }));
  double mean = 0.0, var = 0.0;
  for (int j = 1; j <= 3; ++j) {
    mean += j * (kGmUp[j - 1].cum(1.0) - kGmDown[j - 1].cum(1.0));
    var += j * j * (kGmUp[j - 1].cum(1.0) + kGmDown[j - 1].cum(1.0));
  }
  const double z = std::fabs(s.mean - mean) / s.se();
  const double var_rel = std::fabs(s.var / var - 1.0);
  return {z <= 3.0 && var_rel <= 0.05,
          fmt("mean %.4f vs %.4f (%.2f SE); variance %.3f vs %.3f (rel %.4f)", s.mean, mean, z, s.var, var, var_rel)};
}

Outcome running_average_ratios() {
  const auto spec = constant_spec({1.0, 0.5}, {0.2, 0.3}, Variant::RUN_AVG_GSP);
  const double t = 4.0;
  const std::size_t n = 100000;
  const Stats s = stats(farm(n, [&](std::size_t i) {
    RngStream rng(701, i);
    return sample_running_avg(spec, t, rng);
  }));
  const double mean = t / 2.0 * (1 * (1.0 - 0.2) + 2 * (0.5 - 0.3));
  const double var = t / 3.0 * (1 * (1.0 + 0.2) + 4 * (0.5 + 0.3));
  const double z = std::fabs(s.mean - mean) / s.se();
  const double var_rel = std::fabs(s.var / var - 1.0);
  return {z <= 3.0 && var_rel <= 0.05,
          fmt("mean %.4f vs %.4f (%.2f SE); variance %.4f vs %.4f (rel %.4f)", s.mean, mean, z, s.var, var, var_rel)};
}

Outcome ntfpp() {
  const double cum = 2.0, alpha = 0.7;
  const PmfTable table = ntfpp_pmf(cum, alpha, 60);
  const double mass_gap = std::fabs(table.total() - 1.0);
  const std::size_t n = 100000;
  const auto xs = farm(n, [&](std::size_t i) {
    RngStream rng(801, i);
    return sample_poisson(sample_inverse_subordinator_marginal(alpha, cum, rng), rng);
  });
  const double tv = total_variation(table, empirical_table(xs, 0.0));
  return {mass_gap <= 1e-6 && tv < 0.005, fmt("mass gap %.2e; TV to time-change Monte Carlo %.5f", mass_gap, tv)};
}

Outcome waiting_time() {
  const auto spec = constant_spec({1.2, 0.6}, {}, Variant::NHGFCP, 0.7);
  const double t_end = 5.0;
  const std::size_t n = 100000;
  auto first = farm(n, [&](std::size_t i) {
    RngStream rng(901, i);
    const SamplePath p = sample_nhgfsp(spec, t_end, rng);
    long prev = 0;
    for (std::size_t e = 0; e < p.times.size(); ++e) {
      if (p.states[e] - prev == 1) return p.times[e];
      prev = p.states[e];
    }
    return std::numeric_limits<double>::infinity();
  });
  std::sort(first.begin(), first.end());
  double sup = 0.0;
  for (int g = 1; g <= 200; ++g) {
    const double t = t_end * g / 200.0;
    const double emp = static_cast<double>(std::upper_bound(first.begin(), first.end(), t) - first.begin()) / n;
    sup = std::max(sup, std::fabs(emp - waiting_time_cdf(spec.up, 0.7, 1, t).value));
  }
  return {sup < 0.02, fmt("sup gap %.4f over t in (0, 5]", sup)};
}

Outcome cutoff() {
  const double cum = 1e4, alpha = 0.7;
  const std::size_t n = 10000;
  const double expected = std::pow(cum, alpha) * std::exp(-ln_gamma(1.0 + alpha));
  const auto ratio = farm(n, [&](std::size_t i) {
    RngStream rng(1001, i);
    return static_cast<double>(sample_poisson(sample_inverse_subordinator_marginal(alpha, cum, rng), rng)) / expected;
  });
  std::size_t far = 0;
  for (double r : ratio)
    if (std::fabs(r - 1.0) > 0.1) ++far;
  const double frac = static_cast<double>(far) / n;
  return {frac < 0.05, fmt("P(|N/E[N] - 1| > 0.1) = %.4f, threshold 0.05", frac)};
}

Outcome martingale() {
  const ProcessSpec spec = gompertz_spec();
  const std::vector<double> checkpoints{0.2, 0.4, 0.6, 0.8, 1.0};
  const std::size_t n = 100000;
  const auto rows = farm(n, [&](std::size_t i) {
    RngStream rng(1101, i);
    const SamplePath p = sample_ngsp(spec, 1.0, rng);
    std::vector<double> out;
    for (double t : checkpoints) {
      double comp = 0.0;
      for (int j = 1; j <= 3; ++j) comp += j * (kGmUp[j - 1].cum(t) - kGmDown[j - 1].cum(t));
      out.push_back(static_cast<double>(p.state_at(t)) - comp);
    }
    return out;
  });
  double worst = 0.0;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = rows[i][c];
    const Stats s = stats(col);
    worst = std::max(worst, std::fabs(s.mean) / s.se());
  }
  return {worst <= 4.0, fmt("largest |mean| / SE over 5 checkpoints %.2f", worst)};
}

Outcome discrepancy_documented() {
  CheckConfig cfg;
  cfg.k = 2;
  const VerificationReport r = run_check("bessel_vs_convolution", cfg);
  const double gap = r.metadata.at("max_gap").get<double>();
  return {r.verdict == Verdict::discrepancy_documented && gap > 0.0,
          fmt("verdict %s, gap %.3e", std::string(to_string(r.verdict)).c_str(), gap)};
}

Outcome tick_round_trip() {
  const auto spec = constant_spec({0.6, 0.2}, {0.5, 0.3}, Variant::NGSP);
  RngStream path_rng(1301, 0), noise_rng(1301, 1);
  const SamplePath path = sample_ngsp(spec, 2000.0, path_rng);
  const SyntheticStream s = synthetic_ticks(path, 100.0, 1e-4, 2.0, noise_rng);
  const auto [up, down] = extract_jumps(bid_filter(s.ticks, 1e-4));
  const bool counts = static_cast<long>(up.event_times.size()) == s.planted_up &&
                      static_cast<long>(down.event_times.size()) == s.planted_down;
  std::vector<double> waits(10000);
  for (std::size_t i = 0; i < waits.size(); ++i) {
    RngStream rng(1302, i);
    waits[i] = sample_mittag_leffler_wait(0.9, 1.0, rng);
  }
  const double beta = fit_mittag_leffler(waits).beta;
  return {counts && beta >= 0.85 && beta <= 0.95,
          fmt("up %zu/%ld, down %zu/%ld recovered; beta_hat %.4f", up.event_times.size(), s.planted_up,
              down.event_times.size(), s.planted_down, beta)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 1;
    }
  }
  const std::vector<Criterion> all{
      {1, 1.0, special_functions},       {2, 1.0, backend_agreement},   {3, 5.0, recurrence},
      {4, 10.0, oracle_equivalence},     {5, 30.0, subordinator_moments}, {6, 120.0, sampler_moments},
      {7, 60.0, running_average_ratios}, {8, 60.0, ntfpp},              {9, 120.0, waiting_time},
      {10, 60.0, cutoff},                {11, 120.0, martingale},       {12, 60.0, discrepancy_documented},
      {13, 60.0, tick_round_trip}};
  if (only < 0 || only > static_cast<int>(all.size())) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 1;
  }
  bool failed = false;
  for (const Criterion& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    std::printf("criterion %d: %s %s; %.2fs (budget %.0fs)%s\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                c.budget_seconds, in_time ? "" : " over budget");
    std::fflush(stdout);
    failed = failed || !pass;
  }
  return failed ? 1 : 0;
}
