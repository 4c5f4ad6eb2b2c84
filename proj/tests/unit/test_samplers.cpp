#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "skellam/analytics.hpp"
#include "skellam/parallel.hpp"
#include "skellam/samplers.hpp"

using namespace skellam;

namespace {

ProcessSpec constant_spec(std::vector<double> up, std::vector<double> down, Variant v, double alpha = 1.0) {
  ProcessSpec s;
  s.variant = v;
  s.k = static_cast<int>(up.size());
  s.alpha = alpha;
  for (double r : up) s.up.push_back(RateFunction::constant(r));
  for (double r : down) s.down.push_back(RateFunction::constant(r));
  return s;
}

ProcessSpec gompertz_set(Variant v) {
  ProcessSpec s;
  s.variant = v;
  s.k = 3;
  s.up = {RateFunction::gompertz_makeham(0.6, 0.1, 5), RateFunction::gompertz_makeham(0.7, 0.2, 4),
          RateFunction::gompertz_makeham(0.4, 0.3, 7)};
  s.down = {RateFunction::gompertz_makeham(0.7, 0.2, 4), RateFunction::gompertz_makeham(0.4, 0.3, 7),
            RateFunction::gompertz_makeham(0.6, 0.1, 5)};
  return s;
}

struct Summary {
  double mean = 0.0, var = 0.0;
  std::size_t n = 0;
  double se() const { return std::sqrt(var / static_cast<double>(n)); }
};

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = xs.size();
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  for (double x : xs) s.var += (x - s.mean) * (x - s.mean);
  s.var /= static_cast<double>(s.n - 1);
  return s;
}

// two-sample Kolmogorov-Smirnov: true when the 1% level does not reject
bool ks_accepts(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  return d < 1.628 * std::sqrt((na + nb) / (na * nb));
}

// Three independent replicates of a two-sample KS comparison; at least two must accept.
// A single 1% test at a fixed seed rejects a correct sampler one time in a hundred.
template <class A, class B>
bool same_law(std::size_t n, std::uint64_t seed, A draw_a, B draw_b) {
  int accepted = 0;
  for (std::uint64_t rep = 0; rep < 3; ++rep) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      RngStream ra(seed + 2 * rep, i), rb(seed + 2 * rep + 1, i);
      a[i] = draw_a(ra);
      b[i] = draw_b(rb);
    }
    if (ks_accepts(std::move(a), std::move(b))) ++accepted;
  }
  return accepted >= 2;
}

void check_path_shape(const SamplePath& p, int k, bool counting) {
  long prev = 0;
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    if (i > 0) CHECK(p.times[i] > p.times[i - 1]);
    const long jump = p.states[i] - prev;
    CHECK(jump != 0);
    CHECK(std::labs(jump) <= k);
    if (counting) CHECK(jump > 0);
    prev = p.states[i];
  }
}

}  // namespace

TEST_CASE("random streams") {
  RngStream a(5, 0), b(5, 0), c(5, 1);
  CHECK(a() == b());
  CHECK(a() != c());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("stable increments") {
  RngStream r1(9, 3), r2(9, 3);
  CHECK(sample_stable_increment(0.7, 1.0, r1) == sample_stable_increment(0.7, 1.0, r2));

  const std::size_t n = 100000;
  const auto d = farm(n, [](std::size_t i) {
    RngStream rng(21, i);
    return sample_stable_increment(0.7, 1.0, rng);
  });
  for (double s : {0.5, 1.0, 2.0}) {
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(-s * d[i]);
    const Summary m = summarize(e);
    CHECK(std::fabs(m.mean - std::exp(-std::pow(s, 0.7))) <= 3.0 * m.se());
  }

  // D(h) has the law of h^{1/alpha} D(1)
  CHECK(same_law(
      10000, 33, [](RngStream& r) { return sample_stable_increment(0.7, 0.25, r); },
      [](RngStream& r) { return std::pow(0.25, 1.0 / 0.7) * sample_stable_increment(0.7, 1.0, r); }));
  RngStream bad(1, 1);
  CHECK_THROWS_AS(sample_stable_increment(1.0, 1.0, bad), SpecError);
}

TEST_CASE("inverse subordinator paths") {
  RngStream rng(4, 0);
  const SubordinatorPath p = sample_inverse_subordinator(0.6, 2.0, 1.0 / 128, rng);
  CHECK(p.values.front() == 0.0);
  for (std::size_t i = 1; i < p.values.size(); ++i) CHECK(p.values[i] >= p.values[i - 1]);
  CHECK(p.value_at(0.0) == 0.0);

  const std::size_t n = 20000;
  const auto ys = farm(n, [](std::size_t i) {
    RngStream r(77, i);
    return sample_inverse_subordinator(0.7, 1.0, 1.0 / 256, r).value_at(1.0);
  });
  const Summary s = summarize(ys);
  CHECK(s.mean == doctest::Approx(1.0 / std::tgamma(1.7)).epsilon(0.02));
  const double var = 2.0 / std::tgamma(2.4) - 1.0 / (std::tgamma(1.7) * std::tgamma(1.7));
  CHECK(s.var == doctest::Approx(var).epsilon(0.05));

  CHECK(same_law(
      5000, 78, [](RngStream& r) { return sample_inverse_subordinator(0.7, 1.0, 1.0 / 256, r).value_at(1.0); },
      [](RngStream& r) { return sample_inverse_subordinator_marginal(0.7, 1.0, r); }));
}

TEST_CASE("plateaus lengthen as alpha decreases") {
  auto mean_plateau = [](double alpha) {
    double total = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      RngStream r(500, i);
      const SubordinatorPath p = sample_inverse_subordinator(alpha, 1.0, 1.0 / 512, r);
      std::size_t flat = 0;
      for (std::size_t g = 1; g < p.values.size(); ++g)
        if (p.values[g] - p.values[g - 1] < 1e-4 * p.h) ++flat;
      total += static_cast<double>(flat);
    }
    return total;
  };
  CHECK(mean_plateau(0.4) > mean_plateau(0.6));
  CHECK(mean_plateau(0.6) > mean_plateau(0.9));
}

TEST_CASE("GFSP sampler") {
  const auto zero = constant_spec({0.0}, {0.0}, Variant::GSP);
  RngStream r0(1, 0);
  CHECK(sample_gfsp(zero, 10.0, r0).times.empty());

  // alpha = 1, k = 1 waits are exponential; the first two waits of each path avoid horizon censoring
  const auto one = constant_spec({2.0}, {}, Variant::GCP);
  std::vector<double> waits;
  for (std::size_t i = 0; waits.size() < 100000; ++i) {
    RngStream r(2, i);
    const SamplePath p = sample_gfsp(one, 50.0, r);
    REQUIRE(p.times.size() >= 2);
    waits.push_back(p.times[0]);
    waits.push_back(p.times[1] - p.times[0]);
  }
  const Summary w = summarize(waits);
  CHECK(std::fabs(w.mean - 0.5) <= 3.0 * w.se());

  auto fig = constant_spec({0.1, 0.3, 0.2, 0.4, 0.2}, {0.2, 0.2, 0.2, 0.3, 0.3}, Variant::GFCP, 0.8);
  fig.down.clear();
  const std::size_t n = 20000;
  const auto xs = farm(n, [&](std::size_t i) {
    RngStream r(3, i);
    const SamplePath p = sample_gfsp(fig, 5.0, r);
    check_path_shape(p, 5, true);
    return static_cast<double>(p.state_at(5.0));
  });
  const Summary s = summarize(xs);
  const double expected = (0.1 + 0.6 + 0.6 + 1.6 + 1.0) * std::pow(5.0, 0.8) / std::tgamma(1.8);
  CHECK(std::fabs(s.mean - expected) <= 3.0 * s.se());
}

TEST_CASE("NGSP sampler") {
  const auto gm = gompertz_set(Variant::NGSP);
  const std::size_t n = 20000;
  const auto xs = farm(n, [&](std::size_t i) {
    RngStream r(10, i);
    const SamplePath p = sample_ngsp(gm, 1.0, r);
    check_path_shape(p, 3, false);
    return static_cast<double>(p.state_at(1.0));
  });
  const Summary s = summarize(xs);
  double mean = 0.0;
  for (int j = 1; j <= 3; ++j) mean += j * (gm.up[j - 1].cumulative(1.0) - gm.down[j - 1].cumulative(1.0));
  CHECK(std::fabs(s.mean - mean) <= 3.0 * s.se());

  // homogeneous reduction
  const auto cst = constant_spec({0.8, 0.4}, {0.5, 0.3}, Variant::NGSP);
  const auto gsp = cst.with_variant(Variant::GSP);
  CHECK(same_law(
      10000, 11, [&](RngStream& r) { return static_cast<double>(sample_ngsp(cst, 1.0, r).state_at(1.0)); },
      [&](RngStream& r) { return static_cast<double>(sample_gfsp(gsp, 1.0, r).state_at(1.0)); }));

  RngStream p1(13, 0), p2(13, 0);
  const SamplePath a = sample_ngsp(gm, 1.0, p1, NgspMethod::paper);
  const SamplePath b = sample_ngsp(gm, 1.0, p2, NgspMethod::paper);
  CHECK(a.times == b.times);
  CHECK(a.states == b.states);

  ProcessSpec spiky = cst;
  spiky.up[0] = RateFunction::weibull(1.0, 0.5);
  RngStream e(14, 0);
  CHECK_THROWS_AS(sample_ngsp(spiky, 1.0, e), SpecError);
}

TEST_CASE("NGFSP sampler") {
  const auto k1 = constant_spec({1.5}, {}, Variant::NGFCP, 0.7);
  const std::size_t n = 10000;
  const auto xs = farm(n, [&](std::size_t i) {
    RngStream r(20, i);
    return static_cast<double>(sample_ngfsp(k1, 1.0, 1.0 / 1024, r).state_at(1.0));
  });
  const Summary s = summarize(xs);
  CHECK(std::fabs(s.mean - 1.5 / std::tgamma(1.7)) <= 3.0 * s.se());

  const auto near_one = constant_spec({0.8, 0.4}, {0.5, 0.3}, Variant::NGFSP, 0.999);
  const auto plain_spec = constant_spec({0.8, 0.4}, {0.5, 0.3}, Variant::NGSP);
  CHECK(same_law(
      5000, 21,
      [&](RngStream& r) { return static_cast<double>(sample_ngfsp(near_one, 1.0, 1.0 / 1024, r).state_at(1.0)); },
      [&](RngStream& r) { return static_cast<double>(sample_ngsp(plain_spec, 1.0, r).state_at(1.0)); }));

  auto fig = gompertz_set(Variant::NGFSP);
  fig.alpha = 0.8;
  RngStream a(23, 5), b(23, 5);
  const SamplePath pa = sample_ngfsp(fig, 3.0, 3.0 / 4096, a);
  const SamplePath pb = sample_ngfsp(fig, 3.0, 3.0 / 4096, b);
  CHECK(pa.times == pb.times);
  CHECK(pa.states == pb.states);
  check_path_shape(pa, 3, false);
}

TEST_CASE("NHGFSP sampler") {
  // With Lambda(t) = c t the process is N(Y(c t)) =d N(c^alpha Y(t)), so GFSP rate lambda
  // corresponds to cumulative slope lambda^{1/alpha} for the side total, split by lambda_j.
  const double alpha = 0.7;
  const auto gfsp = constant_spec({0.8, 0.4}, {0.5, 0.3}, Variant::GFSP, alpha);
  const double up_scale = std::pow(1.2, 1.0 / alpha) / 1.2, down_scale = std::pow(0.8, 1.0 / alpha) / 0.8;
  const auto nhgfsp = constant_spec({0.8 * up_scale, 0.4 * up_scale}, {0.5 * down_scale, 0.3 * down_scale},
                                    Variant::NHGFSP, alpha);
  CHECK(same_law(
      10000, 30, [&](RngStream& r) { return static_cast<double>(sample_nhgfsp(nhgfsp, 1.0, r).state_at(1.0)); },
      [&](RngStream& r) { return static_cast<double>(sample_gfsp(gfsp, 1.0, r).state_at(1.0)); }));

  const auto zero = constant_spec({0.0}, {0.0}, Variant::NHGFSP, 0.7);
  RngStream z(32, 0);
  CHECK_THROWS_AS(sample_nhgfsp(zero, 1.0, z, true), SpecError);
}

TEST_CASE("running-average draws") {
  const auto spec = constant_spec({1.0, 0.5}, {0.2, 0.3}, Variant::RUN_AVG_GSP);
  RngStream r(40, 0);
  CHECK(sample_running_avg(spec, 0.0, r) == 0.0);
  const auto gsp = spec.with_variant(Variant::GSP);
  CHECK(same_law(
      10000, 41, [&](RngStream& r) { return sample_running_avg(spec, 4.0, r); },
      [&](RngStream& r) { return running_average(sample_gfsp(gsp, 4.0, r), 4.0); }));
  std::vector<double> direct(20000);
  for (std::size_t i = 0; i < direct.size(); ++i) {
    RngStream r(47, i);
    direct[i] = sample_running_avg(spec, 4.0, r);
  }
  const Summary s = summarize(direct);
  CHECK(std::fabs(s.mean - 0.5 * 4.0 * (1.0 + 1.0 - 0.2 - 0.6)) <= 3.0 * s.se());
}

TEST_CASE("path helpers") {
  SamplePath p;
  p.times = {0.5, 1.5};
  p.states = {2, 1};
  p.t_end = 2.0;
  CHECK(p.state_at(0.4) == 0);
  CHECK(p.state_at(0.5) == 2);
  CHECK(p.state_at(1.9) == 1);
  // (0 * 0.5 + 2 * 1 + 1 * 0.5) / 2
  CHECK(running_average(p, 2.0) == doctest::Approx(1.25));
  const auto gsp = constant_spec({1.0}, {1.0}, Variant::RUN_AVG_GSP);
  RngStream r(1, 1);
  CHECK_THROWS_AS(sample_path(gsp, 1.0, r), SpecError);
}
