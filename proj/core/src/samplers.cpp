#include "skellam/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace skellam {

namespace {

struct Event {
  double t;
  long delta;
};

SamplePath build_path(std::vector<Event> events, double t_end) {
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  SamplePath path;
  path.t_end = t_end;
  long state = 0;
  for (std::size_t i = 0; i < events.size();) {
    long net = 0;
    std::size_t j = i;
    for (; j < events.size() && events[j].t == events[i].t; ++j) net += events[j].delta;
    if (net != 0) {
      state += net;
      path.times.push_back(events[i].t);
      path.states.push_back(state);
    }
    i = j;
  }
  return path;
}

void check_horizon(double t_end) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw SpecError("t_end must be finite and nonnegative");
}

// Lewis-Shedler thinning with one intensity bound per window; marks follow lambda_j(t)/lambda(t).
void thin_side(std::span<const RateFunction> side, long sign, double t_end, RngStream& rng,
               std::vector<Event>& out) {
  if (side.empty() || t_end <= 0.0) return;
  const int windows = 64;
  const double width = t_end / windows;
  std::vector<double> lam(side.size());
  double t = 0.0;
  for (int w = 0; w < windows; ++w) {
    const double w_end = (w == windows - 1) ? t_end : (w + 1) * width;
    const double bound = total_intensity_bound(side, t, w_end);
    if (!std::isfinite(bound))
      throw SpecError("thinning: intensity is unbounded on [" + std::to_string(t) + ", " +
                      std::to_string(w_end) + "]");
    if (bound <= 0.0) {
      t = w_end;
      continue;
    }
    while (true) {
      const double step = rng.exponential() / bound;
      if (t + step > w_end) break;
      t += step;
      double total = 0.0;
      for (std::size_t j = 0; j < side.size(); ++j) {
        lam[j] = side[j].intensity(t);
        total += lam[j];
      }
      if (rng.uniform() * bound <= total && total > 0.0) {
        const int j = sample_index(lam, total, rng);
        out.push_back({t, sign * (j + 1)});
      }
    }
    t = w_end;
  }
}

// Frozen-rate step: marks from Lambda_j(t)/Lambda(t), step -ln U / Lambda(t).
std::vector<Event> paper_ngsp_events(const ProcessSpec& spec, double t_end, RngStream& rng) {
  std::vector<Event> events;
  const bool two_sided = !spec.down.empty();
  std::vector<double> up(spec.up.size()), down(spec.down.size());
  double t = kTableStartTime;
  while (t < t_end) {
    double up_total = 0.0, down_total = 0.0;
    for (std::size_t j = 0; j < up.size(); ++j) up_total += (up[j] = spec.up[j].cumulative(t));
    for (std::size_t j = 0; j < down.size(); ++j)
      down_total += (down[j] = spec.down[j].cumulative(t));
    if (!(up_total > 0.0)) throw SpecError("frozen-rate sampler: Lambda(t) = 0 at a step");
    if (two_sided && !(down_total > 0.0)) throw SpecError("frozen-rate sampler: T(t) = 0 at a step");
    const long x1 = sample_index(up, up_total, rng) + 1;
    const long x2 = two_sided ? sample_index(down, down_total, rng) + 1 : 0;
    t += rng.exponential() / up_total;
    if (t > t_end) break;
    events.push_back({t, x1 - x2});
  }
  return events;
}

void fractional_side(std::span<const RateFunction> side, long sign, double alpha, double t_end,
                     RngStream& rng, std::vector<Event>& out) {
  const std::vector<double> rates = constant_rates(side);
  double total = 0.0;
  for (double r : rates) total += r;
  if (total <= 0.0) return;
  double t = 0.0;
  while (true) {
    t += sample_mittag_leffler_wait(alpha, total, rng);
    if (t > t_end) break;
    out.push_back({t, sign * (sample_index(rates, total, rng) + 1)});
  }
}

// Unit-rate fractional Poisson renewal events s_i mapped to t_i = Lambda^{-1}(s_i).
void time_mapped_side(std::span<const RateFunction> side, long sign, double alpha, double t_end,
                      RngStream& rng, std::vector<Event>& out) {
  if (side.empty()) return;
  const double cum_end = total_cumulative(side, t_end);
  if (cum_end <= 0.0) return;
  std::vector<double> cum(side.size());
  double s = 0.0;
  while (true) {
    s += sample_mittag_leffler_wait(alpha, 1.0, rng);
    if (s > cum_end) break;
    const double t = inverse_total_cumulative(side, s, t_end);
    double total = 0.0;
    for (std::size_t j = 0; j < side.size(); ++j) total += (cum[j] = side[j].cumulative(t));
    if (!(total > 0.0)) continue;
    out.push_back({t, sign * (sample_index(cum, total, rng) + 1)});
  }
}

ProcessSpec inner_spec(const ProcessSpec& spec) {
  ProcessSpec inner = spec;
  inner.alpha = 1.0;
  inner.variant = spec.down.empty() ? Variant::NGCP : Variant::NGSP;
  return inner;
}

}  // namespace

long SamplePath::state_at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return states[static_cast<std::size_t>(it - times.begin()) - 1];
}

double SubordinatorPath::value_at(double t) const {
  if (values.empty() || t <= 0.0) return 0.0;
  std::size_t i = static_cast<std::size_t>(std::floor(t / h + 1e-9));
  if (i >= values.size()) i = values.size() - 1;
  return values[i];
}

double sample_stable_increment(double alpha, double h, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("stable increment needs alpha in (0,1)");
  if (!(h > 0.0)) throw SpecError("stable increment needs h > 0");
  const double u = std::numbers::pi * rng.uniform();
  const double v = rng.exponential();
  const double inv = 1.0 / alpha;
  const double r = (1.0 - alpha) / alpha;
  return std::pow(h, inv) * std::sin(alpha * u) * std::pow(std::sin((1.0 - alpha) * u), r) /
         (std::pow(std::sin(u), inv) * std::pow(v, r));
}

double sample_inverse_subordinator_marginal(double alpha, double t, RngStream& rng) {
  if (t <= 0.0) return 0.0;
  if (alpha == 1.0) return t;
  return std::pow(t / sample_stable_increment(alpha, 1.0, rng), alpha);
}

double sample_mittag_leffler_wait(double alpha, double rate, RngStream& rng) {
  if (!(rate > 0.0)) throw SpecError("waiting time needs a positive rate");
  if (alpha == 1.0) return rng.exponential() / rate;
  if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("waiting time needs alpha in (0,1]");
  const double e1 = rng.exponential();
  const double u2 = rng.uniform();
  const double e3 = rng.exponential();
  const double inv = 1.0 / alpha;
  const double pu = std::numbers::pi * u2;
  return std::pow(e1 / rate, inv) * std::sin(alpha * pu) *
         std::pow(std::sin((1.0 - alpha) * pu), inv - 1.0) /
         (std::pow(std::sin(pu), inv) * std::pow(e3, inv - 1.0));
}

long sample_poisson(double mean, RngStream& rng) {
  if (!(mean >= 0.0)) throw SpecError("Poisson mean must be nonnegative");
  if (mean == 0.0) return 0;
  std::poisson_distribution<long> dist(mean);
  return dist(rng);
}

int sample_index(std::span<const double> weights, double total, RngStream& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  int last = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    acc += weights[j];
    last = static_cast<int>(j);
    if (target < acc) return last;
  }
  return last;
}

SubordinatorPath sample_inverse_subordinator(double alpha, double t_end, double h, RngStream& rng) {
  check_horizon(t_end);
  if (!(h > 0.0)) throw SpecError("grid step h must be positive");
  SubordinatorPath path;
  path.h = h;
  std::size_t n = static_cast<std::size_t>(std::floor(t_end / h + 1e-9)) + 1;
  if (static_cast<double>(n - 1) * h < t_end * (1.0 - 1e-12)) ++n;
  path.values.assign(n, 0.0);
  if (alpha == 1.0) {
    for (std::size_t m = 0; m < n; ++m) path.values[m] = path.time(m);
    return path;
  }
  // grid points m with D_i <= m h < D_{i+1} receive Y = i h
  double d = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; next < n; ++i) {
    const double d_next = d + sample_stable_increment(alpha, h, rng);
    const double stop = std::ceil(d_next / h);
    const std::size_t hi = stop >= static_cast<double>(n) ? n : static_cast<std::size_t>(stop);
    for (; next < hi; ++next) path.values[next] = static_cast<double>(i) * h;
    d = d_next;
  }
  return path;
}

SamplePath sample_gfsp(const ProcessSpec& spec, double t_end, RngStream& rng, bool paper_exact) {
  check_horizon(t_end);
  const std::vector<double> up = constant_rates(spec.up);
  const std::vector<double> down = constant_rates(spec.down);
  std::vector<Event> events;
  if (!paper_exact) {
    fractional_side(spec.up, +1, spec.alpha, t_end, rng, events);
    fractional_side(spec.down, -1, spec.alpha, t_end, rng, events);
    return build_path(std::move(events), t_end);
  }
  // one clock at the up-side rate drives both components
  double up_total = 0.0, down_total = 0.0;
  for (double r : up) up_total += r;
  for (double r : down) down_total += r;
  if (up_total <= 0.0) return build_path({}, t_end);
  double t = 0.0;
  while (t < t_end) {
    const long x1 = sample_index(up, up_total, rng) + 1;
    const long x2 = down_total > 0.0 ? sample_index(down, down_total, rng) + 1 : 0;
    t += sample_mittag_leffler_wait(spec.alpha, up_total, rng);
    if (t > t_end) break;
    events.push_back({t, x1 - x2});
  }
  return build_path(std::move(events), t_end);
}

SamplePath sample_ngsp(const ProcessSpec& spec, double t_end, RngStream& rng, NgspMethod method) {
  check_horizon(t_end);
  if (method == NgspMethod::paper) return build_path(paper_ngsp_events(spec, t_end, rng), t_end);
  std::vector<Event> events;
  thin_side(spec.up, +1, t_end, rng, events);
  thin_side(spec.down, -1, t_end, rng, events);
  return build_path(std::move(events), t_end);
}

SamplePath sample_ngfsp(const ProcessSpec& spec, double t_end, double h, RngStream& rng,
                        bool paper_exact) {
  check_horizon(t_end);
  if (spec.alpha == 1.0) return sample_ngsp(inner_spec(spec), t_end, rng);
  const SubordinatorPath y = sample_inverse_subordinator(spec.alpha, t_end, h, rng);
  const double y_last = y.values.back();
  const ProcessSpec inner = inner_spec(spec);

  if (paper_exact) {
    // the table counts a jump at the current inner time before advancing it
    std::vector<Event> inner_events;
    const bool two_sided = !spec.down.empty();
    std::vector<double> up(spec.up.size()), down(spec.down.size());
    double u = kTableStartTime;
    while (u <= y_last) {
      double up_total = 0.0, down_total = 0.0;
      for (std::size_t j = 0; j < up.size(); ++j) up_total += (up[j] = spec.up[j].cumulative(u));
      for (std::size_t j = 0; j < down.size(); ++j)
        down_total += (down[j] = spec.down[j].cumulative(u));
      if (!(up_total > 0.0)) throw SpecError("frozen-rate sampler: Lambda(t) = 0 at a step");
      if (two_sided && !(down_total > 0.0)) throw SpecError("frozen-rate sampler: T(t) = 0 at a step");
      const long x1 = sample_index(up, up_total, rng) + 1;
      const long x2 = two_sided ? sample_index(down, down_total, rng) + 1 : 0;
      inner_events.push_back({u, x1 - x2});
      u += rng.exponential() / up_total;
    }
    std::vector<Event> events;
    std::size_t next = 0;
    for (std::size_t i = 1; i < y.values.size(); ++i) {
      long delta = 0;
      while (next < inner_events.size() && inner_events[next].t <= y.values[i])
        delta += inner_events[next++].delta;
      if (delta != 0) events.push_back({std::min(y.time(i), t_end), delta});
    }
    return build_path(std::move(events), t_end);
  }

  const SamplePath operational = sample_ngsp(inner, y_last, rng, NgspMethod::thinning);
  // map operational times through the piecewise-linear interpolant of Y on the grid
  std::vector<Event> events;
  events.reserve(operational.times.size());
  long prev = 0;
  for (std::size_t e = 0; e < operational.times.size(); ++e) {
    const double u = operational.times[e];
    const auto it = std::lower_bound(y.values.begin(), y.values.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - y.values.begin());
    double t = t_end;
    if (i > 0 && i < y.values.size()) {
      const double lo = y.values[i - 1], hi = y.values[i];
      t = y.time(i - 1) + y.h * (u - lo) / (hi - lo);
    }
    t = std::min(t, t_end);
    events.push_back({t, operational.states[e] - prev});
    prev = operational.states[e];
  }
  return build_path(std::move(events), t_end);
}

SamplePath sample_nhgfsp(const ProcessSpec& spec, double t_end, RngStream& rng, bool paper_exact) {
  check_horizon(t_end);
  std::vector<Event> events;
  if (!paper_exact) {
    time_mapped_side(spec.up, +1, spec.alpha, t_end, rng, events);
    time_mapped_side(spec.down, -1, spec.alpha, t_end, rng, events);
    return build_path(std::move(events), t_end);
  }
  const bool two_sided = !spec.down.empty();
  std::vector<double> up(spec.up.size()), down(spec.down.size());
  double t = kTableStartTime;
  while (t < t_end) {
    double up_total = 0.0, down_total = 0.0;
    for (std::size_t j = 0; j < up.size(); ++j) up_total += (up[j] = spec.up[j].cumulative(t));
    for (std::size_t j = 0; j < down.size(); ++j)
      down_total += (down[j] = spec.down[j].cumulative(t));
    if (!(up_total > 0.0)) throw SpecError("NHGFSP sampler: Lambda(t) = 0 at a step");
    if (two_sided && !(down_total > 0.0)) throw SpecError("NHGFSP sampler: T(t) = 0 at a step");
    const long x1 = sample_index(up, up_total, rng) + 1;
    const long x2 = two_sided ? sample_index(down, down_total, rng) + 1 : 0;
    t += sample_mittag_leffler_wait(spec.alpha, up_total, rng);
    if (t > t_end) break;
    events.push_back({t, x1 - x2});
  }
  return build_path(std::move(events), t_end);
}

double sample_running_avg(const ProcessSpec& spec, double t_end, RngStream& rng) {
  check_horizon(t_end);
  const std::vector<double> up = constant_rates(spec.up);
  const std::vector<double> down = constant_rates(spec.down);
  std::vector<double> weights(up);
  weights.insert(weights.end(), down.begin(), down.end());
  double total = 0.0;
  for (double w : weights) total += w;
  if (t_end == 0.0 || total == 0.0) return 0.0;
  const long n = sample_poisson(total * t_end, rng);
  const int k = static_cast<int>(up.size());
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    const int idx = sample_index(weights, total, rng);
    const double u = rng.uniform();
    if (idx < k)
      sum += u * (idx + 1);
    else
      sum -= u * (idx - k + 1);
  }
  return sum;
}

SamplePath sample_path(const ProcessSpec& spec, double t_end, RngStream& rng,
                       const SamplerOptions& options) {
  switch (spec.variant) {
    case Variant::GCP:
    case Variant::GFCP:
    case Variant::GSP:
    case Variant::GFSP:
      return sample_gfsp(spec, t_end, rng, options.paper_exact);
    case Variant::NGCP:
    case Variant::NGSP:
      return sample_ngsp(spec, t_end, rng,
                         options.paper_exact ? NgspMethod::paper : options.ngsp_method);
    case Variant::NGFCP:
    case Variant::NGFSP: {
      const double h = options.h > 0.0 ? options.h : t_end / 16384.0;
      if (spec.alpha < 1.0 && !(h > 0.0)) return build_path({}, t_end);
      return sample_ngfsp(spec, t_end, h, rng, options.paper_exact);
    }
    case Variant::NHGFCP:
    case Variant::NHGFSP:
      return sample_nhgfsp(spec, t_end, rng, options.paper_exact);
    case Variant::RUN_AVG_GCP:
    case Variant::RUN_AVG_GSP:
      break;
  }
  throw SpecError("running-average variants produce scalar draws, not paths");
}

double running_average(const SamplePath& path, double t) {
  if (t <= 0.0) return 0.0;
  double integral = 0.0;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    if (path.times[i] >= t) break;
    const double seg_end = (i + 1 < path.times.size()) ? std::min(path.times[i + 1], t) : t;
    integral += static_cast<double>(path.states[i]) * (seg_end - path.times[i]);
  }
  return integral / t;
}

}  // namespace skellam
