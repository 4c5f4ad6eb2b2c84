#include "skellam/tickdata.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "skellam/io.hpp"
#include "skellam/specfun.hpp"

namespace skellam {

namespace {

void require_samples(std::span<const double> xs) {
  if (xs.size() < kMinFitSamples)
    throw std::invalid_argument("fit needs at least " + std::to_string(kMinFitSamples) +
                                " inter-arrival times, got " + std::to_string(xs.size()));
  for (double x : xs)
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("inter-arrival times must be positive");
}

// RMSE of log empirical survival against a model on 50 log-spaced points
// between the 1st and 99th percentiles; points with zero empirical survival are skipped.
template <class Survival>
double log_survival_rmse(std::span<const double> xs, Survival model) {
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double lo = sorted[n / 100];
  const double hi = sorted[(99 * n) / 100];
  const int points = 50;
  double sum = 0.0;
  int used = 0;
  for (int i = 0; i < points; ++i) {
    const double t = (hi > lo) ? lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)) : lo;
    const auto above = static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
    const double emp = above / static_cast<double>(n);
    const double mod = model(t);
    if (emp <= 0.0 || !(mod > 0.0)) continue;
    const double d = std::log(emp) - std::log(mod);
    sum += d * d;
    ++used;
  }
  return used > 0 ? std::sqrt(sum / used) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string_view to_string(FitModel m) {
  return m == FitModel::exponential ? "exponential" : "mittag_leffler";
}

std::vector<BidRecord> bid_filter(std::span<const TickRecord> ticks, double tick_size) {
  if (!(tick_size > 0.0)) throw std::invalid_argument("tick_size must be positive");
  std::vector<BidRecord> out;
  if (ticks.empty()) return out;
  const double eps = tick_size * 1e-6;
  double bid = ticks.front().price - tick_size;
  double last_time = -std::numeric_limits<double>::infinity();
  for (const TickRecord& rec : ticks) {
    if (rec.timestamp < last_time) throw std::invalid_argument("tick timestamps must be nondecreasing");
    last_time = rec.timestamp;
    const double f = rec.price;
    if (f >= bid - eps && f <= bid + tick_size + eps) continue;  // inside the spread, ties included
    if (f < bid) {
      bid = f;
      out.push_back({rec.timestamp, f, bid, -1});
    } else {
      bid = f - tick_size;
      out.push_back({rec.timestamp, f, bid, +1});
    }
  }
  return out;
}

std::pair<JumpSeries, JumpSeries> extract_jumps(std::span<const BidRecord> filtered) {
  JumpSeries up, down;
  up.direction = JumpDirection::up;
  down.direction = JumpDirection::down;
  for (const BidRecord& r : filtered) {
    if (r.direction == 0) continue;
    JumpSeries& s = r.direction > 0 ? up : down;
    if (!s.event_times.empty() && r.timestamp <= s.event_times.back()) continue;
    s.event_times.push_back(r.timestamp);
  }
  for (JumpSeries* s : {&up, &down})
    for (std::size_t i = 1; i < s->event_times.size(); ++i)
      s->interarrivals.push_back(s->event_times[i] - s->event_times[i - 1]);
  return {std::move(up), std::move(down)};
}

FitReport fit_exponential(std::span<const double> xs) {
  require_samples(xs);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  FitReport r;
  r.model = FitModel::exponential;
  r.rate = 1.0 / mean;
  r.sample_size = xs.size();
  r.log_survival_rmse = log_survival_rmse(xs, [&](double t) { return std::exp(-r.rate * t); });
  return r;
}

FitReport fit_mittag_leffler(std::span<const double> xs) {
  require_samples(xs);
  // log T has mean ln(gamma) - euler_gamma and variance (pi^2/6)(2/beta^2 - 1)
  double mu = 0.0;
  for (double x : xs) mu += std::log(x);
  mu /= static_cast<double>(xs.size());
  double s2 = 0.0;
  for (double x : xs) s2 += (std::log(x) - mu) * (std::log(x) - mu);
  s2 /= static_cast<double>(xs.size() - 1);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  FitReport r;
  r.model = FitModel::mittag_leffler;
  r.beta = std::min(1.0, std::sqrt(2.0 / (1.0 + 6.0 * s2 / pi2)));
  r.gamma = std::exp(mu + std::numbers::egamma);
  r.sample_size = xs.size();
  r.log_survival_rmse =
      log_survival_rmse(xs, [&](double t) { return mittag_leffler_survival(r.beta, r.gamma, t); });
  return r;
}

double mittag_leffler_survival(double beta, double gamma, double t) {
  if (t <= 0.0) return 1.0;
  const double z = std::pow(t / gamma, beta);
  if (beta == 1.0) return std::exp(-z);
  try {
    return mittag_leffler(beta, 1.0, -z);
  } catch (const SeriesError&) {
    // leading asymptotic term
    return std::pow(z, -1.0) * reciprocal_gamma(1.0 - beta);
  }
}

std::vector<TickRecord> read_ticks_csv(std::istream& is) {
  std::vector<TickRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_allowed = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("tick csv line " + std::to_string(line_no) + ": expected timestamp,price");
    const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    double ts = 0.0, price = 0.0;
    try {
      ts = std::stod(a);
      price = std::stod(b);
    } catch (const std::exception&) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw std::invalid_argument("tick csv line " + std::to_string(line_no) + ": not numeric");
    }
    header_allowed = false;
    out.push_back({ts, price});
  }
  return out;
}

void write_ticks_csv(std::ostream& os, std::span<const TickRecord> ticks) {
  os << "timestamp,price\n";
  for (const auto& t : ticks) os << format_number(t.timestamp) << ',' << format_number(t.price) << '\n';
}

SyntheticStream synthetic_ticks(const SamplePath& path, double first_price, double tick_size,
                                double noise_per_event, RngStream& rng) {
  if (!(tick_size > 0.0)) throw std::invalid_argument("tick_size must be positive");
  if (!(noise_per_event >= 0.0)) throw std::invalid_argument("noise_per_event must be nonnegative");
  SyntheticStream out;
  const double seed_bid = first_price - tick_size;
  out.ticks.push_back({0.0, first_price});
  long state = 0;
  double prev_t = 0.0;
  auto add_noise = [&](double from, double to) {
    const long count = noise_per_event > 0.0 ? sample_poisson(noise_per_event, rng) : 0;
    std::vector<double> times;
    for (long i = 0; i < count; ++i) times.push_back(rng.uniform(from, to));
    std::sort(times.begin(), times.end());
    const double bid = seed_bid + static_cast<double>(state) * tick_size;
    for (double t : times)
      if (t > from && t < to) out.ticks.push_back({t, bid + tick_size * rng.uniform(0.05, 0.95)});
  };
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    const double t = path.times[i];
    add_noise(prev_t, t);
    const long next = path.states[i];
    const double new_bid = seed_bid + static_cast<double>(next) * tick_size;
    if (next > state) {
      out.ticks.push_back({t, new_bid + tick_size});
      ++out.planted_up;
    } else {
      out.ticks.push_back({t, new_bid});
      ++out.planted_down;
    }
    state = next;
    prev_t = t;
  }
  add_noise(prev_t, path.t_end);
  return out;
}

nlohmann::json to_json(const FitReport& r) {
  nlohmann::json params;
  if (r.model == FitModel::exponential)
    params = {{"rate", r.rate}};
  else
    params = {{"beta", r.beta}, {"gamma", r.gamma}};
  nlohmann::json out{{"model", std::string(to_string(r.model))},
                     {"params", params},
                     {"sample_size", r.sample_size}};
  out["log_survival_rmse"] =
      std::isfinite(r.log_survival_rmse) ? nlohmann::json(r.log_survival_rmse) : nlohmann::json(nullptr);
  return out;
}

}  // namespace skellam
