#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skellam/rng.hpp"
#include "skellam/samplers.hpp"

namespace skellam {

struct TickRecord {
  double timestamp = 0.0;  // seconds
  double price = 0.0;
};

// A record kept by the bid filter, with the bid it set.
struct BidRecord {
  double timestamp = 0.0;
  double price = 0.0;
  double bid = 0.0;
  int direction = 0;  // +1 bid rose, -1 bid fell
};

enum class JumpDirection { up, down };

struct JumpSeries {
  JumpDirection direction = JumpDirection::up;
  std::vector<double> event_times;
  std::vector<double> interarrivals;
};

enum class FitModel { exponential, mittag_leffler };
std::string_view to_string(FitModel m);

struct FitReport {
  FitModel model = FitModel::exponential;
  double rate = 0.0;   // exponential
  double beta = 1.0;   // Mittag-Leffler index
  double gamma = 0.0;  // Mittag-Leffler scale
  double log_survival_rmse = 0.0;
  std::size_t sample_size = 0;
};

// Bid starts one tick under the first price; the ask is always bid + tick_size.
std::vector<BidRecord> bid_filter(std::span<const TickRecord> ticks, double tick_size);

// Up and down jump times, keeping the first of any repeated timestamp.
std::pair<JumpSeries, JumpSeries> extract_jumps(std::span<const BidRecord> filtered);

inline constexpr std::size_t kMinFitSamples = 100;

FitReport fit_exponential(std::span<const double> interarrivals);
// Log-moment estimator: beta from the variance of log waits, gamma from their mean.
FitReport fit_mittag_leffler(std::span<const double> interarrivals);

// Survival E_beta(-(t/gamma)^beta).
double mittag_leffler_survival(double beta, double gamma, double t);

std::vector<TickRecord> read_ticks_csv(std::istream& is);
void write_ticks_csv(std::ostream& os, std::span<const TickRecord> ticks);

struct SyntheticStream {
  std::vector<TickRecord> ticks;
  long planted_up = 0;
  long planted_down = 0;
};

// Prices whose bid reproduces the path: state s puts the bid s ticks above its seed.
// Between events, noise_per_event trades (on average) land inside the current spread.
SyntheticStream synthetic_ticks(const SamplePath& path, double first_price, double tick_size,
                                double noise_per_event, RngStream& rng);

nlohmann::json to_json(const FitReport& report);

}  // namespace skellam
