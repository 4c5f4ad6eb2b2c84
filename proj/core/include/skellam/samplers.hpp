#pragma once

#include <span>
#include <vector>

#include "skellam/rates.hpp"
#include "skellam/rng.hpp"

namespace skellam {

// Piecewise-constant integer trajectory starting from state 0 at time 0.
struct SamplePath {
  std::vector<double> times;  // strictly increasing event times
  std::vector<long> states;   // state right after each event
  double t_end = 0.0;

  long state_at(double t) const;
  std::size_t jump_count() const noexcept { return times.size(); }
};

// Y_alpha on the grid 0, h, 2h, ...
struct SubordinatorPath {
  double h = 0.0;
  std::vector<double> values;

  double time(std::size_t i) const noexcept { return static_cast<double>(i) * h; }
  double value_at(double t) const;
};

enum class NgspMethod { paper, thinning };

struct SamplerOptions {
  bool paper_exact = false;
  NgspMethod ngsp_method = NgspMethod::thinning;
  double h = 0.0;  // subordinator grid step; 0 picks t_end / 2^14
};

// Table start time used by the paper-exact non-homogeneous samplers.
inline constexpr double kTableStartTime = 1e-4;

double sample_stable_increment(double alpha, double h, RngStream& rng);
// Exact draw of Y_alpha(t) = (t / D_alpha(1))^alpha.
double sample_inverse_subordinator_marginal(double alpha, double t, RngStream& rng);
// Waiting time with survival E_alpha(-rate t^alpha); exponential when alpha = 1.
double sample_mittag_leffler_wait(double alpha, double rate, RngStream& rng);
long sample_poisson(double mean, RngStream& rng);
// Index j in [0, weights.size()) drawn with probability weights[j] / total.
int sample_index(std::span<const double> weights, double total, RngStream& rng);

SubordinatorPath sample_inverse_subordinator(double alpha, double t_end, double h, RngStream& rng);

SamplePath sample_gfsp(const ProcessSpec& spec, double t_end, RngStream& rng,
                       bool paper_exact = false);
SamplePath sample_ngsp(const ProcessSpec& spec, double t_end, RngStream& rng,
                       NgspMethod method = NgspMethod::thinning);
SamplePath sample_ngfsp(const ProcessSpec& spec, double t_end, double h, RngStream& rng,
                        bool paper_exact = false);
SamplePath sample_nhgfsp(const ProcessSpec& spec, double t_end, RngStream& rng,
                         bool paper_exact = false);
double sample_running_avg(const ProcessSpec& spec, double t_end, RngStream& rng);

// Dispatches on spec.variant (running-average variants are not paths).
SamplePath sample_path(const ProcessSpec& spec, double t_end, RngStream& rng,
                       const SamplerOptions& options = {});

// (1/t) * integral of the path over [0, t].
double running_average(const SamplePath& path, double t);

}  // namespace skellam
