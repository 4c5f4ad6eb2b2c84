#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "skellam/pmf.hpp"
#include "skellam/rates.hpp"

namespace skellam {

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> covariance;  // Cov(X(s), X(t)) when s was supplied
  double dispersion_index = 0.0;     // variance - mean
  // Monte Carlo standard errors; absent for closed forms
  std::optional<double> mean_se;
  std::optional<double> variance_se;
  std::optional<double> covariance_se;
};

enum class DependenceClass { LRD, SRD, neither };
std::string_view to_string(DependenceClass c);

// Corr(X(s), X(t)) ~ c_of_s * t^{-theta} as t grows.
struct DependenceReport {
  double theta = 0.0;
  DependenceClass dependence = DependenceClass::neither;
  double c_of_s = 0.0;
};

// Point value with a guaranteed enclosure from truncated tails.
struct ProbabilityBound {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct McControl {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  double h = 0.0;  // subordinator grid step for covariances; 0 picks max(s,t)/1024
};

inline constexpr double kDefaultTailTol = 1e-12;

// ---- generalized counting process -------------------------------------------------

// q(n) for n = 0..n_max from cumulative values Lambda_j, j = 1..k.
PmfTable ngcp_pmf_values(std::span<const double> cum, long n_max, double t = 0.0);
PmfTable ngcp_pmf(std::span<const RateFunction> up, double t, long n_max);
// Runs the recurrence until the upper tail falls below tail_tol.
PmfTable ngcp_pmf_auto(std::span<const double> cum, double t, double tail_tol = kDefaultTailTol);

// ---- NGSP ---------------------------------------------------------------------------

PmfTable ngsp_pmf_convolution(const ProcessSpec& spec, double t, long n_min, long n_max,
                              double tail_tol = kDefaultTailTol);
PmfTable ngsp_pmf_bessel(const ProcessSpec& spec, double t, long n_min, long n_max);
// Difference of two counting pmfs: p(n) = sum_m q1(m+n) q2(m).
PmfTable difference_pmf(const PmfTable& q1, const PmfTable& q2, long n_min, long n_max,
                        PmfBackend backend);

double ngsp_pgf(const ProcessSpec& spec, double u, double t);
double ngsp_mgf(const ProcessSpec& spec, double u, double t);
MomentSummary ngsp_moments(const ProcessSpec& spec, double t, std::optional<double> s = {});
double ngsp_covariance(const ProcessSpec& spec, double s, double t);
double factorial_moment(const ProcessSpec& spec, int r, double t);
DependenceReport classify_dependence_ngsp(const ProcessSpec& spec, double s);

// F_{tau_n}(t) = P(S(t) >= n) and P(T_n > t) = P(0 <= S(t) < n), from the chosen backend.
ProbabilityBound arrival_time_cdf(const ProcessSpec& spec, long n, double t,
                                  PmfBackend backend = PmfBackend::convolution);
ProbabilityBound first_passage_survival(const ProcessSpec& spec, long n, double t,
                                        PmfBackend backend = PmfBackend::convolution);

// Law of S(t + v) - S(v).
PmfTable increment_pmf(const ProcessSpec& spec, double t, double v, long n_min, long n_max,
                       PmfBackend backend = PmfBackend::convolution);

// ---- NGFSP --------------------------------------------------------------------------

// E[Y_alpha(t)], V[Y_alpha(t)] and Cov(Y_alpha(s), Y_alpha(t)).
double inverse_subordinator_mean(double alpha, double t);
double inverse_subordinator_variance(double alpha, double t);
double inverse_subordinator_covariance(double alpha, double s, double t);

MomentSummary ngfsp_moments(const ProcessSpec& spec, double t, std::optional<double> s = {},
                            const McControl& mc = {});

// ---- NTFPP / NHGFCP / NHGFSP ----------------------------------------------------------

PmfTable ntfpp_pmf(double cum_total, double alpha, long n_max);
double ntfpp_pgf(double cum_total, double alpha, double u);

// Marginal of the compound NTFPP with marks P(X = j) = cum[j-1] / sum(cum).
PmfTable nhgfcp_pmf_values(std::span<const double> cum, double alpha, long j_max, double t = 0.0);
PmfTable nhgfcp_pmf(std::span<const RateFunction> side, double alpha, double t, long j_max);
PmfTable nhgfcp_pmf_auto(std::span<const double> cum, double alpha, double t,
                         double tail_tol = 1e-10);

PmfTable nhgfsp_pmf(const ProcessSpec& spec, double t, long n_min, long n_max);
// The printed product form, with (e^{sj} - 1) in both factors.
double nhgfsp_mgf(const ProcessSpec& spec, double s, double t);
// The same product with (e^{-sj} - 1) in the down factor, i.e. the mgf of M1 - M2.
double nhgfsp_mgf_difference(const ProcessSpec& spec, double s, double t);
MomentSummary nhgfcp_moments(std::span<const double> cum, double alpha);
MomentSummary nhgfsp_moments(const ProcessSpec& spec, double t, std::optional<double> s = {});
DependenceReport classify_dependence_nhgfsp(const ProcessSpec& spec, double s);

struct WaitingTimeValue {
  double value = 0.0;
  bool clamped = false;  // raw formula left [0, 1]
};
WaitingTimeValue waiting_time_cdf(std::span<const RateFunction> side, double alpha, int j, double t);

// ---- running averages -----------------------------------------------------------------

std::complex<double> running_avg_cf(const ProcessSpec& spec, double u, double t);
MomentSummary running_avg_moments(const ProcessSpec& spec, double t, std::optional<double> s = {});
DependenceReport classify_dependence_runavg(const ProcessSpec& spec, double s);

// ---- dispatch ---------------------------------------------------------------------------

// The marginal pmf of any non-running-average variant from its natural backend.
PmfTable marginal_pmf(const ProcessSpec& spec, double t, long n_min, long n_max,
                      std::optional<PmfBackend> backend = {});
MomentSummary marginal_moments(const ProcessSpec& spec, double t, std::optional<double> s = {},
                               const McControl& mc = {});

// Cumulative values seen by the NHGFCP machinery for constant-rate fractional variants:
// Lambda_eff = (sum lambda)^{1/alpha} t split in proportion to lambda_j.
std::vector<double> fractional_effective_values(std::span<const RateFunction> side, double alpha,
                                                double t);

}  // namespace skellam
