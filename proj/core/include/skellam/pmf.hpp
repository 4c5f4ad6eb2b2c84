#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace skellam {

enum class PmfBackend { convolution, bessel, mittag_leffler, monte_carlo, recurrence, enumeration };

std::string_view to_string(PmfBackend b);
PmfBackend pmf_backend_from_string(std::string_view name);

// Distribution over the integers n_min..n_max at a fixed time.
struct PmfTable {
  double t = 0.0;
  long n_min = 0;
  long n_max = 0;
  std::vector<double> probs;
  double tail_bound = 0.0;  // upper bound on mass outside [n_min, n_max]
  PmfBackend backend = PmfBackend::convolution;
  std::string note;

  double at(long n) const noexcept {
    if (n < n_min || n > n_max) return 0.0;
    return probs[static_cast<std::size_t>(n - n_min)];
  }
  double total() const noexcept;
  std::size_t size() const noexcept { return probs.size(); }
};

PmfTable point_mass_table(double t, long n_min, long n_max, PmfBackend backend);

// Sum of |p - q| / 2 over the union of both supports.
double total_variation(const PmfTable& a, const PmfTable& b);

// Empirical table of integer samples.
PmfTable empirical_table(const std::vector<long>& samples, double t);

// CSV with a leading comment line carrying t, backend and tail bound.
void write_csv(std::ostream& os, const PmfTable& table);

}  // namespace skellam
