#include "skellam/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace skellam {

std::string_view to_string(PmfBackend b) {
  switch (b) {
    case PmfBackend::convolution: return "convolution";
    case PmfBackend::bessel: return "bessel";
    case PmfBackend::mittag_leffler: return "mittag_leffler";
    case PmfBackend::monte_carlo: return "monte_carlo";
    case PmfBackend::recurrence: return "recurrence";
    case PmfBackend::enumeration: return "enumeration";
  }
  return "convolution";
}

PmfBackend pmf_backend_from_string(std::string_view name) {
  for (PmfBackend b : {PmfBackend::convolution, PmfBackend::bessel, PmfBackend::mittag_leffler,
                       PmfBackend::monte_carlo, PmfBackend::recurrence, PmfBackend::enumeration})
    if (to_string(b) == name) return b;
  throw std::invalid_argument("unknown pmf backend: " + std::string(name));
}

double PmfTable::total() const noexcept {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

PmfTable point_mass_table(double t, long n_min, long n_max, PmfBackend backend) {
  if (n_min > n_max) throw std::invalid_argument("pmf support: n_min must not exceed n_max");
  PmfTable table;
  table.t = t;
  table.n_min = n_min;
  table.n_max = n_max;
  table.backend = backend;
  table.probs.assign(static_cast<std::size_t>(n_max - n_min + 1), 0.0);
  if (n_min <= 0 && 0 <= n_max)
    table.probs[static_cast<std::size_t>(-n_min)] = 1.0;
  else
    table.tail_bound = 1.0;
  return table;
}

double total_variation(const PmfTable& a, const PmfTable& b) {
  const long lo = std::min(a.n_min, b.n_min);
  const long hi = std::max(a.n_max, b.n_max);
  double s = 0.0;
  for (long n = lo; n <= hi; ++n) s += std::fabs(a.at(n) - b.at(n));
  return 0.5 * s;
}

PmfTable empirical_table(const std::vector<long>& samples, double t) {
  if (samples.empty()) throw std::invalid_argument("empirical_table: no samples");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  PmfTable table;
  table.t = t;
  table.n_min = *lo;
  table.n_max = *hi;
  table.backend = PmfBackend::monte_carlo;
  table.probs.assign(static_cast<std::size_t>(*hi - *lo + 1), 0.0);
  const double w = 1.0 / static_cast<double>(samples.size());
  for (long x : samples) table.probs[static_cast<std::size_t>(x - *lo)] += w;
  return table;
}

void write_csv(std::ostream& os, const PmfTable& table) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", table.t);
  os << "# t=" << buf << " backend=" << to_string(table.backend);
  std::snprintf(buf, sizeof buf, "%.17g", table.tail_bound);
  os << " tail_bound=" << buf;
  if (!table.note.empty()) os << " note=" << table.note;
  os << "\nn,p\n";
  for (long n = table.n_min; n <= table.n_max; ++n) {
    std::snprintf(buf, sizeof buf, "%.17g", table.at(n));
    os << n << ',' << buf << '\n';
  }
}

}  // namespace skellam
