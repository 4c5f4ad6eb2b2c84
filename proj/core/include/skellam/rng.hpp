#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace skellam {

// Counter-based stream: output n is a pure function of (seed, stream_id, n).
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {
    key_ = mix(seed ^ mix(stream_id + 0x632be59bd9b4e019ULL));
    // odd increment with well-spread bits, as in SplittableRandom's mixGamma
    std::uint64_t g = mix(key_ + 0x9e3779b97f4a7c15ULL) | 1ULL;
    if (__builtin_popcountll(g ^ (g >> 1)) < 24) g ^= 0xaaaaaaaaaaaaaaaaULL;
    gamma_ = g;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix(key_ + counter_ * gamma_);
  }

  // Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double exponential() noexcept { return -std::log(uniform()); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_ = 0;
  std::uint64_t gamma_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace skellam
