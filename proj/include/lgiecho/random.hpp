#pragma once

#include <cstdint>
#include <limits>

namespace lgiecho {

namespace detail {

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-addressed random stream.
///
/// Every stochastic component derives its generator from a (seed, stream)
/// pair, e.g. (run seed, block index) or (run seed, replicate index). Two
/// streams with different ids are statistically independent, and a stream's
/// output depends on nothing else, so work can be partitioned across threads
/// in any way without changing results.
///
/// Satisfies UniformRandomBitGenerator, so it can drive the <random>
/// distributions directly.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : state_(detail::splitmix_finalize(seed + 0x9E3779B97F4A7C15ULL) ^
               detail::splitmix_finalize(stream * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::splitmix_finalize(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_open_low() noexcept { return 1.0 - uniform(); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t state_;
};

/// Derives a child seed so nested components (e.g. the echo ensemble inside a
/// photon run) never share a stream with their parent.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return detail::splitmix_finalize(seed ^ detail::splitmix_finalize(tag + 0xA0761D6478BD642FULL));
}

}  // namespace lgiecho
