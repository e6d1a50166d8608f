#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace specsense {

/// Purposes that get their own independent random substream. Adding a draw
/// to one purpose never shifts the sequence seen by another.
enum class Stream : std::uint64_t {
  placement = 1,
  incumbents = 2,
  shadowing = 3,
  fading = 4,
  cost_noise = 5,
  restarts = 6,
  calibration = 7,
  singleband_pick = 8,
  devices = 9,
  reference_links = 10,
};

/// SplitMix64 finalizer; used to derive substream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seeded generator with platform-independent variate transforms.
///
/// std::*_distribution outputs are implementation-defined, so uniform,
/// normal and exponential variates are derived here directly from the
/// 64-bit engine output. This keeps result files byte-identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Independent stream for (master seed, purpose, index...).
  static Rng substream(std::uint64_t master, Stream purpose, std::uint64_t a = 0,
                       std::uint64_t b = 0);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t index(std::uint64_t n);

  /// Standard normal (Box-Muller, one variate per call).
  double normal();

  /// Unit-mean exponential.
  double exponential();

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace specsense
