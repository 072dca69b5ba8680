#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace adapt {

/// Counter-based 64-bit generator (SplitMix64). The state is a plain counter
/// advanced by a fixed odd increment; each output is a bijective mix of the
/// counter, so a stream is fully determined by its key. Streams for parallel
/// or per-component use are derived with split(), which hashes (key, id) into
/// a fresh key. Identical seeds give identical sequences on every platform;
/// no std::random distributions are used anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

  /// Derive an independent stream for the given id.
  Rng split(std::uint64_t stream_id) const {
    Rng child(0);
    child.state_ = mix(state_ ^ mix(stream_id + kGolden));
    return child;
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Lemire's multiply-shift; n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    const auto x = next_u64();
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(x) * static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Standard normal via Box-Muller (cosine branch only, deterministic).
  double normal() {
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Fisher-Yates shuffle of index vector [0, n).
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(idx[i - 1], idx[j]);
    }
    return idx;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace adapt
