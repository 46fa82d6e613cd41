#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace orlat {

/// Philox2x64-10 block function (Salmon et al. counter-based generator).
/// Maps a 128-bit counter to 128 pseudo-random bits under a 64-bit key; a
/// bijection of the counter for every fixed key.
[[nodiscard]] std::array<std::uint64_t, 2> philox2x64(std::array<std::uint64_t, 2> counter,
                                                      std::uint64_t key) noexcept;

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for a labelled child of (master, index); used for per-replica
/// environment seeds.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                                  std::uint64_t tag) noexcept {
  return mix64(mix64(master ^ mix64(tag + 0x632BE59BD9B4E019ULL)) + mix64(index));
}

/// Stream tags. Each replica owns one stream per purpose.
enum class StreamTag : std::uint64_t {
  Dynamics = 1,
  Environment = 2,
  Walks = 3,
  Coupling = 4,
  Gap = 5,
};

/// Counter-based random stream. Stream (key, stream_id) visits counters
/// (stream_id, 0), (stream_id, 1), ...; distinct stream ids therefore occupy
/// disjoint counter ranges and never produce a shared block.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t key, std::uint64_t stream_id) noexcept : key_(key), stream_(stream_id) {}

  /// Stream for replica `index` of an experiment seeded with `master`.
  static Rng for_replica(std::uint64_t master, std::uint64_t index, StreamTag tag) noexcept {
    return {master, (index << 8U) | static_cast<std::uint64_t>(tag)};
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (have_ == 0) {
      block_ = philox2x64({counter_++, stream_}, key_);
      have_ = 2;
    }
    return block_[--have_];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11U) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() noexcept { return 1.0 - uniform(); }

  double exponential(double rate = 1.0) noexcept { return -std::log(uniform_pos()) / rate; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, n), Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Number of failures before the first success of Bernoulli(p) trials.
  std::uint64_t geometric(double p) noexcept;

  std::uint64_t binomial(std::uint64_t n, double p);

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_; }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> block_{};
  int have_ = 0;
};

}  // namespace orlat
