#include "orlat/rng.hpp"

#include <random>

namespace orlat {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kPhiloxW = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::array<std::uint64_t, 2> philox2x64(std::array<std::uint64_t, 2> counter,
                                        std::uint64_t key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) key += kPhiloxW;
    const u128 product = static_cast<u128>(kPhiloxM) * counter[0];
    const auto hi = static_cast<std::uint64_t>(product >> 64U);
    const auto lo = static_cast<std::uint64_t>(product);
    counter = {hi ^ key ^ counter[1], lo};
  }
  return counter;
}

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  u128 m = static_cast<u128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64U);
}

std::uint64_t Rng::geometric(double p) noexcept {
  if (p >= 1.0) return 0;
  if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  const double g = std::floor(std::log(uniform_pos()) / std::log1p(-p));
  if (g >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(g);
}

std::uint64_t Rng::binomial(std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const double mean = static_cast<double>(n) * p;
  if (mean < 20.0) {
    // Sequential inversion; cost O(mean).
    const double q = 1.0 - p;
    const double ratio = p / q;
    double pk = std::exp(static_cast<double>(n) * std::log1p(-p));
    double cdf = pk;
    const double u = uniform();
    std::uint64_t k = 0;
    while (u >= cdf && k < n) {
      pk *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
      ++k;
      cdf += pk;
      if (pk < 1e-300) break;  // cdf stalled below u by rounding
    }
    return k;
  }
  std::binomial_distribution<std::uint64_t> dist(n, p);
  return dist(*this);
}

}  // namespace orlat
