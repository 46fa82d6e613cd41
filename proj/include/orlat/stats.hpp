#pragma once

#include <cstdint>
#include <utility>

namespace orlat {

/// Two-sided standard normal quantile z with P(|Z| <= z) = confidence.
double normal_two_sided_z(double confidence);

/// Wilson score interval for `successes` out of `trials`.
/// Throws BadArguments unless 0 <= successes <= trials, trials >= 1 and
/// 0 < confidence < 1.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence);

/// Replica tally for a survival experiment. Survival counts both
/// population-cap outcomes (`survived`) and runs still alive at the horizon
/// (`censored`); the two are kept apart so truncation bias stays visible.
struct SurvivalEstimate {
  std::uint64_t survived = 0;
  std::uint64_t died = 0;
  std::uint64_t censored = 0;
  double point = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double confidence = 0.99;

  [[nodiscard]] std::uint64_t n_runs() const noexcept { return survived + died + censored; }
  [[nodiscard]] double half_width() const noexcept { return 0.5 * (ci_hi - ci_lo); }
};

SurvivalEstimate make_estimate(std::uint64_t survived, std::uint64_t died, std::uint64_t censored,
                               double confidence);

}  // namespace orlat
