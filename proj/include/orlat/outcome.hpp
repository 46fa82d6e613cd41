#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "orlat/stats.hpp"

namespace orlat {

enum class OutcomeKind {
  Died,             // first empty generation / infected set emptied
  SurvivedCap,      // population or ever-infected count reached the cap
  SurvivedHorizon,  // still alive when the horizon was reached (censored)
};

std::string_view to_string(OutcomeKind kind) noexcept;

struct Outcome {
  OutcomeKind kind = OutcomeKind::Died;
  /// Died: index of the first empty generation. Otherwise: generations simulated.
  std::uint64_t generation = 0;
  std::uint64_t peak_population = 0;
  /// Continuous-time runs: time of extinction or of the stopping event.
  double time = 0.0;
  /// Total number of distinct individuals/vertices ever alive (incl. initial).
  std::uint64_t ever_infected = 0;

  bool operator==(const Outcome&) const = default;
};

SurvivalEstimate tally(const std::vector<Outcome>& outcomes, double confidence);

}  // namespace orlat
