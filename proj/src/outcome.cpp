#include "orlat/outcome.hpp"

namespace orlat {

std::string_view to_string(OutcomeKind kind) noexcept {
  switch (kind) {
    case OutcomeKind::Died: return "died";
    case OutcomeKind::SurvivedCap: return "survived_cap";
    case OutcomeKind::SurvivedHorizon: return "survived_horizon";
  }
  return "unknown";
}

SurvivalEstimate tally(const std::vector<Outcome>& outcomes, double confidence) {
  std::uint64_t survived = 0;
  std::uint64_t died = 0;
  std::uint64_t censored = 0;
  for (const auto& o : outcomes) {
    switch (o.kind) {
      case OutcomeKind::Died: ++died; break;
      case OutcomeKind::SurvivedCap: ++survived; break;
      case OutcomeKind::SurvivedHorizon: ++censored; break;
    }
  }
  return make_estimate(survived, died, censored, confidence);
}

}  // namespace orlat
