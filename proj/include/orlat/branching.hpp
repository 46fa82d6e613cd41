#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "orlat/outcome.hpp"
#include "orlat/rng.hpp"
#include "orlat/weights.hpp"

namespace orlat {

/// A tree vertex alive in some generation: its weight and its depth.
struct Individual {
  double weight;
  std::uint64_t depth;
};

struct BranchingParams {
  double lambda = 2.0;
  std::uint32_t d = 5;
  /// Fixed root weight; drawn from the law when empty.
  std::optional<double> root_weight;
  std::uint64_t horizon = 200;
  std::uint64_t pop_cap = 100'000;
};

/// Called with every completed generation (including W_0).
using GenerationObserver = std::function<void(std::uint64_t, std::span<const Individual>)>;

/// Offspring law of one parent under the annealed measure. Given the parent
/// weight and its recovery clock Y, each of the d children independently
/// carries a fresh weight ρ and is born with probability 1 - e^{-λρ_xρY/d};
/// equivalently, the number born is Binomial(d, E_ρ[1 - e^{-cρ}]) with
/// c = λρ_xY/d, and each born child's weight follows the tilted law
/// P(dρ)(1 - e^{-cρ}) / E_ρ[1 - e^{-cρ}].
class BirthKernel {
 public:
  explicit BirthKernel(const WeightSpec& spec);

  /// E_ρ[1 - e^{-cρ}].
  [[nodiscard]] double birth_probability(double c) const;
  /// A child weight from the tilted law; requires birth_probability(c) > 0.
  double sample_born_weight(double c, Rng& rng) const;

 private:
  const WeightSpec* spec_;
  bool constant_;
  mutable std::vector<double> component_mass_;
};

/// One replica of the generation process W_n on the d-ary tree. Without an
/// observer and with a one-atom law, individuals are exchangeable and the
/// replica is drawn exactly from generation sizes alone (multinomial split
/// over offspring counts); otherwise each individual is simulated.
Outcome run_branching(const WeightSpec& spec, const BranchingParams& params, Rng& rng,
                      const GenerationObserver& observer = {});

/// Replica i uses Rng::for_replica(master_seed, i, Dynamics).
std::vector<Outcome> simulate_branching(const WeightSpec& spec, const BranchingParams& params,
                                        std::uint64_t n_runs, std::uint64_t master_seed, unsigned jobs = 1);

SurvivalEstimate estimate_branching_survival(const WeightSpec& spec, const BranchingParams& params,
                                             std::uint64_t n_runs, double confidence,
                                             std::uint64_t master_seed, unsigned jobs = 1);

}  // namespace orlat
