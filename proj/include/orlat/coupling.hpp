#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "orlat/lattice.hpp"
#include "orlat/rng.hpp"
#include "orlat/stats.hpp"
#include "orlat/vertex.hpp"
#include "orlat/weights.hpp"

namespace orlat {

enum class FailureCause { None, SharedTargetHit, ExtraTreeBirth };

std::string_view to_string(FailureCause cause) noexcept;

struct CoupledRun {
  /// Largest m such that the generation bijection V_m -> W_m is intact.
  std::uint64_t success_through = 0;
  std::uint64_t target_steps = 0;
  std::vector<std::uint64_t> lattice_sizes;
  std::vector<std::uint64_t> tree_sizes;
  FailureCause failure_cause = FailureCause::None;
  /// V died out (together with W) before the target step.
  bool extinct = false;

  [[nodiscard]] bool success() const noexcept { return success_through >= target_steps; }
};

/// σ = 1/(20 log(λM²)) when λM² > 1, else 1 (the window constraint is void).
double default_sigma(const WeightSpec& spec, double lambda);
bool sigma_window_degenerate(const WeightSpec& spec, double lambda);
/// ⌊σ log d⌋.
std::uint64_t target_steps(double sigma, std::uint32_t d);

/// For each x in a same-norm generation, the axes j such that x + e_j is
/// also an out-neighbour of another member (the shared-target set q(x)),
/// sorted and without repeats.
std::vector<std::vector<std::uint32_t>> shared_target_axes(std::span<const Vertex> generation);

/// Joint construction of the lattice generations and the tree generations
/// from O. Non-shared out-neighbours of x and the matching children of its
/// tree image use the same weight and clocks; the |q(x)| remaining tree
/// children get fresh weights and their own clocks. The bijection survives
/// a step when no x infects a shared target and no extra tree child is born.
/// The environment seed is the first draw of `rng`.
CoupledRun run_coupled(const WeightSpec& spec, double lambda, std::uint32_t d, double sigma, Rng& rng);

struct CouplingEstimate {
  std::uint32_t d = 0;
  double sigma = 0.0;
  std::uint64_t target_steps = 0;
  std::uint64_t successes = 0;
  std::uint64_t n_runs = 0;
  double p_success = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Indexed by FailureCause.
  std::array<std::uint64_t, 3> failure_histogram{};
};

CouplingEstimate estimate_coupling(const WeightSpec& spec, double lambda, std::uint32_t d, double sigma,
                                   std::uint64_t n_runs, double confidence, std::uint64_t master_seed,
                                   unsigned jobs = 1);

/// A binomial proportion with its Wilson interval.
struct Proportion {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  /// Trials that could not be decided within the time budget (counted as misses).
  std::uint64_t censored = 0;
  double point = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct GapEstimate {
  std::uint32_t d = 0;
  double sigma = 0.0;
  std::uint64_t layer = 0;
  /// P(V_layer = ∅) from the generation construction.
  Proportion v_empty;
  /// P(β_layer = ∅) from the contact process; `censored` counts runs whose
  /// layer was still undecided at t_max (treated as non-empty).
  Proportion beta_empty;
  /// P(V_layer = ∅) - P(β_layer = ∅).
  double gap = 0.0;
  /// Sum of the two Wilson half-widths.
  double ci_width = 0.0;
};

/// Independent replica sets for the two arms, each with fresh environments.
GapEstimate extinction_gap(const WeightSpec& spec, double lambda, std::uint32_t d, double sigma, std::uint64_t n_runs,
                           double confidence, std::uint64_t master_seed, double t_max = 300.0, unsigned jobs = 1);

}  // namespace orlat
