#pragma once

#include <cstdint>
#include <vector>

#include "orlat/weights.hpp"

namespace orlat {

/// Extinction profile F_d(s) of the weighted branching process on the
/// d-ary tree, given root weight s, tabulated on a uniform grid over [0, M].
struct FGrid {
  std::uint32_t d = 0;
  double lambda = 0.0;
  double bound = 0.0;  // M
  double spacing = 0.0;
  std::vector<double> s_nodes;
  std::vector<double> values;
  std::uint64_t iterations = 0;
  double sup_residual = 0.0;
  int laguerre_nodes = 0;
  /// Every iterate was pointwise >= its predecessor (up to 1e-14).
  bool monotone_iterates = true;
};

struct FGridOptions {
  int grid_points = 129;
  double tol = 1e-10;
  std::uint64_t max_iterations = 1'000'000;
  int max_laguerre_nodes = 1024;
};

/// Iterates F -> Φ(F), Φ(F)(s) = E_Y[(1 - E_ρ[(1-F(ρ))(1-e^{-λsρY/d})])^d]
/// with Y ~ Exp(1), from F ≡ 0 until the sup-norm change is <= tol. The limit
/// is the minimal fixed point, i.e. the extinction probability profile.
/// The Laguerre node count is doubled (and the iteration restarted) until
/// doubling it moves Φ(F*) by less than tol/10.
FGrid solve_fgrid(const WeightSpec& spec, double lambda, std::uint32_t d, const FGridOptions& options = {});

/// One application of Φ to a tabulated profile, exposed for residual checks.
std::vector<double> apply_extinction_map(const WeightSpec& spec, const FGrid& grid, int laguerre_nodes);

/// Piecewise-linear interpolation; OutOfSupport outside [0, M].
double eval_f(const FGrid& grid, double s);

/// 1 - E F_d(ρ): survival probability of the branching process.
double branching_survival_d(const FGrid& grid, const WeightSpec& spec);

/// Largest (F(s_i) - F(s_{i+1})) / h over adjacent nodes.
double max_adjacent_slope(const FGrid& grid);

/// The d -> ∞ profile s -> 1/(1 + λsθ).
struct LimitProfile {
  double lambda;
  double theta;
  [[nodiscard]] double operator()(double s) const noexcept { return 1.0 / (1.0 + lambda * s * theta); }
};

/// Throws SubcriticalRate when λ ≤ 1/E(ρ²).
LimitProfile limit_profile(const WeightSpec& spec, double lambda);

/// sup over grid nodes of |F_d(s) - 1/(1+λsθ)|.
double sup_gap_to_limit(const FGrid& grid, const LimitProfile& limit);

}  // namespace orlat
