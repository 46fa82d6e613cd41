#include "orlat/fgrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orlat/error.hpp"
#include "orlat/meanfield.hpp"
#include "orlat/quadrature.hpp"

namespace orlat {

namespace {

/// Discretized law of ρ: atoms exactly, segments by 8-point Gauss–Legendre on
/// each grid cell they overlap (F is linear on a cell, so the only
/// approximation is in the smooth exponential factor).
struct RhoNodes {
  std::vector<double> value;
  std::vector<double> weight;
  std::vector<std::size_t> cell;  // F(ρ) = (1-frac) F[cell] + frac F[cell+1]
  std::vector<double> frac;
};

RhoNodes discretize(const WeightSpec& spec, double spacing, std::size_t n_nodes) {
  RhoNodes out;
  auto push = [&](double r, double w) {
    const double pos = std::clamp(r / spacing, 0.0, static_cast<double>(n_nodes - 1));
    const auto cell = std::min(static_cast<std::size_t>(std::floor(pos)), n_nodes - 2);
    out.value.push_back(r);
    out.weight.push_back(w);
    out.cell.push_back(cell);
    out.frac.push_back(pos - static_cast<double>(cell));
  };
  for (const auto& a : spec.atoms()) push(a.value, a.probability);
  const quad::Rule& rule = quad::gauss_legendre(8);
  for (const auto& s : spec.segments()) {
    const double density = s.probability / (s.hi - s.lo);
    const auto first = static_cast<std::size_t>(std::floor(s.lo / spacing));
    for (std::size_t c = first; c + 1 < n_nodes; ++c) {
      const double a = std::max(s.lo, static_cast<double>(c) * spacing);
      const double b = (c + 2 == n_nodes) ? s.hi : std::min(s.hi, static_cast<double>(c + 1) * spacing);
      if (a >= s.hi) break;
      if (b <= a) continue;
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (a + b);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        push(mid + half * rule.nodes[i], density * half * rule.weights[i]);
      }
    }
  }
  return out;
}

class ExtinctionMap {
 public:
  ExtinctionMap(const WeightSpec& spec, double lambda, std::uint32_t d, double spacing, std::size_t n_nodes)
      : lambda_(lambda), d_(d), spacing_(spacing), n_(n_nodes), rho_(discretize(spec, spacing, n_nodes)) {}

  void set_laguerre(int k) {
    const quad::Rule& rule = quad::gauss_laguerre(k);
    t_weight_ = rule.weights;
    const std::size_t J = rho_.value.size();
    base_.assign(rule.nodes.size() * J, 0.0);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      for (std::size_t j = 0; j < J; ++j) {
        base_[q * J + j] = std::exp(-spacing_ * lambda_ * rule.nodes[q] * rho_.value[j] / d_);
      }
    }
  }

  void apply(const std::vector<double>& f, std::vector<double>& out) {
    const std::size_t J = rho_.value.size();
    coef_.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
      const double fr = (1.0 - rho_.frac[j]) * f[rho_.cell[j]] + rho_.frac[j] * f[rho_.cell[j] + 1];
      coef_[j] = rho_.weight[j] * (1.0 - fr);
    }
    out.assign(n_, 0.0);
    power_.resize(J);
    for (std::size_t q = 0; q < t_weight_.size(); ++q) {
      const double* base = &base_[q * J];
      std::fill(power_.begin(), power_.end(), 1.0);
      for (std::size_t i = 0; i < n_; ++i) {
        // x = E[(1-F(ρ))(1 - e^{-λ s_i ρ t_q / d})]; H = 1 - x.
        double x = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
          x += coef_[j] * (1.0 - power_[j]);
          power_[j] *= base[j];
        }
        out[i] += t_weight_[q] * std::exp(static_cast<double>(d_) * std::log1p(-std::min(x, 1.0)));
      }
    }
    out[0] = 1.0;
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  }

 private:
  double lambda_;
  std::uint32_t d_;
  double spacing_;
  std::size_t n_;
  RhoNodes rho_;
  std::vector<double> t_weight_;
  std::vector<double> base_;
  std::vector<double> coef_;
  std::vector<double> power_;
};

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

FGrid solve_fgrid(const WeightSpec& spec, double lambda, std::uint32_t d, const FGridOptions& options) {
  if (d < 1) throw Error(ErrorCode::BadGrid, "d must be >= 1");
  if (options.grid_points < 33) throw Error(ErrorCode::BadGrid, "grid_points must be >= 33");
  if (!(options.tol >= 1e-12)) throw Error(ErrorCode::BadGrid, "tol must be >= 1e-12");
  if (!(lambda > 0.0)) throw Error(ErrorCode::BadArguments, "lambda must be positive");

  FGrid grid;
  grid.d = d;
  grid.lambda = lambda;
  grid.bound = spec.bound();
  const auto n = static_cast<std::size_t>(options.grid_points);
  grid.spacing = grid.bound / static_cast<double>(n - 1);
  grid.s_nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) grid.s_nodes[i] = grid.spacing * static_cast<double>(i);
  grid.s_nodes.back() = grid.bound;

  ExtinctionMap map(spec, lambda, d, grid.spacing, n);
  std::vector<double> current;
  std::vector<double> next;
  std::vector<double> refined;
  for (int nodes = 32; nodes <= options.max_laguerre_nodes; nodes *= 2) {
    map.set_laguerre(nodes);
    current.assign(n, 0.0);
    grid.monotone_iterates = true;
    bool converged = false;
    std::uint64_t it = 0;
    double change = 1.0;
    while (it < options.max_iterations) {
      map.apply(current, next);
      ++it;
      for (std::size_t i = 0; i < n; ++i) {
        if (next[i] < current[i] - 1e-14) grid.monotone_iterates = false;
      }
      change = sup_diff(next, current);
      current.swap(next);
      if (change <= options.tol) {
        converged = true;
        break;
      }
    }
    grid.iterations += it;
    if (!converged) {
      throw Error(ErrorCode::NoConvergence,
                  "fixed-point iteration did not reach tol within " + std::to_string(options.max_iterations) +
                      " iterations");
    }
    grid.sup_residual = change;
    grid.laguerre_nodes = nodes;
    grid.values = current;

    map.apply(current, next);
    map.set_laguerre(nodes * 2);
    map.apply(current, refined);
    if (sup_diff(next, refined) < options.tol / 10.0) return grid;
  }
  throw Error(ErrorCode::NoConvergence, "Gauss-Laguerre node count exceeded its budget");
}

std::vector<double> apply_extinction_map(const WeightSpec& spec, const FGrid& grid, int laguerre_nodes) {
  ExtinctionMap map(spec, grid.lambda, grid.d, grid.spacing, grid.values.size());
  map.set_laguerre(laguerre_nodes);
  std::vector<double> out;
  map.apply(grid.values, out);
  return out;
}

double eval_f(const FGrid& grid, double s) {
  if (s < 0.0 || s > grid.bound) {
    throw Error(ErrorCode::OutOfSupport, "s = " + std::to_string(s) + " outside [0, " + std::to_string(grid.bound) + "]");
  }
  const std::size_t n = grid.values.size();
  const double pos = s / grid.spacing;
  auto cell = static_cast<std::size_t>(std::floor(pos));
  if (cell >= n - 1) return grid.values.back();
  const double frac = pos - static_cast<double>(cell);
  if (frac == 0.0) return grid.values[cell];
  return (1.0 - frac) * grid.values[cell] + frac * grid.values[cell + 1];
}

double branching_survival_d(const FGrid& grid, const WeightSpec& spec) {
  return 1.0 - expect(spec, [&](double s) { return eval_f(grid, std::min(s, grid.bound)); }, grid.s_nodes);
}

double max_adjacent_slope(const FGrid& grid) {
  double slope = 0.0;
  for (std::size_t i = 0; i + 1 < grid.values.size(); ++i) {
    slope = std::max(slope, (grid.values[i] - grid.values[i + 1]) / grid.spacing);
  }
  return slope;
}

LimitProfile limit_profile(const WeightSpec& spec, double lambda) {
  return {lambda, solve_theta(spec, lambda).theta};
}

double sup_gap_to_limit(const FGrid& grid, const LimitProfile& limit) {
  double gap = 0.0;
  for (std::size_t i = 0; i < grid.values.size(); ++i) gap = std::max(gap, std::abs(grid.values[i] - limit(grid.s_nodes[i])));
  return gap;
}

}  // namespace orlat
