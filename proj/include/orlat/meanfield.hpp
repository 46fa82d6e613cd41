#pragma once

#include "orlat/weights.hpp"

namespace orlat {

/// Root of E[λρ²/(1+λρθ)] = 1 and the limiting survival probability
/// E[λρθ/(1+λρθ)] it determines.
struct MeanFieldSolution {
  double lambda;
  double theta;
  double limit_survival;
  double residual;  // |E[λρ²/(1+λρθ)] - 1| at the returned θ
};

/// 1 / E(ρ²): the large-d critical infection rate.
double critical_rate(const WeightSpec& spec);

/// Bisection on the strictly decreasing g(θ) = E[λρ²/(1+λρθ)]. The upper
/// bracket doubles from θ = 1 (at most 64 times) until g < 1.
/// Throws SubcriticalRate when λ ≤ 1/E(ρ²).
MeanFieldSolution solve_theta(const WeightSpec& spec, double lambda);

double survival_limit(const WeightSpec& spec, double lambda);

}  // namespace orlat
