#pragma once

#include <functional>
#include <vector>

namespace orlat::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [-1, 1].
const Rule& gauss_legendre(int n);

/// n-point Gauss–Laguerre rule for the weight e^{-y} on [0, inf), computed by
/// Golub–Welsch. Cached per n.
const Rule& gauss_laguerre(int n);

/// Adaptive Gauss–Legendre on [a, b]: a panel is accepted when the 15-point
/// estimate and the sum of the two 15-point half-panel estimates agree to
/// within the panel's share of `abs_tol`. Throws QuadratureNonConvergence
/// when more than `max_panels` panels are needed.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, int max_panels = 1 << 16);

/// E[f(Y)] for Y ~ Exp(1). The node count starts at 16 and doubles until two
/// consecutive estimates differ by less than `abs_tol`.
double expect_exp1(const std::function<double(double)>& f, double abs_tol = 1e-12,
                   int max_nodes = 1024);

}  // namespace orlat::quad
