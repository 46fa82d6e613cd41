#include "orlat/meanfield.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "orlat/error.hpp"

namespace orlat {

namespace {

double fixed_point_map(const WeightSpec& spec, double lambda, double theta) {
  return expect(spec, [&](double r) { return lambda * r * r / (1.0 + lambda * r * theta); });
}

}  // namespace

double critical_rate(const WeightSpec& spec) { return 1.0 / spec.second_moment(); }

MeanFieldSolution solve_theta(const WeightSpec& spec, double lambda) {
  const double lambda_c = critical_rate(spec);
  if (!(lambda > lambda_c)) {
    throw Error(ErrorCode::SubcriticalRate,
                "lambda = " + std::to_string(lambda) + " <= 1/E(rho^2) = " + std::to_string(lambda_c));
  }

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (fixed_point_map(spec, lambda, hi) >= 1.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 64) throw Error(ErrorCode::NoConvergence, "could not bracket theta");
  }
  // Bisect to machine resolution; the residual is reported, not used to stop.
  for (int it = 0; it < 400 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fixed_point_map(spec, lambda, mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double g_lo = fixed_point_map(spec, lambda, lo);
  const double g_hi = fixed_point_map(spec, lambda, hi);
  const double theta = std::abs(g_lo - 1.0) <= std::abs(g_hi - 1.0) ? lo : hi;

  MeanFieldSolution out{};
  out.lambda = lambda;
  out.theta = theta;
  out.residual = std::abs(fixed_point_map(spec, lambda, theta) - 1.0);
  out.limit_survival = expect(spec, [&](double r) {
    const double x = lambda * r * theta;
    return x / (1.0 + x);
  });
  return out;
}

double survival_limit(const WeightSpec& spec, double lambda) {
  return solve_theta(spec, lambda).limit_survival;
}

}  // namespace orlat
