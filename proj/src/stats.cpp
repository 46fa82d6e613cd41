#include "orlat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "orlat/error.hpp"

namespace orlat {

double normal_two_sided_z(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::BadArguments, "confidence must lie in (0, 1)");
  }
  // Newton on erf(z / sqrt 2) = confidence.
  double z = 2.0;
  for (int it = 0; it < 100; ++it) {
    const double f = std::erf(z / std::sqrt(2.0)) - confidence;
    const double df = std::sqrt(2.0 / M_PI) * std::exp(-0.5 * z * z);
    const double step = f / df;
    z -= step;
    if (z < 0.0) z = 1e-8;
    if (std::abs(step) < 1e-15) break;
  }
  return z;
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials < 1 || successes > trials) {
    throw Error(ErrorCode::BadArguments, "need 0 <= successes <= trials and trials >= 1");
  }
  const double z = normal_two_sided_z(confidence);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  double lo = center - half;
  double hi = center + half;
  if (successes == 0) lo = 0.0;
  if (successes == trials) hi = 1.0;
  return {std::max(0.0, lo), std::min(1.0, hi)};
}

SurvivalEstimate make_estimate(std::uint64_t survived, std::uint64_t died, std::uint64_t censored,
                               double confidence) {
  SurvivalEstimate est;
  est.survived = survived;
  est.died = died;
  est.censored = censored;
  est.confidence = confidence;
  const std::uint64_t n = est.n_runs();
  if (n == 0) throw Error(ErrorCode::BadArguments, "no replicas");
  est.point = static_cast<double>(survived + censored) / static_cast<double>(n);
  std::tie(est.ci_lo, est.ci_hi) = wilson_interval(survived + censored, n, confidence);
  est.ci_lo = std::min(est.ci_lo, est.point);
  est.ci_hi = std::max(est.ci_hi, est.point);
  return est;
}

}  // namespace orlat
