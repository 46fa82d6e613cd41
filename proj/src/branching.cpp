#include "orlat/branching.hpp"

#include <algorithm>
#include <cmath>

#include "orlat/error.hpp"
#include "orlat/replicas.hpp"

namespace orlat {

namespace {

// Mean of 1 - e^{-cρ} for ρ uniform on [lo, hi].
double segment_birth(double c, double lo, double hi) {
  const double width = hi - lo;
  const double cw = c * width;
  if (cw < 1e-300) return -std::expm1(-c * lo);
  return 1.0 - std::exp(-c * lo) * (-std::expm1(-cw)) / cw;
}

// Offspring-count pmf when every weight equals v: K | Y ~ Binomial(d, 1 - u)
// with u = e^{-cY} ~ Beta(a, 1), a = 1/c, so P(K = k) = a C(d,k) B(d-k+a, k+1).
std::vector<double> constant_offspring_pmf(double c, std::uint32_t d) {
  std::vector<double> pmf(d + 1, 0.0);
  if (c <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  const double a = 1.0 / c;
  const double n = static_cast<double>(d);
  for (std::uint32_t k = 0; k <= d; ++k) {
    const double kk = static_cast<double>(k);
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0);
    const double log_beta = std::lgamma(n - kk + a) + std::lgamma(kk + 1.0) - std::lgamma(n + a + 1.0);
    pmf[k] = a * std::exp(log_choose + log_beta);
  }
  return pmf;
}

// Number of children of `parents` i.i.d. parents: a multinomial split over
// the offspring counts, drawn as successive conditional binomials.
std::uint64_t aggregate_births(std::uint64_t parents, const std::vector<double>& pmf, Rng& rng) {
  std::uint64_t left = parents;
  std::uint64_t born = 0;
  double mass = 1.0;
  for (std::size_t k = 0; k + 1 < pmf.size() && left > 0; ++k) {
    const double p = mass > 0.0 ? std::min(1.0, pmf[k] / mass) : 1.0;
    const std::uint64_t n_k = rng.binomial(left, p);
    born += n_k * k;
    left -= n_k;
    mass -= pmf[k];
  }
  return born + left * (pmf.size() - 1);
}

// Every weight is the same constant v, so individuals are exchangeable and
// only generation sizes matter.
Outcome run_constant_branching(double root, double v, const BranchingParams& params, Rng& rng) {
  const double scale = params.lambda / static_cast<double>(params.d);
  const auto bulk = constant_offspring_pmf(scale * v * v, params.d);
  Outcome out;
  out.peak_population = 1;
  out.ever_infected = 1;
  if (params.pop_cap <= 1) {
    out.kind = OutcomeKind::SurvivedCap;
    return out;
  }
  std::uint64_t size = aggregate_births(1, constant_offspring_pmf(scale * root * v, params.d), rng);
  for (std::uint64_t gen = 0; gen < params.horizon; ++gen) {
    if (gen > 0) size = aggregate_births(size, bulk, rng);
    out.generation = gen + 1;
    out.ever_infected += size;
    out.peak_population = std::max(out.peak_population, size);
    if (size == 0) {
      out.kind = OutcomeKind::Died;
      return out;
    }
    if (size >= params.pop_cap) {
      out.kind = OutcomeKind::SurvivedCap;
      return out;
    }
  }
  out.kind = OutcomeKind::SurvivedHorizon;
  return out;
}

}  // namespace

BirthKernel::BirthKernel(const WeightSpec& spec)
    : spec_(&spec),
      constant_(spec.segments().empty() && spec.atoms().size() == 1),
      component_mass_(spec.atoms().size() + spec.segments().size()) {}

double BirthKernel::birth_probability(double c) const {
  if (c <= 0.0) return 0.0;
  double p = 0.0;
  for (const auto& a : spec_->atoms()) p += a.probability * -std::expm1(-c * a.value);
  for (const auto& s : spec_->segments()) p += s.probability * segment_birth(c, s.lo, s.hi);
  return p;
}

double BirthKernel::sample_born_weight(double c, Rng& rng) const {
  if (constant_) return spec_->atoms().front().value;
  const auto& atoms = spec_->atoms();
  const auto& segments = spec_->segments();
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    component_mass_[k] = atoms[k].probability * -std::expm1(-c * atoms[k].value);
    total += component_mass_[k];
  }
  for (std::size_t k = 0; k < segments.size(); ++k) {
    component_mass_[atoms.size() + k] = segments[k].probability * segment_birth(c, segments[k].lo, segments[k].hi);
    total += component_mass_[atoms.size() + k];
  }
  double u = rng.uniform() * total;
  std::size_t pick = component_mass_.size() - 1;
  for (std::size_t k = 0; k < component_mass_.size(); ++k) {
    if (u < component_mass_[k]) {
      pick = k;
      break;
    }
    u -= component_mass_[k];
  }
  if (pick < atoms.size()) return atoms[pick].value;
  const Segment& s = segments[pick - atoms.size()];
  // Rejection from the uniform envelope; acceptance (1-e^{-cρ})/(1-e^{-c·hi}).
  const double top = -std::expm1(-c * s.hi);
  for (;;) {
    const double r = s.lo + rng.uniform() * (s.hi - s.lo);
    if (rng.uniform() * top < -std::expm1(-c * r)) return r;
  }
}

Outcome run_branching(const WeightSpec& spec, const BranchingParams& params, Rng& rng,
                      const GenerationObserver& observer) {
  if (params.d < 1 || params.horizon < 1 || params.pop_cap < 1) {
    throw Error(ErrorCode::BadArguments, "branching needs d, horizon, pop_cap >= 1");
  }
  if (!observer && spec.segments().empty() && spec.atoms().size() == 1) {
    const double v = spec.atoms().front().value;
    return run_constant_branching(params.root_weight ? *params.root_weight : v, v, params, rng);
  }
  const BirthKernel kernel(spec);
  const double scale = params.lambda / static_cast<double>(params.d);

  std::vector<Individual> current{{params.root_weight ? *params.root_weight : sample(spec, rng), 0}};
  std::vector<Individual> next;
  Outcome out;
  out.peak_population = 1;
  out.ever_infected = 1;
  if (observer) observer(0, current);
  if (current.size() >= params.pop_cap) {
    out.kind = OutcomeKind::SurvivedCap;
    return out;
  }

  for (std::uint64_t gen = 0; gen < params.horizon; ++gen) {
    next.clear();
    const std::uint64_t depth = gen + 1;
    bool capped = false;
    for (const Individual& parent : current) {
      const double c = scale * parent.weight * rng.exponential();
      const double p = kernel.birth_probability(c);
      const std::uint64_t born = rng.binomial(params.d, p);
      for (std::uint64_t k = 0; k < born; ++k) next.push_back({kernel.sample_born_weight(c, rng), depth});
      if (next.size() >= params.pop_cap) {
        capped = true;
        break;
      }
    }
    out.generation = depth;
    out.ever_infected += next.size();
    out.peak_population = std::max<std::uint64_t>(out.peak_population, next.size());
    if (next.empty()) {
      out.kind = OutcomeKind::Died;
      if (observer) observer(depth, next);
      return out;
    }
    if (capped) {
      out.kind = OutcomeKind::SurvivedCap;
      return out;
    }
    if (observer) observer(depth, next);
    current.swap(next);
  }
  out.kind = OutcomeKind::SurvivedHorizon;
  return out;
}

std::vector<Outcome> simulate_branching(const WeightSpec& spec, const BranchingParams& params,
                                        std::uint64_t n_runs, std::uint64_t master_seed, unsigned jobs) {
  if (n_runs < 1) throw Error(ErrorCode::BadArguments, "n_runs must be >= 1");
  return run_replicas<Outcome>(n_runs, jobs, [&](std::uint64_t i) {
    Rng rng = Rng::for_replica(master_seed, i, StreamTag::Dynamics);
    return run_branching(spec, params, rng);
  });
}

SurvivalEstimate estimate_branching_survival(const WeightSpec& spec, const BranchingParams& params,
                                             std::uint64_t n_runs, double confidence,
                                             std::uint64_t master_seed, unsigned jobs) {
  return tally(simulate_branching(spec, params, n_runs, master_seed, jobs), confidence);
}

}  // namespace orlat
