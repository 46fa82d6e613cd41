#include "orlat/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "orlat/error.hpp"
#include "orlat/replicas.hpp"

namespace orlat {

std::string_view to_string(FailureCause cause) noexcept {
  switch (cause) {
    case FailureCause::None: return "none";
    case FailureCause::SharedTargetHit: return "shared-target-hit";
    case FailureCause::ExtraTreeBirth: return "extra-tree-birth";
  }
  return "unknown";
}

bool sigma_window_degenerate(const WeightSpec& spec, double lambda) {
  return lambda * spec.bound() * spec.bound() <= 1.0;
}

double default_sigma(const WeightSpec& spec, double lambda) {
  if (sigma_window_degenerate(spec, lambda)) return 1.0;
  return 1.0 / (20.0 * std::log(lambda * spec.bound() * spec.bound()));
}

std::uint64_t target_steps(double sigma, std::uint32_t d) {
  if (!(sigma >= 0.0) || d < 1) throw Error(ErrorCode::BadArguments, "sigma must be >= 0 and d >= 1");
  return static_cast<std::uint64_t>(std::floor(sigma * std::log(static_cast<double>(d))));
}

std::vector<std::vector<std::uint32_t>> shared_target_axes(std::span<const Vertex> generation) {
  // x + e_k = z + e_i with x != z iff x - e_i = z - e_k; group members by
  // each vertex obtained by removing one unit step.
  absl::flat_hash_map<Vertex, std::vector<std::pair<std::size_t, std::uint32_t>>, VertexHash> groups;
  for (std::size_t idx = 0; idx < generation.size(); ++idx) {
    const Vertex& x = generation[idx];
    if (x.norm() != generation.front().norm()) throw Error(ErrorCode::BadArguments, "generation mixes norms");
    for (const auto& e : x.entries()) groups[x.minus(e.axis)].emplace_back(idx, e.axis);
  }
  std::vector<std::vector<std::uint32_t>> q(generation.size());
  for (const auto& [base, members] : groups) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = 0; b < members.size(); ++b) {
        if (a != b) q[members[a].first].push_back(members[b].second);
      }
    }
  }
  for (auto& axes : q) {
    std::sort(axes.begin(), axes.end());
    axes.erase(std::unique(axes.begin(), axes.end()), axes.end());
  }
  return q;
}

CoupledRun run_coupled(const WeightSpec& spec, double lambda, std::uint32_t d, double sigma, Rng& rng) {
  if (d < 2) throw Error(ErrorCode::BadArguments, "coupling needs d >= 2");
  CoupledRun run;
  run.target_steps = target_steps(sigma, d);
  const Environment env(rng(), spec, d);
  const double scale = lambda / static_cast<double>(d);
  const double bound = spec.bound();

  std::vector<Vertex> current{Vertex{}};
  std::vector<Vertex> next;
  absl::flat_hash_set<Vertex, VertexHash> members;
  run.lattice_sizes.push_back(1);
  run.tree_sizes.push_back(1);

  for (std::uint64_t step = 0; step < run.target_steps; ++step) {
    const auto q = shared_target_axes(current);
    next.clear();
    members.clear();
    std::uint64_t tree_size = 0;
    FailureCause cause = FailureCause::None;
    for (std::size_t k = 0; k < current.size(); ++k) {
      const Vertex& x = current[k];
      const auto& shared = q[k];
      const double c = scale * env.weight(x) * rng.exponential();
      const double p_max = -std::expm1(-c * bound);
      if (p_max > 0.0) {
        std::uint64_t j = rng.geometric(p_max);
        while (j < d) {
          const auto axis = static_cast<std::uint32_t>(j);
          Vertex y = x.plus(axis);
          const double p = -std::expm1(-c * env.weight(y));
          if (p >= p_max || rng.uniform() * p_max < p) {
            if (std::binary_search(shared.begin(), shared.end(), axis)) {
              if (cause == FailureCause::None) cause = FailureCause::SharedTargetHit;
            } else {
              ++tree_size;
            }
            if (members.insert(y).second) next.push_back(std::move(y));
          }
          const std::uint64_t skip = rng.geometric(p_max);
          if (skip >= d) break;
          j += 1 + skip;
        }
      }
      // Tree children of g(x) with no lattice partner.
      for (std::size_t extra = 0; extra < shared.size(); ++extra) {
        const double born = -std::expm1(-c * sample(spec, rng));
        if (rng.uniform() < born) {
          ++tree_size;
          if (cause == FailureCause::None) cause = FailureCause::ExtraTreeBirth;
        }
      }
    }
    run.lattice_sizes.push_back(next.size());
    run.tree_sizes.push_back(tree_size);
    if (cause != FailureCause::None) {
      run.failure_cause = cause;
      run.success_through = step;
      return run;
    }
    if (next.empty()) {
      run.extinct = true;
      break;
    }
    current.swap(next);
  }
  run.success_through = run.target_steps;
  return run;
}

CouplingEstimate estimate_coupling(const WeightSpec& spec, double lambda, std::uint32_t d, double sigma,
                                   std::uint64_t n_runs, double confidence, std::uint64_t master_seed,
                                   unsigned jobs) {
  if (n_runs < 1) throw Error(ErrorCode::BadArguments, "n_runs must be >= 1");
  const auto runs = run_replicas<CoupledRun>(n_runs, jobs, [&](std::uint64_t i) {
    Rng rng = Rng::for_replica(master_seed, i, StreamTag::Coupling);
    return run_coupled(spec, lambda, d, sigma, rng);
  });
  CouplingEstimate est;
  est.d = d;
  est.sigma = sigma;
  est.target_steps = target_steps(sigma, d);
  est.n_runs = n_runs;
  for (const auto& r : runs) {
    if (r.success()) ++est.successes;
    ++est.failure_histogram[static_cast<std::size_t>(r.failure_cause)];
  }
  est.p_success = static_cast<double>(est.successes) / static_cast<double>(n_runs);
  std::tie(est.ci_lo, est.ci_hi) = wilson_interval(est.successes, n_runs, confidence);
  return est;
}

namespace {

Proportion make_proportion(std::uint64_t hits, std::uint64_t trials, std::uint64_t censored, double confidence) {
  Proportion p;
  p.hits = hits;
  p.trials = trials;
  p.censored = censored;
  p.point = static_cast<double>(hits) / static_cast<double>(trials);
  std::tie(p.ci_lo, p.ci_hi) = wilson_interval(hits, trials, confidence);
  return p;
}

struct ArmResult {
  bool empty = false;
  bool censored = false;
};

}  // namespace

GapEstimate extinction_gap(const WeightSpec& spec, double lambda, std::uint32_t d, double sigma, std::uint64_t n_runs,
                           double confidence, std::uint64_t master_seed, double t_max, unsigned jobs) {
  if (n_runs < 1 || d < 2) throw Error(ErrorCode::BadArguments, "gap needs n_runs >= 1 and d >= 2");
  GapEstimate est;
  est.d = d;
  est.sigma = sigma;
  est.layer = target_steps(sigma, d);
  const std::uint64_t layer = est.layer;
  const std::vector<Vertex> origin{Vertex{}};
  constexpr std::uint64_t kNoCap = std::numeric_limits<std::uint64_t>::max();

  // Replica i of arm a uses index 2i + a for both its environment and its dynamics.
  const auto v_arm = run_replicas<ArmResult>(n_runs, jobs, [&](std::uint64_t i) {
    if (layer == 0) return ArmResult{};
    const std::uint64_t idx = 2 * i;
    const Environment env(derive_seed(master_seed, idx, static_cast<std::uint64_t>(StreamTag::Environment)), spec, d);
    Rng rng = Rng::for_replica(master_seed, idx, StreamTag::Gap);
    const auto run = run_sir(env, lambda, origin, layer, kNoCap, rng);
    return ArmResult{run.outcome.kind == OutcomeKind::Died, false};
  });
  const auto beta_arm = run_replicas<ArmResult>(n_runs, jobs, [&](std::uint64_t i) {
    if (layer == 0) return ArmResult{};
    const std::uint64_t idx = 2 * i + 1;
    const Environment env(derive_seed(master_seed, idx, static_cast<std::uint64_t>(StreamTag::Environment)), spec, d);
    Rng rng = Rng::for_replica(master_seed, idx, StreamTag::Gap);
    ContactOptions opt;
    opt.t_max = t_max;
    opt.pop_cap = kNoCap;
    opt.stop_at_norm = layer;
    const auto run = run_contact(env, lambda, origin, rng, opt);
    return ArmResult{run.layer == LayerStatus::Unreachable, run.layer == LayerStatus::Undecided};
  });

  std::uint64_t v_hits = 0;
  std::uint64_t b_hits = 0;
  std::uint64_t b_censored = 0;
  for (std::uint64_t i = 0; i < n_runs; ++i) {
    v_hits += v_arm[i].empty ? 1 : 0;
    b_hits += beta_arm[i].empty ? 1 : 0;
    b_censored += beta_arm[i].censored ? 1 : 0;
  }
  est.v_empty = make_proportion(v_hits, n_runs, 0, confidence);
  est.beta_empty = make_proportion(b_hits, n_runs, b_censored, confidence);
  est.gap = est.v_empty.point - est.beta_empty.point;
  est.ci_width = 0.5 * (est.v_empty.ci_hi - est.v_empty.ci_lo) + 0.5 * (est.beta_empty.ci_hi - est.beta_empty.ci_lo);
  return est;
}

}  // namespace orlat
