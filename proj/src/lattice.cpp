#include "orlat/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "orlat/error.hpp"
#include "orlat/replicas.hpp"

namespace orlat {

double WeightSource::operator()(const Vertex& x) {
  const double w = env_->weight(x);
  if (!audit_) return w;
  ++stats_.queries;
  const auto [it, inserted] = seen_.try_emplace(x, w);
  if (inserted) {
    ++stats_.distinct;
  } else if (it->second != w) {
    ++stats_.mismatches;
  }
  return w;
}

namespace {

void check_dimension(const Environment& env, std::span<const Vertex> vertices) {
  for (const auto& v : vertices) {
    if (v.max_axis() >= static_cast<std::int64_t>(env.dimension())) {
      throw Error(ErrorCode::DimensionMismatch, "initial vertex " + v.to_string() + " outside Z_+^" +
                                                    std::to_string(env.dimension()));
    }
  }
}

std::vector<Vertex> dedupe(std::span<const Vertex> vertices) {
  std::vector<Vertex> out;
  absl::flat_hash_set<Vertex, VertexHash> seen;
  for (const auto& v : vertices) {
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

}  // namespace

SirRun run_sir(const Environment& env, double lambda, std::span<const Vertex> initial, std::uint64_t horizon,
               std::uint64_t pop_cap, Rng& rng, const SirOptions& options) {
  if (lambda < 0.0 || horizon < 1 || pop_cap < 1) {
    throw Error(ErrorCode::BadArguments, "sir needs lambda >= 0, horizon >= 1, pop_cap >= 1");
  }
  check_dimension(env, initial);
  for (const auto& v : initial) {
    if (v.norm() != initial.front().norm()) {
      throw Error(ErrorCode::MixedNormInitialSet, "initial vertices have norms " +
                                                      std::to_string(initial.front().norm()) + " and " +
                                                      std::to_string(v.norm()));
    }
  }

  SirRun run;
  WeightSource weight(env, options.audit);
  std::vector<Vertex> current = dedupe(initial);
  Outcome& out = run.outcome;
  out.ever_infected = current.size();
  out.peak_population = current.size();
  run.sizes.push_back(current.size());
  if (options.record_generations) run.generations.push_back(current);
  if (current.empty()) {
    out.kind = OutcomeKind::Died;
    return run;
  }
  if (out.ever_infected >= pop_cap) {
    out.kind = OutcomeKind::SurvivedCap;
    return run;
  }

  const std::uint32_t d = env.dimension();
  const double scale = lambda / static_cast<double>(d);
  const double bound = env.spec().bound();
  std::vector<Vertex> next;
  absl::flat_hash_set<Vertex, VertexHash> members;

  for (std::uint64_t gen = 0; gen < horizon; ++gen) {
    next.clear();
    members.clear();
    members.reserve(2 * current.size());
    for (const Vertex& x : current) {
      const double rx = weight(x);
      const double y_clock = rng.exponential();
      const double c = scale * rx * y_clock;
      const double p_max = -std::expm1(-c * bound);
      if (p_max <= 0.0) continue;
      // Thinning: propose neighbours at the largest possible success
      // probability, then accept with the ratio of the true one.
      std::uint64_t j = rng.geometric(p_max);
      while (j < d) {
        Vertex y = x.plus(static_cast<std::uint32_t>(j));
        if (!members.contains(y)) {
          const double p = -std::expm1(-c * weight(y));
          if (p >= p_max || rng.uniform() * p_max < p) {
            members.insert(y);
            next.push_back(std::move(y));
          }
        }
        const std::uint64_t skip = rng.geometric(p_max);
        if (skip >= d) break;
        j += 1 + skip;
      }
    }
    out.generation = gen + 1;
    run.sizes.push_back(next.size());
    if (options.record_generations) run.generations.push_back(next);
    if (next.empty()) {
      out.kind = OutcomeKind::Died;
      run.audit = weight.audit();
      return run;
    }
    out.ever_infected += next.size();
    out.peak_population = std::max<std::uint64_t>(out.peak_population, next.size());
    current.swap(next);
    if (out.ever_infected >= pop_cap) {
      out.kind = OutcomeKind::SurvivedCap;
      run.audit = weight.audit();
      return run;
    }
  }
  out.kind = OutcomeKind::SurvivedHorizon;
  run.audit = weight.audit();
  return run;
}

namespace {

/// Fenwick tree over frontier slots: O(log n) updates and proportional draws.
class RateTree {
 public:
  [[nodiscard]] std::size_t size() const noexcept { return value_.size(); }
  [[nodiscard]] double value(std::size_t i) const noexcept { return value_[i]; }

  void grow(std::size_t capacity) {
    value_.resize(capacity, 0.0);
    rebuild();
  }

  void set(std::size_t i, double v) {
    const double delta = v - value_[i];
    value_[i] = v;
    for (std::size_t k = i + 1; k <= value_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  [[nodiscard]] double total() const noexcept {
    double s = 0.0;
    for (std::size_t k = value_.size(); k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  /// Smallest slot whose prefix sum exceeds u, skipping zero-rate slots
  /// that rounding might otherwise select.
  [[nodiscard]] std::size_t find(double u) const noexcept {
    const std::size_t n = value_.size();
    std::size_t pos = 0;
    for (std::size_t step = std::bit_floor(n); step > 0; step >>= 1U) {
      if (pos + step <= n && tree_[pos + step] <= u) {
        pos += step;
        u -= tree_[pos];
      }
    }
    if (pos < n && value_[pos] > 0.0) return pos;
    for (std::size_t k = std::min(pos, n); k-- > 0;) {
      if (value_[k] > 0.0) return k;
    }
    for (std::size_t k = pos; k < n; ++k) {
      if (value_[k] > 0.0) return k;
    }
    return n;
  }

  void rebuild() {
    tree_.assign(value_.size() + 1, 0.0);
    for (std::size_t k = 1; k <= value_.size(); ++k) {
      tree_[k] += value_[k - 1];
      const std::size_t parent = k + (k & (~k + 1));
      if (parent <= value_.size()) tree_[parent] += tree_[k];
    }
  }

  void replace_values(std::vector<double> values) {
    value_ = std::move(values);
    rebuild();
  }

 private:
  std::vector<double> value_;
  std::vector<double> tree_{0.0};
};

struct Node {
  Vertex vertex;
  double weight = 0.0;
  double parent_sum = 0.0;        // Σ ρ over infected in-neighbours
  std::uint32_t parent_count = 0;  // number of infected in-neighbours
  std::int64_t infected_index = -1;
  std::int64_t slot = -1;
  bool ever = false;
  double first_time = 0.0;
};

using NodeId = std::uint32_t;
constexpr NodeId kNoNode = ~NodeId{0};

class ContactSim {
 public:
  ContactSim(const Environment& env, double lambda, Rng& rng, const ContactOptions& options)
      : env_(env),
        d_(env.dimension()),
        scale_(lambda / static_cast<double>(env.dimension())),
        rng_(rng),
        opt_(options),
        weight_(env, options.audit) {}

  ContactRun run(std::span<const Vertex> initial) {
    if (opt_.stop_at_norm) result_.layer = LayerStatus::Undecided;
    for (const auto& v : dedupe(initial)) infect(node(v), 0.0);
    if (decided()) return finish(0.0);
    if (infected_.empty()) return finish_died(0.0);

    double t = 0.0;
    for (;;) {
      const double n_infected = static_cast<double>(infected_.size());
      const double total = n_infected + rates_.total();
      t += rng_.exponential(total);
      if (t >= opt_.t_max) {
        result_.outcome.kind = OutcomeKind::SurvivedHorizon;
        return finish(opt_.t_max);
      }
      const double r = rng_.uniform() * total;
      if (r < n_infected) {
        const auto index = std::min(static_cast<std::size_t>(r), infected_.size() - 1);
        const NodeId z = infected_[index];
        recover(z);
        if (opt_.record_events) result_.event_log.push_back({t, false, nodes_[z].vertex});
      } else {
        const std::size_t slot = rates_.find(r - n_infected);
        if (slot >= slots_.size() || slots_[slot] == kNoNode) {
          throw Error(ErrorCode::RateDrift, "no frontier slot for a positive rate draw");
        }
        const NodeId z = slots_[slot];
        infect(z, t);
        if (opt_.record_events) result_.event_log.push_back({t, true, nodes_[z].vertex});
      }
      ++result_.events;
      if (opt_.check_every > 0 && result_.events % opt_.check_every == 0) check_rates();
      if (infected_.empty()) return finish_died(t);
      if (result_.outcome.ever_infected >= opt_.pop_cap) {
        result_.outcome.kind = OutcomeKind::SurvivedCap;
        return finish(t);
      }
      if (decided()) return finish(t);
    }
  }

 private:
  NodeId node(const Vertex& v) {
    const auto [it, inserted] = index_.try_emplace(v, static_cast<NodeId>(nodes_.size()));
    if (inserted) {
      Node n;
      n.vertex = v;
      n.weight = weight_(v);
      nodes_.push_back(std::move(n));
    }
    return it->second;
  }

  [[nodiscard]] NodeId find(const Vertex& v) const {
    const auto it = index_.find(v);
    return it == index_.end() ? kNoNode : it->second;
  }

  [[nodiscard]] double rate_of(const Node& n) const noexcept { return scale_ * n.weight * n.parent_sum; }

  void update_frontier(NodeId id) {
    Node& n = nodes_[id];
    if (n.infected_index >= 0) return;
    const double rate = n.parent_count > 0 ? rate_of(n) : 0.0;
    if (rate > 0.0) {
      if (n.slot < 0) {
        n.slot = static_cast<std::int64_t>(acquire_slot());
        slots_[static_cast<std::size_t>(n.slot)] = id;
      }
      rates_.set(static_cast<std::size_t>(n.slot), rate);
    } else if (n.slot >= 0) {
      release_slot(n);
    }
  }

  std::size_t acquire_slot() {
    if (free_.empty()) {
      const std::size_t old = slots_.size();
      const std::size_t grown = std::max<std::size_t>(64, 2 * old);
      slots_.resize(grown, kNoNode);
      rates_.grow(grown);
      for (std::size_t k = grown; k-- > old;) free_.push_back(k);
    }
    const std::size_t s = free_.back();
    free_.pop_back();
    return s;
  }

  void release_slot(Node& n) {
    const auto s = static_cast<std::size_t>(n.slot);
    rates_.set(s, 0.0);
    slots_[s] = kNoNode;
    free_.push_back(s);
    n.slot = -1;
  }

  void infect(NodeId id, double t) {
    {
      Node& n = nodes_[id];
      if (n.infected_index >= 0) return;
      if (n.slot >= 0) release_slot(n);
      n.infected_index = static_cast<std::int64_t>(infected_.size());
      infected_.push_back(id);
      const std::uint64_t norm = n.vertex.norm();
      if (opt_.stop_at_norm && norm < *opt_.stop_at_norm) ++below_layer_;
      if (!n.ever) {
        if (opt_.audit && t > 0.0 && !has_earlier_infected_parent(n.vertex, t)) ++result_.layering_violations;
        n.ever = true;
        n.first_time = t;
        ++result_.outcome.ever_infected;
        ++result_.ever_infected_by_norm[norm];
        result_.outcome.generation = std::max(result_.outcome.generation, norm);
        if (opt_.stop_at_norm && norm == *opt_.stop_at_norm) result_.layer = LayerStatus::Reached;
      }
      result_.outcome.peak_population = std::max<std::uint64_t>(result_.outcome.peak_population, infected_.size());
      if (n.weight == 0.0) return;
    }
    // node() may grow nodes_, so re-index after every call.
    const double w = nodes_[id].weight;
    for (std::uint32_t j = 0; j < d_; ++j) {
      const NodeId c = node(nodes_[id].vertex.plus(j));
      Node& child = nodes_[c];
      ++child.parent_count;
      child.parent_sum += w;
      update_frontier(c);
    }
  }

  void recover(NodeId id) {
    Node& n = nodes_[id];
    const auto index = static_cast<std::size_t>(n.infected_index);
    infected_[index] = infected_.back();
    nodes_[infected_[index]].infected_index = static_cast<std::int64_t>(index);
    infected_.pop_back();
    n.infected_index = -1;
    if (opt_.stop_at_norm && n.vertex.norm() < *opt_.stop_at_norm) --below_layer_;
    if (n.weight > 0.0) {
      for (std::uint32_t j = 0; j < d_; ++j) {
        const NodeId c = find(n.vertex.plus(j));
        Node& child = nodes_[c];
        --child.parent_count;
        child.parent_sum = child.parent_count == 0 ? 0.0 : child.parent_sum - n.weight;
        update_frontier(c);
      }
    }
    update_frontier(id);
  }

  [[nodiscard]] bool has_earlier_infected_parent(const Vertex& z, double t) const {
    for (const auto& e : z.entries()) {
      const NodeId p = find(z.minus(e.axis));
      if (p != kNoNode && nodes_[p].infected_index >= 0 && nodes_[p].first_time < t) return true;
    }
    return false;
  }

  [[nodiscard]] bool decided() {
    if (!opt_.stop_at_norm) return false;
    if (result_.layer == LayerStatus::Reached) {
      result_.outcome.kind = OutcomeKind::SurvivedCap;
      return true;
    }
    if (below_layer_ == 0) {
      result_.layer = LayerStatus::Unreachable;
      result_.outcome.kind = infected_.empty() ? OutcomeKind::Died : OutcomeKind::SurvivedCap;
      return true;
    }
    return false;
  }

  // Recomputes every frontier rate from the infected set and compares the
  // total with the incrementally maintained one.
  void check_rates() {
    std::vector<double> exact(nodes_.size(), 0.0);
    std::vector<NodeId> touched;
    for (const NodeId x : infected_) {
      const Node& parent = nodes_[x];
      if (parent.weight == 0.0) continue;
      for (std::uint32_t j = 0; j < d_; ++j) {
        const NodeId c = find(parent.vertex.plus(j));
        if (c == kNoNode) throw Error(ErrorCode::RateDrift, "frontier vertex missing from state");
        if (nodes_[c].infected_index >= 0) continue;
        if (exact[c] == 0.0) touched.push_back(c);
        exact[c] += parent.weight;
      }
    }
    double scratch = 0.0;
    std::vector<double> values(slots_.size(), 0.0);
    for (const NodeId id : touched) {
      const Node& n = nodes_[id];
      const double parent_sum = exact[id];
      if (n.slot < 0) {
        if (n.weight > 0.0) throw Error(ErrorCode::RateDrift, "susceptible vertex with infected parent not in frontier");
        continue;
      }
      const double rate = scale_ * n.weight * parent_sum;
      values[static_cast<std::size_t>(n.slot)] = rate;
      scratch += rate;
    }
    if (opt_.audit) {
      for (const Node& n : nodes_) {
        if (env_.weight(n.vertex) != n.weight) ++result_.audit.mismatches;
      }
    }
    const double maintained = rates_.total();
    const double drift = std::abs(maintained - scratch) / std::max(scratch + static_cast<double>(infected_.size()), 1e-300);
    result_.max_rate_drift = std::max(result_.max_rate_drift, drift);
    ++result_.rate_checks;
    if (drift > 1e-9) throw Error(ErrorCode::RateDrift, "maintained total rate drifted by " + std::to_string(drift));
    rates_.replace_values(std::move(values));
  }

  ContactRun finish_died(double t) {
    result_.outcome.kind = OutcomeKind::Died;
    if (opt_.stop_at_norm && result_.layer == LayerStatus::Undecided) result_.layer = LayerStatus::Unreachable;
    return finish(t);
  }

  ContactRun finish(double t) {
    result_.final_time = t;
    result_.outcome.time = t;
    const WeightAudit& a = weight_.audit();
    result_.audit.queries = a.queries;
    result_.audit.distinct = a.distinct;
    result_.audit.mismatches += a.mismatches;
    return std::move(result_);
  }

  const Environment& env_;
  std::uint32_t d_;
  double scale_;
  Rng& rng_;
  ContactOptions opt_;
  WeightSource weight_;
  std::vector<Node> nodes_;
  absl::flat_hash_map<Vertex, NodeId, VertexHash> index_;
  std::vector<NodeId> infected_;
  std::vector<NodeId> slots_;
  std::vector<std::size_t> free_;
  RateTree rates_;
  std::uint64_t below_layer_ = 0;
  ContactRun result_;
};

}  // namespace

ContactRun run_contact(const Environment& env, double lambda, std::span<const Vertex> initial, Rng& rng,
                       const ContactOptions& options) {
  if (lambda < 0.0 || !(options.t_max > 0.0) || options.pop_cap < 1) {
    throw Error(ErrorCode::BadArguments, "contact needs lambda >= 0, t_max > 0, pop_cap >= 1");
  }
  check_dimension(env, initial);
  ContactSim sim(env, lambda, rng, options);
  return sim.run(initial);
}

std::uint64_t replica_environment_seed(const LatticeExperiment& exp, std::uint64_t master_seed, std::uint64_t index) {
  return exp.quenched_seed ? *exp.quenched_seed
                           : derive_seed(master_seed, index, static_cast<std::uint64_t>(StreamTag::Environment));
}

std::vector<Outcome> simulate_survival(const WeightSpec& spec, const LatticeExperiment& exp, std::uint64_t n_runs,
                                       std::uint64_t master_seed, unsigned jobs) {
  if (n_runs < 1) throw Error(ErrorCode::BadArguments, "n_runs must be >= 1");
  return run_replicas<Outcome>(n_runs, jobs, [&](std::uint64_t i) {
    const Environment env(replica_environment_seed(exp, master_seed, i), spec, exp.d);
    Rng rng = Rng::for_replica(master_seed, i, StreamTag::Dynamics);
    if (exp.kind == ProcessKind::Sir) {
      return run_sir(env, exp.lambda, exp.initial, exp.budget.horizon, exp.budget.pop_cap, rng).outcome;
    }
    ContactOptions opt;
    opt.t_max = exp.budget.t_max;
    opt.pop_cap = exp.budget.pop_cap;
    return run_contact(env, exp.lambda, exp.initial, rng, opt).outcome;
  });
}

SurvivalEstimate estimate_survival(const WeightSpec& spec, const LatticeExperiment& exp, std::uint64_t n_runs,
                                   double confidence, std::uint64_t master_seed, unsigned jobs) {
  return tally(simulate_survival(spec, exp, n_runs, master_seed, jobs), confidence);
}

}  // namespace orlat
