#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "orlat/outcome.hpp"
#include "orlat/rng.hpp"
#include "orlat/vertex.hpp"
#include "orlat/weights.hpp"

namespace orlat {

/// Records every weight query of one replica and counts disagreements
/// between repeated queries of the same vertex.
struct WeightAudit {
  std::uint64_t queries = 0;
  std::uint64_t distinct = 0;
  std::uint64_t mismatches = 0;
};

/// Environment lookups with optional auditing.
class WeightSource {
 public:
  WeightSource(const Environment& env, bool audit) : env_(&env), audit_(audit) {}

  double operator()(const Vertex& x);
  [[nodiscard]] const WeightAudit& audit() const noexcept { return stats_; }

 private:
  const Environment* env_;
  bool audit_;
  WeightAudit stats_;
  absl::flat_hash_map<Vertex, double, VertexHash> seen_;
};

struct SirOptions {
  bool record_generations = false;
  bool audit = false;
};

struct SirRun {
  /// V_0, V_1, ... (only when record_generations is set).
  std::vector<std::vector<Vertex>> generations;
  /// |V_0|, |V_1|, ... (always recorded).
  std::vector<std::uint64_t> sizes;
  Outcome outcome;
  WeightAudit audit;
};

/// Generation construction of the SIR ever-infected sets on Z_+^d.
/// Each x in V_n draws Y(x) ~ Exp(1); each out-neighbour y joins V_{n+1}
/// with probability 1 - exp(-λρ(x)ρ(y)Y(x)/d), independently across
/// parents. Initial vertices must share one norm (MixedNormInitialSet).
SirRun run_sir(const Environment& env, double lambda, std::span<const Vertex> initial, std::uint64_t horizon,
               std::uint64_t pop_cap, Rng& rng, const SirOptions& options = {});

struct ContactOptions {
  double t_max = 300.0;
  std::uint64_t pop_cap = 50'000;
  /// Stop as soon as a vertex of this norm is infected, or once no infected
  /// vertex has a smaller norm (the layer can then never be reached).
  std::optional<std::uint64_t> stop_at_norm;
  bool audit = false;
  bool record_events = false;
  /// Events between full recomputations of the aggregate rate.
  std::uint64_t check_every = 10'000;
};

struct ContactEvent {
  double time;
  bool infection;
  Vertex vertex;
  bool operator==(const ContactEvent&) const = default;
};

enum class LayerStatus { NotTracked, Reached, Unreachable, Undecided };

struct ContactRun {
  double final_time = 0.0;
  /// |β_n| for every norm n that was ever infected.
  std::map<std::uint64_t, std::uint64_t> ever_infected_by_norm;
  Outcome outcome;
  std::uint64_t events = 0;
  /// Largest relative gap between the maintained and recomputed total rate.
  double max_rate_drift = 0.0;
  std::uint64_t rate_checks = 0;
  LayerStatus layer = LayerStatus::NotTracked;
  WeightAudit audit;
  /// First infections with no infected in-neighbour infected strictly earlier.
  std::uint64_t layering_violations = 0;
  std::vector<ContactEvent> event_log;
};

/// Exact continuous-time simulation of the weighted contact process: each
/// infected vertex recovers at rate 1; a healthy z is infected at rate
/// (λ/d)ρ(z)Σ_{x→z, x infected}ρ(x). Events are drawn from the exact
/// aggregate rates of the infected set and its susceptible frontier.
ContactRun run_contact(const Environment& env, double lambda, std::span<const Vertex> initial, Rng& rng,
                       const ContactOptions& options = {});

enum class ProcessKind { Sir, Contact };

struct SurvivalBudget {
  std::uint64_t horizon = 150;
  double t_max = 300.0;
  std::uint64_t pop_cap = 50'000;
};

struct LatticeExperiment {
  ProcessKind kind = ProcessKind::Contact;
  double lambda = 2.0;
  std::uint32_t d = 8;
  std::vector<Vertex> initial{Vertex{}};
  SurvivalBudget budget;
  /// Fixed environment seed for every replica (quenched); fresh per replica otherwise.
  std::optional<std::uint64_t> quenched_seed;
};

/// Environment seed used by replica `index`.
std::uint64_t replica_environment_seed(const LatticeExperiment& exp, std::uint64_t master_seed, std::uint64_t index);

std::vector<Outcome> simulate_survival(const WeightSpec& spec, const LatticeExperiment& exp, std::uint64_t n_runs,
                                       std::uint64_t master_seed, unsigned jobs = 1);

SurvivalEstimate estimate_survival(const WeightSpec& spec, const LatticeExperiment& exp, std::uint64_t n_runs,
                                   double confidence, std::uint64_t master_seed, unsigned jobs = 1);

}  // namespace orlat
