#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "orlat/rng.hpp"
#include "orlat/vertex.hpp"
#include "orlat/weights.hpp"

namespace orlat {

enum class CaseTag { NoCollision, Tau0Late, Tau0EqualsTau1, Tau0BeforeTau1 };

std::string_view to_string(CaseTag tag) noexcept;

/// Meeting statistics of two independent oriented walks started at x and y
/// with ‖x‖ ≤ ‖y‖. Times are indices of the x-walk; a coincidence at time k
/// means the x-walk at k equals the y-walk at k - offset.
struct CollisionRecord {
  std::uint64_t offset = 0;
  std::optional<std::uint64_t> tau0;
  /// Starts (τ_l) and ends (κ_l) of the maximal coincidence runs of length ≥ 2.
  std::vector<std::uint64_t> taus;
  std::vector<std::uint64_t> kappas;
  std::uint64_t T = 0;
  std::vector<std::uint64_t> h;
  /// Coincidences outside those runs: f_0 counts [τ_0, τ_1), f_l counts
  /// (κ_l, τ_{l+1}) and f_T counts everything after κ_T. Empty without a collision.
  std::vector<std::uint64_t> f;
  CaseTag case_tag = CaseTag::NoCollision;
  /// The last observed coincidence sat on the horizon, so its run was cut.
  bool truncated = false;
};

/// Builds the record from the sorted coincidence times observed on
/// [offset, horizon].
CollisionRecord decompose(std::uint64_t offset, std::span<const std::uint64_t> coincidences, std::uint64_t horizon);

/// Throws InconsistentRecord unless the interleaving and counting rules hold.
void check_record(const CollisionRecord& record);

CollisionRecord simulate_pair(std::uint32_t d, const Vertex& x, const Vertex& y, std::uint64_t horizon, Rng& rng);

/// τ_0 alone; consumes the stream exactly like simulate_pair up to τ_0.
std::optional<std::uint64_t> first_coincidence(std::uint32_t d, const Vertex& x, const Vertex& y,
                                               std::uint64_t horizon, Rng& rng);

struct RConstants {
  double lambda = 0.0;
  double M = 0.0;
  double mean_rho = 0.0;
  double second_moment = 0.0;
  std::uint32_t d = 0;

  static RConstants from(const WeightSpec& spec, double lambda, std::uint32_t d);
};

/// log R(x, y) for the case selected by the record.
double log_r_value(const CollisionRecord& record, const RConstants& c);
double r_value(const CollisionRecord& record, const RConstants& c);

struct CollisionEstimate {
  std::uint64_t hits = 0;
  std::uint64_t n_runs = 0;
  double point = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Frequency of τ_0 ≤ horizon over n_runs pairs; run r uses stream
/// Rng::for_replica(master_seed, r, Walks).
CollisionEstimate collision_prob(std::uint32_t d, const Vertex& x, const Vertex& y, std::uint64_t horizon,
                                 std::uint64_t n_runs, double confidence, std::uint64_t master_seed, unsigned jobs = 1);

struct PairStatistic {
  Vertex x;
  Vertex y;
  double mean_r = 0.0;
  double std_error = 0.0;
  std::uint64_t collisions = 0;
  std::uint64_t truncated = 0;
};

struct BoundSample {
  std::uint64_t pair = 0;
  CollisionRecord record;
  double r = 0.0;
};

struct LowerBound {
  /// min(1, 1/mean_r).
  double bound = 0.0;
  bool clipped = false;
  /// |A|^{-2} Σ_{x,y} E R(x, y).
  double mean_r = 0.0;
  /// Standard error of mean_r (pairs are estimated independently).
  double std_error = 0.0;
  std::vector<PairStatistic> pairs;
  std::vector<BoundSample> samples;  // filled when keep_samples is set
};

/// Monte Carlo second-moment lower bound on survival from A. Every ordered
/// pair (x, y) of A×A is simulated n_runs times (swapped so ‖x‖ ≤ ‖y‖).
LowerBound survival_lower_bound(std::span<const Vertex> A, const WeightSpec& spec, double lambda, std::uint32_t d,
                                std::uint64_t horizon, std::uint64_t n_runs, std::uint64_t master_seed,
                                unsigned jobs = 1, bool keep_samples = false);

}  // namespace orlat
