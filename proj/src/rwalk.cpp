#include "orlat/rwalk.hpp"

#include <cmath>
#include <numeric>

#include "orlat/error.hpp"
#include "orlat/replicas.hpp"
#include "orlat/stats.hpp"

namespace orlat {

std::string_view to_string(CaseTag tag) noexcept {
  switch (tag) {
    case CaseTag::NoCollision: return "no-collision";
    case CaseTag::Tau0Late: return "tau0-late";
    case CaseTag::Tau0EqualsTau1: return "tau0-equals-tau1";
    case CaseTag::Tau0BeforeTau1: return "tau0-before-tau1";
  }
  return "unknown";
}

CollisionRecord decompose(std::uint64_t offset, std::span<const std::uint64_t> coincidences, std::uint64_t horizon) {
  CollisionRecord rec;
  rec.offset = offset;
  if (coincidences.empty()) return rec;
  rec.tau0 = coincidences.front();
  rec.truncated = coincidences.back() == horizon;

  std::uint64_t isolated = 0;
  for (std::size_t i = 0; i < coincidences.size();) {
    std::size_t j = i;
    while (j + 1 < coincidences.size() && coincidences[j + 1] == coincidences[j] + 1) ++j;
    if (j > i) {
      rec.f.push_back(isolated);
      isolated = 0;
      rec.taus.push_back(coincidences[i]);
      rec.kappas.push_back(coincidences[j]);
      rec.h.push_back(coincidences[j] - coincidences[i]);
    } else {
      ++isolated;
    }
    i = j + 1;
  }
  rec.f.push_back(isolated);
  rec.T = rec.taus.size();

  if (*rec.tau0 > offset) {
    rec.case_tag = CaseTag::Tau0Late;
  } else if (rec.T > 0 && rec.taus.front() == *rec.tau0) {
    rec.case_tag = CaseTag::Tau0EqualsTau1;
  } else {
    rec.case_tag = CaseTag::Tau0BeforeTau1;
  }
  return rec;
}

void check_record(const CollisionRecord& r) {
  const auto fail = [](const std::string& why) { throw Error(ErrorCode::InconsistentRecord, why); };
  if (!r.tau0) {
    if (r.T != 0 || !r.taus.empty() || !r.kappas.empty() || !r.h.empty() || !r.f.empty()) {
      fail("collision statistics present without a collision");
    }
    if (r.case_tag != CaseTag::NoCollision) fail("no-collision record carries a collision case");
    return;
  }
  if (*r.tau0 < r.offset) fail("tau0 precedes the alignment offset");
  if (r.taus.size() != r.T || r.kappas.size() != r.T || r.h.size() != r.T) fail("run lists disagree with T");
  if (r.f.size() != r.T + 1) fail("f must have T + 1 entries");
  for (std::uint64_t l = 0; l < r.T; ++l) {
    if (r.kappas[l] <= r.taus[l]) fail("kappa_l must exceed tau_l");
    if (r.h[l] != r.kappas[l] - r.taus[l]) fail("h_l != kappa_l - tau_l");
    if (l + 1 < r.T && r.taus[l + 1] <= r.kappas[l] + 1) fail("runs must be separated by a non-coincidence");
  }
  if (r.T > 0 && r.taus.front() < *r.tau0) fail("tau_1 precedes tau_0");
  const bool tau0_opens_run = r.T > 0 && r.taus.front() == *r.tau0;
  if (tau0_opens_run ? r.f.front() != 0 : r.f.front() < 1) fail("f_0 inconsistent with tau_0 and tau_1");
  CaseTag expected = CaseTag::Tau0BeforeTau1;
  if (*r.tau0 > r.offset) {
    expected = CaseTag::Tau0Late;
  } else if (tau0_opens_run) {
    expected = CaseTag::Tau0EqualsTau1;
  }
  if (r.case_tag != expected) fail("case tag does not match tau_0, tau_1 and the offset");
}

namespace {

/// Runs both walks on the difference vector x-walk minus aligned y-walk.
/// Calls on_hit(k) for each coincidence time k; stops early if it returns false.
template <typename OnHit>
void walk_pair(std::uint32_t d, const Vertex& x, const Vertex& y, std::uint64_t horizon, Rng& rng, OnHit&& on_hit) {
  if (d < 4) throw Error(ErrorCode::DimensionTooSmall, "oriented walks need d >= 4, got " + std::to_string(d));
  if (x.norm() > y.norm()) throw Error(ErrorCode::NormOrderViolated, "requires |x| <= |y|");
  if (x.max_axis() >= static_cast<std::int64_t>(d) || y.max_axis() >= static_cast<std::int64_t>(d)) {
    throw Error(ErrorCode::DimensionMismatch, "start vertex outside Z_+^" + std::to_string(d));
  }
  const std::uint64_t offset = y.norm() - x.norm();
  if (offset > horizon) return;

  std::vector<std::int64_t> diff(d, 0);
  std::uint64_t nonzero = 0;
  const auto bump = [&](std::uint64_t axis, std::int64_t delta) {
    const std::int64_t before = diff[axis];
    diff[axis] = before + delta;
    nonzero += (diff[axis] != 0 ? 1 : 0) - (before != 0 ? 1 : 0);
  };
  for (const auto& e : x.entries()) bump(e.axis, e.count);
  for (const auto& e : y.entries()) bump(e.axis, -static_cast<std::int64_t>(e.count));

  for (std::uint64_t k = 0; k < offset; ++k) bump(rng.below(d), 1);
  if (nonzero == 0 && !on_hit(offset)) return;
  for (std::uint64_t k = offset + 1; k <= horizon; ++k) {
    const std::uint64_t a = rng.below(d);
    const std::uint64_t b = rng.below(d);
    if (a != b) {
      bump(a, 1);
      bump(b, -1);
    }
    if (nonzero == 0 && !on_hit(k)) return;
  }
}

}  // namespace

CollisionRecord simulate_pair(std::uint32_t d, const Vertex& x, const Vertex& y, std::uint64_t horizon, Rng& rng) {
  std::vector<std::uint64_t> hits;
  walk_pair(d, x, y, horizon, rng, [&](std::uint64_t k) {
    hits.push_back(k);
    return true;
  });
  return decompose(y.norm() - x.norm(), hits, horizon);
}

std::optional<std::uint64_t> first_coincidence(std::uint32_t d, const Vertex& x, const Vertex& y,
                                               std::uint64_t horizon, Rng& rng) {
  std::optional<std::uint64_t> first;
  walk_pair(d, x, y, horizon, rng, [&](std::uint64_t k) {
    first = k;
    return false;
  });
  return first;
}

RConstants RConstants::from(const WeightSpec& spec, double lambda, std::uint32_t d) {
  return {lambda, spec.bound(), spec.mean(), spec.second_moment(), d};
}

double log_r_value(const CollisionRecord& record, const RConstants& c) {
  check_record(record);
  if (!(c.lambda > 0.0 && c.M > 0.0 && c.mean_rho > 0.0 && c.second_moment > 0.0 && c.d > 0)) {
    throw Error(ErrorCode::BadArguments, "R constants must be positive");
  }
  if (record.case_tag == CaseTag::NoCollision) return 0.0;

  const double d = static_cast<double>(c.d);
  const double log_growth = std::log1p(c.lambda * c.M * c.M / d);
  const double log_m = std::log(c.M);
  const double log_second = std::log(c.second_moment);
  const double log_edge = std::log(c.lambda * c.second_moment / d);
  const auto T = static_cast<double>(record.T);
  const auto H = static_cast<double>(std::accumulate(record.h.begin(), record.h.end(), std::uint64_t{0}));
  const auto f_all = static_cast<double>(std::accumulate(record.f.begin(), record.f.end(), std::uint64_t{0}));

  if (record.case_tag == CaseTag::Tau0Late) {
    const double S = f_all;
    return (T + S) * std::log(2.0) + (4 * T + 2 * H + 4 * S) * log_growth + (6 * T + 4 * S) * log_m -
           H * log_edge - (3 * T + 2 * S) * log_second;
  }
  const double S = record.case_tag == CaseTag::Tau0EqualsTau1 ? f_all - static_cast<double>(record.f.front()) : f_all;
  return (T + S) * std::log(2.0) + (4 * T + 2 * H + 4 * S - 1) * log_growth + (6 * T + 4 * S - 1) * log_m -
         H * log_edge - (3 * T + 2 * S - 1) * log_second - std::log(c.mean_rho);
}

double r_value(const CollisionRecord& record, const RConstants& c) { return std::exp(log_r_value(record, c)); }

CollisionEstimate collision_prob(std::uint32_t d, const Vertex& x, const Vertex& y, std::uint64_t horizon,
                                 std::uint64_t n_runs, double confidence, std::uint64_t master_seed, unsigned jobs) {
  if (n_runs < 1) throw Error(ErrorCode::BadArguments, "n_runs must be >= 1");
  const auto hits = run_replicas<std::uint8_t>(n_runs, jobs, [&](std::uint64_t r) {
    Rng rng = Rng::for_replica(master_seed, r, StreamTag::Walks);
    return static_cast<std::uint8_t>(first_coincidence(d, x, y, horizon, rng).has_value());
  });
  CollisionEstimate est;
  est.n_runs = n_runs;
  est.hits = std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
  est.point = static_cast<double>(est.hits) / static_cast<double>(n_runs);
  std::tie(est.ci_lo, est.ci_hi) = wilson_interval(est.hits, n_runs, confidence);
  return est;
}

LowerBound survival_lower_bound(std::span<const Vertex> A, const WeightSpec& spec, double lambda, std::uint32_t d,
                                std::uint64_t horizon, std::uint64_t n_runs, std::uint64_t master_seed, unsigned jobs,
                                bool keep_samples) {
  if (A.empty() || n_runs < 1) throw Error(ErrorCode::BadArguments, "bound needs a nonempty set and n_runs >= 1");
  const RConstants constants = RConstants::from(spec, lambda, d);
  std::vector<std::pair<Vertex, Vertex>> pairs;
  for (const auto& x : A) {
    for (const auto& y : A) pairs.emplace_back(x.norm() <= y.norm() ? std::pair{x, y} : std::pair{y, x});
  }

  const std::uint64_t total = pairs.size() * n_runs;
  const auto samples = run_replicas<BoundSample>(total, jobs, [&](std::uint64_t i) {
    Rng rng = Rng::for_replica(master_seed, i, StreamTag::Walks);
    const auto& [x, y] = pairs[i / n_runs];
    BoundSample s;
    s.pair = i / n_runs;
    s.record = simulate_pair(d, x, y, horizon, rng);
    s.r = r_value(s.record, constants);
    return s;
  });

  LowerBound out;
  double variance_sum = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    PairStatistic stat{pairs[p].first, pairs[p].second};
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t r = 0; r < n_runs; ++r) {
      const BoundSample& s = samples[p * n_runs + r];
      sum += s.r;
      sum_sq += s.r * s.r;
      stat.collisions += s.record.tau0 ? 1 : 0;
      stat.truncated += s.record.truncated ? 1 : 0;
    }
    const auto n = static_cast<double>(n_runs);
    stat.mean_r = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * stat.mean_r * stat.mean_r) / (n - 1)) : 0.0;
    stat.std_error = std::sqrt(var / n);
    out.mean_r += stat.mean_r;
    variance_sum += stat.std_error * stat.std_error;
    out.pairs.push_back(std::move(stat));
  }
  const auto n_pairs = static_cast<double>(pairs.size());
  out.mean_r /= n_pairs;
  out.std_error = std::sqrt(variance_sum) / n_pairs;
  const double raw = 1.0 / out.mean_r;
  out.clipped = raw > 1.0;
  out.bound = std::min(1.0, raw);
  if (keep_samples) out.samples = samples;
  return out;
}

}  // namespace orlat
