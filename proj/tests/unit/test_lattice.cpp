#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "orlat/error.hpp"
#include "orlat/lattice.hpp"

using namespace orlat;

namespace {

const std::vector<Vertex> kOrigin{Vertex{}};

// Seed of a Bernoulli environment whose origin has weight `want`.
std::uint64_t seed_with_origin_weight(double want, std::uint32_t d) {
  for (std::uint64_t s = 0;; ++s) {
    const Environment env(s, WeightSpec::bernoulli(0.5), d);
    if (env.weight(Vertex{}) == want) return s;
  }
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("sir: empty initial set dies at generation 0") {
    const Environment env(1, WeightSpec::constant(1.0), 4);
    Rng rng(1, 1);
    const auto run = run_sir(env, 2.0, {}, 10, 100, rng);
    CHECK(run.outcome.kind == OutcomeKind::Died);
    CHECK(run.outcome.generation == 0);
  }

  TEST_CASE("sir: a weight-0 origin dies at generation 1") {
    const Environment env(seed_with_origin_weight(0.0, 6), WeightSpec::bernoulli(0.5), 6);
    for (std::uint64_t i = 0; i < 20; ++i) {
      Rng rng = Rng::for_replica(3, i, StreamTag::Dynamics);
      const auto run = run_sir(env, 50.0, kOrigin, 10, 100, rng);
      CHECK(run.outcome.kind == OutcomeKind::Died);
      CHECK(run.outcome.generation == 1);
    }
  }

  TEST_CASE("sir: generations are norm layers built from out-neighbours") {
    const auto spec = validate({{{0.0, 0.3}}, {{0.5, 1.5, 0.7}}});
    SirOptions opt;
    opt.record_generations = true;
    opt.audit = true;
    for (std::uint64_t i = 0; i < 40; ++i) {
      const Environment env(derive_seed(4, i, 2), spec, 6);
      Rng rng = Rng::for_replica(4, i, StreamTag::Dynamics);
      const auto run = run_sir(env, 4.0, kOrigin, 30, 3000, rng, opt);
      REQUIRE(run.generations.size() == run.sizes.size());
      for (std::size_t n = 0; n < run.generations.size(); ++n) {
        const auto& gen = run.generations[n];
        REQUIRE(gen.size() == run.sizes[n]);
        std::set<std::string> distinct;
        for (const auto& v : gen) {
          REQUIRE(v.norm() == n);
          distinct.insert(v.to_string());
          if (n > 0) {
            bool has_parent = false;
            for (const auto& u : run.generations[n - 1]) has_parent = has_parent || is_edge(u, v);
            REQUIRE(has_parent);
            // A weight-0 vertex is infected with probability 0.
            REQUIRE(env.weight(v) > 0.0);
          }
        }
        REQUIRE(distinct.size() == gen.size());
      }
      CHECK(run.audit.mismatches == 0);
      CHECK(run.audit.queries >= run.audit.distinct);
    }
  }

  TEST_CASE("sir: mixed-norm initial sets are rejected") {
    const Environment env(1, WeightSpec::constant(1.0), 4);
    Rng rng(1, 1);
    const std::vector<Vertex> mixed{Vertex{}, Vertex::unit(1)};
    try {
      (void)run_sir(env, 2.0, mixed, 10, 100, rng);
      FAIL("expected MixedNormInitialSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MixedNormInitialSet);
    }
  }

  TEST_CASE("sir: E|V_1| = d(λ/d)/(1+λ/d) for the constant law") {
    const std::uint32_t d = 8;
    const double lambda = 2.0;
    const double c = lambda / d;
    const double exact = d * c / (1 + c);
    const Environment env(0, WeightSpec::constant(1.0), d);
    constexpr int n = 100000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      Rng rng = Rng::for_replica(6, static_cast<std::uint64_t>(i), StreamTag::Dynamics);
      const auto run = run_sir(env, lambda, kOrigin, 1, 1000, rng);
      REQUIRE(run.sizes.size() == 2);
      const double v1 = static_cast<double>(run.sizes[1]);
      s += v1;
      s2 += v1 * v1;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - exact) < 4 * se);
  }

  TEST_CASE("contact: lambda = 0 is a pure death chain") {
    const Environment env(1, WeightSpec::constant(1.0), 5);
    Rng rng(2, 2);
    const auto run = run_contact(env, 0.0, kOrigin, rng);
    CHECK(run.outcome.kind == OutcomeKind::Died);
    CHECK(run.outcome.ever_infected == 1);
    CHECK(run.ever_infected_by_norm.size() == 1);
    CHECK(run.ever_infected_by_norm.at(0) == 1);
  }

  TEST_CASE("contact: fixed seed reproduces the event sequence") {
    const auto spec = WeightSpec::uniform(0.2, 1.5);
    const Environment env(77, spec, 6);
    ContactOptions opt;
    opt.record_events = true;
    opt.pop_cap = 2000;
    Rng a = Rng::for_replica(8, 1, StreamTag::Dynamics);
    Rng b = Rng::for_replica(8, 1, StreamTag::Dynamics);
    const auto r1 = run_contact(env, 3.0, kOrigin, a, opt);
    const auto r2 = run_contact(env, 3.0, kOrigin, b, opt);
    CHECK(r1.event_log == r2.event_log);
    CHECK(r1.outcome == r2.outcome);
    CHECK(r1.ever_infected_by_norm == r2.ever_infected_by_norm);
    CHECK(r1.event_log.size() == r1.events);
  }

  TEST_CASE("contact: layering, audit and rate conservation") {
    const auto spec = validate({{{0.0, 0.2}, {1.0, 0.4}}, {{0.3, 2.0, 0.4}}});
    ContactOptions opt;
    opt.audit = true;
    opt.check_every = 97;
    opt.pop_cap = 3000;
    opt.record_events = true;
    std::uint64_t checks = 0;
    for (std::uint64_t i = 0; i < 40; ++i) {
      const Environment env(derive_seed(9, i, 2), spec, 7);
      Rng rng = Rng::for_replica(9, i, StreamTag::Dynamics);
      const auto run = run_contact(env, 3.0, kOrigin, rng, opt);
      CHECK(run.layering_violations == 0);
      CHECK(run.audit.mismatches == 0);
      CHECK(run.max_rate_drift <= 1e-9);
      checks += run.rate_checks;
      // Ever-infected counts only grow, and recoveries only hit infected vertices.
      std::set<std::string> infected{Vertex{}.to_string()};
      std::set<std::string> ever = infected;
      for (const auto& e : run.event_log) {
        const auto key = e.vertex.to_string();
        if (e.infection) {
          REQUIRE(infected.count(key) == 0);
          infected.insert(key);
          ever.insert(key);
        } else {
          REQUIRE(infected.erase(key) == 1);
        }
      }
      CHECK(ever.size() == run.outcome.ever_infected);
    }
    CHECK(checks > 0);
  }

  TEST_CASE("contact: the first layer is hit with probability λ/(1+λ)") {
    // O has no in-neighbours: it infects layer 1 at total rate λ until its
    // single recovery. Stopping at layer 2 cannot hide a layer-1 infection.
    for (const std::uint32_t d : {1U, 8U}) {
      const double lambda = 1.5;
      const Environment env(0, WeightSpec::constant(1.0), d);
      constexpr int n = 40000;
      int hit = 0;
      ContactOptions opt;
      opt.stop_at_norm = 2;
      for (int i = 0; i < n; ++i) {
        Rng rng = Rng::for_replica(10 + d, static_cast<std::uint64_t>(i), StreamTag::Dynamics);
        const auto run = run_contact(env, lambda, kOrigin, rng, opt);
        hit += run.ever_infected_by_norm.count(1) > 0 ? 1 : 0;
      }
      const double p = lambda / (1 + lambda);
      CHECK(std::abs(hit / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n));
    }
  }

  TEST_CASE("contact: E|beta_1| = d(λ/d)/(1+λ/d)") {
    // Each out-neighbour of O races its rate-λ/d infection clock against O's
    // recovery; a subcritical rate keeps every run short and untruncated.
    const std::uint32_t d = 8;
    const double lambda = 0.8;
    const double c = lambda / d;
    const Environment env(0, WeightSpec::constant(1.0), d);
    constexpr int n = 60000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      Rng rng = Rng::for_replica(14, static_cast<std::uint64_t>(i), StreamTag::Dynamics);
      const auto run = run_contact(env, lambda, kOrigin, rng);
      REQUIRE(run.outcome.kind == OutcomeKind::Died);
      const auto it = run.ever_infected_by_norm.find(1);
      const double b1 = it == run.ever_infected_by_norm.end() ? 0.0 : static_cast<double>(it->second);
      s += b1;
      s2 += b1 * b1;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - d * c / (1 + c)) < 4 * se);
  }

  TEST_CASE("contact: survival grows with lambda") {
    LatticeExperiment e;
    e.kind = ProcessKind::Contact;
    e.d = 8;
    e.budget.pop_cap = 300;
    e.lambda = 2.0;
    const auto low = estimate_survival(WeightSpec::constant(1.0), e, 10000, 0.99, 12);
    e.lambda = 4.0;
    const auto high = estimate_survival(WeightSpec::constant(1.0), e, 10000, 0.99, 12);
    CHECK(high.ci_lo > low.ci_hi);
  }

  TEST_CASE("contact: layer stop reports reached/unreachable") {
    const Environment env(0, WeightSpec::constant(1.0), 6);
    ContactOptions opt;
    opt.stop_at_norm = 3;
    int reached = 0;
    int unreachable = 0;
    for (std::uint64_t i = 0; i < 500; ++i) {
      Rng rng = Rng::for_replica(13, i, StreamTag::Dynamics);
      const auto run = run_contact(env, 2.0, kOrigin, rng, opt);
      if (run.layer == LayerStatus::Reached) {
        ++reached;
        CHECK(run.ever_infected_by_norm.count(3) == 1);
      } else {
        REQUIRE(run.layer == LayerStatus::Unreachable);
        ++unreachable;
        CHECK(run.ever_infected_by_norm.count(3) == 0);
      }
    }
    CHECK(reached > 0);
    CHECK(unreachable > 0);
  }

  TEST_CASE("survival estimates: quenched seeds and job-count independence") {
    LatticeExperiment e;
    e.kind = ProcessKind::Sir;
    e.d = 6;
    e.lambda = 3.0;
    e.budget.pop_cap = 500;
    const auto spec = WeightSpec::bernoulli(0.7);
    CHECK(replica_environment_seed(e, 1, 0) != replica_environment_seed(e, 1, 1));
    CHECK(simulate_survival(spec, e, 200, 4, 1) == simulate_survival(spec, e, 200, 4, 3));
    e.quenched_seed = 1234;
    CHECK(replica_environment_seed(e, 1, 0) == 1234);
    CHECK(replica_environment_seed(e, 1, 99) == 1234);
    e.kind = ProcessKind::Contact;
    CHECK(simulate_survival(spec, e, 100, 4, 1) == simulate_survival(spec, e, 100, 4, 2));
  }

  TEST_CASE("initial vertices outside the lattice are rejected") {
    const Environment env(1, WeightSpec::constant(1.0), 3);
    Rng rng(1, 1);
    const std::vector<Vertex> bad{Vertex::unit(5)};
    CHECK_THROWS_AS(run_sir(env, 1.0, bad, 5, 10, rng), Error);
    CHECK_THROWS_AS(run_contact(env, 1.0, bad, rng), Error);
  }
}
