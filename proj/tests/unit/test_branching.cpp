#include <doctest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include "helpers.hpp"
#include "orlat/branching.hpp"
#include "orlat/fgrid.hpp"

using namespace orlat;

namespace {

// A no-op observer forces the per-individual simulation path.
const GenerationObserver kIgnore = [](std::uint64_t, std::span<const Individual>) {};

SurvivalEstimate per_individual(const WeightSpec& spec, const BranchingParams& p, std::uint64_t n, std::uint64_t seed) {
  std::vector<Outcome> out(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Rng rng = Rng::for_replica(seed, i, StreamTag::Dynamics);
    out[i] = run_branching(spec, p, rng, kIgnore);
  }
  return tally(out, 0.99);
}

}  // namespace

TEST_SUITE("branching") {
  TEST_CASE("a weight-0 root dies in generation 1") {
    BranchingParams p;
    p.root_weight = 0.0;
    for (const auto& spec : {WeightSpec::constant(1.0), WeightSpec::uniform(0.0, 1.0)}) {
      for (std::uint64_t i = 0; i < 50; ++i) {
        Rng a = Rng::for_replica(1, i, StreamTag::Dynamics);
        Rng b = Rng::for_replica(1, i, StreamTag::Dynamics);
        const auto fast = run_branching(spec, p, a);
        const auto slow = run_branching(spec, p, b, kIgnore);
        CHECK(fast.kind == OutcomeKind::Died);
        CHECK(fast.generation == 1);
        CHECK(slow.kind == OutcomeKind::Died);
        CHECK(slow.generation == 1);
      }
    }
  }

  TEST_CASE("fixed seed gives identical outcomes") {
    BranchingParams p;
    for (const auto& spec : {WeightSpec::constant(1.0), WeightSpec::uniform(0.0, 2.0)}) {
      Rng a = Rng::for_replica(5, 17, StreamTag::Dynamics);
      Rng b = Rng::for_replica(5, 17, StreamTag::Dynamics);
      CHECK(run_branching(spec, p, a) == run_branching(spec, p, b));
      CHECK(simulate_branching(spec, p, 300, 9, 1) == simulate_branching(spec, p, 300, 9, 3));
    }
  }

  TEST_CASE("every member of W_n has depth n and weight in the support") {
    const auto spec = validate({{{0.0, 0.2}}, {{0.5, 2.0, 0.8}}});
    BranchingParams p;
    p.lambda = 3.0;
    p.pop_cap = 5000;
    for (std::uint64_t i = 0; i < 100; ++i) {
      Rng rng = Rng::for_replica(2, i, StreamTag::Dynamics);
      std::uint64_t last = 0;
      run_branching(spec, p, rng, [&](std::uint64_t n, std::span<const Individual> gen) {
        CHECK(n == last + (n == 0 ? 0 : 1));
        last = n;
        for (const auto& ind : gen) {
          REQUIRE(ind.depth == n);
          REQUIRE(ind.weight >= 0.0);
          REQUIRE(ind.weight <= 2.0);
        }
      });
    }
  }

  TEST_CASE("subcritical runs die out") {
    BranchingParams p;
    p.lambda = 0.5;
    p.horizon = 500;
    const auto outcomes = simulate_branching(WeightSpec::constant(1.0), p, 10000, 21);
    std::uint64_t died = 0;
    for (const auto& o : outcomes) died += o.kind == OutcomeKind::Died ? 1 : 0;
    CHECK(died >= 9990);
    const auto est = estimate_branching_survival(WeightSpec::constant(1.0), p, 10000, 0.99, 22);
    CHECK(est.point <= 0.005);
  }

  TEST_CASE("generation-size sampler agrees with per-individual simulation") {
    const auto one = WeightSpec::constant(1.0);
    for (const auto& [lambda, d, root] : std::vector<std::tuple<double, std::uint32_t, double>>{
             {2.0, 5, 1.0}, {4.0, 3, 1.0}, {2.5, 8, 0.5}}) {
      BranchingParams p;
      p.lambda = lambda;
      p.d = d;
      p.root_weight = root;
      p.pop_cap = 300;
      const auto fast = estimate_branching_survival(one, p, 20000, 0.99, 31);
      const auto slow = per_individual(one, p, 20000, 32);
      CHECK(testing::two_proportion_z(fast.survived, 20000, slow.survived, 20000) < 4.0);
    }
  }

  TEST_CASE("agreement with the fixed-point oracle (constant law)") {
    const auto one = WeightSpec::constant(1.0);
    for (const auto& [d, lambda] : std::vector<std::pair<std::uint32_t, double>>{{3, 2.0}, {5, 2.0}, {5, 4.0}}) {
      BranchingParams p;
      p.lambda = lambda;
      p.d = d;
      const auto est = estimate_branching_survival(one, p, 20000, 0.99, 100 + d);
      const double oracle = branching_survival_d(solve_fgrid(one, lambda, d), one);
      INFO("d=" << d << " lambda=" << lambda << " oracle=" << oracle << " point=" << est.point);
      CHECK(est.ci_lo <= oracle);
      CHECK(oracle <= est.ci_hi);
      CHECK(est.censored == 0);
    }
  }

  TEST_CASE("agreement with the fixed-point oracle (tilted child weights)") {
    const auto spec = validate({{{0.0, 0.25}}, {{0.0, 2.0, 0.75}}});
    BranchingParams p;
    p.lambda = 4.0;
    p.d = 4;
    p.pop_cap = 3000;
    const auto est = estimate_branching_survival(spec, p, 6000, 0.99, 77);
    const double oracle = branching_survival_d(solve_fgrid(spec, p.lambda, p.d), spec);
    INFO("oracle=" << oracle << " point=" << est.point);
    CHECK(est.ci_lo <= oracle);
    CHECK(oracle <= est.ci_hi);
  }

  TEST_CASE("survival is non-decreasing in the root weight") {
    const auto spec = WeightSpec::uniform(0.0, 2.0);
    BranchingParams p;
    p.lambda = 2.0;
    p.d = 5;
    p.pop_cap = 2000;
    double prev = -1.0;
    double prev_half = 0.0;
    for (const double s : {0.0, 0.5, 1.0, 2.0}) {
      p.root_weight = s;
      const auto est = estimate_branching_survival(spec, p, 3000, 0.99, 55);
      CHECK(est.point >= prev - (est.half_width() + prev_half));
      prev = est.point;
      prev_half = est.half_width();
    }
    CHECK(prev > 0.2);
  }

  TEST_CASE("bad parameters are rejected") {
    BranchingParams p;
    p.d = 0;
    Rng rng(1, 1);
    CHECK_THROWS(run_branching(WeightSpec::constant(1.0), p, rng));
    CHECK_THROWS(simulate_branching(WeightSpec::constant(1.0), BranchingParams{}, 0, 1));
  }
}
