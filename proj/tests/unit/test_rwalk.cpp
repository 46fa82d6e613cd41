#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "orlat/error.hpp"
#include "orlat/rwalk.hpp"

using namespace orlat;

namespace {

using Diff = std::array<int, 4>;

// Exact P(first coincidence <= horizon) for walks from O and e_1 in d = 4,
// propagating the law of (x-walk) - (aligned y-walk) over Z^4 and removing
// mass at its first visit to 0.
double collision_dp(int horizon) {
  std::map<Diff, double> law;
  // After the x-walk's solo step the difference is e_a - e_1.
  for (int a = 0; a < 4; ++a) {
    Diff v{-1, 0, 0, 0};
    v[a] += 1;
    law[v] += 0.25;
  }
  double hit = 0.0;
  const auto absorb = [&] {
    const auto it = law.find(Diff{0, 0, 0, 0});
    if (it != law.end()) {
      hit += it->second;
      law.erase(it);
    }
  };
  absorb();
  for (int k = 2; k <= horizon; ++k) {
    std::map<Diff, double> next;
    for (const auto& [v, p] : law) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          Diff w = v;
          w[a] += 1;
          w[b] -= 1;
          next[w] += p / 16.0;
        }
      }
    }
    law.swap(next);
    absorb();
  }
  return hit;
}

RConstants sample_constants() {
  RConstants c;
  c.lambda = 3.0;
  c.M = 2.0;
  c.mean_rho = 0.9;
  c.second_moment = 1.3;
  c.d = 10;
  return c;
}

CollisionRecord hand_record(std::uint64_t offset, std::vector<std::uint64_t> hits, std::uint64_t horizon) {
  return decompose(offset, hits, horizon);
}

}  // namespace

TEST_SUITE("rwalk") {
  TEST_CASE("decompose: runs, isolated coincidences and case tag") {
    const auto r = hand_record(0, {0, 1, 2, 5, 7, 8}, 20);
    CHECK(r.tau0 == 0);
    CHECK(r.T == 2);
    CHECK(r.taus == std::vector<std::uint64_t>{0, 7});
    CHECK(r.kappas == std::vector<std::uint64_t>{2, 8});
    CHECK(r.h == std::vector<std::uint64_t>{2, 1});
    CHECK(r.f == std::vector<std::uint64_t>{0, 1, 0});
    CHECK(r.case_tag == CaseTag::Tau0EqualsTau1);
    CHECK_FALSE(r.truncated);
    CHECK_NOTHROW(check_record(r));
  }

  TEST_CASE("decompose: late first meeting cut by the horizon") {
    const auto r = hand_record(2, {4, 9, 10, 12}, 12);
    CHECK(r.tau0 == 4);
    CHECK(r.T == 1);
    CHECK(r.h == std::vector<std::uint64_t>{1});
    CHECK(r.f == std::vector<std::uint64_t>{1, 1});
    CHECK(r.case_tag == CaseTag::Tau0Late);
    CHECK(r.truncated);
    CHECK_NOTHROW(check_record(r));
  }

  TEST_CASE("decompose: meeting at the offset before the first run") {
    const auto r = hand_record(3, {3, 6, 7}, 50);
    CHECK(r.case_tag == CaseTag::Tau0BeforeTau1);
    CHECK(r.f == std::vector<std::uint64_t>{1, 0});
    const auto none = hand_record(1, {}, 50);
    CHECK_FALSE(none.tau0.has_value());
    CHECK(none.case_tag == CaseTag::NoCollision);
    CHECK(none.f.empty());
    CHECK_NOTHROW(check_record(none));
  }

  TEST_CASE("check_record rejects inconsistent records") {
    const auto good = hand_record(0, {0, 1, 2, 5, 7, 8}, 20);
    auto bad = good;
    bad.h[0] = 3;
    CHECK_THROWS_AS(check_record(bad), Error);
    bad = good;
    bad.f.pop_back();
    CHECK_THROWS_AS(check_record(bad), Error);
    bad = good;
    bad.case_tag = CaseTag::Tau0Late;
    CHECK_THROWS_AS(check_record(bad), Error);
    bad = good;
    bad.taus[1] = 3;
    bad.kappas[1] = 4;
    bad.h[1] = 1;
    CHECK_THROWS_AS(check_record(bad), Error);
    bad = good;
    bad.offset = 1;
    try {
      check_record(bad);
      FAIL("expected InconsistentRecord");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InconsistentRecord);
    }
  }

  TEST_CASE("simulated records are always consistent") {
    for (std::uint64_t i = 0; i < 2000; ++i) {
      Rng rng = Rng::for_replica(1, i, StreamTag::Walks);
      const Vertex x = Vertex::unit(static_cast<std::uint32_t>(i % 3));
      const Vertex y = Vertex::from_steps(std::vector<std::uint32_t>{0, static_cast<std::uint32_t>(i % 5)});
      const auto r = simulate_pair(5, x, y, 60, rng);
      REQUIRE_NOTHROW(check_record(r));
      REQUIRE(r.offset == 1);
    }
  }

  TEST_CASE("identical starts meet at time 0") {
    Rng rng(2, 2);
    const auto r = simulate_pair(4, Vertex{}, Vertex{}, 10, rng);
    CHECK(r.tau0 == 0);
    Rng again(2, 2);
    CHECK(first_coincidence(4, Vertex{}, Vertex{}, 10, again) == 0);
  }

  TEST_CASE("argument errors") {
    Rng rng(3, 3);
    try {
      (void)simulate_pair(3, Vertex{}, Vertex::unit(0), 10, rng);
      FAIL("expected DimensionTooSmall");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionTooSmall);
    }
    try {
      (void)simulate_pair(4, Vertex::unit(0), Vertex{}, 10, rng);
      FAIL("expected NormOrderViolated");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NormOrderViolated);
    }
  }

  TEST_CASE("first_coincidence matches simulate_pair on the same stream") {
    for (std::uint64_t i = 0; i < 500; ++i) {
      Rng a = Rng::for_replica(4, i, StreamTag::Walks);
      Rng b = Rng::for_replica(4, i, StreamTag::Walks);
      const auto full = simulate_pair(6, Vertex{}, Vertex::unit(3), 40, a);
      REQUIRE(first_coincidence(6, Vertex{}, Vertex::unit(3), 40, b) == full.tau0);
    }
  }

  TEST_CASE("P(meet at the offset) = 1/d for O and e_1") {
    constexpr int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      Rng rng = Rng::for_replica(5, static_cast<std::uint64_t>(i), StreamTag::Walks);
      hits += first_coincidence(4, Vertex{}, Vertex::unit(0), 1, rng).has_value() ? 1 : 0;
    }
    CHECK(std::abs(hits / double(n) - 0.25) < 4 * std::sqrt(0.25 * 0.75 / n));
  }

  TEST_CASE("collision probability agrees with an exact dynamic program") {
    const double exact = collision_dp(20);
    const auto est = collision_prob(4, Vertex{}, Vertex::unit(0), 20, 100000, 0.999, 6);
    INFO("exact=" << exact << " point=" << est.point);
    CHECK(est.ci_lo <= exact);
    CHECK(exact <= est.ci_hi);
  }

  TEST_CASE("R: no collision gives 1") {
    CHECK(r_value(hand_record(0, {}, 10), sample_constants()) == 1.0);
  }

  TEST_CASE("R: closed forms in each case") {
    const auto c = sample_constants();
    const double g = 1 + c.lambda * c.M * c.M / c.d;
    const double edge = c.lambda * c.second_moment / c.d;
    // One isolated late meeting: T = 0, H = 0, S = 1.
    const double late = 2 * std::pow(g, 4) * std::pow(c.M, 4) / std::pow(c.second_moment, 2);
    CHECK(r_value(hand_record(0, {3}, 10), c) == doctest::Approx(late).epsilon(1e-12));
    // One run [0, 1] opening at τ_0: T = 1, H = 1, S = 0.
    const double equal =
        2 * std::pow(g, 5) * std::pow(c.M, 5) / (edge * std::pow(c.second_moment, 2) * c.mean_rho);
    CHECK(r_value(hand_record(0, {0, 1}, 10), c) == doctest::Approx(equal).epsilon(1e-12));
    // Isolated meeting at the offset then one run: T = 1, H = 1, S = f_0 = 1.
    const double before =
        4 * std::pow(g, 9) * std::pow(c.M, 9) / (edge * std::pow(c.second_moment, 4) * c.mean_rho);
    CHECK(r_value(hand_record(0, {0, 4, 5}, 10), c) == doctest::Approx(before).epsilon(1e-12));
  }

  TEST_CASE("R: log form agrees with the direct product on random records") {
    const auto c = sample_constants();
    const double g = 1 + c.lambda * c.M * c.M / c.d;
    const double edge = c.lambda * c.second_moment / c.d;
    Rng rng(7, 7);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<std::uint64_t> hits;
      const std::uint64_t offset = rng.below(3);
      for (std::uint64_t k = offset; k < offset + 30; ++k) {
        if (rng.bernoulli(0.3)) hits.push_back(k);
      }
      const auto r = hand_record(offset, hits, 100);
      double direct = 1.0;
      if (r.tau0) {
        double T = static_cast<double>(r.T);
        double H = 0.0;
        for (const auto h : r.h) H += static_cast<double>(h);
        double S = 0.0;
        for (const auto f : r.f) S += static_cast<double>(f);
        double shift = 0.0;
        if (r.case_tag != CaseTag::Tau0Late) {
          shift = 1.0;
          if (r.case_tag == CaseTag::Tau0EqualsTau1) S -= static_cast<double>(r.f.front());
        }
        direct = std::pow(2.0, T + S) * std::pow(g, 4 * T + 2 * H + 4 * S - shift) *
                 std::pow(c.M, 6 * T + 4 * S - shift) / std::pow(edge, H) /
                 std::pow(c.second_moment, 3 * T + 2 * S - shift) / std::pow(c.mean_rho, shift);
      }
      REQUIRE(std::abs(log_r_value(r, c) - std::log(direct)) < 1e-9);
    }
  }

  TEST_CASE("R rejects non-positive constants") {
    auto c = sample_constants();
    c.mean_rho = 0.0;
    CHECK_THROWS_AS(r_value(hand_record(0, {0}, 10), c), Error);
  }

  TEST_CASE("second-moment bound lies in (0, 1]") {
    const auto spec = WeightSpec::uniform(0.0, 1.0);
    const std::vector<Vertex> A{Vertex{}, Vertex::unit(0), Vertex::unit(1)};
    const auto lb = survival_lower_bound(A, spec, 4.0, 8, 200, 300, 9, 1, true);
    CHECK(lb.pairs.size() == 9);
    CHECK(lb.samples.size() == 9 * 300);
    CHECK(lb.bound > 0.0);
    CHECK(lb.bound <= 1.0);
    CHECK(lb.bound == doctest::Approx(std::min(1.0, 1.0 / lb.mean_r)));
    CHECK(lb.clipped == (1.0 / lb.mean_r > 1.0));
    for (const auto& p : lb.pairs) CHECK(p.x.norm() <= p.y.norm());
    // The diagonal pairs meet at time 0 in every run.
    CHECK(lb.pairs[0].collisions == 300);
    const auto again = survival_lower_bound(A, spec, 4.0, 8, 200, 300, 9, 3);
    CHECK(again.mean_r == lb.mean_r);
  }
}
