#include <doctest.h>

#include <string>

#include "orlat/config.hpp"
#include "orlat/error.hpp"

using namespace orlat;

namespace {

ErrorCode parse_error(const std::string& text, Process p) {
  try {
    (void)parse_config(text, p);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config was accepted: " << text);
  return ErrorCode::BadArguments;
}

const std::string kLaw = "weights = { atoms = [[0.0, 0.5]], segments = [[1.0, 2.0, 0.5]] }\n";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("process names round-trip") {
    for (const Process p : {Process::Theta, Process::Fgrid, Process::Branching, Process::Sir, Process::Contact,
                            Process::Couple, Process::Gap, Process::RwalkCollide, Process::RwalkBound}) {
      CHECK(parse_process(to_string(p)) == p);
    }
    CHECK_FALSE(parse_process("percolation").has_value());
  }

  TEST_CASE("full config is parsed") {
    const std::string text = kLaw +
                             "process = \"contact\"\n"
                             "master_seed = 42\nn_runs = 77\nconfidence = 0.95\n"
                             "lambda = [2, 3.5]\nd = [4, 9]\n"
                             "horizon = 12\nt_max = 50.5\npop_cap = 999\n"
                             "initial = [[0, 1], [2, 2]]\n"
                             "root_weight = 1.5\nout = \"results\"\nquenched_seed = 0\n"
                             "[fgrid]\ngrid_points = 65\ntol = 1e-9\noracle = false\n"
                             "[coupling]\nsigma = 0.4\n"
                             "[rwalk]\nx = []\ny = [3]\nset = [[], [1]]\n";
    const auto c = parse_config(text, Process::Contact);
    CHECK(c.process == Process::Contact);
    CHECK(c.weights.bound() == 2.0);
    CHECK(c.weights.mean() == doctest::Approx(0.75));
    CHECK(c.master_seed == 42);
    CHECK(c.n_runs == 77);
    CHECK(c.confidence == 0.95);
    CHECK(c.lambdas == std::vector<double>{2.0, 3.5});
    CHECK(c.dims == std::vector<std::uint32_t>{4, 9});
    CHECK(c.horizon == 12);
    CHECK(c.t_max == 50.5);
    CHECK(c.pop_cap == 999);
    REQUIRE(c.initial.size() == 2);
    CHECK(c.initial[0].to_string() == Vertex::from_steps(std::vector<std::uint32_t>{0, 1}).to_string());
    CHECK(c.initial[1].coord(2) == 2);
    CHECK(c.root_weight == 1.5);
    CHECK(c.out_dir == "results");
    CHECK(c.quenched_seed == 0);
    CHECK(c.grid_points == 65);
    CHECK(c.tol == 1e-9);
    CHECK_FALSE(c.fgrid_oracle);
    CHECK(c.sigma == 0.4);
    CHECK(c.walk_x.is_origin());
    CHECK(c.walk_y == Vertex::unit(3));
    CHECK(c.bound_set.size() == 2);
  }

  TEST_CASE("defaults depend on the process") {
    const auto b = parse_config(kLaw, Process::Branching);
    CHECK(b.horizon == 200);
    CHECK(b.pop_cap == 100000);
    const auto s = parse_config(kLaw, Process::Sir);
    CHECK(s.horizon == 150);
    CHECK(s.pop_cap == 50000);
    CHECK(s.n_runs == 1000);
    CHECK(s.confidence == 0.99);
    CHECK(s.t_max == 300.0);
    CHECK(s.lambdas == std::vector<double>{2.0});
    CHECK(s.dims == std::vector<std::uint32_t>{8});
    REQUIRE(s.initial.size() == 1);
    CHECK(s.initial[0].is_origin());
    CHECK_FALSE(s.sigma.has_value());
    const auto w = parse_config(kLaw, Process::RwalkBound);
    CHECK(w.horizon == 1000);
  }

  TEST_CASE("scalar lambda and d are accepted") {
    const auto c = parse_config(kLaw + "lambda = 3\nd = 6\n", Process::Sir);
    CHECK(c.lambdas == std::vector<double>{3.0});
    CHECK(c.dims == std::vector<std::uint32_t>{6});
  }

  TEST_CASE("weights may be omitted only for collision runs") {
    CHECK_NOTHROW(parse_config("d = [4]\n", Process::RwalkCollide));
    CHECK(parse_error("d = [4]\n", Process::Sir) == ErrorCode::ConfigInvalid);
  }

  TEST_CASE("the process key must match the subcommand") {
    CHECK_NOTHROW(parse_config(kLaw + "process = \"rwalk\"\n", Process::RwalkBound));
    CHECK_NOTHROW(parse_config(kLaw + "process = \"sir\"\n", Process::Sir));
    CHECK(parse_error(kLaw + "process = \"sir\"\n", Process::Contact) == ErrorCode::ConfigInvalid);
  }

  TEST_CASE("invalid configs are rejected with ConfigInvalid") {
    for (const std::string bad :
         {"colour = 1\n", "n_runs = 0\n", "n_runs = 2.5\n", "confidence = 1.0\n", "lambda = [-1]\n",
          "lambda = []\n", "d = [0]\n", "d = \"eight\"\n", "t_max = 0\n", "root_weight = 3.0\n",
          "initial = [[5]]\nd = [4]\n", "[fgrid]\nsteps = 4\n", "[coupling]\nsigma = 0\n", "[rwalk]\nset = []\n",
          "horizon = -1\n", "master_seed = -3\n", "out = \"\"\n", "lambda = [2\n"}) {
      INFO(bad);
      CHECK(parse_error(kLaw + bad, Process::Contact) == ErrorCode::ConfigInvalid);
    }
    CHECK(parse_error("weights = 1\n", Process::Sir) == ErrorCode::ConfigInvalid);
    CHECK(parse_error("weights = { atoms = [[1.0]] }\n", Process::Sir) == ErrorCode::ConfigInvalid);
    CHECK(parse_error("weights = { points = [] }\n", Process::Sir) == ErrorCode::ConfigInvalid);
  }

  TEST_CASE("weight-law errors keep their own codes") {
    CHECK(parse_error("weights = { atoms = [[1.0, 0.6]] }\n", Process::Sir) == ErrorCode::NonNormalized);
    CHECK(parse_error("weights = { atoms = [[0.0, 1.0]] }\n", Process::Sir) == ErrorCode::AllMassAtZero);
    CHECK(parse_error("weights = { segments = [[2.0, 1.0, 1.0]] }\n", Process::Sir) == ErrorCode::InvalidSegment);
    CHECK(parse_error("weights = {}\n", Process::Sir) == ErrorCode::EmptyLaw);
  }

  TEST_CASE("missing file") {
    try {
      (void)load_config("/nonexistent/orlat.toml", Process::Theta);
      FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigInvalid);
    }
  }

  TEST_CASE("echo reports the normalized config") {
    const auto c = parse_config(kLaw + "lambda = [2.5]\n", Process::Sir);
    const auto j = config_echo(c);
    CHECK(j["process"] == "sir");
    CHECK(j["lambda"][0] == 2.5);
    CHECK(j["weights"]["M"] == 2.0);
    CHECK(j["weights"]["epsilon_gap"] == true);
    CHECK(j["sigma"].is_null());
  }
}
