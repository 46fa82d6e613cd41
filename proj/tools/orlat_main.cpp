#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "orlat/config.hpp"
#include "orlat/error.hpp"
#include "orlat/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned jobs = 1;
  bool log = false;
  std::optional<std::uint64_t> quenched;
  std::optional<std::uint32_t> d;
  bool dump = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "experiment config (TOML)")->required();
  cmd->add_option("--seed", args.seed, "master seed (overrides the config)");
  cmd->add_option("--out", args.out, "output directory (overrides the config)");
  cmd->add_option("--jobs", args.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--log", args.log, "write a per-replica CSV log");
  cmd->add_option("--quenched", args.quenched, "freeze one environment seed across replicas");
}

bool is_config_error(orlat::ErrorCode code) {
  using orlat::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::NonNormalized:
    case ErrorCode::NegativeSupport:
    case ErrorCode::AllMassAtZero:
    case ErrorCode::EmptyLaw:
    case ErrorCode::InvalidSegment:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation lab for the weighted contact process on the oriented lattice"};
  app.require_subcommand(1);
  CommonArgs args;
  std::optional<orlat::Process> process;

  const auto simple = [&](const char* name, const char* help, orlat::Process p) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, args);
    cmd->callback([&process, p] { process = p; });
    return cmd;
  };
  simple("theta", "mean-field θ, critical rate and limit survival", orlat::Process::Theta);
  auto* fgrid = simple("fgrid", "finite-d extinction profile F_d", orlat::Process::Fgrid);
  fgrid->add_option("--d", args.d, "dimension (overrides the config's d list)")->check(CLI::PositiveNumber);
  simple("branching", "branching-process survival on the d-ary tree", orlat::Process::Branching);
  simple("sir", "SIR survival via the generation construction", orlat::Process::Sir);
  simple("contact", "contact-process survival (exact CTMC)", orlat::Process::Contact);
  simple("couple", "lattice/tree coupling success probability", orlat::Process::Couple);
  simple("gap", "layer extinction gap between SIR and contact", orlat::Process::Gap);
  auto* rwalk = app.add_subcommand("rwalk", "oriented random-walk collisions");
  rwalk->require_subcommand(1);
  auto* collide = rwalk->add_subcommand("collide", "collision probability of two walks");
  add_common(collide, args);
  collide->callback([&process] { process = orlat::Process::RwalkCollide; });
  auto* bound = rwalk->add_subcommand("bound", "second-moment survival lower bound");
  add_common(bound, args);
  bound->add_flag("--dump", args.dump, "write per-record CSV (T, sum h, sum f, case, R)");
  bound->callback([&process] { process = orlat::Process::RwalkBound; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    orlat::ExperimentConfig config = orlat::load_config(args.config, *process);
    if (args.seed) config.master_seed = *args.seed;
    if (args.out) config.out_dir = *args.out;
    if (args.quenched) config.quenched_seed = *args.quenched;
    if (args.d) config.dims = {*args.d};
    config.jobs = args.jobs;
    config.log = args.log;
    config.dump = args.dump;
    const auto summary = orlat::run_experiment(config);
    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const orlat::Error& e) {
    std::cerr << "orlat: " << e.what() << '\n';
    return is_config_error(e.code()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "orlat: " << e.what() << '\n';
    return kExitRuntime;
  }
}
