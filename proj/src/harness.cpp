#include "orlat/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "orlat/branching.hpp"
#include "orlat/coupling.hpp"
#include "orlat/error.hpp"
#include "orlat/fgrid.hpp"
#include "orlat/lattice.hpp"
#include "orlat/meanfield.hpp"
#include "orlat/rwalk.hpp"
#include "orlat/version.hpp"

namespace orlat {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

std::string summary_line(const SummaryRow& row) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  std::ostringstream s;
  s << row.d << ',' << opt(row.lambda) << ',' << format_number(row.point) << ',' << format_number(row.ci_lo) << ','
    << format_number(row.ci_hi) << ',' << row.censored << ',' << opt(row.limit_survival) << ',' << opt(row.abs_gap);
  return s.str();
}

double limit_or_zero(const WeightSpec& spec, double lambda) {
  return lambda > critical_rate(spec) ? survival_limit(spec, lambda) : 0.0;
}

namespace {

using nlohmann::json;

constexpr std::uint64_t kCellTag = 0xCE11;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json estimate_json(const SurvivalEstimate& e) {
  return {{"survived", e.survived}, {"died", e.died},   {"censored_horizon", e.censored},
          {"n_runs", e.n_runs()},   {"point", e.point}, {"ci_lo", e.ci_lo},
          {"ci_hi", e.ci_hi},       {"confidence", e.confidence}};
}

SummaryRow survival_row(std::uint32_t d, double lambda, const SurvivalEstimate& e, double limit) {
  return {std::to_string(d), lambda, e.point, e.ci_lo, e.ci_hi, e.censored, limit, std::abs(e.point - limit)};
}

class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& c) : c_(c), stem_(to_string(c.process)) {}

  json run_checked(ReportFiles* files) {
    std::error_code ec;
    std::filesystem::create_directories(c_.out_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + c_.out_dir.string() + ": " + ec.message());
    const auto started = std::chrono::steady_clock::now();
    const std::string started_utc = utc_now();
    try {
      sweep();
    } catch (const std::exception& e) {
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      flush(e.what(), started_utc, wall);
      if (files != nullptr) *files = files_;
      throw;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    flush({}, started_utc, wall);
    if (files != nullptr) *files = files_;
    return summary();
  }

 private:
  std::uint64_t cell_seed() { return derive_seed(c_.master_seed, cell_index_++, kCellTag); }

  void sweep() {
    switch (c_.process) {
      case Process::Theta: return theta();
      case Process::Fgrid: return each_cell([&](auto d, auto l) { fgrid(d, l); });
      case Process::Branching: return each_cell([&](auto d, auto l) { branching(d, l); });
      case Process::Sir: return each_cell([&](auto d, auto l) { lattice(d, l, ProcessKind::Sir); });
      case Process::Contact: return each_cell([&](auto d, auto l) { lattice(d, l, ProcessKind::Contact); });
      case Process::Couple: return each_cell([&](auto d, auto l) { couple(d, l); });
      case Process::Gap: return each_cell([&](auto d, auto l) { gap(d, l); });
      case Process::RwalkCollide:
        for (const auto d : c_.dims) collide(d);
        return;
      case Process::RwalkBound: return each_cell([&](auto d, auto l) { bound(d, l); });
    }
  }

  template <typename Fn>
  void each_cell(Fn&& fn) {
    for (const auto d : c_.dims) {
      for (const double l : c_.lambdas) fn(d, l);
    }
  }

  void theta() {
    const double lambda_c = critical_rate(c_.weights);
    for (const double l : c_.lambdas) {
      json r = {{"lambda", l}, {"lambda_c", lambda_c}};
      if (l > lambda_c) {
        const auto sol = solve_theta(c_.weights, l);
        r["theta"] = sol.theta;
        r["limit_survival"] = sol.limit_survival;
        r["residual"] = sol.residual;
        rows_.push_back({"inf", l, sol.limit_survival, sol.limit_survival, sol.limit_survival, 0, sol.limit_survival, 0.0});
      } else {
        r["theta"] = nullptr;
        r["limit_survival"] = 0.0;
        r["residual"] = nullptr;
        r["error"] = "SubcriticalRate";
        rows_.push_back({"inf", l, 0.0, 0.0, 0.0, 0, 0.0, 0.0});
      }
      results_.push_back(r);
    }
  }

  void fgrid(std::uint32_t d, double l) {
    FGridOptions opt;
    opt.grid_points = c_.grid_points;
    opt.tol = c_.tol;
    const FGrid grid = solve_fgrid(c_.weights, l, d, opt);
    const double survival = branching_survival_d(grid, c_.weights);
    const double limit = limit_or_zero(c_.weights, l);
    const bool super = l > critical_rate(c_.weights);
    const LimitProfile profile = super ? limit_profile(c_.weights, l) : LimitProfile{l, 0.0};

    std::ostringstream csv;
    csv << "s,F_d,limit_profile,abs_gap\n";
    for (std::size_t i = 0; i < grid.s_nodes.size(); ++i) {
      const double lim = profile(grid.s_nodes[i]);
      csv << format_number(grid.s_nodes[i]) << ',' << format_number(grid.values[i]) << ',' << format_number(lim)
          << ',' << format_number(std::abs(grid.values[i] - lim)) << '\n';
    }
    const auto path = c_.out_dir / ("fgrid_profile_d" + std::to_string(d) + "_lambda" + format_number(l) + ".csv");
    write_text(path, csv.str());
    files_.extra.push_back(path);

    const double sup_gap = sup_gap_to_limit(grid, profile);
    results_.push_back({{"d", d},
                        {"lambda", l},
                        {"sup_gap", sup_gap},
                        {"iterations", grid.iterations},
                        {"residual", grid.sup_residual},
                        {"laguerre_nodes", grid.laguerre_nodes},
                        {"max_slope", max_adjacent_slope(grid)},
                        {"branching_survival", survival},
                        {"limit_survival", limit},
                        {"profile_csv", path.filename().string()}});
    rows_.push_back({std::to_string(d), l, survival, survival, survival, 0, limit, std::abs(survival - limit)});
  }

  void log_outcomes(std::uint32_t d, double l, const std::vector<Outcome>& outcomes, bool continuous) {
    if (!c_.log) return;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const Outcome& o = outcomes[i];
      log_ << d << ',' << format_number(l) << ',' << i << ',' << to_string(o.kind) << ','
           << (continuous ? format_number(o.time) : std::to_string(o.generation)) << ',' << o.ever_infected << '\n';
    }
  }

  void branching(std::uint32_t d, double l) {
    BranchingParams p;
    p.lambda = l;
    p.d = d;
    p.root_weight = c_.root_weight;
    p.horizon = c_.horizon;
    p.pop_cap = c_.pop_cap;
    const auto outcomes = simulate_branching(c_.weights, p, c_.n_runs, cell_seed(), c_.jobs);
    const auto est = tally(outcomes, c_.confidence);
    log_outcomes(d, l, outcomes, false);
    json r = estimate_json(est);
    r["d"] = d;
    r["lambda"] = l;
    r["oracle_fgrid"] = nullptr;
    if (c_.fgrid_oracle) {
      FGridOptions opt;
      opt.grid_points = c_.grid_points;
      opt.tol = c_.tol;
      const FGrid grid = solve_fgrid(c_.weights, l, d, opt);
      r["oracle_fgrid"] = c_.root_weight ? 1.0 - eval_f(grid, *c_.root_weight) : branching_survival_d(grid, c_.weights);
    }
    results_.push_back(r);
    rows_.push_back(survival_row(d, l, est, limit_or_zero(c_.weights, l)));
  }

  void lattice(std::uint32_t d, double l, ProcessKind kind) {
    LatticeExperiment e;
    e.kind = kind;
    e.lambda = l;
    e.d = d;
    e.initial = c_.initial;
    e.budget = {c_.horizon, c_.t_max, c_.pop_cap};
    e.quenched_seed = c_.quenched_seed;
    const auto outcomes = simulate_survival(c_.weights, e, c_.n_runs, cell_seed(), c_.jobs);
    const auto est = tally(outcomes, c_.confidence);
    log_outcomes(d, l, outcomes, kind == ProcessKind::Contact);
    json r = estimate_json(est);
    r["d"] = d;
    r["lambda"] = l;
    results_.push_back(r);
    rows_.push_back(survival_row(d, l, est, limit_or_zero(c_.weights, l)));
  }

  [[nodiscard]] double sigma_for(double l) const { return c_.sigma ? *c_.sigma : default_sigma(c_.weights, l); }

  void couple(std::uint32_t d, double l) {
    const double sigma = sigma_for(l);
    const auto est = estimate_coupling(c_.weights, l, d, sigma, c_.n_runs, c_.confidence, cell_seed(), c_.jobs);
    json hist;
    for (const auto cause : {FailureCause::None, FailureCause::SharedTargetHit, FailureCause::ExtraTreeBirth}) {
      hist[std::string(to_string(cause))] = est.failure_histogram[static_cast<std::size_t>(cause)];
    }
    results_.push_back({{"d", d},
                        {"lambda", l},
                        {"sigma", sigma},
                        {"sigma_window_degenerate", sigma_window_degenerate(c_.weights, l)},
                        {"target_steps", est.target_steps},
                        {"p_success", est.p_success},
                        {"ci", {est.ci_lo, est.ci_hi}},
                        {"failure_histogram", hist}});
    rows_.push_back({std::to_string(d), l, est.p_success, est.ci_lo, est.ci_hi, 0, 1.0, 1.0 - est.p_success});
  }

  void gap(std::uint32_t d, double l) {
    const double sigma = sigma_for(l);
    const auto est = extinction_gap(c_.weights, l, d, sigma, c_.n_runs, c_.confidence, cell_seed(), c_.t_max, c_.jobs);
    results_.push_back({{"d", d},
                        {"lambda", l},
                        {"sigma", sigma},
                        {"layer", est.layer},
                        {"gap", est.gap},
                        {"ci_width", est.ci_width},
                        {"p_v_empty", est.v_empty.point},
                        {"p_beta_empty", est.beta_empty.point},
                        {"beta_undecided", est.beta_empty.censored}});
    rows_.push_back({std::to_string(d), l, est.gap, est.gap - est.ci_width, est.gap + est.ci_width,
                     est.beta_empty.censored, 0.0, std::abs(est.gap)});
  }

  void collide(std::uint32_t d) {
    const bool swap = c_.walk_x.norm() > c_.walk_y.norm();
    const Vertex& x = swap ? c_.walk_y : c_.walk_x;
    const Vertex& y = swap ? c_.walk_x : c_.walk_y;
    const auto est = collision_prob(d, x, y, c_.horizon, c_.n_runs, c_.confidence, cell_seed(), c_.jobs);
    results_.push_back({{"d", d},
                        {"x", x.to_string()},
                        {"y", y.to_string()},
                        {"horizon", c_.horizon},
                        {"hits", est.hits},
                        {"n_runs", est.n_runs},
                        {"estimate", est.point},
                        {"ci", {est.ci_lo, est.ci_hi}}});
    rows_.push_back({std::to_string(d), std::nullopt, est.point, est.ci_lo, est.ci_hi, 0, 0.0, est.point});
  }

  void bound(std::uint32_t d, double l) {
    const auto lb = survival_lower_bound(c_.bound_set, c_.weights, l, d, c_.horizon, c_.n_runs, cell_seed(), c_.jobs,
                                         c_.dump);
    const double z = normal_two_sided_z(c_.confidence);
    const double hi_mean = lb.mean_r + z * lb.std_error;
    const double lo_mean = lb.mean_r - z * lb.std_error;
    const double ci_lo = std::min(1.0, 1.0 / hi_mean);
    const double ci_hi = lo_mean > 0.0 ? std::min(1.0, 1.0 / lo_mean) : 1.0;
    json pairs = json::array();
    for (const auto& p : lb.pairs) {
      pairs.push_back({{"x", p.x.to_string()},
                       {"y", p.y.to_string()},
                       {"mean_r", p.mean_r},
                       {"std_error", p.std_error},
                       {"collisions", p.collisions},
                       {"truncated", p.truncated}});
    }
    results_.push_back({{"d", d},
                        {"lambda", l},
                        {"bound", lb.bound},
                        {"clipped", lb.clipped},
                        {"mean_r", lb.mean_r},
                        {"std_error", lb.std_error},
                        {"pairs", pairs}});
    rows_.push_back({std::to_string(d), l, lb.bound, ci_lo, ci_hi, 0, limit_or_zero(c_.weights, l), std::nullopt});
    if (c_.dump) {
      for (const auto& s : lb.samples) {
        std::uint64_t sum_h = 0;
        std::uint64_t sum_f = 0;
        for (const auto h : s.record.h) sum_h += h;
        for (const auto f : s.record.f) sum_f += f;
        dump_ << d << ',' << format_number(l) << ',' << s.pair << ',' << s.record.T << ',' << sum_h << ',' << sum_f
              << ',' << to_string(s.record.case_tag) << ',' << (s.record.truncated ? 1 : 0) << ','
              << format_number(s.r) << '\n';
      }
    }
  }

  void flush(const std::string& failure, const std::string& started_utc, double wall) {
    std::ostringstream csv;
    csv << kSummaryHeader << '\n';
    for (const auto& row : rows_) csv << summary_line(row) << '\n';
    files_.summary_csv = c_.out_dir / (stem_ + ".csv");
    write_text(files_.summary_csv, csv.str());

    if (c_.log && (c_.process == Process::Branching || c_.process == Process::Sir || c_.process == Process::Contact)) {
      const auto path = c_.out_dir / (stem_ + "_replicas.csv");
      write_text(path, "d,lambda,replica,outcome,generations_or_time,ever_infected\n" + log_.str());
      files_.extra.push_back(path);
    }
    if (c_.dump && c_.process == Process::RwalkBound) {
      const auto path = c_.out_dir / (stem_ + "_records.csv");
      write_text(path, "d,lambda,pair,T,sum_h,sum_f,case,truncated,R\n" + dump_.str());
      files_.extra.push_back(path);
    }

    json manifest = {{"process", stem_},
                     {"status", failure.empty() ? "complete" : "failed"},
                     {"config", config_echo(c_)},
                     {"seeds", {{"master_seed", c_.master_seed}, {"cell_tag", kCellTag}}},
                     {"versions", {{"orlat", kVersion}, {"compiler", kCompiler}, {"cxx_standard", __cplusplus}}},
                     {"summary_csv", files_.summary_csv.filename().string()},
                     {"results", results_},
                     {"excluded", {{"started_utc", started_utc}, {"wall_seconds", wall}}}};
    if (!failure.empty()) manifest["error"] = failure;
    files_.manifest = c_.out_dir / (stem_ + "_manifest.json");
    write_text(files_.manifest, manifest.dump(2) + "\n");
  }

  [[nodiscard]] json summary() const {
    json files = json::array();
    for (const auto& p : files_.extra) files.push_back(p.string());
    return {{"process", stem_},
            {"results", results_},
            {"summary_csv", files_.summary_csv.string()},
            {"manifest", files_.manifest.string()},
            {"files", files}};
  }

  const ExperimentConfig& c_;
  std::string stem_;
  std::uint64_t cell_index_ = 0;
  std::vector<SummaryRow> rows_;
  json results_ = json::array();
  std::ostringstream log_;
  std::ostringstream dump_;
  ReportFiles files_;
};

}  // namespace

nlohmann::json run_experiment(const ExperimentConfig& config, ReportFiles* files) {
  Experiment e(config);
  return e.run_checked(files);
}

}  // namespace orlat
