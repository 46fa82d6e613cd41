#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orlat/config.hpp"

namespace orlat {

/// One line of the summary table. Empty optionals are written as empty fields.
struct SummaryRow {
  std::string d;
  std::optional<double> lambda;
  double point = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t censored = 0;
  std::optional<double> limit_survival;
  std::optional<double> abs_gap;
};

inline constexpr const char* kSummaryHeader = "d,lambda,point,ci_lo,ci_hi,censored,limit_survival,abs_gap";

/// Shortest round-trip decimal form, so identical doubles give identical bytes.
std::string format_number(double x);
std::string summary_line(const SummaryRow& row);

/// Files written by one experiment.
struct ReportFiles {
  std::filesystem::path summary_csv;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> extra;
};

/// Runs the configured sweep over (d, λ), writes the summary CSV, the JSON
/// manifest and any optional per-replica files into config.out_dir, and
/// returns the JSON summary. Output is a pure function of the config apart
/// from the manifest's "excluded" block. On failure the rows finished so far
/// are flushed, the manifest is marked "failed", and the error is rethrown.
nlohmann::json run_experiment(const ExperimentConfig& config, ReportFiles* files = nullptr);

/// Large-d survival limit, or 0 at or below the critical rate.
double limit_or_zero(const WeightSpec& spec, double lambda);

}  // namespace orlat
