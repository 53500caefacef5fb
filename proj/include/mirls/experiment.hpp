#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mirls/problem.hpp"
#include "mirls/solver.hpp"

namespace mirls {

/// What to do when no sampling draw meets the row/column coverage bound.
enum class CoveragePolicy {
  strict,       // the trial fails with reason "coverage unattainable"
  accept_last,  // proceed with the last draw and flag the trial
};

std::string to_string(CoveragePolicy policy);
CoveragePolicy parse_coverage_policy(const std::string& name);

struct ExperimentSpec {
  Index d1 = 1000;
  Index d2 = 1000;
  Index r = 5;
  double kappa = 10.0;
  SpectrumDecay decay = SpectrumDecay::exponential;
  std::vector<double> rho_list{2.0};
  int trials = 10;
  std::uint64_t seed_base = 0;
  IRLSConfig solver;  // rank_estimate is taken from r
  CoveragePolicy coverage = CoveragePolicy::strict;
  int max_resamples = 1000;
  bool record_timing = true;  // false writes zero wall times (byte-stable reports)
  int threads = 1;

  void validate() const;
};

struct TrialResult {
  double rho = 0.0;
  Index m = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;  // reason when !ok
  bool coverage_met = false;
  int sampling_attempts = 0;
  double rel_error = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  StopReason stop = StopReason::max_outer;
  std::vector<double> recovered_spectrum;  // top-r singular values of the output
};

/// Ground truth, sampling, observation and solve for one seed. Sampling
/// failures come back as a failed record rather than an exception.
TrialResult run_single(const ExperimentSpec& spec, double rho, std::uint64_t seed);

struct SweepRow {
  double rho = 0.0;
  Index m = 0;
  int trials = 0;
  double median_rel_error = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double median_iters = 0.0;
  double median_wall_time_s = 0.0;
  int failed = 0;
  std::string note;
};

struct SweepResult {
  std::vector<SweepRow> rows;          // one per rho, in rho_list order
  std::vector<TrialResult> trials;     // sorted by (rho, seed)
};

/// `trials` seeded instances per rho (seeds seed_base, seed_base + 1, ...).
SweepResult run_sweep(const ExperimentSpec& spec);

/// Median and linear-interpolation quantiles; NaN for an empty sample.
double quantile(std::vector<double> values, double q);

enum class ReportFormat { csv, json };
ReportFormat parse_report_format(const std::string& name);

/// Columns: rho, m, trials, median_rel_error, q25, q75, median_iters,
/// median_wall_time_s, failed, note. Floats use 17 significant digits.
std::string format_report(const std::vector<SweepRow>& rows, ReportFormat format);
std::vector<SweepRow> parse_report(const std::string& text, ReportFormat format);
void emit_report(const std::vector<SweepRow>& rows, ReportFormat format, const std::string& path);

/// Worker count for parallel trials from MIRLS_THREADS (default 1).
int threads_from_env();

}  // namespace mirls
