#pragma once

#include "rankmatch/asymptotics.hpp"
#include "rankmatch/matcher.hpp"
#include "rankmatch/noise.hpp"
#include "rankmatch/templates.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rankmatch {

/// One Monte Carlo study: repeated estimation under a fixed model.
struct RunConfig {
  PeriodicTemplate tmpl = PeriodicTemplate::builtin_a();
  std::string template_name = "A";
  NoiseModel noise = NoiseModel::gaussian();
  double theta_star = 0.0;
  Eigen::Index n = 2000;
  int reps = 300;
  std::vector<Method> methods = {Method::Rank, Method::Pearson};
  std::uint64_t master_seed = 1;
  int workers = 1;
  RefineOpts refine;
  QuadratureConfig quad = QuadratureConfig::from_env();

  static RunConfig from_json(const nlohmann::json& spec);
  nlohmann::json to_json() const;
};

struct ReplicateRow {
  int rep = 0;
  Method method = Method::Rank;
  double theta_hat = 0.0;
  double abs_err = 0.0;    // wrap-around distance to theta_star
  double sqrtn_err = 0.0;  // sqrt(n) * signed wrap-around error
};

struct MethodSummary {
  Method method = Method::Rank;
  int count = 0;
  double mean_abs_err = 0.0;
  double median_abs_err = 0.0;
  double var_sqrtn_err = 0.0;   // sample variance of sqrt(n)*error
  double avar_predicted = 0.0;  // limit variance from the asymptotic report
  double ks = 0.0;              // KS distance to N(0, avar_predicted)
  bool ks_valid = false;        // false when avar_predicted is not finite
};

struct RunResult {
  RunConfig config;
  std::vector<ReplicateRow> rows;  // ordered by (rep, method)
  std::vector<MethodSummary> summaries;
  AsymptoticReport asymptotics;
  std::vector<std::string> replicate_errors;  // "rep <i>: <what>" entries
};

/// Runs the study. Replicates are seeded as mix(master_seed, rep) and
/// distributed over `workers` threads; the output is bit-identical for any
/// worker count. Per-replicate estimation failures are recorded, not fatal;
/// throws only if every replicate fails.
///
/// A precomputed report for the same (template, noise) may be supplied to
/// avoid recomputing the quadratures.
RunResult run_monte_carlo(const RunConfig& config,
                          const AsymptoticReport* precomputed = nullptr);

/// Kolmogorov-Smirnov distance between the empirical CDF of xs and the
/// N(0, sigma^2) CDF. Requires at least 10 values and sigma > 0.
double ks_distance(const std::vector<double>& xs, double sigma);

struct EfficiencyRecord {
  double empirical_are = 0.0;  // var(Pearson) / var(Rank) of sqrt(n)*error
  double bootstrap_se = 0.0;   // from paired resampling of replicates
  int rank_count = 0;
  int pearson_count = 0;
};

/// Ratio of empirical variances with a seeded bootstrap standard error.
/// Requires both methods present in the result.
EfficiencyRecord compare_methods(const RunResult& result, int bootstrap_resamples = 1000,
                                 std::uint64_t bootstrap_seed = 0x626F6F74ULL);

/// rows.csv with header rep,method,theta_hat,abs_err,sqrtn_err.
void write_rows_csv(const std::string& path, const RunResult& result);

/// Per-method summaries plus the embedded asymptotic report.
void write_summary_json(const std::string& path, const RunResult& result);

/// 64-bin histogram of sqrt(n)*error over +-4 predicted standard deviations
/// per method; methods with an infinite predicted deviation are omitted.
void write_hist_csv(const std::string& path, const RunResult& result);

}  // namespace rankmatch
