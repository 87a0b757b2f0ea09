#include "rankmatch/experiments.hpp"

#include "rankmatch/json_util.hpp"
#include "rankmatch/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace rankmatch {

namespace {

double sample_variance(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (const double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(n - 1);
}

double median_of_sorted(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& spec) {
  RunConfig cfg;
  if (spec.contains("template")) {
    const auto& t = spec["template"];
    if (t.is_string()) {
      cfg.template_name = t.get<std::string>();
      cfg.tmpl = PeriodicTemplate::from_spec(cfg.template_name);
    } else {
      cfg.tmpl = PeriodicTemplate::from_json(t);
      cfg.template_name = cfg.tmpl.id();
    }
  }
  if (spec.contains("noise")) cfg.noise = NoiseModel::from_json(spec["noise"]);
  cfg.theta_star = spec.value("theta_star", 0.0);
  cfg.n = spec.value("n", 2000);
  cfg.reps = spec.value("reps", 300);
  if (spec.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : spec["methods"]) {
      cfg.methods.push_back(method_from_name(m.get<std::string>()));
    }
  }
  cfg.master_seed = spec.value("master_seed", 1ULL);
  cfg.workers = spec.value("workers", 1);
  if (spec.contains("refine_tol")) cfg.refine.tol = spec["refine_tol"].get<double>();
  if (spec.contains("refine")) cfg.refine.refine = spec["refine"].get<bool>();
  if (cfg.reps < 1) throw std::invalid_argument("run config: reps must be >= 1");
  if (cfg.n < 2) throw std::invalid_argument("run config: n must be >= 2");
  if (cfg.methods.empty()) throw std::invalid_argument("run config: no methods requested");
  if (cfg.workers < 1) throw std::invalid_argument("run config: workers must be >= 1");
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json methods_json = nlohmann::json::array();
  for (const Method m : methods) methods_json.push_back(method_name(m));
  return nlohmann::json{{"template", template_name},
                        {"noise", noise.to_json()},
                        {"theta_star", json_number(theta_star)},
                        {"n", n},
                        {"reps", reps},
                        {"methods", methods_json},
                        {"master_seed", master_seed},
                        {"workers", workers}};
}

RunResult run_monte_carlo(const RunConfig& config, const AsymptoticReport* precomputed) {
  RunResult result;
  result.config = config;
  result.asymptotics =
      precomputed ? *precomputed : report(config.tmpl, config.noise, config.quad);

  const std::size_t methods_per_rep = config.methods.size();
  const std::size_t slots = static_cast<std::size_t>(config.reps) * methods_per_rep;
  std::vector<std::optional<ReplicateRow>> staged(slots);
  std::vector<std::string> errors(static_cast<std::size_t>(config.reps));

  const double sqrt_n = std::sqrt(static_cast<double>(config.n));
  const auto run_replicate = [&](int rep) {
    const std::uint64_t seed = mix_seed(config.master_seed, static_cast<std::uint64_t>(rep));
    try {
      const Signal signal =
          generate_signal(config.tmpl, config.theta_star, config.n, config.noise, seed);
      for (std::size_t m = 0; m < methods_per_rep; ++m) {
        const EstimateResult est =
            estimate(signal, config.tmpl, config.methods[m], config.refine);
        ReplicateRow row;
        row.rep = rep;
        row.method = config.methods[m];
        row.theta_hat = est.theta_hat;
        row.sqrtn_err = sqrt_n * wrap_signed(est.theta_hat, config.theta_star);
        row.abs_err = wrap_distance(est.theta_hat, config.theta_star);
        staged[static_cast<std::size_t>(rep) * methods_per_rep + m] = row;
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(rep)] =
          "rep " + std::to_string(rep) + ": " + e.what();
    }
  };

  const int workers = std::min<int>(config.workers, config.reps);
  if (workers <= 1) {
    for (int rep = 0; rep < config.reps; ++rep) run_replicate(rep);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int rep = w; rep < config.reps; rep += workers) run_replicate(rep);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& slot : staged) {
    if (slot) result.rows.push_back(*slot);
  }
  for (const auto& e : errors) {
    if (!e.empty()) result.replicate_errors.push_back(e);
  }
  if (result.rows.empty()) {
    throw std::runtime_error("run_monte_carlo: every replicate failed");
  }

  for (const Method method : config.methods) {
    std::vector<double> abs_errs, sq_errs;
    for (const auto& row : result.rows) {
      if (row.method != method) continue;
      abs_errs.push_back(row.abs_err);
      sq_errs.push_back(row.sqrtn_err);
    }
    MethodSummary s;
    s.method = method;
    s.count = static_cast<int>(abs_errs.size());
    if (s.count > 0) {
      double mean = 0.0;
      for (const double v : abs_errs) mean += v;
      s.mean_abs_err = mean / s.count;
      s.median_abs_err = median_of_sorted(abs_errs);
      s.var_sqrtn_err = sample_variance(sq_errs);
    }
    s.avar_predicted = method == Method::Rank ? result.asymptotics.avar_rank
                                              : result.asymptotics.avar_pearson;
    s.ks_valid = std::isfinite(s.avar_predicted) && s.avar_predicted > 0.0 &&
                 sq_errs.size() >= 10;
    if (s.ks_valid) s.ks = ks_distance(sq_errs, std::sqrt(s.avar_predicted));
    result.summaries.push_back(s);
  }
  return result;
}

double ks_distance(const std::vector<double>& xs, double sigma) {
  if (xs.size() < 10) throw std::invalid_argument("ks_distance: need at least 10 values");
  if (!(sigma > 0.0)) throw std::invalid_argument("ks_distance: sigma must be > 0");
  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = standard_normal_cdf(sorted[i] / sigma);
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    d = std::max(d, std::abs(cdf - static_cast<double>(i + 1) / n));
  }
  return d;
}

EfficiencyRecord compare_methods(const RunResult& result, int bootstrap_resamples,
                                 std::uint64_t bootstrap_seed) {
  // Pair rows by replicate so resampling keeps the two methods coupled.
  std::vector<std::pair<double, double>> paired;  // (rank, pearson) sqrt(n)-errors
  {
    std::vector<std::optional<double>> rank_err, pearson_err;
    for (const auto& row : result.rows) {
      auto& dst = row.method == Method::Rank ? rank_err : pearson_err;
      if (dst.size() <= static_cast<std::size_t>(row.rep)) {
        dst.resize(static_cast<std::size_t>(row.rep) + 1);
      }
      dst[static_cast<std::size_t>(row.rep)] = row.sqrtn_err;
    }
    const std::size_t n = std::min(rank_err.size(), pearson_err.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (rank_err[i] && pearson_err[i]) paired.emplace_back(*rank_err[i], *pearson_err[i]);
    }
  }
  if (paired.size() < 2) {
    throw std::invalid_argument("compare_methods: need both methods on shared replicates");
  }

  const auto ratio_of = [](const std::vector<std::pair<double, double>>& rows) {
    std::vector<double> r, p;
    r.reserve(rows.size());
    p.reserve(rows.size());
    for (const auto& [re, pe] : rows) {
      r.push_back(re);
      p.push_back(pe);
    }
    return sample_variance(p) / sample_variance(r);
  };

  EfficiencyRecord rec;
  rec.rank_count = static_cast<int>(paired.size());
  rec.pearson_count = rec.rank_count;
  rec.empirical_are = ratio_of(paired);

  Xoshiro256pp rng(bootstrap_seed);
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(bootstrap_resamples));
  std::vector<std::pair<double, double>> resample(paired.size());
  for (int b = 0; b < bootstrap_resamples; ++b) {
    for (auto& slot : resample) {
      const std::size_t idx =
          static_cast<std::size_t>(rng.next() % static_cast<std::uint64_t>(paired.size()));
      slot = paired[idx];
    }
    ratios.push_back(ratio_of(resample));
  }
  rec.bootstrap_se = std::sqrt(sample_variance(ratios));
  return rec;
}

void write_rows_csv(const std::string& path, const RunResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_rows_csv: cannot open '" + path + "'");
  out << "rep,method,theta_hat,abs_err,sqrtn_err\n";
  char buf[160];
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.10g,%.10g,%.10g\n", row.rep,
                  method_name(row.method).c_str(), row.theta_hat, row.abs_err,
                  row.sqrtn_err);
    out << buf;
  }
}

void write_summary_json(const std::string& path, const RunResult& result) {
  nlohmann::json summaries = nlohmann::json::array();
  for (const auto& s : result.summaries) {
    summaries.push_back({{"method", method_name(s.method)},
                         {"count", s.count},
                         {"mean_abs_err", json_number(s.mean_abs_err)},
                         {"median_abs_err", json_number(s.median_abs_err)},
                         {"var_sqrtn_err", json_number(s.var_sqrtn_err)},
                         {"avar_predicted", json_number(s.avar_predicted)},
                         {"ks", s.ks_valid ? json_number(s.ks) : nlohmann::json(nullptr)}});
  }
  nlohmann::json j{{"config", result.config.to_json()},
                   {"summaries", summaries},
                   {"asymptotics", result.asymptotics.to_json()},
                   {"replicate_errors", result.replicate_errors}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_summary_json: cannot open '" + path + "'");
  out << j.dump(2) << "\n";
}

void write_hist_csv(const std::string& path, const RunResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_hist_csv: cannot open '" + path + "'");
  out << "method,bin_lo,bin_hi,count\n";
  constexpr int kBins = 64;
  char buf[160];
  for (const auto& s : result.summaries) {
    if (!std::isfinite(s.avar_predicted) || s.avar_predicted <= 0.0) continue;
    const double half_width = 4.0 * std::sqrt(s.avar_predicted);
    std::vector<int> counts(kBins, 0);
    for (const auto& row : result.rows) {
      if (row.method != s.method) continue;
      const double t = (row.sqrtn_err + half_width) / (2.0 * half_width);
      const int bin = static_cast<int>(std::floor(t * kBins));
      if (bin >= 0 && bin < kBins) ++counts[static_cast<std::size_t>(bin)];
    }
    for (int b = 0; b < kBins; ++b) {
      const double lo = -half_width + 2.0 * half_width * b / kBins;
      const double hi = -half_width + 2.0 * half_width * (b + 1) / kBins;
      std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g,%d\n", method_name(s.method).c_str(),
                    lo, hi, counts[static_cast<std::size_t>(b)]);
      out << buf;
    }
  }
}

}  // namespace rankmatch
