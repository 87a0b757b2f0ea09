#pragma once

#include "rankmatch/noise.hpp"
#include "rankmatch/templates.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace rankmatch {

/// Ground truth carried alongside generated signals for experiment bookkeeping.
struct SignalTruth {
  double theta_star = 0.0;
  std::string template_id;
  std::optional<NoiseModel> noise;  // nullopt for noiseless signals
  std::uint64_t seed = 0;
};

/// Observations Y_1..Y_n on the implicit grid x_i = i/n.
struct Signal {
  Eigen::ArrayXd values;
  std::optional<SignalTruth> truth;

  Eigen::Index n() const { return values.size(); }
};

/// Y_i = f(x_i - theta_star) + Z_i on x_i = i/n, i = 1..n.
/// Without a noise model the signal is exact (test harness use).
Signal generate_signal(const PeriodicTemplate& tmpl, double theta_star, Eigen::Index n,
                       const std::optional<NoiseModel>& noise, std::uint64_t seed);

/// Midranks of the values in increasing order: ties get the average of the
/// positions they occupy, so the output always sums to n(n+1)/2 exactly.
Eigen::ArrayXd rank_transform(const Eigen::ArrayXd& values);

/// Single-column CSV, one value per line, full double precision.
void write_signal_csv(const std::string& path, const Signal& signal);

/// Reads a signal written by write_signal_csv (no sidecar).
Signal read_signal_csv(const std::string& path);

/// Sidecar with the truth record; no-op if the signal has none.
void write_truth_sidecar(const std::string& path, const Signal& signal);

}  // namespace rankmatch
