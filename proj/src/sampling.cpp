#include "rankmatch/sampling.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rankmatch {

Signal generate_signal(const PeriodicTemplate& tmpl, double theta_star, Eigen::Index n,
                       const std::optional<NoiseModel>& noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_signal: n must be >= 2");
  const double theta = wrap_unit(theta_star);
  Signal signal;
  signal.values.resize(n);
  for (Eigen::Index i = 1; i <= n; ++i) {
    signal.values[i - 1] = tmpl.eval(static_cast<double>(i) / static_cast<double>(n) - theta);
  }
  if (noise) signal.values += noise->sample(n, seed);
  signal.truth = SignalTruth{theta, tmpl.id(), noise, seed};
  return signal;
}

Eigen::ArrayXd rank_transform(const Eigen::ArrayXd& values) {
  const Eigen::Index n = values.size();
  if (n < 1) throw std::invalid_argument("rank_transform: input must be non-empty");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&values](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  Eigen::ArrayXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i+1 .. j+1 share the midrank
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks[order[k]] = midrank;
    i = j + 1;
  }
  return ranks;
}

void write_signal_csv(const std::string& path, const Signal& signal) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_signal_csv: cannot open '" + path + "'");
  char buf[64];
  for (Eigen::Index i = 0; i < signal.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", signal.values[i]);
    out << buf;
  }
}

Signal read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_signal_csv: cannot open '" + path + "'");
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("read_signal_csv: malformed line '" + line + "'");
    }
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\r')) ++pos;
    if (pos != line.size()) {
      throw std::invalid_argument("read_signal_csv: malformed line '" + line + "'");
    }
    vals.push_back(v);
  }
  if (vals.empty()) throw std::invalid_argument("read_signal_csv: file is empty");
  Signal signal;
  signal.values = Eigen::Map<const Eigen::ArrayXd>(vals.data(),
                                                   static_cast<Eigen::Index>(vals.size()));
  return signal;
}

void write_truth_sidecar(const std::string& path, const Signal& signal) {
  if (!signal.truth) return;
  nlohmann::json j;
  j["theta_star"] = signal.truth->theta_star;
  j["template_id"] = signal.truth->template_id;
  j["noise"] = signal.truth->noise ? signal.truth->noise->to_json() : nlohmann::json(nullptr);
  j["seed"] = signal.truth->seed;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_truth_sidecar: cannot open '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace rankmatch
