#include "rankmatch/matcher.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <vector>

namespace rankmatch {

std::string method_name(Method m) { return m == Method::Rank ? "rank" : "pearson"; }

Method method_from_name(const std::string& name) {
  if (name == "rank") return Method::Rank;
  if (name == "pearson") return Method::Pearson;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::shared_ptr<const Eigen::ArrayXd> template_grid_samples(const PeriodicTemplate& tmpl,
                                                            Eigen::Index n) {
  using Key = std::pair<std::string, Eigen::Index>;
  static std::shared_mutex mu;
  static std::map<Key, std::shared_ptr<const Eigen::ArrayXd>> cache;

  const Key key{tmpl.id(), n};
  {
    std::shared_lock lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto samples = std::make_shared<Eigen::ArrayXd>(n);
  for (Eigen::Index i = 1; i <= n; ++i) {
    (*samples)[i - 1] = tmpl.eval(static_cast<double>(i) / static_cast<double>(n));
  }
  std::unique_lock lock(mu);
  auto [it, inserted] = cache.emplace(key, std::move(samples));
  return it->second;
}

double objective_weights(double theta, const Eigen::ArrayXd& weights,
                         const PeriodicTemplate& tmpl) {
  const Eigen::Index n = weights.size();
  double acc = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    acc += weights[i - 1] * tmpl.eval(static_cast<double>(i) / static_cast<double>(n) - theta);
  }
  return acc / static_cast<double>(n);
}

double objective_rank(double theta, const Eigen::ArrayXd& ranks,
                      const PeriodicTemplate& tmpl) {
  return objective_weights(theta, ranks / static_cast<double>(ranks.size()), tmpl);
}

Eigen::ArrayXd correlate_grid(const Eigen::ArrayXd& weights, const PeriodicTemplate& tmpl) {
  const Eigen::Index n = weights.size();
  if (n < 2) throw std::invalid_argument("correlate_grid: need n >= 2");

  const auto samples = template_grid_samples(tmpl, n);

  Eigen::FFT<double> fft;
  std::vector<double> w(weights.data(), weights.data() + n);
  std::vector<double> t(samples->data(), samples->data() + n);
  std::vector<std::complex<double>> wf, tf;
  fft.fwd(wf, w);
  fft.fwd(tf, t);
  for (Eigen::Index i = 0; i < n; ++i) wf[i] *= std::conj(tf[i]);
  std::vector<std::complex<double>> cc;
  fft.inv(cc, wf);

  Eigen::ArrayXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) out[k] = cc[k].real() / static_cast<double>(n);
  return out;
}

namespace {

/// Golden-section maximization on [a, b]; returns the best point seen.
std::pair<double, double> golden_max(const std::function<double(double)>& f, double a,
                                     double b, double tol, int max_iterations,
                                     int& iterations) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  double best_x = fc >= fd ? c : d;
  double best_f = std::max(fc, fd);
  iterations = 0;
  while (b - a > tol && iterations < max_iterations) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
    if (fc > best_f) {
      best_f = fc;
      best_x = c;
    }
    if (fd > best_f) {
      best_f = fd;
      best_x = d;
    }
    ++iterations;
  }
  return {best_x, best_f};
}

}  // namespace

EstimateResult estimate(const Signal& signal, const PeriodicTemplate& tmpl, Method method,
                        const RefineOpts& opts) {
  const Eigen::Index n = signal.n();
  if (n < 2) throw std::invalid_argument("estimate: signal length must be >= 2");
  if (!(tmpl.deriv_energy() > 0.0)) {
    throw ConstantTemplateError("estimate: constant template, shift is not identifiable");
  }

  Eigen::ArrayXd weights;
  if (method == Method::Rank) {
    const bool all_equal = (signal.values == signal.values[0]).all();
    if (all_equal) {
      throw DegenerateSignalError(
          "estimate: all observations equal, rank objective carries no information");
    }
    weights = rank_transform(signal.values) / static_cast<double>(n);
  } else {
    weights = signal.values;
  }

  const Eigen::ArrayXd grid = correlate_grid(weights, tmpl);
  Eigen::Index k = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (grid[i] > grid[k]) k = i;  // first maximum wins
  }

  EstimateResult result;
  result.method = method;
  result.grid_argmax = k;
  result.theta_hat = static_cast<double>(k) / static_cast<double>(n);
  result.objective_value = grid[k];
  result.refine_iterations = 0;

  if (opts.refine) {
    const double step = 1.0 / static_cast<double>(n);
    const double center = result.theta_hat;
    const auto obj = [&](double theta) { return objective_weights(theta, weights, tmpl); };
    int iters = 0;
    const auto [theta_best, obj_best] =
        golden_max(obj, center - step, center + step, opts.tol, opts.max_iterations, iters);
    result.refine_iterations = iters;
    if (obj_best >= result.objective_value) {
      result.theta_hat = wrap_unit(theta_best);
      result.objective_value = obj_best;
    }
  }
  return result;
}

double wrap_signed(double a, double b) {
  const double e = a - b;
  return e - std::ceil(e - 0.5);
}

double wrap_distance(double a, double b) { return std::abs(wrap_signed(a, b)); }

}  // namespace rankmatch
