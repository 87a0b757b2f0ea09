#pragma once

#include "rankmatch/sampling.hpp"
#include "rankmatch/templates.hpp"

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>

namespace rankmatch {

enum class Method { Rank, Pearson };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Template is constant, so every shift scores the same.
struct ConstantTemplateError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// All observations equal: the rank objective carries no shift information.
struct DegenerateSignalError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RefineOpts {
  double tol = 1e-7;  // width of the final bracket in theta
  bool refine = true;
  int max_iterations = 200;
};

struct EstimateResult {
  double theta_hat = 0.0;       // in [0, 1)
  double objective_value = 0.0;
  Eigen::Index grid_argmax = 0;  // best k of the n grid shifts k/n
  int refine_iterations = 0;
  Method method = Method::Rank;
};

/// Template values on the grid x_i = i/n (entry i-1 holds f(i/n)), cached
/// per (template id, n) because Monte Carlo reuses them heavily. Safe for
/// concurrent readers.
std::shared_ptr<const Eigen::ArrayXd> template_grid_samples(const PeriodicTemplate& tmpl,
                                                            Eigen::Index n);

/// Exact shift criterion (1/n) sum_i w_i f(x_i - theta). The rank method
/// uses w_i = R_i/n, Pearson uses w_i = Y_i.
double objective_weights(double theta, const Eigen::ArrayXd& weights,
                         const PeriodicTemplate& tmpl);

/// (1/n) sum_i (R_i/n) f(x_i - theta).
double objective_rank(double theta, const Eigen::ArrayXd& ranks,
                      const PeriodicTemplate& tmpl);

/// Entry k = (1/n) sum_i w_i f((i-k)/n) for k = 0..n-1, via FFT circular
/// cross-correlation. Matches objective_weights at every grid shift.
Eigen::ArrayXd correlate_grid(const Eigen::ArrayXd& weights, const PeriodicTemplate& tmpl);

/// Full grid scan, then golden-section refinement of the exact objective on
/// the bracketing interval of width 2/n.
EstimateResult estimate(const Signal& signal, const PeriodicTemplate& tmpl, Method method,
                        const RefineOpts& opts = {});

/// Wrap-around distance on the circle of unit circumference.
double wrap_distance(double a, double b);

/// Signed wrap-around representative of a - b in (-1/2, 1/2].
double wrap_signed(double a, double b);

}  // namespace rankmatch
