#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace rankmatch {

/// Nodes and weights of a 1-D quadrature rule, in evaluation order.
struct QuadRule {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
  int panel_count = 0;
  int panel_order = 0;

  Eigen::Index size() const { return nodes.size(); }

  /// Applies the rule to f, summing in node order.
  template <class F>
  double apply(F&& f) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
      acc += weights[i] * f(nodes[i]);
    }
    return acc;
  }
};

/// Gauss-Legendre rule of the given order on [-1, 1].
const QuadRule& gauss_legendre(int order);

/// Composite Gauss-Legendre rule whose panels never straddle a breakpoint.
///
/// `breakpoints` must be sorted and bracket the integration interval
/// (first = lower limit, last = upper limit). Each segment is subdivided
/// into panels proportionally to its length so that the total node count
/// is close to `target_nodes`.
QuadRule composite_gauss(const std::vector<double>& breakpoints, int target_nodes,
                         int order = 16);

/// Rule for integrals over the whole real line via z = scale * tan(pi*u/2).
///
/// The substitution maps (-1, 1) onto the line without truncation, which
/// keeps heavy-tailed integrands (Cauchy, Student t) honest.
QuadRule tangent_line_rule(int target_nodes, double scale, int order = 16);

struct AdaptiveResult {
  double value = 0.0;
  double est_error = 0.0;
  int nodes_used = 0;
};

/// Integrates f over the real line, doubling tangent-rule nodes until the
/// change between refinements drops below abs_tol.
template <class F>
AdaptiveResult integrate_line_adaptive(F&& f, double scale, double abs_tol,
                                       int start_nodes = 128, int max_nodes = 16384) {
  QuadRule rule = tangent_line_rule(start_nodes, scale);
  double prev = rule.apply(f);
  AdaptiveResult out{prev, std::numeric_limits<double>::infinity(),
                     static_cast<int>(rule.size())};
  for (int n = start_nodes * 2; n <= max_nodes; n *= 2) {
    rule = tangent_line_rule(n, scale);
    const double cur = rule.apply(f);
    out.value = cur;
    out.est_error = std::abs(cur - prev);
    out.nodes_used = static_cast<int>(rule.size());
    if (out.est_error <= abs_tol) break;
    prev = cur;
  }
  return out;
}

/// Chebyshev interpolant of a smooth function on [lo, hi].
class ChebyshevInterp {
 public:
  /// Fits with increasing degree until the trailing coefficients fall
  /// below abs_tol. `converged()` reports whether that happened before
  /// max_degree; callers should fall back to direct evaluation if not.
  static ChebyshevInterp fit(const std::function<double(double)>& f, double lo,
                             double hi, double abs_tol, int max_degree = 2048);

  double operator()(double x) const;
  bool converged() const { return converged_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> coeffs_;
  bool converged_ = false;
};

}  // namespace rankmatch
