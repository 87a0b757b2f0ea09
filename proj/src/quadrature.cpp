#include "rankmatch/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace rankmatch {

namespace {

QuadRule compute_gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  QuadRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  rule.panel_count = 1;
  rule.panel_order = order;
  const int half = (order + 1) / 2;
  for (int k = 0; k < half; ++k) {
    // Tricomi-style initial guess, then Newton on the Legendre recurrence.
    double x = std::cos(std::numbers::pi * (k + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= order; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[k] = -x;
    rule.weights[k] = w;
    rule.nodes[order - 1 - k] = x;
    rule.weights[order - 1 - k] = w;
  }
  return rule;
}

}  // namespace

const QuadRule& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

QuadRule composite_gauss(const std::vector<double>& breakpoints, int target_nodes,
                         int order) {
  if (breakpoints.size() < 2) {
    throw std::invalid_argument("composite_gauss: need at least two breakpoints");
  }
  const double lo = breakpoints.front();
  const double hi = breakpoints.back();
  if (!(hi > lo)) throw std::invalid_argument("composite_gauss: empty interval");

  const QuadRule& base = gauss_legendre(order);
  const int total_panels = std::max(1, target_nodes / order);

  std::vector<double> xs;
  std::vector<double> ws;
  xs.reserve(static_cast<std::size_t>(total_panels + breakpoints.size()) * order);
  ws.reserve(xs.capacity());

  int panels = 0;
  for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
    const double a = breakpoints[s];
    const double b = breakpoints[s + 1];
    if (!(b > a)) continue;  // tolerate repeated breakpoints
    const int np = std::max<int>(1, std::lround((b - a) / (hi - lo) * total_panels));
    for (int p = 0; p < np; ++p) {
      const double pa = a + (b - a) * p / np;
      const double pb = a + (b - a) * (p + 1) / np;
      const double mid = 0.5 * (pa + pb);
      const double hw = 0.5 * (pb - pa);
      for (int j = 0; j < order; ++j) {
        xs.push_back(mid + hw * base.nodes[j]);
        ws.push_back(hw * base.weights[j]);
      }
    }
    panels += np;
  }

  QuadRule rule;
  rule.nodes = Eigen::Map<const Eigen::ArrayXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  rule.weights = Eigen::Map<const Eigen::ArrayXd>(ws.data(), static_cast<Eigen::Index>(ws.size()));
  rule.panel_count = panels;
  rule.panel_order = order;
  return rule;
}

QuadRule tangent_line_rule(int target_nodes, double scale, int order) {
  if (!(scale > 0.0)) throw std::invalid_argument("tangent_line_rule: scale must be > 0");
  QuadRule rule = composite_gauss({-1.0, 1.0}, target_nodes, order);
  const double half_pi = 0.5 * std::numbers::pi;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const double c = std::cos(half_pi * u);
    rule.nodes[i] = scale * std::tan(half_pi * u);
    rule.weights[i] *= scale * half_pi / (c * c);
  }
  return rule;
}

ChebyshevInterp ChebyshevInterp::fit(const std::function<double(double)>& f, double lo,
                                     double hi, double abs_tol, int max_degree) {
  ChebyshevInterp interp;
  interp.lo_ = lo;
  interp.hi_ = hi;
  for (int n = 32; n <= max_degree; n *= 2) {
    // Chebyshev nodes of the first kind and the usual cosine-sum coefficients.
    std::vector<double> fv(n);
    for (int k = 0; k < n; ++k) {
      const double t = std::cos(std::numbers::pi * (k + 0.5) / n);
      fv[k] = f(0.5 * (lo + hi) + 0.5 * (hi - lo) * t);
    }
    std::vector<double> c(n);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        acc += fv[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
      }
      c[j] = 2.0 * acc / n;
    }
    // Converged when the top quarter of the spectrum is negligible.
    double tail = 0.0;
    for (int j = 3 * n / 4; j < n; ++j) tail = std::max(tail, std::abs(c[j]));
    if (tail <= abs_tol) {
      int keep = n;
      while (keep > 2 && std::abs(c[keep - 1]) <= abs_tol * 0.01) --keep;
      c.resize(keep);
      interp.coeffs_ = std::move(c);
      interp.converged_ = true;
      return interp;
    }
    interp.coeffs_ = std::move(c);
  }
  interp.converged_ = false;
  return interp;
}

double ChebyshevInterp::operator()(double x) const {
  const double t = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = coeffs_.size(); j-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + coeffs_[j];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + 0.5 * coeffs_[0];
}

}  // namespace rankmatch
