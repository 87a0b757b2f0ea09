#pragma once

#include <json.hpp>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace rankmatch {

enum class TemplateKind { BuiltinA, BuiltinB, BuiltinC, PiecewiseLinear };

/// A known 1-periodic signal shape with an analytic derivative.
///
/// Built-ins A and B are piecewise-linear tents, C is a smooth polynomial
/// bump. User shapes are piecewise-linear interpolants through knots in
/// [0, 1) that close periodically.
class PeriodicTemplate {
 public:
  static PeriodicTemplate builtin_a();
  static PeriodicTemplate builtin_b();
  static PeriodicTemplate builtin_c();

  /// Knots are (position, value) pairs, positions strictly increasing in
  /// [0, 1). Throws std::invalid_argument on malformed or constant input.
  static PeriodicTemplate piecewise_linear(std::vector<std::pair<double, double>> knots);

  /// Parses {"knots": [[x0, v0], [x1, v1], ...]}.
  static PeriodicTemplate from_json(const nlohmann::json& spec);

  /// Resolves "A" | "B" | "C" | path-to-json-file.
  static PeriodicTemplate from_spec(const std::string& spec);

  /// f(x mod 1); branch intervals are half-open [a, b).
  double eval(double x) const;

  /// f'(x mod 1); the right-hand derivative at kinks.
  double deriv(double x) const;

  /// Integral of f'(x)^2 over one period.
  double deriv_energy() const { return deriv_energy_; }

  TemplateKind kind() const { return kind_; }
  double lipschitz_bound() const { return lipschitz_; }

  /// Positions in [0, 1) where f' jumps; empty for C.
  const std::vector<double>& kink_points() const { return kinks_; }

  /// Segmentation points for quadrature (kinks plus smoothness boundaries,
  /// always including 0 and 1). Composite rules built on these never place
  /// a panel across a non-smooth point of f or f'.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  /// Stable identifier used to key caches of grid samples.
  const std::string& id() const { return id_; }

 private:
  PeriodicTemplate() = default;
  void finalize_piecewise();

  TemplateKind kind_ = TemplateKind::BuiltinA;
  std::vector<std::pair<double, double>> knots_;  // PiecewiseLinear only
  std::vector<double> slopes_;                    // per segment, PL only
  std::vector<double> kinks_;
  std::vector<double> breakpoints_;
  double lipschitz_ = 0.0;
  double deriv_energy_ = 0.0;
  std::string id_;
};

/// Wraps x into [0, 1).
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r = 0.0;
  return r;
}

}  // namespace rankmatch
