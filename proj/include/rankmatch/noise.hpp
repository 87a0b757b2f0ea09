#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace rankmatch {

enum class NoiseFamily { Gaussian, StudentT3, Cauchy };

/// Symmetric noise law with density, CDF, sampler, and the distribution of
/// the difference of two independent draws.
///
/// Phi2(t) = P(Z' - Z <= t) and its density phi2 have closed forms for the
/// Gaussian and Cauchy families; Student t3 uses full-line quadrature with
/// a tangent substitution (no truncation of the heavy tails).
class NoiseModel {
 public:
  NoiseModel(NoiseFamily family, double scale = 1.0);

  static NoiseModel gaussian(double scale = 1.0) { return {NoiseFamily::Gaussian, scale}; }
  static NoiseModel student_t3(double scale = 1.0) { return {NoiseFamily::StudentT3, scale}; }
  static NoiseModel cauchy(double scale = 1.0) { return {NoiseFamily::Cauchy, scale}; }

  /// Parses {"family": "gaussian" | "t3" | "cauchy", "scale": s}.
  static NoiseModel from_json(const nlohmann::json& spec);

  NoiseFamily family() const { return family_; }
  double scale() const { return scale_; }

  /// "gaussian" | "t3" | "cauchy".
  std::string name() const;

  /// scale^2, 3*scale^2, or +infinity for Cauchy.
  double variance() const;

  double pdf(double z) const;
  double cdf(double z) const;

  /// CDF of Z' - Z for independent draws.
  double phi2(double t) const;

  /// Density of Z' - Z.
  double phi2_density(double t) const;

  /// n iid draws, reproducible from (n, seed) alone.
  Eigen::ArrayXd sample(Eigen::Index n, std::uint64_t seed) const;

  nlohmann::json to_json() const;

 private:
  NoiseFamily family_;
  double scale_;
};

/// Generic quadrature route for Phi2 and phi2, usable with any family.
/// The closed-form families keep these as an independent cross-check.
double phi2_by_quadrature(const NoiseModel& noise, double t, double abs_tol = 1e-10);
double phi2_density_by_quadrature(const NoiseModel& noise, double t, double abs_tol = 1e-10);

/// Standard normal CDF.
double standard_normal_cdf(double z);

}  // namespace rankmatch
