#pragma once

#include "rankmatch/noise.hpp"
#include "rankmatch/templates.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rankmatch {

/// Node-count knobs for the population-criterion quadratures. The defaults
/// reproduce the reference efficiency table to well below the reporting
/// tolerance; RANKMATCH_QUAD_NODES scales them down for quick runs.
struct QuadratureConfig {
  int x_nodes = 2048;   // per [0,1] axis, composite Gauss-Legendre
  int z_nodes = 512;    // full-line axis after the tangent substitution
  double phi2_tol = 1e-10;
  int threads = 0;      // 0 = hardware concurrency

  /// Honors the RANKMATCH_QUAD_NODES environment override.
  static QuadratureConfig from_env();
};

struct QuadratureInfo {
  int x_nodes = 0;
  int x_panels = 0;
  int z_nodes = 0;
  double z_scale = 1.0;  // tangent substitution parameter
  double phi2_tol = 0.0;
  double est_error_m_second = 0.0;
  double est_error_gamma_sq = 0.0;
};

struct AsymptoticReport {
  double m_second = 0.0;      // M''(theta*), negative
  double gamma_sq = 0.0;      // variance of the linearized criterion
  double avar_rank = 0.0;     // gamma^2 / M''(theta*)^2
  double avar_pearson = 0.0;  // sigma^2 / integral of f'^2 (may be +inf)
  double are = 0.0;           // avar_pearson / avar_rank (may be +inf)
  QuadratureInfo quadrature;

  nlohmann::json to_json() const;
};

struct LocalMaxDiagnostics {
  double m_prime_at_0 = 0.0;        // central difference of M at 0
  double grid_argmax_theta = 0.0;   // argmax of M over the probe grid
  bool is_global_max_on_grid = false;
};

/// Numerical evaluation of the population criterion M and of the limit
/// variance ingredients, with theta* = 0 throughout (the criterion is
/// translation equivariant, so nothing is lost).
///
/// Construction precomputes the template grid and an interpolant of the
/// inner integral of M, so repeated big_m calls (e.g. a 4096-point argmax
/// probe) stay cheap.
class AsymptoticEngine {
 public:
  AsymptoticEngine(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                   QuadratureConfig cfg = QuadratureConfig::from_env());
  ~AsymptoticEngine();
  AsymptoticEngine(AsymptoticEngine&&) noexcept;
  AsymptoticEngine& operator=(AsymptoticEngine&&) noexcept;

  double big_m(double theta) const;
  double m_second_at_star() const;
  double gamma_squared() const;

  /// Full report with a doubling-based error estimate for each integral.
  AsymptoticReport report() const;

  LocalMaxDiagnostics verify_local_max(int theta_grid = 4096) const;

  const QuadratureConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double big_m(const PeriodicTemplate& tmpl, const NoiseModel& noise, double theta,
             const QuadratureConfig& cfg = QuadratureConfig::from_env());
double m_second_at_star(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                        const QuadratureConfig& cfg = QuadratureConfig::from_env());
double gamma_squared(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                     const QuadratureConfig& cfg = QuadratureConfig::from_env());
AsymptoticReport report(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                        const QuadratureConfig& cfg = QuadratureConfig::from_env());
LocalMaxDiagnostics verify_local_max(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                                     const QuadratureConfig& cfg = QuadratureConfig::from_env());

struct Table1Row {
  std::string template_name;
  std::string noise_name;  // "normal" | "t3" | "cauchy"
  double are = 0.0;
};

/// The nine (template, noise) efficiency values, row-major over templates
/// A, B, C and noises normal, t3, cauchy.
std::vector<Table1Row> are_table(const QuadratureConfig& cfg = QuadratureConfig::from_env());

/// CSV with header "template,noise,are"; infinity prints as "inf".
std::string are_table_csv(const std::vector<Table1Row>& rows);

namespace detail {
/// gamma_squared with a caller-supplied plain CDF, for algebraic-identity
/// cross-checks that re-express the integrand.
double gamma_squared_with_cdf(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                              const QuadratureConfig& cfg,
                              const std::function<double(double)>& cdf_fn);
}  // namespace detail

}  // namespace rankmatch
