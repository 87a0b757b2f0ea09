#include "rankmatch/asymptotics.hpp"

#include "rankmatch/json_util.hpp"
#include "rankmatch/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

namespace rankmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(first, last) over a partition of [0, total); results must be
/// written to per-index slots so the outcome is independent of the split.
template <class Fn>
void parallel_chunks(Eigen::Index total, int threads, Fn&& fn) {
  threads = std::min<Eigen::Index>(threads, std::max<Eigen::Index>(total, 1));
  if (threads <= 1) {
    fn(Eigen::Index{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const Eigen::Index chunk = (total + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const Eigen::Index first = t * chunk;
    const Eigen::Index last = std::min(total, first + chunk);
    if (first >= last) break;
    pool.emplace_back([&fn, first, last] { fn(first, last); });
  }
  for (auto& th : pool) th.join();
}

/// Template values, derivatives and weights on a kink-aligned composite rule.
struct XGrid {
  Eigen::ArrayXd x, w, f, df;
  std::vector<Eigen::Index> active;  // nodes with f != 0 or f' != 0
  double zero_weight = 0.0;          // total weight of the collapsed nodes
  double f_min = 0.0, f_max = 0.0;
  int panels = 0;
};

XGrid build_xgrid(const PeriodicTemplate& tmpl, int nodes) {
  XGrid g;
  QuadRule rule = composite_gauss(tmpl.breakpoints(), nodes);
  g.x = std::move(rule.nodes);
  g.w = std::move(rule.weights);
  g.panels = rule.panel_count;
  const Eigen::Index m = g.x.size();
  g.f.resize(m);
  g.df.resize(m);
  g.f_min = kInf;
  g.f_max = -kInf;
  for (Eigen::Index i = 0; i < m; ++i) {
    g.f[i] = tmpl.eval(g.x[i]);
    g.df[i] = tmpl.deriv(g.x[i]);
    g.f_min = std::min(g.f_min, g.f[i]);
    g.f_max = std::max(g.f_max, g.f[i]);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (g.f[i] != 0.0 || g.df[i] != 0.0) {
      g.active.push_back(i);
    } else {
      g.zero_weight += g.w[i];
    }
  }
  // The outer integrals evaluate at y = f(x0); zero-region collapse uses
  // y = 0, which lies inside [f_min, f_max] whenever such nodes exist.
  return g;
}

/// Fast Phi2 / phi2 evaluators on the compact range of template differences.
/// Closed forms where the family has them, otherwise a Chebyshev table of
/// the quadrature values (interpolation error far below phi2_tol), with a
/// plain quadrature fallback if the fit does not converge.
struct Phi2Fast {
  std::function<double(double)> phi2;
  std::function<double(double)> phi2_density;
};

Phi2Fast make_phi2_fast(const NoiseModel& noise, double range, double tol) {
  Phi2Fast out;
  if (noise.family() == NoiseFamily::StudentT3) {
    const double r = std::max(range, 1e-6);
    auto cdf2 = ChebyshevInterp::fit([&noise](double t) { return noise.phi2(t); }, -r, r,
                                     std::min(tol, 1e-12));
    auto pdf2 = ChebyshevInterp::fit([&noise](double t) { return noise.phi2_density(t); },
                                     -r, r, std::min(tol, 1e-12));
    if (cdf2.converged()) {
      out.phi2 = [c = std::move(cdf2)](double t) { return c(t); };
    } else {
      out.phi2 = [noise](double t) { return noise.phi2(t); };
    }
    if (pdf2.converged()) {
      out.phi2_density = [c = std::move(pdf2)](double t) { return c(t); };
    } else {
      out.phi2_density = [noise](double t) { return noise.phi2_density(t); };
    }
  } else {
    out.phi2 = [noise](double t) { return noise.phi2(t); };
    out.phi2_density = [noise](double t) { return noise.phi2_density(t); };
  }
  return out;
}

/// gamma^2 = int_0^1 E[ Lambda(x0, Z)^2 ] dx0 with
/// Lambda(x0, z) = int_0^1 (f'(x) - f'(x0)) Xi(f(x) - f(x0), z) dx.
///
/// The x-dependence enters only through (f, f'), so nodes where both vanish
/// collapse into a single profile; every x0 node likewise reduces to its
/// (y, dy) profile. Summation order per profile is fixed for determinism.
template <class Cdf>
double gamma_core(const XGrid& g, const QuadRule& zrule, const Eigen::ArrayXd& pz,
                  const Phi2Fast& ph, Cdf cdf, int threads) {
  const auto& act = g.active;
  const Eigen::Index na = static_cast<Eigen::Index>(act.size());
  Eigen::ArrayXd fa(na), dfa(na), wa(na);
  for (Eigen::Index i = 0; i < na; ++i) {
    fa[i] = g.f[act[i]];
    dfa[i] = g.df[act[i]];
    wa[i] = g.w[act[i]];
  }
  const bool has_zero = g.zero_weight > 0.0;
  const Eigen::Index profiles = na + (has_zero ? 1 : 0);
  const Eigen::Index nz = zrule.size();

  std::vector<double> partial(static_cast<std::size_t>(profiles), 0.0);
  parallel_chunks(profiles, threads, [&](Eigen::Index first, Eigen::Index last) {
    Eigen::ArrayXd shifted(na);
    for (Eigen::Index p = first; p < last; ++p) {
      double y, dy, weight;
      if (p < na) {
        y = fa[p];
        dy = dfa[p];
        weight = wa[p];
      } else {
        y = 0.0;
        dy = 0.0;
        weight = g.zero_weight;
      }
      double s0 = has_zero ? g.zero_weight * ph.phi2(-y) : 0.0;
      double s1 = 0.0;
      for (Eigen::Index i = 0; i < na; ++i) {
        shifted[i] = fa[i] - y;
        const double v = ph.phi2(shifted[i]);
        s0 += wa[i] * v;
        s1 += wa[i] * dfa[i] * v;
      }
      const double base = s1 - dy * s0;
      double acc = 0.0;
      for (Eigen::Index k = 0; k < nz; ++k) {
        const double z = zrule.nodes[k];
        double t0 = has_zero ? g.zero_weight * cdf(z - y) : 0.0;
        double t1 = 0.0;
        for (Eigen::Index i = 0; i < na; ++i) {
          const double c = cdf(z + shifted[i]);
          t0 += wa[i] * c;
          t1 += wa[i] * dfa[i] * c;
        }
        const double lam = (t1 - dy * t0) - base;
        acc += pz[k] * lam * lam;
      }
      partial[static_cast<std::size_t>(p)] = weight * acc;
    }
  });

  double total = 0.0;
  for (const double v : partial) total += v;
  return total;
}

double gamma_squared_impl(const XGrid& g, const NoiseModel& noise, const Phi2Fast& ph,
                          int z_nodes, int threads) {
  QuadRule zrule = tangent_line_rule(z_nodes, noise.scale());
  Eigen::ArrayXd pz(zrule.size());
  for (Eigen::Index k = 0; k < zrule.size(); ++k) {
    pz[k] = zrule.weights[k] * noise.pdf(zrule.nodes[k]);
  }
  // Dispatch to a concrete CDF so the hot loop inlines it.
  switch (noise.family()) {
    case NoiseFamily::Gaussian: {
      const double s = noise.scale();
      return gamma_core(g, zrule, pz, ph,
                        [s](double v) { return standard_normal_cdf(v / s); }, threads);
    }
    case NoiseFamily::Cauchy: {
      const double s = noise.scale();
      return gamma_core(g, zrule, pz, ph,
                        [s](double v) { return 0.5 + std::atan(v / s) / std::numbers::pi; },
                        threads);
    }
    case NoiseFamily::StudentT3:
      return gamma_core(g, zrule, pz, ph, [&noise](double v) { return noise.cdf(v); },
                        threads);
  }
  return 0.0;
}

/// M''(0) = -int int f'(x)^2 phi2(f(x) - f(x0)) dx dx0, same collapse.
double m_second_impl(const XGrid& g, const Phi2Fast& ph, int threads) {
  const auto& act = g.active;
  const Eigen::Index na = static_cast<Eigen::Index>(act.size());
  Eigen::ArrayXd fa(na), dfa(na), wa(na);
  for (Eigen::Index i = 0; i < na; ++i) {
    fa[i] = g.f[act[i]];
    dfa[i] = g.df[act[i]];
    wa[i] = g.w[act[i]];
  }
  const bool has_zero = g.zero_weight > 0.0;
  std::vector<double> partial(static_cast<std::size_t>(na), 0.0);
  parallel_chunks(na, threads, [&](Eigen::Index first, Eigen::Index last) {
    for (Eigen::Index i = first; i < last; ++i) {
      if (dfa[i] == 0.0) continue;
      double inner = has_zero ? g.zero_weight * ph.phi2_density(fa[i]) : 0.0;
      for (Eigen::Index j = 0; j < na; ++j) {
        inner += wa[j] * ph.phi2_density(fa[i] - fa[j]);
      }
      partial[static_cast<std::size_t>(i)] = wa[i] * dfa[i] * dfa[i] * inner;
    }
  });
  double total = 0.0;
  for (const double v : partial) total += v;
  return -total;
}

}  // namespace

QuadratureConfig QuadratureConfig::from_env() {
  QuadratureConfig cfg;
  if (const char* env = std::getenv("RANKMATCH_QUAD_NODES")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 16) {
      cfg.x_nodes = static_cast<int>(v);
      cfg.z_nodes = std::clamp(static_cast<int>(v / 4), 64, 4096);
    }
  }
  return cfg;
}

struct AsymptoticEngine::Impl {
  PeriodicTemplate tmpl;
  NoiseModel noise;
  QuadratureConfig cfg;
  XGrid grid;
  Phi2Fast ph;
  ChebyshevInterp g_interp;  // y -> int Phi2(y - f(x)) dx on [f_min, f_max]
  bool g_interp_ok = false;

  Impl(const PeriodicTemplate& t, const NoiseModel& n, QuadratureConfig c)
      : tmpl(t), noise(n), cfg(c), grid(build_xgrid(t, c.x_nodes)),
        ph(make_phi2_fast(n, grid.f_max - grid.f_min, c.phi2_tol)) {
    const auto g_of = [this](double y) { return g_direct(y); };
    g_interp = ChebyshevInterp::fit(g_of, grid.f_min, grid.f_max, 1e-12);
    g_interp_ok = g_interp.converged();
  }

  double g_direct(double y) const {
    double acc = grid.zero_weight > 0.0 ? grid.zero_weight * ph.phi2(y) : 0.0;
    for (const Eigen::Index i : grid.active) {
      acc += grid.w[i] * ph.phi2(y - grid.f[i]);
    }
    return acc;
  }

  double g_of(double y) const { return g_interp_ok ? g_interp(y) : g_direct(y); }

  double big_m(double theta) const {
    // Panels aligned with the kinks of both f(x0) and f(x0 - theta).
    std::vector<double> bp = tmpl.breakpoints();
    for (const double b : tmpl.breakpoints()) {
      const double s = wrap_unit(b + theta);
      if (s > 0.0 && s < 1.0) bp.push_back(s);
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    const QuadRule rule = composite_gauss(bp, cfg.x_nodes);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < rule.size(); ++j) {
      const double x0 = rule.nodes[j];
      acc += rule.weights[j] * g_of(tmpl.eval(x0)) * tmpl.eval(x0 - theta);
    }
    return acc;
  }

  double m_second() const { return m_second_impl(grid, ph, resolve_threads(cfg.threads)); }

  double gamma_sq() const {
    return gamma_squared_impl(grid, noise, ph, cfg.z_nodes, resolve_threads(cfg.threads));
  }
};

AsymptoticEngine::AsymptoticEngine(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                                   QuadratureConfig cfg)
    : impl_(std::make_unique<Impl>(tmpl, noise, cfg)) {}

AsymptoticEngine::~AsymptoticEngine() = default;
AsymptoticEngine::AsymptoticEngine(AsymptoticEngine&&) noexcept = default;
AsymptoticEngine& AsymptoticEngine::operator=(AsymptoticEngine&&) noexcept = default;

double AsymptoticEngine::big_m(double theta) const { return impl_->big_m(theta); }
double AsymptoticEngine::m_second_at_star() const { return impl_->m_second(); }
double AsymptoticEngine::gamma_squared() const { return impl_->gamma_sq(); }
const QuadratureConfig& AsymptoticEngine::config() const { return impl_->cfg; }

AsymptoticReport AsymptoticEngine::report() const {
  AsymptoticReport rep;
  rep.m_second = impl_->m_second();
  rep.gamma_sq = impl_->gamma_sq();

  // Doubling-style self-check: rerun at half resolution and report the drift.
  QuadratureConfig half = impl_->cfg;
  half.x_nodes = std::max(64, half.x_nodes / 2);
  half.z_nodes = std::max(32, half.z_nodes / 2);
  Impl coarse(impl_->tmpl, impl_->noise, half);
  rep.quadrature.est_error_m_second = std::abs(rep.m_second - coarse.m_second());
  rep.quadrature.est_error_gamma_sq = std::abs(rep.gamma_sq - coarse.gamma_sq());

  rep.avar_rank = rep.gamma_sq / (rep.m_second * rep.m_second);
  rep.avar_pearson = impl_->noise.variance() / impl_->tmpl.deriv_energy();
  rep.are = rep.avar_pearson / rep.avar_rank;

  rep.quadrature.x_nodes = static_cast<int>(impl_->grid.x.size());
  rep.quadrature.x_panels = impl_->grid.panels;
  rep.quadrature.z_nodes = impl_->cfg.z_nodes;
  rep.quadrature.z_scale = impl_->noise.scale();
  rep.quadrature.phi2_tol = impl_->cfg.phi2_tol;
  return rep;
}

LocalMaxDiagnostics AsymptoticEngine::verify_local_max(int theta_grid) const {
  LocalMaxDiagnostics diag;
  const double h = 1e-3;
  diag.m_prime_at_0 = (impl_->big_m(h) - impl_->big_m(-h)) / (2.0 * h);
  Eigen::Index best = 0;
  double best_val = -kInf;
  for (int k = 0; k < theta_grid; ++k) {
    const double theta = static_cast<double>(k) / theta_grid;
    const double v = impl_->big_m(theta);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  diag.grid_argmax_theta = static_cast<double>(best) / theta_grid;
  diag.is_global_max_on_grid = (best == 0);
  return diag;
}

nlohmann::json AsymptoticReport::to_json() const {
  nlohmann::json q{{"x_nodes", quadrature.x_nodes},
                   {"x_panels", quadrature.x_panels},
                   {"z_nodes", quadrature.z_nodes},
                   {"z_scale", json_number(quadrature.z_scale)},
                   {"phi2_tol", json_number(quadrature.phi2_tol)},
                   {"est_error_m_second", json_number(quadrature.est_error_m_second)},
                   {"est_error_gamma_sq", json_number(quadrature.est_error_gamma_sq)}};
  return nlohmann::json{{"m_second", json_number(m_second)},
                        {"gamma_sq", json_number(gamma_sq)},
                        {"avar_rank", json_number(avar_rank)},
                        {"avar_pearson", json_number(avar_pearson)},
                        {"are", json_number(are)},
                        {"quadrature", q}};
}

double big_m(const PeriodicTemplate& tmpl, const NoiseModel& noise, double theta,
             const QuadratureConfig& cfg) {
  return AsymptoticEngine(tmpl, noise, cfg).big_m(theta);
}

double m_second_at_star(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                        const QuadratureConfig& cfg) {
  return AsymptoticEngine(tmpl, noise, cfg).m_second_at_star();
}

double gamma_squared(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                     const QuadratureConfig& cfg) {
  return AsymptoticEngine(tmpl, noise, cfg).gamma_squared();
}

AsymptoticReport report(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                        const QuadratureConfig& cfg) {
  return AsymptoticEngine(tmpl, noise, cfg).report();
}

LocalMaxDiagnostics verify_local_max(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                                     const QuadratureConfig& cfg) {
  return AsymptoticEngine(tmpl, noise, cfg).verify_local_max();
}

std::vector<Table1Row> are_table(const QuadratureConfig& cfg) {
  const std::vector<std::pair<std::string, PeriodicTemplate>> templates{
      {"A", PeriodicTemplate::builtin_a()},
      {"B", PeriodicTemplate::builtin_b()},
      {"C", PeriodicTemplate::builtin_c()}};
  const std::vector<std::pair<std::string, NoiseModel>> noises{
      {"normal", NoiseModel::gaussian()},
      {"t3", NoiseModel::student_t3()},
      {"cauchy", NoiseModel::cauchy()}};
  std::vector<Table1Row> rows;
  rows.reserve(templates.size() * noises.size());
  for (const auto& [tname, tmpl] : templates) {
    for (const auto& [nname, noise] : noises) {
      const AsymptoticReport rep = report(tmpl, noise, cfg);
      rows.push_back({tname, nname, rep.are});
    }
  }
  return rows;
}

std::string are_table_csv(const std::vector<Table1Row>& rows) {
  std::string out = "template,noise,are\n";
  for (const auto& row : rows) {
    out += row.template_name + "," + row.noise_name + "," + format_number(row.are) + "\n";
  }
  return out;
}

namespace detail {

double gamma_squared_with_cdf(const PeriodicTemplate& tmpl, const NoiseModel& noise,
                              const QuadratureConfig& cfg,
                              const std::function<double(double)>& cdf_fn) {
  const XGrid grid = build_xgrid(tmpl, cfg.x_nodes);
  const Phi2Fast ph = make_phi2_fast(noise, grid.f_max - grid.f_min, cfg.phi2_tol);
  QuadRule zrule = tangent_line_rule(cfg.z_nodes, noise.scale());
  Eigen::ArrayXd pz(zrule.size());
  for (Eigen::Index k = 0; k < zrule.size(); ++k) {
    pz[k] = zrule.weights[k] * noise.pdf(zrule.nodes[k]);
  }
  return gamma_core(grid, zrule, pz, ph, [&cdf_fn](double v) { return cdf_fn(v); },
                    resolve_threads(cfg.threads));
}

}  // namespace detail

}  // namespace rankmatch
