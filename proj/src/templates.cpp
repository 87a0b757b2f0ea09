#include "rankmatch/templates.hpp"

#include "rankmatch/quadrature.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rankmatch {

namespace {

double eval_a(double x) {
  if (x >= 0.25 && x < 0.5) return 4.0 * x - 1.0;
  if (x >= 0.5 && x < 0.75) return 3.0 - 4.0 * x;
  return 0.0;
}

double deriv_a(double x) {
  if (x >= 0.25 && x < 0.5) return 4.0;
  if (x >= 0.5 && x < 0.75) return -4.0;
  return 0.0;
}

double eval_b(double x) {
  if (x >= 0.2 && x < 0.3) return 10.0 * x - 2.0;
  if (x >= 0.3 && x < 0.4) return 4.0 - 10.0 * x;
  if (x >= 0.6 && x < 0.7) return 10.0 * x - 6.0;
  if (x >= 0.7 && x < 0.8) return 8.0 - 10.0 * x;
  return 0.0;
}

double deriv_b(double x) {
  if (x >= 0.2 && x < 0.3) return 10.0;
  if (x >= 0.3 && x < 0.4) return -10.0;
  if (x >= 0.6 && x < 0.7) return 10.0;
  if (x >= 0.7 && x < 0.8) return -10.0;
  return 0.0;
}

double eval_c(double x) {
  const double u = 4.0 * x - 2.0;
  const double v = 1.0 - u * u;
  return v > 0.0 ? v * v * v : 0.0;
}

double deriv_c(double x) {
  const double u = 4.0 * x - 2.0;
  const double v = 1.0 - u * u;
  return v > 0.0 ? -24.0 * u * v * v : 0.0;
}

std::string hash_knots(const std::vector<std::pair<double, double>>& knots) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over raw doubles
  auto mix = [&h](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  for (const auto& [pos, val] : knots) {
    mix(pos);
    mix(val);
  }
  std::ostringstream os;
  os << "pl:" << std::hex << h;
  return os.str();
}

}  // namespace

PeriodicTemplate PeriodicTemplate::builtin_a() {
  PeriodicTemplate t;
  t.kind_ = TemplateKind::BuiltinA;
  t.kinks_ = {0.25, 0.5, 0.75};
  t.breakpoints_ = {0.0, 0.25, 0.5, 0.75, 1.0};
  t.lipschitz_ = 4.0;
  t.deriv_energy_ = 8.0;  // 4^2 * 0.25 twice
  t.id_ = "A";
  return t;
}

PeriodicTemplate PeriodicTemplate::builtin_b() {
  PeriodicTemplate t;
  t.kind_ = TemplateKind::BuiltinB;
  t.kinks_ = {0.2, 0.3, 0.4, 0.6, 0.7, 0.8};
  t.breakpoints_ = {0.0, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 1.0};
  t.lipschitz_ = 10.0;
  t.deriv_energy_ = 40.0;  // 10^2 * 0.1 on four segments
  t.id_ = "B";
  return t;
}

PeriodicTemplate PeriodicTemplate::builtin_c() {
  PeriodicTemplate t;
  t.kind_ = TemplateKind::BuiltinC;
  t.kinks_ = {};  // f' is continuous
  t.breakpoints_ = {0.0, 0.25, 0.75, 1.0};
  // max |f'| = 24 |u| (1-u^2)^2 at u^2 = 1/5.
  t.lipschitz_ = 384.0 / (25.0 * std::sqrt(5.0));
  // Composite quadrature on the smooth support; the integrand is a degree-10
  // polynomial there, so the rule is exact and the doubling check is free.
  QuadRule coarse = composite_gauss(t.breakpoints_, 128);
  QuadRule fine = composite_gauss(t.breakpoints_, 256);
  const auto energy = [](const QuadRule& r) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double d = deriv_c(r.nodes[i]);
      acc += r.weights[i] * d * d;
    }
    return acc;
  };
  const double e1 = energy(coarse);
  const double e2 = energy(fine);
  if (std::abs(e2 - e1) > 1e-10 * std::abs(e2)) {
    throw std::runtime_error("builtin C: deriv_energy quadrature failed to converge");
  }
  t.deriv_energy_ = e2;
  t.id_ = "C";
  return t;
}

PeriodicTemplate PeriodicTemplate::piecewise_linear(
    std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2) {
    throw std::invalid_argument("piecewise_linear: need at least two knots");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double pos = knots[i].first;
    if (!(pos >= 0.0 && pos < 1.0)) {
      throw std::invalid_argument("piecewise_linear: knot positions must lie in [0, 1)");
    }
    if (i > 0 && !(pos > knots[i - 1].first)) {
      throw std::invalid_argument("piecewise_linear: knot positions must be strictly increasing");
    }
  }
  const double v0 = knots.front().second;
  const bool constant = std::all_of(knots.begin(), knots.end(),
                                    [v0](const auto& k) { return k.second == v0; });
  if (constant) {
    throw std::invalid_argument("piecewise_linear: constant template is not identifiable");
  }
  PeriodicTemplate t;
  t.kind_ = TemplateKind::PiecewiseLinear;
  t.knots_ = std::move(knots);
  t.finalize_piecewise();
  return t;
}

void PeriodicTemplate::finalize_piecewise() {
  const std::size_t m = knots_.size();
  slopes_.resize(m);
  double energy = 0.0;
  double lip = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x0 = knots_[i].first;
    const double y0 = knots_[i].second;
    const double x1 = (i + 1 < m) ? knots_[i + 1].first : knots_.front().first + 1.0;
    const double y1 = (i + 1 < m) ? knots_[i + 1].second : knots_.front().second;
    const double len = x1 - x0;
    const double slope = (y1 - y0) / len;
    slopes_[i] = slope;
    energy += slope * slope * len;
    lip = std::max(lip, std::abs(slope));
  }
  deriv_energy_ = energy;
  lipschitz_ = lip;

  kinks_.clear();
  for (std::size_t i = 0; i < m; ++i) {
    const double prev_slope = slopes_[(i + m - 1) % m];
    if (slopes_[i] != prev_slope) kinks_.push_back(knots_[i].first);
  }
  breakpoints_.clear();
  breakpoints_.push_back(0.0);
  for (const auto& k : knots_) {
    if (k.first > 0.0) breakpoints_.push_back(k.first);
  }
  breakpoints_.push_back(1.0);
  id_ = hash_knots(knots_);
}

PeriodicTemplate PeriodicTemplate::from_json(const nlohmann::json& spec) {
  if (!spec.contains("knots") || !spec["knots"].is_array()) {
    throw std::invalid_argument("template json: missing \"knots\" array");
  }
  std::vector<std::pair<double, double>> knots;
  for (const auto& entry : spec["knots"]) {
    if (!entry.is_array() || entry.size() != 2) {
      throw std::invalid_argument("template json: each knot must be [position, value]");
    }
    knots.emplace_back(entry[0].get<double>(), entry[1].get<double>());
  }
  return piecewise_linear(std::move(knots));
}

PeriodicTemplate PeriodicTemplate::from_spec(const std::string& spec) {
  if (spec == "A") return builtin_a();
  if (spec == "B") return builtin_b();
  if (spec == "C") return builtin_c();
  std::ifstream in(spec);
  if (!in) throw std::invalid_argument("template spec: cannot open '" + spec + "'");
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

double PeriodicTemplate::eval(double x) const {
  const double r = wrap_unit(x);
  switch (kind_) {
    case TemplateKind::BuiltinA: return eval_a(r);
    case TemplateKind::BuiltinB: return eval_b(r);
    case TemplateKind::BuiltinC: return eval_c(r);
    case TemplateKind::PiecewiseLinear: break;
  }
  // Find the segment whose half-open interval [x_i, x_{i+1}) contains r,
  // treating positions before the first knot as part of the closing segment.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), r,
                             [](double v, const auto& k) { return v < k.first; });
  std::size_t idx;
  double x0, y0;
  if (it == knots_.begin()) {
    idx = knots_.size() - 1;
    x0 = knots_.back().first - 1.0;  // closing segment, shifted one period back
    y0 = knots_.back().second;
  } else {
    idx = static_cast<std::size_t>(it - knots_.begin()) - 1;
    x0 = knots_[idx].first;
    y0 = knots_[idx].second;
  }
  return y0 + slopes_[idx] * (r - x0);
}

double PeriodicTemplate::deriv(double x) const {
  const double r = wrap_unit(x);
  switch (kind_) {
    case TemplateKind::BuiltinA: return deriv_a(r);
    case TemplateKind::BuiltinB: return deriv_b(r);
    case TemplateKind::BuiltinC: return deriv_c(r);
    case TemplateKind::PiecewiseLinear: break;
  }
  auto it = std::upper_bound(knots_.begin(), knots_.end(), r,
                             [](double v, const auto& k) { return v < k.first; });
  const std::size_t idx = (it == knots_.begin())
                              ? knots_.size() - 1
                              : static_cast<std::size_t>(it - knots_.begin()) - 1;
  return slopes_[idx];
}

}  // namespace rankmatch
