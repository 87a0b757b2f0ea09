#include "rankmatch/noise.hpp"

#include "rankmatch/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using rankmatch::NoiseModel;
using rankmatch::Xoshiro256pp;

namespace {

// Difference of two iid t3 draws in closed form, via the characteristic
// function (1 + sqrt(3)|s|) exp(-sqrt(3)|s|): an independent oracle for the
// quadrature that the implementation actually uses.
double t3_diff_density_cf(double t) {
  const double a = 2.0 * std::sqrt(3.0);
  const double a2 = 12.0;
  const double q = a2 + t * t;
  return (a / q + 2.0 * std::sqrt(3.0) * (a2 - t * t) / (q * q) +
          6.0 * a * (a2 - 3.0 * t * t) / (q * q * q)) /
         std::numbers::pi;
}

double t3_diff_cdf_cf(double t) {
  const double a = 2.0 * std::sqrt(3.0);
  const double a2 = 12.0;
  const double q = a2 + t * t;
  return 0.5 + (std::atan(t / a) + 2.0 * std::sqrt(3.0) * t / q +
                6.0 * a * t / (q * q)) /
                   std::numbers::pi;
}

std::vector<NoiseModel> all_models() {
  return {NoiseModel::gaussian(), NoiseModel::student_t3(), NoiseModel::cauchy(),
          NoiseModel::gaussian(0.7), NoiseModel::student_t3(1.6), NoiseModel::cauchy(2.0)};
}

}  // namespace

TEST_CASE("pdf values and evenness") {
  CHECK(NoiseModel::gaussian().pdf(0.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(NoiseModel::cauchy().pdf(0.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(NoiseModel::student_t3().pdf(0.0) ==
        doctest::Approx(2.0 / (std::numbers::pi * std::sqrt(3.0))).epsilon(1e-12));
  for (const auto& m : all_models()) {
    Xoshiro256pp rng(5);
    for (int i = 0; i < 50; ++i) {
      const double z = 20.0 * (rng.uniform01() - 0.5);
      CHECK(m.pdf(-z) == m.pdf(z));
      CHECK(m.pdf(z) >= 0.0);
    }
  }
}

TEST_CASE("cdf values, symmetry and monotonicity") {
  CHECK(NoiseModel::gaussian().cdf(0.0) == 0.5);
  CHECK(NoiseModel::cauchy().cdf(1.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(NoiseModel::student_t3().cdf(0.0) == 0.5);
  // t3 closed-form cdf against a library-independent reference value
  CHECK(NoiseModel::student_t3().cdf(1.0) == doctest::Approx(0.8044988905).epsilon(1e-9));
  for (const auto& m : all_models()) {
    Xoshiro256pp rng(7);
    double prev_z = -30.0, prev_c = m.cdf(-30.0);
    for (int i = 0; i < 60; ++i) {
      const double z = -30.0 + 60.0 * i / 59.0;
      const double c = m.cdf(z);
      CHECK(c >= prev_c);
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      CHECK(m.cdf(-z) == doctest::Approx(1.0 - c).epsilon(1e-12));
      prev_z = z;
      prev_c = c;
    }
    (void)prev_z;
  }
}

TEST_CASE("cdf and pdf are consistent") {
  const double h = 1e-5;
  for (const auto& m : all_models()) {
    for (int i = 0; i <= 40; ++i) {
      const double z = -5.0 + 10.0 * i / 40.0;
      const double fd = (m.cdf(z + h) - m.cdf(z - h)) / (2.0 * h);
      CHECK(fd == doctest::Approx(m.pdf(z)).epsilon(1e-6));
    }
  }
}

TEST_CASE("variance per family") {
  CHECK(NoiseModel::gaussian(2.0).variance() == 4.0);
  CHECK(NoiseModel::student_t3(2.0).variance() == 12.0);
  CHECK(std::isinf(NoiseModel::cauchy().variance()));
}

TEST_CASE("sampling is deterministic in (n, seed)") {
  for (const auto& m : all_models()) {
    const auto a = m.sample(1000, 42);
    const auto b = m.sample(1000, 42);
    CHECK((a == b).all());
    const auto c = m.sample(1000, 43);
    CHECK(!(a == c).all());
  }
  CHECK(NoiseModel::gaussian().sample(1, 9).size() == 1);
  CHECK_THROWS_AS(NoiseModel::gaussian().sample(0, 9), std::invalid_argument);
}

TEST_CASE("sampling law checks at n = 1e6") {
  const Eigen::Index n = 1000000;
  const auto g = NoiseModel::gaussian().sample(n, 123);
  CHECK(std::abs(g.mean()) <= 4.0 / std::sqrt(static_cast<double>(n)));
  const double gvar = (g - g.mean()).square().sum() / static_cast<double>(n - 1);
  CHECK(gvar == doctest::Approx(1.0).epsilon(0.01));

  const auto c = NoiseModel::cauchy().sample(n, 321);
  std::vector<double> cv(c.data(), c.data() + n);
  std::nth_element(cv.begin(), cv.begin() + n / 2, cv.end());
  CHECK(std::abs(cv[n / 2]) <= 0.01);

  const auto t = NoiseModel::student_t3().sample(n, 77);
  std::vector<double> tv(t.data(), t.data() + n);
  std::nth_element(tv.begin(), tv.begin() + n / 2, tv.end());
  CHECK(std::abs(tv[n / 2]) <= 0.01);
}

TEST_CASE("phi2 basics") {
  for (const auto& m : all_models()) {
    CHECK(m.phi2(0.0) == doctest::Approx(0.5).epsilon(1e-10));
  }
  CHECK(NoiseModel::gaussian().phi2(1.0) ==
        doctest::Approx(0.7602499389065).epsilon(1e-11));
  CHECK(NoiseModel::cauchy().phi2(2.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(NoiseModel::gaussian().phi2_density(0.0) ==
        doctest::Approx(0.2820947917738781).epsilon(1e-12));
  CHECK(NoiseModel::cauchy().phi2_density(0.0) ==
        doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("t3 difference law matches the characteristic-function closed form") {
  const NoiseModel t3 = NoiseModel::student_t3();
  for (const double t : {0.0, 0.25, 0.5, 1.0, 2.0, 5.0}) {
    CHECK(t3.phi2_density(t) == doctest::Approx(t3_diff_density_cf(t)).epsilon(1e-9));
    CHECK(t3.phi2(t) == doctest::Approx(t3_diff_cdf_cf(t)).epsilon(1e-9));
  }
  // frozen spot values (agree with the cf form and adaptive integration)
  CHECK(t3.phi2_density(0.0) == doctest::Approx(0.229720373092).epsilon(1e-10));
  CHECK(t3.phi2_density(1.0) == doctest::Approx(0.183692649726).epsilon(1e-10));
  CHECK(t3.phi2(0.5) == doctest::Approx(0.612679359615).epsilon(1e-10));
  CHECK(t3.phi2(1.0) == doctest::Approx(0.713423631452).epsilon(1e-10));
}

TEST_CASE("quadrature route matches the closed forms for gaussian and cauchy") {
  for (const auto& m : {NoiseModel::gaussian(), NoiseModel::cauchy(),
                        NoiseModel::gaussian(1.7), NoiseModel::cauchy(0.6)}) {
    for (int i = 0; i < 100; ++i) {
      const double t = -10.0 + 20.0 * i / 99.0;
      CHECK(std::abs(rankmatch::phi2_by_quadrature(m, t) - m.phi2(t)) <= 1e-8);
      CHECK(std::abs(rankmatch::phi2_density_by_quadrature(m, t) - m.phi2_density(t)) <=
            1e-8);
    }
  }
}

TEST_CASE("phi2 is a symmetric distribution function") {
  for (const auto& m : all_models()) {
    double prev = m.phi2(-8.0);
    for (int i = 1; i <= 32; ++i) {
      const double t = -8.0 + 16.0 * i / 32.0;
      const double v = m.phi2(t);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    for (const double t : {0.3, 1.1, 2.7, 6.0}) {
      CHECK(m.phi2(t) + m.phi2(-t) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(m.phi2_density(t) == doctest::Approx(m.phi2_density(-t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("phi2_density integrates to one") {
  const auto integrate = [](const NoiseModel& m, double lim, int nodes) {
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
      const double t = -lim + 2.0 * lim * (i + 0.5) / nodes;
      acc += m.phi2_density(t) * (2.0 * lim / nodes);
    }
    return acc;
  };
  CHECK(std::abs(integrate(NoiseModel::gaussian(), 50.0, 20000) - 1.0) <= 1e-6);

  // t3 carries ~3.5e-5 of mass beyond +-50 (P(|Z'-Z| > T) ~ 8 sqrt(3)/(pi T^3)),
  // so the [-50, 50] integral is checked against the cdf over the same window
  // and the remainder against the algebraic tail value.
  const NoiseModel t3 = NoiseModel::student_t3();
  const double window = integrate(t3, 50.0, 20000);
  const double cdf_mass = t3.phi2(50.0) - t3.phi2(-50.0);
  CHECK(std::abs(window - cdf_mass) <= 1e-6);
  const double tail = 8.0 * std::sqrt(3.0) / (std::numbers::pi * 50.0 * 50.0 * 50.0);
  CHECK(1.0 - window > 1e-6);
  CHECK(1.0 - window == doctest::Approx(tail).epsilon(0.05));

  // Cauchy via the closed-form cdf instead: density mass over [-50, 50]
  const NoiseModel cauchy = NoiseModel::cauchy();
  const double cwindow = integrate(cauchy, 50.0, 20000);
  CHECK(std::abs(cwindow - (cauchy.phi2(50.0) - cauchy.phi2(-50.0))) <= 1e-8);
}

TEST_CASE("json parsing") {
  const auto g = NoiseModel::from_json(nlohmann::json::parse(R"({"family":"gaussian","scale":2.0})"));
  CHECK(g.family() == rankmatch::NoiseFamily::Gaussian);
  CHECK(g.scale() == 2.0);
  const auto t = NoiseModel::from_json(nlohmann::json::parse(R"({"family":"t3"})"));
  CHECK(t.scale() == 1.0);
  CHECK_THROWS_AS(NoiseModel::from_json(nlohmann::json::parse(R"({"family":"laplace"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::gaussian(-1.0), std::invalid_argument);
  CHECK(t.to_json()["family"] == "t3");
}
