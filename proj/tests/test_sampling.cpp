#include "rankmatch/sampling.hpp"

#include "rankmatch/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using rankmatch::NoiseModel;
using rankmatch::PeriodicTemplate;
using rankmatch::Signal;
using rankmatch::Xoshiro256pp;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("noiseless signal on the grid x_i = i/n") {
  const auto a = PeriodicTemplate::builtin_a();
  const Signal s = rankmatch::generate_signal(a, 0.0, 4, std::nullopt, 0);
  REQUIRE(s.n() == 4);
  CHECK(s.values[0] == 0.0);  // f(1/4)
  CHECK(s.values[1] == 1.0);  // f(1/2)
  CHECK(s.values[2] == 0.0);  // f(3/4)
  CHECK(s.values[3] == 0.0);  // f(1)

  const Signal shifted = rankmatch::generate_signal(a, 0.25, 4, std::nullopt, 0);
  CHECK(shifted.values[0] == 0.0);
  CHECK(shifted.values[1] == 0.0);
  CHECK(shifted.values[2] == 1.0);
  CHECK(shifted.values[3] == 0.0);
}

TEST_CASE("grid shifts are cyclic permutations (dyadic n)") {
  const Eigen::Index n = 1024;
  for (const auto& tmpl : {PeriodicTemplate::builtin_a(), PeriodicTemplate::builtin_b(),
                           PeriodicTemplate::builtin_c()}) {
    const Signal base = rankmatch::generate_signal(tmpl, 0.0, n, std::nullopt, 0);
    for (const Eigen::Index k : {1L, 17L, 512L}) {
      const double theta = static_cast<double>(k) / static_cast<double>(n);
      const Signal moved = rankmatch::generate_signal(tmpl, theta, n, std::nullopt, 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(moved.values[i] == base.values[((i - k) % n + n) % n]);
      }
    }
  }
}

TEST_CASE("noisy generation is deterministic and records truth") {
  const auto b = PeriodicTemplate::builtin_b();
  const NoiseModel noise = NoiseModel::student_t3();
  const Signal s1 = rankmatch::generate_signal(b, 0.37, 500, noise, 99);
  const Signal s2 = rankmatch::generate_signal(b, 0.37, 500, noise, 99);
  CHECK((s1.values == s2.values).all());
  REQUIRE(s1.truth.has_value());
  CHECK(s1.truth->theta_star == 0.37);
  CHECK(s1.truth->template_id == "B");
  CHECK(s1.truth->seed == 99);
  CHECK(s1.truth->noise->name() == "t3");
  CHECK_THROWS_AS(rankmatch::generate_signal(b, 0.0, 1, noise, 1), std::invalid_argument);
}

TEST_CASE("rank_transform basics") {
  Eigen::ArrayXd v(3);
  v << 3.1, 1.2, 2.5;
  const Eigen::ArrayXd r = rankmatch::rank_transform(v);
  CHECK(r[0] == 3.0);
  CHECK(r[1] == 1.0);
  CHECK(r[2] == 2.0);

  Eigen::ArrayXd tied(3);
  tied << 1.0, 1.0, 2.0;
  const Eigen::ArrayXd rt = rankmatch::rank_transform(tied);
  CHECK(rt[0] == 1.5);
  CHECK(rt[1] == 1.5);
  CHECK(rt[2] == 3.0);
}

TEST_CASE("ranks sum to n(n+1)/2 and are a permutation when distinct") {
  Xoshiro256pp rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next() % 200);
    Eigen::ArrayXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      // quantized values produce plenty of ties half of the time
      const double u = rng.uniform01();
      v[i] = rep % 2 == 0 ? u : std::floor(u * 8.0);
    }
    const Eigen::ArrayXd r = rankmatch::rank_transform(v);
    const double expect = 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
    CHECK(r.sum() == expect);
  }

  Eigen::ArrayXd v(6);
  v << 0.3, -1.0, 7.0, 0.1, 0.2, 0.25;
  const Eigen::ArrayXd r = rankmatch::rank_transform(v);
  std::vector<double> sorted(r.data(), r.data() + r.size());
  std::sort(sorted.begin(), sorted.end());
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i + 1);
}

TEST_CASE("ranks are invariant under strictly increasing maps") {
  Xoshiro256pp rng(23);
  const auto distortions = {
      +[](double x) { return x * x * x + x; },
      +[](double x) { return std::atan(x); },
      +[](double x) { return std::exp(x); },
  };
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::ArrayXd v(64);
    for (Eigen::Index i = 0; i < 64; ++i) v[i] = 4.0 * (rng.uniform01() - 0.5);
    if (rep % 3 == 0) v[5] = v[40];  // force a tie now and then
    const Eigen::ArrayXd base = rankmatch::rank_transform(v);
    for (const auto g : distortions) {
      const Eigen::ArrayXd mapped = rankmatch::rank_transform(v.unaryExpr(g));
      CHECK((mapped == base).all());
    }
  }
}

TEST_CASE("csv round trip with sidecar") {
  const auto path = temp_file("rankmatch_signal_test.csv");
  const auto sidecar = temp_file("rankmatch_signal_test.truth.json");
  const Signal s = rankmatch::generate_signal(PeriodicTemplate::builtin_a(), 0.21, 64,
                                              NoiseModel::gaussian(), 5);
  rankmatch::write_signal_csv(path.string(), s);
  rankmatch::write_truth_sidecar(sidecar.string(), s);
  const Signal back = rankmatch::read_signal_csv(path.string());
  REQUIRE(back.n() == s.n());
  CHECK((back.values == s.values).all());  // %.17g round-trips doubles

  std::ifstream meta(sidecar);
  nlohmann::json j;
  meta >> j;
  CHECK(j["theta_star"] == 0.21);
  CHECK(j["template_id"] == "A");
  CHECK(j["noise"]["family"] == "gaussian");
  std::filesystem::remove(path);
  std::filesystem::remove(sidecar);
}

TEST_CASE("csv rejects malformed input") {
  const auto path = temp_file("rankmatch_signal_bad.csv");
  {
    std::ofstream out(path);
    out << "1.5\nnot-a-number\n";
  }
  CHECK_THROWS_AS(rankmatch::read_signal_csv(path.string()), std::invalid_argument);
  {
    std::ofstream out(path);
    out << "";
  }
  CHECK_THROWS_AS(rankmatch::read_signal_csv(path.string()), std::invalid_argument);
  CHECK_THROWS_AS(rankmatch::read_signal_csv("/nonexistent/nowhere.csv"),
                  std::invalid_argument);
  std::filesystem::remove(path);
}
