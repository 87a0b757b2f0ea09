#include "rankmatch/sampling.hpp"
#include "rankmatch/templates.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(RANKMATCH_CLI_PATH) + " " + args + " 2>&1";
  CliResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) {
    res.output.append(buf, got);
  }
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "rankmatch_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("estimate recovers a noiseless shift and honors rank invariance") {
  const auto dir = temp_dir();
  const auto csv = dir / "noiseless.csv";
  const auto signal = rankmatch::generate_signal(rankmatch::PeriodicTemplate::builtin_a(),
                                                 0.25, 1000, std::nullopt, 0);
  rankmatch::write_signal_csv(csv.string(), signal);

  const CliResult res = run_cli("estimate " + csv.string() + " --template A --method rank");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.output);
  CHECK(std::abs(j["theta_hat"].get<double>() - 0.25) <= 1e-4);
  CHECK(j["method"] == "rank");
  CHECK(j["n"] == 1000);

  // a monotonically distorted copy gives the identical estimate
  const auto distorted_csv = dir / "distorted.csv";
  rankmatch::Signal distorted = signal;
  distorted.values = signal.values.unaryExpr([](double y) { return std::atan(y) * 3.0; });
  rankmatch::write_signal_csv(distorted_csv.string(), distorted);
  const CliResult res2 =
      run_cli("estimate " + distorted_csv.string() + " --template A --method rank");
  REQUIRE(res2.exit_code == 0);
  const auto j2 = nlohmann::json::parse(res2.output);
  CHECK(j2["theta_hat"] == j["theta_hat"]);

  const CliResult res3 =
      run_cli("estimate " + csv.string() + " --template A --method pearson");
  REQUIRE(res3.exit_code == 0);
  CHECK(std::abs(nlohmann::json::parse(res3.output)["theta_hat"].get<double>() - 0.25) <=
        1e-4);
}

TEST_CASE("estimate validation failures exit with code 2") {
  const auto dir = temp_dir();
  const auto empty_csv = dir / "empty.csv";
  std::ofstream(empty_csv).close();
  const CliResult empty = run_cli("estimate " + empty_csv.string() + " --template A");
  CHECK(empty.exit_code == 2);
  CHECK(empty.output.find("error") != std::string::npos);
  CHECK(std::count(empty.output.begin(), empty.output.end(), '\n') == 1);

  const auto bad_csv = dir / "bad.csv";
  std::ofstream(bad_csv) << "1.0\nnope\n";
  CHECK(run_cli("estimate " + bad_csv.string() + " --template A").exit_code == 2);
  CHECK(run_cli("estimate " + bad_csv.string() + " --template Q").exit_code == 2);
}

TEST_CASE("unknown flags and missing subcommands exit with code 2") {
  CHECK(run_cli("table1 --frobnicate").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("estimate").exit_code == 2);  // missing required argument
}

TEST_CASE("help exits zero and documents the flags") {
  const CliResult top = run_cli("--help");
  CHECK(top.exit_code == 0);
  for (const char* sub : {"estimate", "asymptotics", "table1", "simulate"}) {
    CHECK(top.output.find(sub) != std::string::npos);
    const CliResult h = run_cli(std::string(sub) + " --help");
    CHECK(h.exit_code == 0);
  }
  CHECK(run_cli("estimate --help").output.find("--template") != std::string::npos);
  CHECK(run_cli("simulate --help").output.find("--workers") != std::string::npos);
  CHECK(run_cli("asymptotics --help").output.find("--noise") != std::string::npos);
}

TEST_CASE("asymptotics subcommand emits the report json") {
  setenv("RANKMATCH_QUAD_NODES", "256", 1);
  const CliResult res = run_cli("asymptotics --template A --noise gaussian");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.output);
  CHECK(std::abs(j["are"].get<double>() - 0.94679649) <= 1e-3);
  CHECK(j["m_second"].get<double>() < 0.0);
  CHECK(j.contains("quadrature"));

  const CliResult cauchy = run_cli("asymptotics --template C --noise cauchy");
  unsetenv("RANKMATCH_QUAD_NODES");
  REQUIRE(cauchy.exit_code == 0);
  CHECK(nlohmann::json::parse(cauchy.output)["are"] == "inf");
}

TEST_CASE("table1 is reproducible byte for byte") {
  setenv("RANKMATCH_QUAD_NODES", "128", 1);
  const CliResult a = run_cli("table1");
  const CliResult b = run_cli("table1");
  unsetenv("RANKMATCH_QUAD_NODES");
  REQUIRE(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("template,noise,are\n") == 0);
  CHECK(std::count(a.output.begin(), a.output.end(), '\n') == 10);
  CHECK(a.output.find("A,cauchy,inf") != std::string::npos);
  CHECK(a.output.find("B,t3,") != std::string::npos);
}

TEST_CASE("simulate writes the artifact files deterministically") {
  const auto dir = temp_dir();
  const auto config = dir / "run.json";
  std::ofstream(config) << R"({
    "template": "A",
    "noise": {"family": "gaussian", "scale": 1.0},
    "theta_star": 0.0,
    "n": 200,
    "reps": 10,
    "methods": ["rank", "pearson"],
    "master_seed": 7,
    "workers": 2
  })";
  setenv("RANKMATCH_QUAD_NODES", "128", 1);
  const auto out1 = dir / "out1";
  const auto out2 = dir / "out2";
  REQUIRE(run_cli("simulate --config " + config.string() + " --out " + out1.string())
              .exit_code == 0);
  REQUIRE(run_cli("simulate --config " + config.string() + " --out " + out2.string() +
                  " --workers 8")
              .exit_code == 0);
  unsetenv("RANKMATCH_QUAD_NODES");

  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string rows1 = slurp(out1 / "rows.csv");
  CHECK(rows1 == slurp(out2 / "rows.csv"));
  CHECK(std::count(rows1.begin(), rows1.end(), '\n') == 21);  // header + 2 * 10
  CHECK(fs::exists(out1 / "summary.json"));
  CHECK(fs::exists(out1 / "hist.csv"));

  nlohmann::json summary = nlohmann::json::parse(slurp(out1 / "summary.json"));
  CHECK(summary["config"]["reps"] == 10);
  CHECK(summary["summaries"].size() == 2);
}

TEST_CASE("simulate accepts direct flags and flag overrides") {
  const auto dir = temp_dir();
  setenv("RANKMATCH_QUAD_NODES", "128", 1);
  const auto out = dir / "flags_out";
  const CliResult res = run_cli(
      "simulate --template B --noise t3 --n 150 --reps 6 --method rank --seed 5 --out " +
      out.string());
  REQUIRE(res.exit_code == 0);
  std::ifstream in(out / "summary.json");
  nlohmann::json summary;
  in >> summary;
  CHECK(summary["config"]["n"] == 150);
  CHECK(summary["config"]["reps"] == 6);
  CHECK(summary["config"]["noise"]["family"] == "t3");
  CHECK(summary["config"]["methods"].size() == 1);

  // flags take precedence over the config file
  const auto config = dir / "override.json";
  std::ofstream(config) << R"({"template": "A", "n": 300, "reps": 4, "master_seed": 1})";
  const auto out2 = dir / "flags_out2";
  REQUIRE(run_cli("simulate --config " + config.string() + " --reps 9 --method both --out " +
                  out2.string())
              .exit_code == 0);
  std::ifstream in2(out2 / "summary.json");
  nlohmann::json summary2;
  in2 >> summary2;
  CHECK(summary2["config"]["reps"] == 9);
  CHECK(summary2["config"]["n"] == 300);
  CHECK(summary2["config"]["methods"].size() == 2);
  unsetenv("RANKMATCH_QUAD_NODES");
}

TEST_CASE("simulate config errors exit with code 2") {
  const auto dir = temp_dir();
  CHECK(run_cli("simulate --config " + (dir / "missing.json").string()).exit_code == 2);
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK(run_cli("simulate --config " + bad.string()).exit_code == 2);
  const auto invalid = dir / "invalid.json";
  std::ofstream(invalid) << R"({"template": "A", "reps": 0})";
  CHECK(run_cli("simulate --config " + invalid.string()).exit_code == 2);
}
