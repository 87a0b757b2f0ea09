#include "rankmatch/asymptotics.hpp"
#include "rankmatch/experiments.hpp"
#include "rankmatch/json_util.hpp"
#include "rankmatch/matcher.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open output file '" + out_path + "'");
  out << text;
}

int cmd_estimate(const std::string& csv_path, const std::string& template_spec,
                 const std::string& method, const std::string& out_path) {
  rankmatch::PeriodicTemplate tmpl = rankmatch::PeriodicTemplate::from_spec(template_spec);
  rankmatch::Signal signal = rankmatch::read_signal_csv(csv_path);
  const rankmatch::EstimateResult est =
      rankmatch::estimate(signal, tmpl, rankmatch::method_from_name(method));
  nlohmann::json j{{"theta_hat", rankmatch::json_number(est.theta_hat)},
                   {"objective_value", rankmatch::json_number(est.objective_value)},
                   {"grid_argmax", est.grid_argmax},
                   {"refine_iterations", est.refine_iterations},
                   {"method", rankmatch::method_name(est.method)},
                   {"n", signal.n()}};
  write_text(out_path, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_asymptotics(const std::string& template_spec, const std::string& noise_name,
                    double scale, const std::string& out_path) {
  rankmatch::PeriodicTemplate tmpl = rankmatch::PeriodicTemplate::from_spec(template_spec);
  rankmatch::NoiseModel noise =
      rankmatch::NoiseModel::from_json({{"family", noise_name}, {"scale", scale}});
  const rankmatch::AsymptoticReport rep = rankmatch::report(tmpl, noise);
  write_text(out_path, rep.to_json().dump(2) + "\n");
  return kExitOk;
}

int cmd_table1(const std::string& out_path) {
  const auto rows = rankmatch::are_table();
  write_text(out_path, rankmatch::are_table_csv(rows));
  return kExitOk;
}

struct SimulateFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::string template_spec;
  std::string noise_name;
  double scale = 1.0;
  bool scale_set = false;
  double theta_star = 0.0;
  bool theta_set = false;
  long long n = 0;
  int reps = 0;
  std::string method;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
};

int cmd_simulate(const SimulateFlags& flags) {
  nlohmann::json spec = nlohmann::json::object();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw std::invalid_argument("cannot open config '" + flags.config_path + "'");
    try {
      in >> spec;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
  }
  // command-line flags override the config file
  if (!flags.template_spec.empty()) spec["template"] = flags.template_spec;
  if (!flags.noise_name.empty() || flags.scale_set) {
    nlohmann::json noise = spec.value("noise", nlohmann::json::object());
    if (!flags.noise_name.empty()) noise["family"] = flags.noise_name;
    if (flags.scale_set) noise["scale"] = flags.scale;
    if (!noise.contains("family")) noise["family"] = "gaussian";
    spec["noise"] = noise;
  }
  if (flags.theta_set) spec["theta_star"] = flags.theta_star;
  if (flags.n > 0) spec["n"] = flags.n;
  if (flags.reps > 0) spec["reps"] = flags.reps;
  if (!flags.method.empty()) {
    if (flags.method == "both") {
      spec["methods"] = {"rank", "pearson"};
    } else {
      spec["methods"] = {flags.method};
    }
  }
  if (flags.seed_set) spec["master_seed"] = flags.seed;
  if (flags.workers > 0) spec["workers"] = flags.workers;

  rankmatch::RunConfig cfg = rankmatch::RunConfig::from_json(spec);
  const rankmatch::RunResult result = rankmatch::run_monte_carlo(cfg);
  const std::string out_dir = flags.out_dir;

  std::filesystem::create_directories(out_dir);
  const auto path = [&out_dir](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  rankmatch::write_rows_csv(path("rows.csv"), result);
  rankmatch::write_summary_json(path("summary.json"), result);
  rankmatch::write_hist_csv(path("hist.csv"), result);
  std::cout << "wrote " << path("rows.csv") << ", summary.json, hist.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank and Pearson template matching for 1-periodic signals"};
  app.require_subcommand(1);

  std::string signal_csv, template_spec = "A", method = "rank", out_path;
  auto* est = app.add_subcommand("estimate", "Estimate the shift of a signal CSV");
  est->add_option("signal", signal_csv, "single-column CSV of observations")->required();
  est->add_option("--template", template_spec, "A | B | C | path to knots JSON");
  est->add_option("--method", method, "rank | pearson")
      ->check(CLI::IsMember({"rank", "pearson"}));
  est->add_option("--out", out_path, "output file (default: stdout)");

  std::string noise_name = "gaussian";
  double scale = 1.0;
  auto* asy = app.add_subcommand("asymptotics", "Limit-variance report for one setting");
  asy->add_option("--template", template_spec, "A | B | C | path to knots JSON");
  asy->add_option("--noise", noise_name, "gaussian | t3 | cauchy")
      ->check(CLI::IsMember({"gaussian", "t3", "cauchy"}));
  asy->add_option("--scale", scale, "noise scale (default 1)");
  asy->add_option("--out", out_path, "output file (default: stdout)");

  auto* tab = app.add_subcommand("table1", "Efficiency table for the nine built-in settings");
  tab->add_option("--out", out_path, "output file (default: stdout)");

  SimulateFlags sf;
  auto* sim = app.add_subcommand("simulate",
                                 "Monte Carlo study from a JSON config and/or flags");
  sim->add_option("--config", sf.config_path, "run config JSON");
  sim->add_option("--out", sf.out_dir, "output directory (default: .)");
  sim->add_option("--template", sf.template_spec, "A | B | C | path to knots JSON");
  sim->add_option("--noise", sf.noise_name, "gaussian | t3 | cauchy")
      ->check(CLI::IsMember({"gaussian", "t3", "cauchy"}));
  auto* scale_opt = sim->add_option("--scale", sf.scale, "noise scale");
  auto* theta_opt = sim->add_option("--theta-star", sf.theta_star, "true shift in [0,1)");
  sim->add_option("--n", sf.n, "sample size");
  sim->add_option("--reps", sf.reps, "number of replicates");
  sim->add_option("--method", sf.method, "rank | pearson | both")
      ->check(CLI::IsMember({"rank", "pearson", "both"}));
  auto* seed_opt = sim->add_option("--seed", sf.seed, "master seed");
  sim->add_option("--workers", sf.workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (est->parsed()) return cmd_estimate(signal_csv, template_spec, method, out_path);
    if (asy->parsed()) return cmd_asymptotics(template_spec, noise_name, scale, out_path);
    if (tab->parsed()) return cmd_table1(out_path);
    if (sim->parsed()) {
      sf.scale_set = scale_opt->count() > 0;
      sf.theta_set = theta_opt->count() > 0;
      sf.seed_set = seed_opt->count() > 0;
      return cmd_simulate(sf);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
