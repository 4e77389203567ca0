#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "micsel/experiment.hpp"

namespace fs = std::filesystem;
using namespace micsel;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

struct CommonOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool full_size = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "Experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_flag("--full-size", o.full_size, "13 x 13 grid instead of 7 x 7");
}

ExperimentConfig load(const CommonOptions& o, const nlohmann::json& fallback) {
  nlohmann::json overrides = nlohmann::json::object();
  if (o.seed) overrides["seed"] = *o.seed;
  if (o.full_size) overrides["full_size"] = true;
  if (o.config.empty()) {
    nlohmann::json doc = fallback;
    for (const auto& [k, v] : overrides.items()) doc[k] = v;
    return config_from_json(doc);
  }
  return load_config(o.config, overrides);
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microphone subset selection for MVDR beamforming"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Run the configured methods on every frequency bin");
  add_common(run, run_opts, true);

  CommonOptions sweep_opts;
  std::string param, grid;
  auto* sweep = app.add_subcommand("sweep", "Cost versus noise power over a parameter grid");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--param", param, "alpha, mu, gamma or c_t")->required();
  sweep->add_option("--grid", grid, "lo:step:hi or a comma-separated list")->required();

  CommonOptions fc_opts;
  std::string path_file;
  auto* moving = app.add_subcommand("moving-fc", "Warm-restarted greedy selection along a fusion center path");
  add_common(moving, fc_opts, false);
  moving->add_option("--path", path_file, "JSON array of [x, y] waypoints (default: rectangle)");

  std::string run_dir;
  auto* report = app.add_subcommand("report-complexity", "Operation-count proxies of a finished run");
  report->add_option("run-dir", run_dir, "Directory written by 'run'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = load(run_opts, {});
      ExperimentResult res = run_experiment(cfg);
      write_experiment(res, run_opts.out);
      std::cout << "wrote " << res.runs.size() << " runs to " << run_opts.out << "\n";
    } else if (*sweep) {
      ExperimentConfig cfg = load(sweep_opts, {});
      auto rows = sweep_tradeoff(cfg, param, parse_grid(grid));
      std::ostringstream csv;
      write_sweep_csv(csv, rows);
      fs::path out = fs::path(sweep_opts.out) / ("sweep_" + param + ".csv");
      write_file(out, csv.str());
      std::cout << "wrote " << rows.size() << " rows to " << out.string() << "\n";
    } else if (*moving) {
      nlohmann::json fallback{{"method", "greedy"}, {"alpha", 0.9}};
      ExperimentConfig cfg = load(fc_opts, fallback);
      auto path = path_file.empty() ? rectangle_path() : load_path(path_file);
      auto runs = moving_fc_run(cfg, path);
      write_moving_fc(runs, fc_opts.out);
      std::cout << "wrote " << runs.size() << " waypoint runs to " << fc_opts.out << "\n";
    } else if (*report) {
      auto rows = complexity_report(fs::path(run_dir));
      std::ostringstream csv;
      write_complexity_csv(csv, rows);
      write_file(fs::path(run_dir) / "complexity.csv", csv.str());
      std::cout << csv.str();
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
