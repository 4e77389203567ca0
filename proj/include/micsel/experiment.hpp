#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "micsel/baselines.hpp"

namespace micsel {

enum class Method { model_rxx, model_steering, uncorrelated, greedy, sparse, radius, utility, brute_force };

std::string to_string(Method method);
// Throws ConfigError for an unknown name.
Method method_from_string(const std::string& name);

enum class Aggregation { per_bin, union_bins };

struct ExperimentConfig {
  Scene scene;
  std::vector<double> omegas;
  std::vector<Method> methods;
  double alpha = 0.65;
  // Sparse MVDR penalty in units of sparse_mu_scale.
  double mu = 1.0;
  SparseRelaxation sparse_relaxation = SparseRelaxation::l1;
  double epsilon = 1e-5;
  double gamma = 6.0;
  // Utility budget; empty means the cost reached by the greedy selection
  // (or the model-driven one) for the same bin and initial point.
  std::optional<double> c_t = 0.09;
  // Initial points for greedy and utility; empty means the fusion center.
  std::vector<Point2> initial_points;
  // Transmission range; 0 means the nearest-neighbour spacing.
  double r0 = 0.0;
  std::uint64_t seed = 0;
  int draws = 200;
  int greedy_draws = 50;
  Aggregation aggregation = Aggregation::per_bin;
  // Positive: statistics estimated from this many snapshots per bin.
  int snapshots = 0;
  int threads = 0;  // 0: hardware concurrency

  std::vector<Point2> effective_initial_points() const;
  double effective_r0() const;
  void validate() const;
};

// 8 angular frequencies log-spaced over [2 pi 125, 2 pi 4000] rad/s.
std::vector<double> default_omegas();

// Keys: scene (object or "paper_like"), scene_file, full_size, omegas or
// frequencies_hz, method or methods, alpha, mu, sparse_relaxation, epsilon,
// gamma, c_t (number or "match"), initial_points, r0, seed, draws,
// greedy_draws, aggregation, snapshots, threads. Relative scene_file paths
// resolve against base_dir.
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});
// Parse errors report line and column. Top-level keys of overrides replace
// those of the file.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const nlohmann::json& overrides = nlohmann::json::object());
nlohmann::json config_to_json(const ExperimentConfig& config);

struct MethodRun {
  Method method = Method::model_steering;
  int bin = 0;
  double omega = 0.0;
  int init = 0;  // index into the initial points
  std::string parameter;
  double value = 0.0;
  IndexSet selected;
  double cost = 0.0;
  // Cost of the relaxed solution before rounding (model-driven only).
  std::optional<double> relaxed_cost;
  // 1 / (a^H Q(p) a) at the relaxed solution (model-driven only).
  std::optional<double> relaxed_noise_power;
  double noise_power = 0.0;
  double snr = 0.0;
  double beta = 0.0;  // full-network noise power of the bin
  // Meets alpha times the full-network SNR.
  bool feasible = false;
  std::string solver_status = "none";
  int iterations = 0;
  // Operation-count proxy: sum |S1|^3 (greedy), sum |S2|^2 (|S1| - |S2|)
  // (utility), M^3 (model-driven and uncorrelated).
  std::optional<double> complexity;
  std::optional<SelectionTrace> trace;
};

struct AggregateRow {
  Method method = Method::model_steering;
  int init = 0;
  IndexSet selected;
  double cost = 0.0;
  double worst_noise_power = 0.0;
  int worst_bin = 0;
  bool feasible_all_bins = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<MethodRun> runs;
  std::vector<AggregateRow> aggregate;  // union aggregation only
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// selections.csv, summary.json, traces/*.csv and, for union aggregation,
// aggregate.csv.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& out_dir);

// One method at one bin with config's parameters.
MethodRun run_method(const ExperimentConfig& config, int bin, Method method, int init = 0);

// "lo:step:hi" inclusive, or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

// alpha (model-driven, uncorrelated, greedy, brute force), mu (sparse),
// gamma (radius) or c_t (utility). Model-driven methods add a
// "<method>_relaxed" row with the unrounded cost and noise power.
struct SweepRow {
  std::string method;
  std::string parameter;
  double value = 0.0;
  int bin = 0;
  double omega = 0.0;
  int init = 0;
  double cost = 0.0;
  double noise_power = 0.0;
  bool feasible = false;
};

std::vector<SweepRow> sweep_tradeoff(const ExperimentConfig& config, const std::string& parameter,
                                     const std::vector<double>& grid);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct WaypointRun {
  int bin = 0;
  double omega = 0.0;
  int waypoint = 0;
  Point2 fc{0.0, 0.0};
  bool warm = false;
  int iterations = 0;
  int local_iterations = 0;
  IndexSet selected;
  double cost = 0.0;
  double noise_power = 0.0;
  bool feasible = false;
  SelectionTrace trace;
};

// Greedy selection per bin as the fusion center follows the path: a cold
// start at the first waypoint, warm restarts from the previous selection
// afterwards. The cold start uses the first initial point.
std::vector<WaypointRun> moving_fc_run(const ExperimentConfig& config,
                                       const std::vector<Point2>& path);
void write_moving_fc(const std::vector<WaypointRun>& runs, const std::filesystem::path& out_dir);

// A JSON array of [x, y] or an object with a "path" array.
std::vector<Point2> load_path(const std::filesystem::path& path);

// The rectangle (4, 8) -> (4, 4) -> (8, 4) -> (8, 8) -> (4, 8) in steps of
// 4/3 m, without repeating the start.
std::vector<Point2> rectangle_path();

struct ComplexityRow {
  std::string method;
  int bin = 0;
  double omega = 0.0;
  int init = 0;
  std::optional<Point2> z0;  // greedy and utility only
  int iterations = 0;
  double proxy = 0.0;
  double normalized = 0.0;  // proxy / M^3
};

std::vector<ComplexityRow> complexity_report(const ExperimentResult& result);
// From a run directory written by write_experiment.
std::vector<ComplexityRow> complexity_report(const std::filesystem::path& run_dir);
void write_complexity_csv(std::ostream& out, const std::vector<ComplexityRow>& rows);

}  // namespace micsel
