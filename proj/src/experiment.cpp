#include "micsel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "micsel/linalg.hpp"
#include "micsel/scene_io.hpp"

namespace micsel {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kMethodNames[] = {"model_rxx", "model_steering", "uncorrelated", "greedy",
                                        "sparse",    "radius",         "utility",      "brute_force"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string db(double v) { return num(10.0 * std::log10(v)); }

std::string join(const IndexSet& idx) {
  std::string s;
  for (size_t i = 0; i < idx.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(idx[i]);
  }
  return s;
}

// Runs fn(0..n-1) on a small pool. Exceptions are rethrown in index order so
// that the reported error does not depend on scheduling.
template <typename Fn>
void parallel_for(int n, int threads, Fn fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

bool uses_initial_point(Method m) { return m == Method::greedy || m == Method::utility; }

struct BinSetup {
  SpectralModel model;
  CostVector costs;
  double prec_full = 0.0;
};

BinSetup setup_bin(const ExperimentConfig& config, int bin) {
  BinSetup b;
  b.model = build_spectral_model(config.scene, config.omegas[static_cast<size_t>(bin)]);
  if (config.snapshots > 0)
    b.model = estimate_model(b.model, config.snapshots, config.seed + static_cast<std::uint64_t>(bin));
  b.costs = transmission_costs(config.scene);
  b.prec_full = mvdr_precision(b.model, linalg::all_indices(b.model.size()));
  return b;
}

double get_number(const json& doc, const char* key) {
  if (!doc[key].is_number()) throw ConfigError(std::string("field '") + key + "': expected a number");
  return doc[key].get<double>();
}

int get_int(const json& doc, const char* key) {
  if (!doc[key].is_number_integer())
    throw ConfigError(std::string("field '") + key + "': expected an integer");
  return doc[key].get<int>();
}

json parse_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " '" + path.string() + "': " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::string to_string(Method method) { return kMethodNames[static_cast<int>(method)]; }

Method method_from_string(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (name == kMethodNames[i]) return static_cast<Method>(i);
  throw ConfigError("unknown method '" + name + "'");
}

std::vector<double> default_omegas() {
  std::vector<double> w;
  const double lo = std::log(125.0), hi = std::log(4000.0);
  for (int k = 0; k < 8; ++k) w.push_back(2.0 * std::numbers::pi * std::exp(lo + (hi - lo) * k / 7.0));
  return w;
}

std::vector<Point2> ExperimentConfig::effective_initial_points() const {
  return initial_points.empty() ? std::vector<Point2>{scene.fc} : initial_points;
}

double ExperimentConfig::effective_r0() const {
  return r0 > 0.0 ? r0 : nearest_neighbour_spacing(scene);
}

void ExperimentConfig::validate() const {
  try {
    scene.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  if (omegas.empty()) throw ConfigError("field 'omegas': at least one frequency is required");
  for (double w : omegas)
    if (!(w > 0.0)) throw ConfigError("field 'omegas': frequencies must be positive");
  if (methods.empty()) throw ConfigError("field 'methods': at least one method is required");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("field 'alpha': must lie in (0, 1]");
  if (!(mu >= 0.0)) throw ConfigError("field 'mu': must be non-negative");
  if (!(epsilon > 0.0)) throw ConfigError("field 'epsilon': must be positive");
  if (!(gamma > 0.0)) throw ConfigError("field 'gamma': must be positive");
  if (c_t && !(*c_t > 0.0)) throw ConfigError("field 'c_t': must be positive");
  if (r0 < 0.0) throw ConfigError("field 'r0': must be non-negative");
  if (draws < 0 || greedy_draws < 0) throw ConfigError("field 'draws': must be non-negative");
  if (snapshots < 0) throw ConfigError("field 'snapshots': must be non-negative");
  for (Method m : methods)
    if (m == Method::brute_force && scene.size() > 24)
      throw ConfigError("method 'brute_force': at most 24 microphones");
}

ExperimentConfig config_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  static const char* known[] = {"scene",        "scene_file", "full_size",      "omegas",
                                "frequencies_hz", "method",   "methods",        "alpha",
                                "mu",           "sparse_relaxation", "epsilon", "gamma",
                                "c_t",          "initial_points", "r0",          "seed",
                                "draws",        "greedy_draws", "aggregation",  "snapshots",
                                "threads"};
  for (const auto& [key, value] : doc.items())
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known))
      throw ConfigError("config: unknown field '" + key + "'");

  ExperimentConfig c;
  bool full_size = doc.contains("full_size") && doc["full_size"].is_boolean() && doc["full_size"].get<bool>();
  if (doc.contains("full_size") && !doc["full_size"].is_boolean())
    throw ConfigError("field 'full_size': expected a boolean");
  if (doc.contains("scene") && doc.contains("scene_file"))
    throw ConfigError("config: give either 'scene' or 'scene_file'");
  if (full_size && (doc.contains("scene_file") || (doc.contains("scene") && doc["scene"].is_object())))
    throw ConfigError("field 'full_size': applies to the paper_like scene only");
  if (doc.contains("scene_file")) {
    if (!doc["scene_file"].is_string()) throw ConfigError("field 'scene_file': expected a path");
    fs::path p = doc["scene_file"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    c.scene = scene_from_json(parse_file(p, "scene file"));
  } else if (doc.contains("scene") && doc["scene"].is_object()) {
    c.scene = scene_from_json(doc["scene"]);
  } else if (!doc.contains("scene") || doc["scene"] == "paper_like") {
    c.scene = paper_like_scene(full_size);
  } else {
    throw ConfigError("field 'scene': expected an object or \"paper_like\"");
  }

  if (doc.contains("omegas") && doc.contains("frequencies_hz"))
    throw ConfigError("config: give either 'omegas' or 'frequencies_hz'");
  for (const char* key : {"omegas", "frequencies_hz"}) {
    if (!doc.contains(key)) continue;
    if (!doc[key].is_array()) throw ConfigError(std::string("field '") + key + "': expected an array");
    double scale = std::string(key) == "omegas" ? 1.0 : 2.0 * std::numbers::pi;
    for (const auto& v : doc[key]) {
      if (!v.is_number()) throw ConfigError(std::string("field '") + key + "': expected numbers");
      c.omegas.push_back(scale * v.get<double>());
    }
  }
  if (!doc.contains("omegas") && !doc.contains("frequencies_hz")) c.omegas = default_omegas();

  if (doc.contains("method") && doc.contains("methods"))
    throw ConfigError("config: give either 'method' or 'methods'");
  if (doc.contains("method")) {
    if (!doc["method"].is_string()) throw ConfigError("field 'method': expected a string");
    c.methods.push_back(method_from_string(doc["method"].get<std::string>()));
  } else if (doc.contains("methods")) {
    if (!doc["methods"].is_array()) throw ConfigError("field 'methods': expected an array");
    for (const auto& v : doc["methods"]) {
      if (!v.is_string()) throw ConfigError("field 'methods': expected strings");
      c.methods.push_back(method_from_string(v.get<std::string>()));
    }
  } else {
    throw ConfigError("config: missing 'method'");
  }

  if (doc.contains("alpha")) c.alpha = get_number(doc, "alpha");
  if (doc.contains("mu")) c.mu = get_number(doc, "mu");
  if (doc.contains("epsilon")) c.epsilon = get_number(doc, "epsilon");
  if (doc.contains("gamma")) c.gamma = get_number(doc, "gamma");
  if (doc.contains("r0")) c.r0 = get_number(doc, "r0");
  if (doc.contains("sparse_relaxation")) {
    const json& v = doc["sparse_relaxation"];
    if (v == "l1") c.sparse_relaxation = SparseRelaxation::l1;
    else if (v == "log_sum") c.sparse_relaxation = SparseRelaxation::log_sum;
    else throw ConfigError("field 'sparse_relaxation': expected \"l1\" or \"log_sum\"");
  }
  if (doc.contains("c_t")) {
    if (doc["c_t"] == "match") c.c_t.reset();
    else c.c_t = get_number(doc, "c_t");
  }
  if (doc.contains("initial_points")) {
    const json& v = doc["initial_points"];
    if (!v.is_array()) throw ConfigError("field 'initial_points': expected an array of [x, y]");
    for (size_t i = 0; i < v.size(); ++i)
      c.initial_points.push_back(point_from_json(v[i], "initial_points[" + std::to_string(i) + "]"));
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("field 'seed': expected a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("draws")) c.draws = get_int(doc, "draws");
  if (doc.contains("greedy_draws")) c.greedy_draws = get_int(doc, "greedy_draws");
  if (doc.contains("snapshots")) c.snapshots = get_int(doc, "snapshots");
  if (doc.contains("threads")) c.threads = get_int(doc, "threads");
  if (doc.contains("aggregation")) {
    const json& v = doc["aggregation"];
    if (v == "per_bin") c.aggregation = Aggregation::per_bin;
    else if (v == "union") c.aggregation = Aggregation::union_bins;
    else throw ConfigError("field 'aggregation': expected \"per_bin\" or \"union\"");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path, const json& overrides) {
  json doc = parse_file(path, "config file");
  if (doc.is_object())
    for (const auto& [key, value] : overrides.items()) doc[key] = value;
  return config_from_json(doc, path.parent_path());
}

json config_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  json inits = json::array();
  for (const auto& p : c.initial_points) inits.push_back({p.x(), p.y()});
  json doc{{"scene", scene_to_json(c.scene)},
           {"omegas", c.omegas},
           {"methods", methods},
           {"alpha", c.alpha},
           {"mu", c.mu},
           {"sparse_relaxation", c.sparse_relaxation == SparseRelaxation::l1 ? "l1" : "log_sum"},
           {"epsilon", c.epsilon},
           {"gamma", c.gamma},
           {"initial_points", inits},
           {"r0", c.r0},
           {"seed", c.seed},
           {"draws", c.draws},
           {"greedy_draws", c.greedy_draws},
           {"aggregation", c.aggregation == Aggregation::per_bin ? "per_bin" : "union"},
           {"snapshots", c.snapshots},
           {"threads", c.threads}};
  doc["c_t"] = c.c_t ? json(*c.c_t) : json("match");
  return doc;
}

namespace {

// matched_cost: the utility budget when config.c_t asks for a match.
MethodRun run_on_bin(const ExperimentConfig& config, const BinSetup& b, int bin, Method method,
                     int init, std::optional<double> matched_cost = std::nullopt) {
  const SpectralModel& model = b.model;
  const CostVector& costs = b.costs;
  const double m3 = std::pow(static_cast<double>(model.size()), 3);
  MethodRun r;
  r.method = method;
  r.bin = bin;
  r.omega = config.omegas[static_cast<size_t>(bin)];
  r.init = uses_initial_point(method) ? init : 0;
  r.parameter = "alpha";
  r.value = config.alpha;
  const Point2 z0 = config.effective_initial_points().at(static_cast<size_t>(r.init));

  switch (method) {
    case Method::model_rxx:
    case Method::model_steering: {
      ModelDrivenOptions o;
      o.form = method == Method::model_rxx ? RelaxationForm::rxx : RelaxationForm::steering;
      o.rounding = {config.draws, config.seed};
      SelectionResult s = select_model_driven(model, costs, config.alpha, o);
      r.selected = s.selection.indices();
      r.relaxed_cost = s.relaxed_cost;
      DecomposedNoise dn = decompose_noise(model.r_nn);
      CMatrix q = rearranged_q(dn.lambda, dn.g, SelectionVector(s.relaxed_p));
      r.relaxed_noise_power = 1.0 / model.a.dot(q * model.a).real();
      r.solver_status = sdp::to_string(s.solver_status);
      r.iterations = s.solver_iterations;
      r.complexity = m3;
      break;
    }
    case Method::uncorrelated: {
      SelectionResult s = select_uncorrelated(model, costs, config.alpha);
      r.selected = s.selection.indices();
      r.complexity = m3;
      break;
    }
    case Method::brute_force: {
      SelectionResult s = brute_force_select(model, costs, config.alpha);
      r.selected = s.selection.indices();
      break;
    }
    case Method::greedy: {
      GreedyOptions o;
      o.alpha = config.alpha;
      o.r0 = config.effective_r0();
      o.rounding = {config.greedy_draws, config.seed};
      GreedyResult g = greedy_select(config.scene, model, costs, z0, o);
      r.selected = g.selection.selection.indices();
      r.iterations = g.trace.iterations();
      r.complexity = g.trace.cubic_proxy();
      r.trace = std::move(g.trace);
      break;
    }
    case Method::sparse: {
      SparseBeamformerConfig sc;
      sc.mu = config.mu * sparse_mu_scale(model, costs);
      sc.epsilon = config.epsilon;
      sc.relaxation = config.sparse_relaxation;
      SparseBeamformerResult s = sparse_mvdr(model, costs, sc);
      r.parameter = "mu";
      r.value = config.mu;
      r.selected = s.selection.indices();
      r.iterations = s.iterations;
      r.solver_status = s.converged ? "converged" : "max_iter";
      break;
    }
    case Method::radius: {
      RadiusResult s = radius_select(config.scene, model, costs, config.gamma);
      r.parameter = "gamma";
      r.value = config.gamma;
      r.selected = s.selection.indices();
      break;
    }
    case Method::utility: {
      double c_t;
      if (config.c_t) {
        c_t = *config.c_t;
      } else if (matched_cost) {
        c_t = *matched_cost;
      } else {
        bool has_greedy = std::find(config.methods.begin(), config.methods.end(), Method::greedy) !=
                          config.methods.end();
        c_t = run_on_bin(config, b, bin, has_greedy ? Method::greedy : Method::model_steering, init).cost;
      }
      UtilityResult s = utility_greedy(config.scene, model, costs, c_t, z0, config.effective_r0());
      r.parameter = "c_t";
      r.value = c_t;
      r.selected = s.selection.indices();
      r.iterations = s.trace.iterations();
      r.complexity = s.quadratic_proxy;
      r.trace = std::move(s.trace);
      break;
    }
  }

  r.cost = costs.total(r.selected);
  const double prec = mvdr_precision(model, r.selected);
  r.noise_power = 1.0 / prec;
  r.snr = model.target_psd * prec;
  r.beta = 1.0 / b.prec_full;
  r.feasible = meets_snr(r.snr, config.alpha * model.target_psd * b.prec_full);
  return r;
}

struct Task {
  int bin;
  Method method;
  int init;
};

std::vector<Task> tasks_for(const ExperimentConfig& config) {
  std::vector<Task> tasks;
  const int inits = static_cast<int>(config.effective_initial_points().size());
  for (int bin = 0; bin < static_cast<int>(config.omegas.size()); ++bin)
    for (Method m : config.methods)
      for (int i = 0; i < (uses_initial_point(m) ? inits : 1); ++i) tasks.push_back({bin, m, i});
  return tasks;
}

bool needs_match(const ExperimentConfig& config, Method m) {
  return m == Method::utility && !config.c_t;
}

// Utility runs with a matched budget go last and reuse the greedy (or
// model-driven) run of the same bin and initial point when there is one.
std::vector<MethodRun> run_tasks(const ExperimentConfig& config, const std::vector<Task>& tasks) {
  const int bins = static_cast<int>(config.omegas.size());
  std::vector<BinSetup> setups(static_cast<size_t>(bins));
  parallel_for(bins, config.threads, [&](int k) { setups[static_cast<size_t>(k)] = setup_bin(config, k); });
  std::vector<MethodRun> runs(tasks.size());
  std::vector<int> first, second;
  for (int i = 0; i < static_cast<int>(tasks.size()); ++i)
    (needs_match(config, tasks[static_cast<size_t>(i)].method) ? second : first).push_back(i);
  auto run = [&](int i, std::optional<double> matched) {
    const Task& t = tasks[static_cast<size_t>(i)];
    runs[static_cast<size_t>(i)] =
        run_on_bin(config, setups[static_cast<size_t>(t.bin)], t.bin, t.method, t.init, matched);
  };
  parallel_for(static_cast<int>(first.size()), config.threads,
               [&](int k) { run(first[static_cast<size_t>(k)], std::nullopt); });
  parallel_for(static_cast<int>(second.size()), config.threads, [&](int k) {
    const int i = second[static_cast<size_t>(k)];
    const Task& t = tasks[static_cast<size_t>(i)];
    std::optional<double> matched;
    for (Method ref : {Method::greedy, Method::model_steering}) {
      for (int j : first) {
        const Task& u = tasks[static_cast<size_t>(j)];
        if (u.bin == t.bin && u.method == ref && (ref != Method::greedy || u.init == t.init)) {
          matched = runs[static_cast<size_t>(j)].cost;
          break;
        }
      }
      if (matched) break;
    }
    run(i, matched);
  });
  return runs;
}

std::string trace_name(const MethodRun& r) {
  return to_string(r.method) + "_bin" + std::to_string(r.bin) + "_init" + std::to_string(r.init) + ".csv";
}

}  // namespace

MethodRun run_method(const ExperimentConfig& config, int bin, Method method, int init) {
  config.validate();
  if (bin < 0 || bin >= static_cast<int>(config.omegas.size())) throw std::out_of_range("bin out of range");
  return run_on_bin(config, setup_bin(config, bin), bin, method, init);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult res;
  res.config = config;
  res.runs = run_tasks(config, tasks_for(config));

  if (config.aggregation == Aggregation::union_bins) {
    std::map<std::pair<int, int>, IndexSet> unions;
    for (const auto& r : res.runs) {
      auto& u = unions[{static_cast<int>(r.method), r.init}];
      u = linalg::set_union(u, r.selected);
    }
    const int bins = static_cast<int>(config.omegas.size());
    for (const auto& [key, idx] : unions) {
      AggregateRow a;
      a.method = static_cast<Method>(key.first);
      a.init = key.second;
      a.selected = idx;
      a.cost = transmission_costs(config.scene).total(idx);
      a.feasible_all_bins = true;
      for (int bin = 0; bin < bins; ++bin) {
        BinSetup b = setup_bin(config, bin);
        double prec = mvdr_precision(b.model, idx);
        if (1.0 / prec > a.worst_noise_power) {
          a.worst_noise_power = 1.0 / prec;
          a.worst_bin = bin;
        }
        a.feasible_all_bins = a.feasible_all_bins && meets_snr(prec, config.alpha * b.prec_full);
      }
      res.aggregate.push_back(a);
    }
  }
  return res;
}

void write_experiment(const ExperimentResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir / "traces");
  std::ostringstream csv;
  csv << "bin,freq_hz,method,init,parameter,value,K,cost,relaxed_cost,noise_power_db,beta_db,"
         "feasible,solver_status,iterations,selected\n";
  json runs = json::array();
  for (const auto& r : result.runs) {
    csv << r.bin << ',' << num(r.omega / (2.0 * std::numbers::pi)) << ',' << to_string(r.method) << ','
        << r.init << ',' << r.parameter << ',' << num(r.value) << ',' << r.selected.size() << ','
        << num(r.cost) << ',' << (r.relaxed_cost ? num(*r.relaxed_cost) : "") << ','
        << db(r.noise_power) << ',' << db(r.beta) << ',' << (r.feasible ? 1 : 0) << ','
        << r.solver_status << ',' << r.iterations << ',' << join(r.selected) << '\n';
    json j{{"method", to_string(r.method)},
           {"bin", r.bin},
           {"omega", r.omega},
           {"init", r.init},
           {"parameter", r.parameter},
           {"value", r.value},
           {"selected", r.selected},
           {"cost", r.cost},
           {"noise_power", r.noise_power},
           {"beta", r.beta},
           {"feasible", r.feasible},
           {"solver_status", r.solver_status},
           {"iterations", r.iterations}};
    if (r.relaxed_cost) j["relaxed_cost"] = *r.relaxed_cost;
    if (r.relaxed_noise_power) j["relaxed_noise_power"] = *r.relaxed_noise_power;
    if (r.complexity) j["complexity"] = *r.complexity;
    runs.push_back(j);
    if (r.trace) {
      std::ostringstream t;
      write_trace_csv(t, *r.trace);
      write_text(out_dir / "traces" / trace_name(r), t.str());
    }
  }
  write_text(out_dir / "selections.csv", csv.str());

  if (result.config.aggregation == Aggregation::union_bins) {
    std::ostringstream agg;
    agg << "method,init,K,cost,worst_noise_power_db,worst_bin,feasible_all_bins,selected\n";
    for (const auto& a : result.aggregate)
      agg << to_string(a.method) << ',' << a.init << ',' << a.selected.size() << ',' << num(a.cost)
          << ',' << db(a.worst_noise_power) << ',' << a.worst_bin << ',' << (a.feasible_all_bins ? 1 : 0)
          << ',' << join(a.selected) << '\n';
    write_text(out_dir / "aggregate.csv", agg.str());
  }

  json summary{{"config", config_to_json(result.config)}, {"seed", result.config.seed}, {"runs", runs}};
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
}

std::vector<double> parse_grid(const std::string& text) {
  auto to_double = [&](const std::string& s) {
    size_t pos = 0;
    double v;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("grid '" + text + "': '" + s + "' is not a number");
    }
    if (pos != s.size()) throw ConfigError("grid '" + text + "': '" + s + "' is not a number");
    return v;
  };
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
    return parts;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("grid '" + text + "': expected lo:step:hi");
    double lo = to_double(parts[0]), step = to_double(parts[1]), hi = to_double(parts[2]);
    if (!(step > 0.0) || hi < lo) throw ConfigError("grid '" + text + "': need step > 0 and hi >= lo");
    const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  } else {
    for (const auto& p : split(text, ',')) out.push_back(to_double(p));
  }
  if (out.empty()) throw ConfigError("grid '" + text + "': empty");
  return out;
}

std::vector<SweepRow> sweep_tradeoff(const ExperimentConfig& config, const std::string& parameter,
                                     const std::vector<double>& grid) {
  config.validate();
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  auto swept = [&](Method m) {
    if (parameter == "mu") return m == Method::sparse;
    if (parameter == "gamma") return m == Method::radius;
    if (parameter == "c_t") return m == Method::utility;
    if (parameter == "alpha")
      return m != Method::sparse && m != Method::radius && m != Method::utility;
    throw ConfigError("unknown sweep parameter '" + parameter + "'");
  };
  ExperimentConfig base = config;
  base.methods.clear();
  for (Method m : config.methods)
    if (swept(m)) base.methods.push_back(m);
  if (base.methods.empty()) throw ConfigError("no configured method uses parameter '" + parameter + "'");

  std::vector<ExperimentConfig> configs;
  for (double v : grid) {
    ExperimentConfig c = base;
    if (parameter == "alpha") c.alpha = v;
    else if (parameter == "mu") c.mu = v;
    else if (parameter == "gamma") c.gamma = v;
    else c.c_t = v;
    c.validate();
    configs.push_back(c);
  }

  const int bins = static_cast<int>(base.omegas.size());
  std::vector<BinSetup> setups(static_cast<size_t>(bins));
  parallel_for(bins, base.threads, [&](int k) { setups[static_cast<size_t>(k)] = setup_bin(base, k); });
  struct SweepTask {
    size_t config;
    Task task;
  };
  std::vector<SweepTask> tasks;
  for (size_t c = 0; c < configs.size(); ++c)
    for (const Task& t : tasks_for(configs[c])) tasks.push_back({c, t});
  std::vector<MethodRun> runs(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), base.threads, [&](int i) {
    const SweepTask& st = tasks[static_cast<size_t>(i)];
    runs[static_cast<size_t>(i)] = run_on_bin(configs[st.config], setups[static_cast<size_t>(st.task.bin)],
                                              st.task.bin, st.task.method, st.task.init);
  });

  std::vector<SweepRow> rows;
  for (size_t i = 0; i < runs.size(); ++i) {
    const MethodRun& r = runs[i];
    const double v = grid[tasks[i].config];
    SweepRow row{to_string(r.method), parameter, v, r.bin, r.omega, r.init, r.cost, r.noise_power, r.feasible};
    rows.push_back(row);
    if (r.relaxed_cost) {
      row.method += "_relaxed";
      row.cost = *r.relaxed_cost;
      row.noise_power = *r.relaxed_noise_power;
      // Held to the solver tolerance rather than the rounding one.
      row.feasible = row.noise_power <= r.beta / configs[tasks[i].config].alpha * (1.0 + 1e-6);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "method,parameter,value,bin,freq_hz,init,transmission_cost,output_noise_power_db,feasible\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.parameter << ',' << num(r.value) << ',' << r.bin << ','
        << num(r.omega / (2.0 * std::numbers::pi)) << ',' << r.init << ',' << num(r.cost) << ','
        << db(r.noise_power) << ',' << (r.feasible ? 1 : 0) << '\n';
}

std::vector<WaypointRun> moving_fc_run(const ExperimentConfig& config, const std::vector<Point2>& path) {
  config.validate();
  if (path.empty()) throw ConfigError("fusion center path is empty");
  const int bins = static_cast<int>(config.omegas.size());
  const size_t n = path.size();
  std::vector<WaypointRun> out(static_cast<size_t>(bins) * n);
  GreedyOptions o;
  o.alpha = config.alpha;
  o.r0 = config.effective_r0();
  o.rounding = {config.greedy_draws, config.seed};
  const Point2 z0 = config.initial_points.empty() ? path.front() : config.initial_points.front();

  parallel_for(bins, config.threads, [&](int bin) {
    BinSetup b = setup_bin(config, bin);
    Scene scene = config.scene;
    IndexSet previous;
    for (size_t w = 0; w < n; ++w) {
      scene.fc = path[w];
      CostVector costs = transmission_costs(scene);
      GreedyResult g = w == 0 ? greedy_select(scene, b.model, costs, z0, o)
                              : warm_restart(scene, b.model, costs, previous, o);
      WaypointRun& r = out[static_cast<size_t>(bin) * n + w];
      r.bin = bin;
      r.omega = config.omegas[static_cast<size_t>(bin)];
      r.waypoint = static_cast<int>(w);
      r.fc = path[w];
      r.warm = w > 0;
      r.iterations = g.trace.iterations();
      r.local_iterations = g.trace.local_iterations();
      r.selected = g.selection.selection.indices();
      r.cost = g.selection.cost;
      r.noise_power = g.selection.noise_power;
      r.feasible = meets_snr(b.model.target_psd / r.noise_power, config.alpha * b.model.target_psd * b.prec_full);
      r.trace = std::move(g.trace);
      previous = r.selected;
    }
  });
  return out;
}

void write_moving_fc(const std::vector<WaypointRun>& runs, const fs::path& out_dir) {
  fs::create_directories(out_dir / "traces");
  std::ostringstream csv;
  csv << "bin,freq_hz,waypoint,fc_x,fc_y,start,iterations,local_iterations,K,cost,noise_power_db,"
         "feasible,selected\n";
  for (const auto& r : runs) {
    csv << r.bin << ',' << num(r.omega / (2.0 * std::numbers::pi)) << ',' << r.waypoint << ','
        << num(r.fc.x()) << ',' << num(r.fc.y()) << ',' << (r.warm ? "warm" : "cold") << ','
        << r.iterations << ',' << r.local_iterations << ',' << r.selected.size() << ',' << num(r.cost)
        << ',' << db(r.noise_power) << ',' << (r.feasible ? 1 : 0) << ',' << join(r.selected) << '\n';
    std::ostringstream t;
    write_trace_csv(t, r.trace);
    write_text(out_dir / "traces" /
                   ("waypoint" + std::to_string(r.waypoint) + "_bin" + std::to_string(r.bin) + ".csv"),
               t.str());
  }
  write_text(out_dir / "moving_fc.csv", csv.str());
}

std::vector<Point2> load_path(const fs::path& path) {
  json doc = parse_file(path, "path file");
  const json& pts = doc.is_object() && doc.contains("path") ? doc["path"] : doc;
  if (!pts.is_array() || pts.empty()) throw ConfigError("path file: expected a nonempty array of [x, y]");
  std::vector<Point2> out;
  for (size_t i = 0; i < pts.size(); ++i)
    out.push_back(point_from_json(pts[i], "path[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Point2> rectangle_path() {
  const Point2 corners[] = {{4.0, 8.0}, {4.0, 4.0}, {8.0, 4.0}, {8.0, 8.0}, {4.0, 8.0}};
  std::vector<Point2> out;
  for (int side = 0; side < 4; ++side)
    for (int k = 0; k < 3; ++k) out.push_back(corners[side] + (corners[side + 1] - corners[side]) * (k / 3.0));
  return out;
}

std::vector<ComplexityRow> complexity_report(const ExperimentResult& result) {
  const double m3 = std::pow(static_cast<double>(result.config.scene.size()), 3);
  const auto inits = result.config.effective_initial_points();
  std::vector<ComplexityRow> rows;
  for (const auto& r : result.runs) {
    if (!r.complexity) continue;
    ComplexityRow c;
    c.method = to_string(r.method);
    c.bin = r.bin;
    c.omega = r.omega;
    c.init = r.init;
    if (uses_initial_point(r.method)) c.z0 = inits.at(static_cast<size_t>(r.init));
    c.iterations = r.iterations;
    c.proxy = *r.complexity;
    c.normalized = c.proxy / m3;
    rows.push_back(c);
  }
  return rows;
}

std::vector<ComplexityRow> complexity_report(const fs::path& run_dir) {
  json doc = parse_file(run_dir / "summary.json", "run summary");
  if (!doc.contains("config") || !doc.contains("runs")) throw ConfigError("run summary: missing 'config' or 'runs'");
  ExperimentResult res;
  res.config = config_from_json(doc["config"]);
  for (const auto& j : doc["runs"]) {
    MethodRun r;
    r.method = method_from_string(j.at("method").get<std::string>());
    r.bin = j.at("bin").get<int>();
    r.omega = j.at("omega").get<double>();
    r.init = j.at("init").get<int>();
    r.iterations = j.at("iterations").get<int>();
    if (j.contains("complexity")) r.complexity = j["complexity"].get<double>();
    res.runs.push_back(r);
  }
  return complexity_report(res);
}

void write_complexity_csv(std::ostream& out, const std::vector<ComplexityRow>& rows) {
  out << "method,bin,freq_hz,init,z0_x,z0_y,iterations,proxy,normalized\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.bin << ',' << num(r.omega / (2.0 * std::numbers::pi)) << ',' << r.init
        << ',' << (r.z0 ? num(r.z0->x()) : "") << ',' << (r.z0 ? num(r.z0->y()) : "") << ','
        << r.iterations << ',' << num(r.proxy) << ',' << num(r.normalized) << '\n';
}

}  // namespace micsel
