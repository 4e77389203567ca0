#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "micsel/experiment.hpp"
#include "micsel/scene_io.hpp"

namespace py = pybind11;
using namespace micsel;
using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(e.what());
  }
}

py::dict selection_dict(const SelectionResult& r) {
  py::dict d;
  d["selected"] = r.selection.indices();
  d["relaxed_p"] = r.relaxed_p;
  d["relaxed_cost"] = r.relaxed_cost;
  d["cost"] = r.cost;
  d["noise_power"] = r.noise_power;
  d["snr"] = r.snr;
  d["snr_target"] = r.snr_target;
  d["feasible"] = r.feasible;
  d["solver_status"] = sdp::to_string(r.solver_status);
  d["solver_iterations"] = r.solver_iterations;
  return d;
}

py::list trace_list(const SelectionTrace& t) {
  py::list out;
  for (const auto& r : t.records) {
    py::dict d;
    d["iteration"] = r.iteration;
    d["phase"] = to_string(r.phase);
    d["s1_size"] = r.s1_size;
    d["s2_size"] = r.s2_size;
    d["cost"] = r.cost;
    d["noise_power"] = r.noise_power;
    d["feasible"] = r.feasible;
    out.append(d);
  }
  return out;
}

CostVector to_costs(const RVector& c) { return {c}; }

}  // namespace

PYBIND11_MODULE(_micsel, m) {
  m.doc() = "Microphone subset selection for MVDR beamforming";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Scene>(m, "Scene")
      .def_static("paper_like", &paper_like_scene, py::arg("full_size") = false)
      .def_static("from_json", [](const std::string& text) { return scene_from_json(parse_json(text)); })
      .def("to_json", [](const Scene& s) { return scene_to_json(s).dump(); })
      .def_property_readonly("size", &Scene::size)
      .def_property_readonly("mics", [](const Scene& s) {
        RMatrix p(s.size(), 2);
        for (int i = 0; i < s.size(); ++i) p.row(i) = s.mics[i].transpose();
        return p;
      })
      .def_readwrite("target", &Scene::target)
      .def_readwrite("fc", &Scene::fc)
      .def_readwrite("interferer_psds", &Scene::interferer_psds);

  py::class_<SpectralModel>(m, "SpectralModel")
      .def_readonly("omega", &SpectralModel::omega)
      .def_readonly("target_psd", &SpectralModel::target_psd)
      .def_readonly("a", &SpectralModel::a)
      .def_readonly("r_nn", &SpectralModel::r_nn)
      .def_readonly("r_xx", &SpectralModel::r_xx)
      .def_readonly("r_yy", &SpectralModel::r_yy)
      .def_property_readonly("size", &SpectralModel::size);

  m.def("build_spectral_model", &build_spectral_model, py::arg("scene"), py::arg("omega"));
  m.def("model_from_covariance", &model_from_covariance, py::arg("a"), py::arg("r_nn"),
        py::arg("target_psd") = 1.0, py::arg("omega") = 0.0);
  m.def("transmission_costs", [](const Scene& s) { return transmission_costs(s).values; });
  m.def("default_omegas", &default_omegas);

  m.def("output_noise_power", [](const SpectralModel& model, const IndexSet& idx) {
    return output_noise_power(model, SelectionVector::from_indices(model.size(), idx));
  }, py::arg("model"), py::arg("selected"));
  m.def("mvdr_weights", [](const SpectralModel& model, const IndexSet& idx) {
    return mvdr_weights(model, SelectionVector::from_indices(model.size(), idx)).w;
  }, py::arg("model"), py::arg("selected"));
  m.def("full_noise_power", &full_noise_power);

  m.def("select_model_driven", [](const SpectralModel& model, const RVector& costs, double alpha,
                                  const std::string& form, int draws, std::uint64_t seed) {
    ModelDrivenOptions o;
    if (form == "rxx") o.form = RelaxationForm::rxx;
    else if (form == "steering") o.form = RelaxationForm::steering;
    else throw ConfigError("form must be 'rxx' or 'steering'");
    o.rounding = {draws, seed};
    return selection_dict(select_model_driven(model, to_costs(costs), alpha, o));
  }, py::arg("model"), py::arg("costs"), py::arg("alpha"), py::arg("form") = "steering",
     py::arg("draws") = 200, py::arg("seed") = 0);
  m.def("select_uncorrelated", [](const SpectralModel& model, const RVector& costs, double alpha) {
    return selection_dict(select_uncorrelated(model, to_costs(costs), alpha));
  }, py::arg("model"), py::arg("costs"), py::arg("alpha"));
  m.def("brute_force_select", [](const SpectralModel& model, const RVector& costs, double alpha) {
    return selection_dict(brute_force_select(model, to_costs(costs), alpha));
  }, py::arg("model"), py::arg("costs"), py::arg("alpha"));

  m.def("greedy_select", [](const Scene& scene, const SpectralModel& model, const RVector& costs,
                            const Point2& z0, double alpha, double r0, int max_iter) {
    GreedyOptions o;
    o.alpha = alpha;
    o.r0 = r0;
    o.max_iter = max_iter;
    GreedyResult g = greedy_select(scene, model, to_costs(costs), z0, o);
    py::dict d = selection_dict(g.selection);
    d["trace"] = trace_list(g.trace);
    d["candidates"] = g.candidates;
    return d;
  }, py::arg("scene"), py::arg("model"), py::arg("costs"), py::arg("z0"), py::arg("alpha"),
     py::arg("r0"), py::arg("max_iter") = 200);

  m.def("sparse_mvdr", [](const SpectralModel& model, const RVector& costs, double mu, double epsilon) {
    SparseBeamformerConfig cfg;
    cfg.mu = mu;
    cfg.epsilon = epsilon;
    auto r = sparse_mvdr(model, to_costs(costs), cfg);
    py::dict d;
    d["w"] = r.w;
    d["selected"] = r.selection.indices();
    d["cost"] = r.cost;
    d["noise_power"] = r.noise_power;
    d["thresholded_noise_power"] = r.thresholded_noise_power;
    d["objective"] = r.objective;
    d["converged"] = r.converged;
    return d;
  }, py::arg("model"), py::arg("costs"), py::arg("mu"), py::arg("epsilon") = 1e-5);
  m.def("sparse_mu_scale", [](const SpectralModel& model, const RVector& costs) {
    return sparse_mu_scale(model, to_costs(costs));
  });
  m.def("radius_select", [](const Scene& scene, const SpectralModel& model, const RVector& costs,
                            double gamma) {
    auto r = radius_select(scene, model, to_costs(costs), gamma);
    py::dict d;
    d["selected"] = r.selection.indices();
    d["cost"] = r.cost;
    d["noise_power"] = r.noise_power;
    return d;
  }, py::arg("scene"), py::arg("model"), py::arg("costs"), py::arg("gamma"));
  m.def("utility_greedy", [](const Scene& scene, const SpectralModel& model, const RVector& costs,
                             double c_t, const Point2& z0, double r0) {
    auto r = utility_greedy(scene, model, to_costs(costs), c_t, z0, r0);
    py::dict d;
    d["selected"] = r.selection.indices();
    d["cost"] = r.cost;
    d["noise_power"] = r.noise_power;
    d["trace"] = trace_list(r.trace);
    d["quadratic_proxy"] = r.quadratic_proxy;
    return d;
  }, py::arg("scene"), py::arg("model"), py::arg("costs"), py::arg("c_t"), py::arg("z0"),
     py::arg("r0"));

  m.def("run_experiment", [](const std::string& config_json, const std::string& out_dir) {
    ExperimentConfig cfg = config_from_json(parse_json(config_json));
    ExperimentResult res = run_experiment(cfg);
    if (!out_dir.empty()) write_experiment(res, out_dir);
    py::list runs;
    for (const auto& r : res.runs) {
      py::dict d;
      d["method"] = to_string(r.method);
      d["bin"] = r.bin;
      d["omega"] = r.omega;
      d["init"] = r.init;
      d["selected"] = r.selected;
      d["cost"] = r.cost;
      d["noise_power"] = r.noise_power;
      d["beta"] = r.beta;
      d["feasible"] = r.feasible;
      d["iterations"] = r.iterations;
      runs.append(d);
    }
    return runs;
  }, py::arg("config_json"), py::arg("out_dir") = "",
     "Runs the experiment described by a JSON config; writes the output files when out_dir is set.");
}
