#include "micsel/select_greedy.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "micsel/linalg.hpp"

namespace micsel {

namespace {

void check_options(const Scene& scene, const SpectralModel& model, const CostVector& costs,
                   const GreedyOptions& o) {
  if (!(o.alpha > 0.0 && o.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(o.r0 > 0.0)) throw std::invalid_argument("R0 must be positive");
  if (o.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (scene.size() != model.size() || costs.size() != model.size())
    throw std::invalid_argument("scene, model and costs disagree on the microphone count");
}

// Relaxation restricted to s1 with the given SNR target, rounded; returns
// global indices.
IndexSet solve_restricted(const SpectralModel& model, const CostVector& costs, const IndexSet& s1,
                          double snr_target, const GreedyOptions& o) {
  SpectralModel sub = restrict_model(model, s1);
  CostVector sub_costs = costs.restricted(s1);
  RelaxedProblem rp = build_sdp_steering_for_snr(sub, sub_costs, snr_target);
  sdp::SdpSolution sol = sdp::solve(rp.sdp, o.solver);
  RVector p = sol.status == sdp::SdpStatus::infeasible ? RVector::Ones(sub.size()) : rp.selection(sol.x);
  SelectionResult r = round_selection_for_snr(p, sub, sub_costs, snr_target, o.rounding);
  IndexSet out;
  for (int i : r.selection.indices()) out.push_back(s1[static_cast<size_t>(i)]);
  return out;
}

TraceRecord make_record(const SpectralModel& model, const CostVector& costs, int iteration,
                        GreedyPhase phase, const IndexSet& s1, const IndexSet& s2, bool feasible) {
  TraceRecord r;
  r.iteration = iteration;
  r.phase = phase;
  r.s1_size = static_cast<int>(s1.size());
  r.s2_size = static_cast<int>(s2.size());
  r.cost = costs.total(s2);
  r.noise_power = 1.0 / mvdr_precision(model, s2);
  r.feasible = feasible;
  return r;
}

GreedyResult run_phases(const Scene& scene, const SpectralModel& model, const CostVector& costs,
                        IndexSet s1, const GreedyOptions& o) {
  const double ps = model.target_psd;
  const double global_target = o.alpha * ps * mvdr_precision(model, linalg::all_indices(model.size()));
  SelectionTrace trace;
  IndexSet s2;
  double target = global_target;

  auto next_iteration = [&]() {
    if (trace.iterations() >= o.max_iter)
      throw GreedyIterationLimit("greedy selection exceeded max_iter", trace);
    return trace.iterations() + 1;
  };

  std::set<IndexSet> seen{s1};
  while (true) {
    int it = next_iteration();
    target = o.alpha * ps * mvdr_precision(model, s1);
    s2 = solve_restricted(model, costs, s1, target, o);
    trace.records.push_back(make_record(model, costs, it, GreedyPhase::local, s1, s2, true));
    IndexSet next = expand_candidates(scene, s2, o.r0);
    if (next == s1 || !seen.insert(next).second) break;
    s1 = std::move(next);
  }

  if (!o.local_only) {
    target = global_target;
    seen = {s1};
    IndexSet last_feasible;
    while (true) {
      int it = next_iteration();
      bool feasible = meets_snr(ps * mvdr_precision(model, s1), global_target);
      s2 = feasible ? solve_restricted(model, costs, s1, global_target, o) : s1;
      if (feasible) last_feasible = s2;
      trace.records.push_back(make_record(model, costs, it, GreedyPhase::global, s1, s2, feasible));
      IndexSet next = expand_candidates(scene, s2, o.r0);
      if (next == s1) {
        if (!feasible) throw SolverError("global constraint unreachable from the candidate set");
        break;
      }
      if (!seen.insert(next).second) {
        // Revisiting a candidate set means the iteration cycles; an
        // infeasible step only grows S1, so a feasible step precedes it.
        s2 = last_feasible;
        break;
      }
      s1 = std::move(next);
    }
  }

  GreedyResult res;
  res.candidates = s1;
  SelectionResult& sel = res.selection;
  sel.selection = SelectionVector::from_indices(model.size(), s2);
  sel.relaxed_p = sel.selection.values();
  sel.cost = costs.total(s2);
  sel.relaxed_cost = sel.cost;
  double prec = mvdr_precision(model, s2);
  sel.snr = ps * prec;
  sel.noise_power = 1.0 / prec;
  sel.snr_target = target;
  sel.feasible = meets_snr(sel.snr, target);
  res.trace = std::move(trace);
  return res;
}

}  // namespace

IndexSet initial_candidates(const Scene& scene, const Point2& z0, double r0) {
  if (!(r0 > 0.0)) throw std::invalid_argument("R0 must be positive");
  IndexSet idx;
  for (int i = 0; i < scene.size(); ++i)
    if ((scene.mics[static_cast<size_t>(i)] - z0).norm() <= r0) idx.push_back(i);
  if (idx.empty()) throw std::invalid_argument("initial point isolated; increase R0");
  return idx;
}

IndexSet expand_candidates(const Scene& scene, const IndexSet& s2, double r0) {
  if (s2.empty()) throw std::invalid_argument("selected set is empty");
  IndexSet idx;
  for (int i = 0; i < scene.size(); ++i) {
    const Point2& ri = scene.mics[static_cast<size_t>(i)];
    for (int j : s2)
      if ((ri - scene.mics[static_cast<size_t>(j)]).norm() <= r0) {
        idx.push_back(i);
        break;
      }
  }
  return linalg::set_union(idx, s2);
}

double nearest_neighbour_spacing(const Scene& scene) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < scene.mics.size(); ++i)
    for (size_t j = i + 1; j < scene.mics.size(); ++j) {
      double d = (scene.mics[i] - scene.mics[j]).norm();
      if (d > 0.0) best = std::min(best, d);
    }
  if (!std::isfinite(best)) throw std::invalid_argument("need two distinct microphone positions");
  return best;
}

double connectivity_radius(const Scene& scene) {
  const int m = scene.size();
  if (m < 2) throw std::invalid_argument("need at least two microphones");
  Point2 lo = scene.mics.front(), hi = scene.mics.front();
  for (const auto& r : scene.mics) {
    lo = lo.cwiseMin(r);
    hi = hi.cwiseMax(r);
  }
  double side = (hi - lo).maxCoeff();
  return std::sqrt(std::log(2.0 * m) / m) * side;
}

std::string to_string(GreedyPhase phase) {
  switch (phase) {
    case GreedyPhase::local: return "local";
    case GreedyPhase::global: return "global";
    case GreedyPhase::addition: return "addition";
  }
  return "unknown";
}

int SelectionTrace::local_iterations() const {
  int k = 0;
  for (const auto& r : records) k += r.phase == GreedyPhase::local;
  return k;
}

double SelectionTrace::cubic_proxy() const {
  double s = 0.0;
  for (const auto& r : records) s += std::pow(static_cast<double>(r.s1_size), 3);
  return s;
}

void write_trace_csv(std::ostream& out, const SelectionTrace& trace) {
  out << "iter,phase,|S1|,|S2|,cost,noise_power_db\n";
  char buf[64];
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << to_string(r.phase) << ',' << r.s1_size << ',' << r.s2_size << ',';
    std::snprintf(buf, sizeof buf, "%.10g,%.10g", r.cost, 10.0 * std::log10(r.noise_power));
    out << buf << '\n';
  }
}

GreedyResult greedy_select(const Scene& scene, const SpectralModel& model, const CostVector& costs,
                           const Point2& z0, const GreedyOptions& options) {
  check_options(scene, model, costs, options);
  return run_phases(scene, model, costs, initial_candidates(scene, z0, options.r0), options);
}

GreedyResult warm_restart(const Scene& scene, const SpectralModel& model, const CostVector& costs,
                          const IndexSet& previous, const GreedyOptions& options) {
  check_options(scene, model, costs, options);
  for (int i : previous)
    if (i < 0 || i >= model.size()) throw std::out_of_range("previous selection index out of range");
  return run_phases(scene, model, costs, expand_candidates(scene, previous, options.r0), options);
}

}  // namespace micsel
