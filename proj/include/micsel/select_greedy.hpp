#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "micsel/select_model.hpp"

namespace micsel {

// Microphones within r0 of z0. Throws std::invalid_argument when none is.
IndexSet initial_candidates(const Scene& scene, const Point2& z0, double r0);

// s2 plus every microphone within r0 of some member of s2.
IndexSet expand_candidates(const Scene& scene, const IndexSet& s2, double r0);

// Smallest distance between two distinct microphones (the grid spacing for
// grid layouts).
double nearest_neighbour_spacing(const Scene& scene);

// sqrt(log(2M) / M) scaled by the side length of the bounding square, the
// radius that keeps a random geometric graph connected with high probability.
double connectivity_radius(const Scene& scene);

// addition marks the one-sensor-per-step utility greedy.
enum class GreedyPhase { local, global, addition };

std::string to_string(GreedyPhase phase);

struct TraceRecord {
  int iteration = 0;
  GreedyPhase phase = GreedyPhase::local;
  int s1_size = 0;
  int s2_size = 0;
  double cost = 0.0;
  double noise_power = 0.0;
  // False for a global-phase step where the candidate set could not meet the
  // constraint (S2 then takes all of S1).
  bool feasible = true;
};

struct SelectionTrace {
  std::vector<TraceRecord> records;

  int iterations() const { return static_cast<int>(records.size()); }
  int local_iterations() const;
  // sum |S1|^3 over the recorded iterations.
  double cubic_proxy() const;
};

// Columns iter, phase, |S1|, |S2|, cost, noise_power_db.
void write_trace_csv(std::ostream& out, const SelectionTrace& trace);

struct GreedyOptions {
  double alpha = 0.9;
  double r0 = 0.0;
  int max_iter = 200;
  RoundingOptions rounding{50, 0};
  sdp::SdpSettings solver;
  // Stop after the local phase; the result then only meets the local
  // constraint. Not part of the standard two-phase procedure.
  bool local_only = false;
};

struct GreedyResult {
  SelectionResult selection;
  SelectionTrace trace;
  IndexSet candidates;  // final S1
};

class GreedyIterationLimit : public SolverError {
 public:
  GreedyIterationLimit(const std::string& what, SelectionTrace trace)
      : SolverError(what), trace_(std::move(trace)) {}
  const SelectionTrace& trace() const { return trace_; }

 private:
  SelectionTrace trace_;
};

// Two-phase greedy selection: candidate sets grown by r0-neighbourhoods and
// solved under the local constraint (noise power of S1 over alpha), then
// under the global constraint (noise power of the full network over alpha).
GreedyResult greedy_select(const Scene& scene, const SpectralModel& model, const CostVector& costs,
                           const Point2& z0, const GreedyOptions& options);

// Restart from a previous selection, e.g. after the fusion center moved and
// the costs changed: S2 = previous, S1 = its expansion, then both phases.
GreedyResult warm_restart(const Scene& scene, const SpectralModel& model, const CostVector& costs,
                          const IndexSet& previous, const GreedyOptions& options);

}  // namespace micsel
