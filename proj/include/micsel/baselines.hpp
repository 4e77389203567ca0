#pragma once

#include <cstdint>

#include "micsel/select_greedy.hpp"

namespace micsel {

enum class SparseRelaxation { l1, log_sum };

struct SparseBeamformerConfig {
  double mu = 0.0;
  double epsilon = 1e-5;
  SparseRelaxation relaxation = SparseRelaxation::l1;
  int log_sum_rounds = 3;
  int max_iter = 5000;
  double kkt_tol = 1e-6;
};

struct SparseBeamformerResult {
  CVector w;
  SelectionVector selection;
  double cost = 0.0;
  // w^H R_nn w for the thresholded weights (zeroed below epsilon).
  double thresholded_noise_power = 0.0;
  // MVDR output noise power re-derived on the selected support.
  double noise_power = 0.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// min_w w^H R_nn w + mu sum_i c_i |w_i| subject to w^H a = 1, solved by ADMM
// with a w/z split; microphones with |w_i| >= epsilon are selected.
SparseBeamformerResult sparse_mvdr(const SpectralModel& model, const CostVector& costs,
                                   const SparseBeamformerConfig& config);

// Value of the sparse MVDR objective at w.
double sparse_objective(const SpectralModel& model, const CostVector& costs, double mu,
                        const CVector& w);

// Distance of the stationarity condition R w + (mu/2) c.s in span{a} from
// zero, relative to |R w|, plus the constraint error |a^H w - 1|.
double sparse_kkt_residual(const SpectralModel& model, const CostVector& costs, double mu,
                           const CVector& w);

// Penalty that makes mu = 1 comparable to the MVDR noise power:
// beta / sum_i c_i |w_mvdr,i|.
double sparse_mu_scale(const SpectralModel& model, const CostVector& costs);

struct RadiusResult {
  SelectionVector selection;
  double cost = 0.0;
  double noise_power = 0.0;
};

// MVDR over the microphones within gamma of the fusion center.
RadiusResult radius_select(const Scene& scene, const SpectralModel& model, const CostVector& costs,
                           double gamma);

struct UtilityResult {
  SelectionVector selection;
  double cost = 0.0;
  double noise_power = 0.0;
  SelectionTrace trace;
  // sum over iterations of |S2|^2 (|S1| - |S2|) with |S2| before the addition.
  double quadratic_proxy = 0.0;
  // Multiply-adds spent in the rank-one-update precision evaluations.
  std::uint64_t operation_count = 0;
};

// Adds, one at a time, the candidate with the largest noise power reduction
// per unit cost, expanding the candidate set around the selection, until
// the selection's cost reaches c_T or no candidate is left.
UtilityResult utility_greedy(const Scene& scene, const SpectralModel& model,
                             const CostVector& costs, double c_t, const Point2& z0, double r0);

}  // namespace micsel
