#pragma once

#include <cstdint>

#include "micsel/beamform.hpp"
#include "micsel/sdp.hpp"

namespace micsel {

// R_nn = lambda I + G with lambda = lambda_min(R_nn) / 2.
struct DecomposedNoise {
  double lambda = 0.0;
  CMatrix g;
};

DecomposedNoise decompose_noise(const CMatrix& r_nn);

// Relative slack used for every "achieved SNR >= target" decision.
inline constexpr double kSnrRelTol = 1e-12;
bool meets_snr(double snr, double target);

// How the auxiliary matrix Z of the R_xx relaxation is parameterized.
// signal_range restricts Z to U S U^H with U spanning range(R_xx), which
// leaves the optimal value unchanged; full uses an M x M Hermitian Z.
enum class ZParameterization { signal_range, full };

// A convex relaxation of the selection problem. The first num_sensors
// variables are the relaxed selection p; the R_xx form appends the real
// parameters of the Hermitian matrix S with Z = U S U^H.
struct RelaxedProblem {
  sdp::SdpProblem sdp;
  int num_sensors = 0;
  CMatrix z_basis;
  double snr_target = 0.0;

  RVector selection(const RVector& x) const;
  CMatrix decode_z(const RVector& x) const;
  // Variables for a given (p, Z); Z is projected onto the basis.
  RVector encode(const RVector& p, const CMatrix& z) const;
};

// SDP over (p, Z): minimize c.p subject to trace(Z) >= snr_target and the
// Schur-complement LMI of size 2M built from G^{-1}, 1/lambda and R_xx^{1/2}.
RelaxedProblem build_sdp_rxx(const SpectralModel& model, const CostVector& costs, double alpha,
                             ZParameterization z = ZParameterization::signal_range);
RelaxedProblem build_sdp_rxx_for_snr(const SpectralModel& model, const CostVector& costs,
                                     double snr_target,
                                     ZParameterization z = ZParameterization::signal_range);

// SDP over p: minimize c.p subject to the LMI of size M + 1 with corner
// a^H G^{-1} a - snr_target / P_s.
RelaxedProblem build_sdp_steering(const SpectralModel& model, const CostVector& costs, double alpha);
RelaxedProblem build_sdp_steering_for_snr(const SpectralModel& model, const CostVector& costs,
                                          double snr_target);

struct RoundingOptions {
  int num_draws = 200;
  std::uint64_t seed = 0;
};

struct SelectionResult {
  RVector relaxed_p;
  SelectionVector selection;
  double relaxed_cost = 0.0;
  double cost = 0.0;
  double noise_power = 0.0;
  double snr = 0.0;
  double snr_target = 0.0;
  bool feasible = false;
  sdp::SdpStatus solver_status = sdp::SdpStatus::optimal;
  int solver_iterations = 0;
};

// Candidates from threshold sweeps over the distinct values of relaxed_p and
// seeded Bernoulli draws, each repaired by adding the sensor with the
// largest SNR gain per unit cost until the target is met. The cheapest
// feasible candidate wins (ties: fewer sensors, then lowest indices).
SelectionResult round_selection(const RVector& relaxed_p, const SpectralModel& model,
                                const CostVector& costs, double alpha,
                                const RoundingOptions& options = {});
SelectionResult round_selection_for_snr(const RVector& relaxed_p, const SpectralModel& model,
                                        const CostVector& costs, double snr_target,
                                        const RoundingOptions& options = {});

// Rank-ordering rule for spatially uncorrelated noise: sort by
// v_i = c_i sigma_i^2 / |a_i|^2 and take the shortest prefix meeting the SNR.
SelectionResult select_uncorrelated(const SpectralModel& model, const CostVector& costs,
                                    double alpha);

enum class RelaxationForm { rxx, steering };

struct ModelDrivenOptions {
  RelaxationForm form = RelaxationForm::steering;
  ZParameterization z = ZParameterization::signal_range;
  RoundingOptions rounding;
  sdp::SdpSettings solver;
};

// Builds and solves the relaxation, then rounds.
SelectionResult select_model_driven(const SpectralModel& model, const CostVector& costs,
                                    double alpha, const ModelDrivenOptions& options = {});
SelectionResult select_model_driven_for_snr(const SpectralModel& model, const CostVector& costs,
                                            double snr_target,
                                            const ModelDrivenOptions& options = {});

// Exhaustive search over all 2^M subsets (M <= 24).
SelectionResult brute_force_select(const SpectralModel& model, const CostVector& costs,
                                   double alpha);
SelectionResult brute_force_select_for_snr(const SpectralModel& model, const CostVector& costs,
                                           double snr_target);

}  // namespace micsel
