#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "micsel/types.hpp"

namespace micsel {

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr double kMinSourceDistance = 1e-6;

// Geometry and source powers of a wireless acoustic sensor network.
// Positions are in meters, powers are linear.
struct Scene {
  std::vector<Point2> mics;
  Point2 target{0.0, 0.0};
  std::vector<Point2> interferers;
  Point2 fc{0.0, 0.0};
  double target_psd = 1.0;
  std::vector<double> interferer_psds;
  double self_noise_snr_db = 50.0;
  double speed_of_sound = kSpeedOfSound;
  // Per-microphone device cost c^(0); empty means all zero.
  std::vector<double> device_cost;

  int size() const { return static_cast<int>(mics.size()); }
  double device_cost_of(int i) const;

  // Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

// Uniform nx-by-ny grid spanning [0, width] x [0, height], row-major in y.
std::vector<Point2> grid_positions(int nx, int ny, double width, double height);

// Sets every interferer power so that its mean received power across the
// microphones equals the mean received target power scaled by 10^(-sir/10).
void set_interferer_sir(Scene& scene, double sir_db);

// 12 x 12 m room with the target at (2.4, 9.6), interferers at (2.4, 2.4) and
// (9.6, 9.6), and the fusion center at (9, 3). The default desk-scale grid is
// 7 x 7; full_size selects the 13 x 13 layout.
Scene paper_like_scene(bool full_size = false);

// Per-frequency second-order statistics of the microphone signals.
struct SpectralModel {
  double omega = 0.0;
  double target_psd = 1.0;
  CVector a;
  std::vector<CVector> interferer_steering;
  std::vector<double> interferer_psds;
  double noise_floor = 0.0;  // self-noise variance per microphone
  CMatrix r_nn;
  CMatrix r_xx;
  CMatrix r_yy;

  int size() const { return static_cast<int>(a.size()); }
};

// Builds a model from an arbitrary steering vector and noise covariance;
// R_xx and R_yy are derived. Used for estimated or synthetic statistics.
SpectralModel model_from_covariance(const CVector& a, const CMatrix& r_nn, double target_psd,
                                    double omega = 0.0);

// Model restricted to the given microphones.
SpectralModel restrict_model(const SpectralModel& model, const IndexSet& idx);

struct CostVector {
  RVector values;

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values(i); }
  double total(const IndexSet& idx) const;
  CostVector restricted(const IndexSet& idx) const;
};

// Free-field transfer function exp(-j omega d / c) / d from source to each mic.
CVector steering_vector(const Scene& scene, const Point2& source, double omega);

SpectralModel build_spectral_model(const Scene& scene, double omega);

// Squared distance to the fusion center plus device cost, normalized to sum 1.
CostVector transmission_costs(const Scene& scene);

CMatrix estimate_sample_covariance(std::span<const CVector> snapshots);

// Circularly-symmetric Gaussian snapshots drawn from the model, deterministic
// in the seed.
std::vector<CVector> generate_snapshots(const SpectralModel& model, int count,
                                        std::uint64_t seed);

// Replaces R_nn and R_yy with sample estimates (noise-only and noisy
// snapshots) and sets R_xx to the PSD part of their difference. The steering
// vector and target PSD are kept.
SpectralModel estimate_model(const SpectralModel& model, int count, std::uint64_t seed);

}  // namespace micsel
