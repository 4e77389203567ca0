#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "micsel/linalg.hpp"
#include "micsel/select_model.hpp"
#include "support/random_models.hpp"

using namespace micsel;
namespace ts = micsel::testing;

namespace {

double full_snr(const SpectralModel& m) { return output_snr(m, SelectionVector::all(m.size())); }

double relaxed_optimum(const RelaxedProblem& rp) {
  auto sol = sdp::solve(rp.sdp);
  EXPECT_EQ(sol.status, sdp::SdpStatus::optimal);
  return sol.objective_value;
}

// min c.p over [0,1]^M s.t. sum_i |a_i|^2 p_i / (lambda + g_i p_i) >= t, the
// diagonal-noise form of the steering relaxation, by bisection on the
// Lagrange multiplier.
double separable_relaxation_oracle(const SpectralModel& m, const CostVector& c, double t) {
  DecomposedNoise d = decompose_noise(m.r_nn);
  const int n = m.size();
  auto argmin = [&](double nu) {
    RVector p(n);
    for (int i = 0; i < n; ++i) {
      double g = d.g(i, i).real();
      double a2 = std::norm(m.a(i));
      double v = (std::sqrt(nu * a2 * d.lambda / c[i]) - d.lambda) / g;
      p(i) = std::clamp(v, 0.0, 1.0);
    }
    return p;
  };
  auto value = [&](const RVector& p) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += std::norm(m.a(i)) * p(i) / (d.lambda + d.g(i, i).real() * p(i));
    return s;
  };
  double lo = 0.0, hi = 1.0;
  while (value(argmin(hi)) < t) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (value(argmin(mid)) < t ? lo : hi) = mid;
  }
  return c.values.dot(argmin(hi));
}

// Fractional knapsack over the linear contributions |a_i|^2 / sigma_i^2.
double linear_relaxation_oracle(const SpectralModel& m, const CostVector& c, double t) {
  const int n = m.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto contrib = [&](int i) { return std::norm(m.a(i)) / m.r_nn(i, i).real(); };
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return c[i] / contrib(i) < c[j] / contrib(j); });
  double acc = 0.0, cost = 0.0;
  for (int i : order) {
    double take = std::min(1.0, (t - acc) / contrib(i));
    if (take <= 0.0) break;
    acc += take * contrib(i);
    cost += take * c[i];
  }
  return cost;
}

}  // namespace

TEST(SelectModel, DecomposeIdentity) {
  DecomposedNoise d = decompose_noise(CMatrix::Identity(3, 3));
  EXPECT_DOUBLE_EQ(d.lambda, 0.5);
  EXPECT_LT((d.g - 0.5 * CMatrix::Identity(3, 3)).norm(), 1e-15);
}

TEST(SelectModel, DecomposeDiagonal) {
  CMatrix r = CMatrix::Zero(2, 2);
  r(0, 0) = 1.0;
  r(1, 1) = 4.0;
  DecomposedNoise d = decompose_noise(r);
  EXPECT_NEAR(d.lambda, 0.5, 1e-15);
  EXPECT_NEAR(d.g(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(d.g(1, 1).real(), 3.5, 1e-15);
}

TEST(SelectModel, DecomposeRandomHalvesMinimumEigenvalue) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    CMatrix r = ts::random_hpd(8, rng);
    DecomposedNoise d = decompose_noise(r);
    double lmin = linalg::min_eigenvalue(r);
    EXPECT_NEAR(d.lambda, 0.5 * lmin, 1e-12);
    EXPECT_NEAR(linalg::min_eigenvalue(d.g), 0.5 * lmin, 1e-10);
  }
}

TEST(SelectModel, DecomposeRejectsIndefinite) {
  CMatrix r = CMatrix::Identity(2, 2);
  r(1, 1) = -1.0;
  EXPECT_THROW(decompose_noise(r), SolverError);
}

TEST(SelectModel, MeetsSnrUsesRelativeSlack) {
  EXPECT_TRUE(meets_snr(1.0, 1.0));
  EXPECT_TRUE(meets_snr(1.0 - 1e-14, 1.0));
  EXPECT_FALSE(meets_snr(1.0 - 1e-9, 1.0));
  EXPECT_TRUE(meets_snr(0.0, 0.0));
}

TEST(SelectModel, SteeringLmiIsTightAtFullSelection) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    SpectralModel m = ts::random_model(6, rng);
    CostVector c = ts::random_costs(6, rng);
    RelaxedProblem rp = build_sdp_steering(m, c, 1.0);
    RVector x = rp.encode(RVector::Ones(6), CMatrix());
    RMatrix lmi = sdp::lmi_value(rp.sdp.blocks.at(0), x);
    double scale = lmi.norm();
    EXPECT_GE(linalg::min_eigenvalue(lmi), -1e-8 * scale);
    EXPECT_LE(sdp::constraint_violation(rp.sdp, x), 1e-8 * scale);
    RVector shy = RVector::Ones(6);
    shy(t % 6) = 0.9;
    EXPECT_GT(sdp::constraint_violation(rp.sdp, rp.encode(shy, CMatrix())), 0.0);
  }
}

TEST(SelectModel, RxxLmiIsTightAtFullSelection) {
  std::mt19937_64 rng(3);
  for (auto zp : {ZParameterization::signal_range, ZParameterization::full}) {
    SpectralModel m = ts::random_model(5, rng);
    CostVector c = ts::random_costs(5, rng);
    RelaxedProblem rp = build_sdp_rxx(m, c, 1.0, zp);
    DecomposedNoise d = decompose_noise(m.r_nn);
    CMatrix root = linalg::psd_sqrt(m.r_xx);
    CMatrix z = root.adjoint() * rearranged_q(d.lambda, d.g, SelectionVector::all(5)) * root;
    RVector x = rp.encode(RVector::Ones(5), z);
    double scale = 1.0;
    for (const auto& b : rp.sdp.blocks) scale = std::max(scale, sdp::lmi_value(b, x).norm());
    EXPECT_LE(sdp::constraint_violation(rp.sdp, x), 1e-8 * scale);
    EXPECT_NEAR(rp.decode_z(x).trace().real(), rp.snr_target, 1e-8 * rp.snr_target);
  }
}

TEST(SelectModel, VacuousTargetAdmitsEmptySelection) {
  std::mt19937_64 rng(4);
  SpectralModel m = ts::random_model(4, rng);
  CostVector c = ts::random_costs(4, rng);
  for (bool rxx : {true, false}) {
    RelaxedProblem rp = rxx ? build_sdp_rxx_for_snr(m, c, 0.0) : build_sdp_steering_for_snr(m, c, 0.0);
    RVector x = rp.encode(RVector::Zero(4), CMatrix::Zero(4, 4));
    EXPECT_LE(sdp::constraint_violation(rp.sdp, x), 1e-12);
    EXPECT_NEAR(relaxed_optimum(rp), 0.0, 1e-6);
  }
}

TEST(SelectModel, SingleSensorSchurThreshold) {
  for (double alpha : {0.2, 0.5, 0.8, 1.0}) {
    CVector a(1);
    a << cplx(0.6, -0.3);
    CMatrix r = CMatrix::Constant(1, 1, 2.5);
    SpectralModel m = model_from_covariance(a, r, 1.3);
    CostVector c{RVector::Ones(1)};
    RelaxedProblem rp = build_sdp_steering(m, c, alpha);
    // 2p / (1 + p) >= alpha with lambda = g = sigma^2 / 2.
    EXPECT_NEAR(relaxed_optimum(rp), alpha / (2.0 - alpha), 1e-6);
  }
}

TEST(SelectModel, RelaxedOptimaBoundBruteForce) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    SpectralModel m = ts::random_model(5, rng);
    CostVector c = ts::random_costs(5, rng);
    double alpha = 0.5 + 0.05 * t;
    double exact = brute_force_select(m, c, alpha).cost;
    EXPECT_LE(relaxed_optimum(build_sdp_steering(m, c, alpha)), exact + 1e-6);
    EXPECT_LE(relaxed_optimum(build_sdp_rxx(m, c, alpha)), exact + 1e-6);
  }
}

TEST(SelectModel, RelaxedOptimumIsMonotoneInAlpha) {
  std::mt19937_64 rng(6);
  SpectralModel m = ts::random_model(6, rng);
  CostVector c = ts::random_costs(6, rng);
  double prev = 0.0;
  for (double alpha = 0.1; alpha <= 1.0 + 1e-12; alpha += 0.1) {
    double v = relaxed_optimum(build_sdp_steering(m, c, alpha));
    EXPECT_GE(v, prev - 1e-6);
    prev = v;
  }
}

TEST(SelectModel, DiagonalSteeringRelaxationMatchesSeparableOracle) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    SpectralModel m = ts::random_diagonal_model(4 + t % 2, rng);
    CostVector c = ts::random_costs(m.size(), rng);
    double alpha = 0.3 + 0.06 * t;
    double snr_target = alpha * full_snr(m);
    double sdp_value = relaxed_optimum(build_sdp_steering(m, c, alpha));
    double oracle = separable_relaxation_oracle(m, c, snr_target / m.target_psd);
    EXPECT_NEAR(sdp_value, oracle, 1e-5);
    // The LMI relaxation is concave in p and lies above the linear one.
    EXPECT_LE(sdp_value, linear_relaxation_oracle(m, c, snr_target / m.target_psd) + 1e-6);
  }
}

TEST(SelectModel, BooleanFeasibleInputIsAFixedPointOfRounding) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    SpectralModel m = ts::random_model(7, rng);
    CostVector c = ts::random_costs(7, rng);
    SelectionResult exact = brute_force_select(m, c, 0.7);
    SelectionResult r = round_selection(exact.selection.values(), m, c, 0.7, {50, 3});
    EXPECT_EQ(r.selection.indices(), exact.selection.indices());
    EXPECT_TRUE(r.feasible);
  }
}

TEST(SelectModel, RoundingAtAlphaOneIsFeasible) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    SpectralModel m = ts::random_model(6, rng);
    CostVector c = ts::random_costs(6, rng);
    RVector p = RVector::Constant(6, 0.5);
    SelectionResult r = round_selection(p, m, c, 1.0, {100, static_cast<std::uint64_t>(t)});
    EXPECT_TRUE(r.feasible);
    EXPECT_TRUE(meets_snr(r.snr, full_snr(m)));
    EXPECT_LE(r.cost, 1.0 + 1e-12);
  }
}

TEST(SelectModel, RoundingIsDeterministicInSeed) {
  std::mt19937_64 rng(10);
  SpectralModel m = ts::random_model(8, rng);
  CostVector c = ts::random_costs(8, rng);
  RVector p = RVector::Constant(8, 0.4);
  auto a = round_selection(p, m, c, 0.8, {200, 17});
  auto b = round_selection(p, m, c, 0.8, {200, 17});
  EXPECT_EQ(a.selection.indices(), b.selection.indices());
  EXPECT_EQ(a.cost, b.cost);
}

TEST(SelectModel, ModelDrivenIsFeasibleAndBoundedByBruteForce) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    Scene s = ts::random_scene(8, rng);
    SpectralModel m = build_spectral_model(s, 2000.0);
    CostVector c = transmission_costs(s);
    double exact = brute_force_select(m, c, 0.65).cost;
    for (auto form : {RelaxationForm::steering, RelaxationForm::rxx}) {
      ModelDrivenOptions o;
      o.form = form;
      SelectionResult r = select_model_driven(m, c, 0.65, o);
      EXPECT_TRUE(r.feasible);
      EXPECT_GE(r.cost, exact - 1e-12);
      EXPECT_LE(r.relaxed_cost, exact + 1e-6);
      EXPECT_NEAR(r.noise_power, output_noise_power(m, r.selection), 1e-12 * r.noise_power);
    }
  }
}

TEST(SelectModel, UncorrelatedIdenticalSensors) {
  const int m = 8;
  CVector a = CVector::Constant(m, cplx(0.5, 0.5));
  SpectralModel model = model_from_covariance(a, 0.3 * CMatrix::Identity(m, m), 1.0);
  CostVector c{RVector::Constant(m, 1.0 / m)};
  for (double alpha : {0.1, 0.5, 0.6, 0.95}) {
    SelectionResult r = select_uncorrelated(model, c, alpha);
    int k = static_cast<int>(std::ceil(alpha * m - 1e-9));
    IndexSet prefix(k);
    std::iota(prefix.begin(), prefix.end(), 0);
    EXPECT_EQ(r.selection.indices(), prefix) << alpha;
    EXPECT_TRUE(r.feasible);
  }
  EXPECT_EQ(select_uncorrelated(model, c, 1.0).selection.count(), m);
}

TEST(SelectModel, UncorrelatedTakesTheShortestFeasiblePrefix) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    SpectralModel m = ts::random_diagonal_model(10, rng);
    CostVector c = ts::random_costs(10, rng);
    SelectionResult r = select_uncorrelated(m, c, 0.7);
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.noise_power, output_noise_power(m, r.selection), 1e-12 * r.noise_power);
    IndexSet idx = r.selection.indices();
    // Dropping the worst-ranked member must break the constraint.
    auto rank = [&](int i) { return c[i] * m.r_nn(i, i).real() / std::norm(m.a(i)); };
    int worst = *std::max_element(idx.begin(), idx.end(),
                                  [&](int i, int j) { return rank(i) < rank(j); });
    IndexSet shorter;
    for (int i : idx)
      if (i != worst) shorter.push_back(i);
    EXPECT_FALSE(meets_snr(m.target_psd * mvdr_precision(m, shorter), r.snr_target));
    EXPECT_GE(r.cost, brute_force_select(m, c, 0.7).cost - 1e-12);
  }
}

TEST(SelectModel, UncorrelatedRejectsCorrelatedNoise) {
  std::mt19937_64 rng(13);
  SpectralModel m = ts::random_model(4, rng);
  EXPECT_THROW(select_uncorrelated(m, ts::random_costs(4, rng), 0.5), std::invalid_argument);
}

TEST(SelectModel, BruteForceIsPermutationInvariant) {
  std::mt19937_64 rng(14);
  SpectralModel m = ts::random_model(7, rng);
  CostVector c = ts::random_costs(7, rng);
  SelectionResult r = brute_force_select(m, c, 0.75);
  IndexSet perm{3, 6, 0, 5, 1, 4, 2};
  SpectralModel pm = restrict_model(m, perm);
  CostVector pc = c.restricted(perm);
  SelectionResult pr = brute_force_select(pm, pc, 0.75);
  EXPECT_NEAR(pr.cost, r.cost, 1e-12);
  IndexSet mapped;
  for (int i : pr.selection.indices()) mapped.push_back(perm[i]);
  std::sort(mapped.begin(), mapped.end());
  EXPECT_EQ(mapped, r.selection.indices());
}

TEST(SelectModel, InvalidAlphaIsRejected) {
  std::mt19937_64 rng(15);
  SpectralModel m = ts::random_model(3, rng);
  CostVector c = ts::random_costs(3, rng);
  EXPECT_THROW(build_sdp_steering(m, c, 0.0), std::invalid_argument);
  EXPECT_THROW(build_sdp_rxx(m, c, 1.5), std::invalid_argument);
  EXPECT_THROW(select_uncorrelated(m, c, -0.1), std::invalid_argument);
}
