#include <gtest/gtest.h>

#include <random>

#include "micsel/beamform.hpp"
#include "micsel/linalg.hpp"
#include "micsel/select_model.hpp"
#include "support/random_models.hpp"

using namespace micsel;
namespace ts = micsel::testing;

namespace {

SelectionVector from_mask(int m, unsigned mask) {
  IndexSet idx;
  for (int i = 0; i < m; ++i)
    if (mask & (1u << i)) idx.push_back(i);
  return SelectionVector::from_indices(m, idx);
}

}  // namespace

TEST(Beamform, SelectionVectorValidatesRange) {
  RVector bad(2);
  bad << 0.5, 1.5;
  EXPECT_THROW(SelectionVector{bad}, std::invalid_argument);
  RVector frac(3);
  frac << 0.0, 0.3, 1.0;
  SelectionVector s(frac);
  EXPECT_FALSE(s.is_boolean());
  EXPECT_EQ(s.count(), 2);
  EXPECT_THROW(s.indices(), std::invalid_argument);
  EXPECT_EQ(SelectionVector::from_indices(4, {1, 3}).indices(), (IndexSet{1, 3}));
  EXPECT_THROW(SelectionVector::from_indices(2, {2}), std::out_of_range);
}

TEST(Beamform, SingleMicWeightAndNoise) {
  std::mt19937_64 rng(1);
  SpectralModel m = ts::random_model(5, rng);
  for (int i = 0; i < 5; ++i) {
    auto sel = SelectionVector::from_indices(5, {i});
    auto w = mvdr_weights(m, sel);
    ASSERT_EQ(w.w.size(), 1);
    EXPECT_LT(std::abs(w.w(0) - 1.0 / std::conj(m.a(i))), 1e-12);
    double sigma2 = m.r_nn(i, i).real();
    EXPECT_NEAR(output_noise_power(m, sel), sigma2 / std::norm(m.a(i)), 1e-12 * sigma2);
    EXPECT_NEAR(output_snr(m, sel), m.target_psd * std::norm(m.a(i)) / sigma2,
                1e-10 * output_snr(m, sel));
  }
}

TEST(Beamform, FullSelectionIsClassicalMvdr) {
  std::mt19937_64 rng(2);
  SpectralModel m = ts::random_model(6, rng);
  CMatrix rinv = linalg::hpd_inverse(m.r_nn);
  double prec = (m.a.adjoint() * rinv * m.a)(0).real();
  CVector w_ref = rinv * m.a / prec;
  auto w = mvdr_weights(m, SelectionVector::all(6));
  EXPECT_LT((w.w - w_ref).norm(), 1e-10 * w_ref.norm());
  EXPECT_NEAR(output_noise_power(m, SelectionVector::all(6)), 1.0 / prec, 1e-12 / prec);
  EXPECT_NEAR(full_noise_power(m), 1.0 / prec, 1e-12 / prec);
  EXPECT_NEAR(output_snr(m, SelectionVector::all(6)), m.target_psd * prec, 1e-10 * prec);
}

TEST(Beamform, SubsetWeightsMatchLinearSolve) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    SpectralModel m = ts::random_model(5, rng);
    IndexSet idx{0, 2, 4};
    CMatrix r(3, 3);
    CVector a(3);
    for (int i = 0; i < 3; ++i) {
      a(i) = m.a(idx[i]);
      for (int j = 0; j < 3; ++j) r(i, j) = m.r_nn(idx[i], idx[j]);
    }
    CVector z = r.fullPivLu().solve(a);
    CVector w_ref = z / a.dot(z);
    auto w = mvdr_weights(m, SelectionVector::from_indices(5, idx));
    EXPECT_EQ(w.selected, idx);
    EXPECT_LT((w.w - w_ref).norm(), 1e-10 * w_ref.norm());
  }
}

TEST(Beamform, WeightsAreDistortionless) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    SpectralModel m = ts::random_model(7, rng);
    auto sel = ts::random_selection(7, rng);
    auto w = mvdr_weights(m, sel);
    CVector a = linalg::subvector(m.a, w.selected);
    EXPECT_LT(std::abs(w.w.dot(a) - 1.0), 1e-10);
  }
}

TEST(Beamform, NoisePowerIsMonotoneOverAllSubsetPairs) {
  std::mt19937_64 rng(5);
  SpectralModel m = ts::random_model(6, rng);
  std::vector<double> np(64, 0.0);
  for (unsigned s = 1; s < 64; ++s) np[s] = output_noise_power(m, from_mask(6, s));
  int pairs = 0;
  for (unsigned s = 1; s < 64; ++s)
    for (unsigned t = 1; t < 64; ++t)
      if ((s & t) == s && s != t) {
        EXPECT_LE(np[t], np[s] * (1.0 + 1e-12));
        ++pairs;
      }
  EXPECT_EQ(pairs, 602);
}

TEST(Beamform, DiagonalNoiseClosedForm) {
  std::mt19937_64 rng(6);
  SpectralModel m = ts::random_diagonal_model(8, rng);
  auto sel = ts::random_selection(8, rng);
  double sum = 0.0;
  for (int i : sel.indices()) sum += std::norm(m.a(i)) / m.r_nn(i, i).real();
  EXPECT_NEAR(output_noise_power(m, sel), 1.0 / sum, 1e-12 / sum);
}

TEST(Beamform, SnrDirectFormEqualsTraceForm) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    Scene s = ts::random_scene(7, rng);
    SpectralModel m = build_spectral_model(s, 1000.0 + 100.0 * t);
    auto sel = ts::random_selection(7, rng);
    DecomposedNoise d = decompose_noise(m.r_nn);
    CMatrix q = rearranged_q(d.lambda, d.g, sel);
    CMatrix root = linalg::psd_sqrt(m.r_xx);
    double trace_form = (root.adjoint() * q * root).trace().real();
    double direct = output_snr(m, sel);
    EXPECT_NEAR(trace_form, direct, 1e-8 * direct);
  }
}

TEST(Beamform, RearrangedQAtFullAndEmptySelection) {
  std::mt19937_64 rng(8);
  SpectralModel m = ts::random_model(5, rng);
  DecomposedNoise d = decompose_noise(m.r_nn);
  CMatrix rinv = linalg::hpd_inverse(m.r_nn);
  CMatrix q_full = rearranged_q(d.lambda, d.g, SelectionVector::all(5));
  EXPECT_LT((q_full - rinv).norm(), 1e-9 * rinv.norm());
  EXPECT_LT((selection_q(d.lambda, d.g, SelectionVector::all(5)) - rinv).norm(), 1e-9 * rinv.norm());
  CMatrix q_none = rearranged_q(d.lambda, d.g, SelectionVector::none(5));
  EXPECT_LT(q_none.norm(), 1e-9 * rinv.norm());
}

TEST(Beamform, RearrangedQMatchesSelectionForm) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    SpectralModel m = ts::random_model(6, rng);
    DecomposedNoise d = decompose_noise(m.r_nn);
    IndexSet idx{0, 3, 5};
    auto sel = SelectionVector::from_indices(6, idx);
    CMatrix q1 = selection_q(d.lambda, d.g, sel);
    CMatrix q2 = rearranged_q(d.lambda, d.g, sel);
    EXPECT_LT((q1 - q2).norm(), 1e-9 * q1.norm());
    CMatrix embedded = CMatrix::Zero(6, 6);
    CMatrix sub_inv = linalg::hpd_inverse(linalg::principal_submatrix(m.r_nn, idx));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) embedded(idx[i], idx[j]) = sub_inv(i, j);
    EXPECT_LT((q1 - embedded).norm(), 1e-9 * embedded.norm());
  }
}

TEST(Beamform, PrecisionOfEmptySetIsZero) {
  std::mt19937_64 rng(10);
  SpectralModel m = ts::random_model(4, rng);
  EXPECT_EQ(mvdr_precision(m, {}), 0.0);
  EXPECT_THROW(output_noise_power(m, SelectionVector::none(4)), std::invalid_argument);
}

TEST(Beamform, IncrementalPrecisionMatchesDirect) {
  std::mt19937_64 rng(11);
  SpectralModel m = ts::random_model(9, rng);
  IncrementalMvdr inc(m);
  IndexSet order{4, 0, 7, 2, 8, 1};
  IndexSet members;
  for (int i : order) {
    IndexSet with = members;
    with.push_back(i);
    std::sort(with.begin(), with.end());
    double direct = mvdr_precision(m, with);
    EXPECT_NEAR(inc.precision_with(i), direct, 1e-10 * direct);
    inc.add(i);
    members = with;
    EXPECT_NEAR(inc.precision(), direct, 1e-10 * direct);
    EXPECT_TRUE(inc.contains(i));
  }
  EXPECT_EQ(inc.size(), 6);
  EXPECT_GT(inc.operation_count(), 0u);
}
