#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "micsel/linalg.hpp"
#include "micsel/sdp.hpp"

using namespace micsel;
using sdp::LmiBlock;
using sdp::SdpProblem;
using sdp::SdpStatus;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SdpProblem empty_problem(int n) {
  SdpProblem p;
  p.num_vars = n;
  p.objective = RVector::Zero(n);
  p.lower = RVector::Constant(n, -kInf);
  p.upper = RVector::Constant(n, kInf);
  return p;
}

sdp::SparseMatrix sp(const RMatrix& m) { return m.sparseView(); }

RMatrix random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  RMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST(Sdp, ScalarLmiWithBox) {
  SdpProblem p = empty_problem(1);
  p.objective << 1.0;
  p.lower << 0.0;
  p.upper << 10.0;
  LmiBlock b;
  b.constant = RMatrix::Constant(1, 1, -1.0);
  b.coefficients = {sp(RMatrix::Constant(1, 1, 1.0))};
  p.blocks.push_back(b);
  auto sol = sdp::solve(p);
  ASSERT_EQ(sol.status, SdpStatus::optimal);
  EXPECT_NEAR(sol.x(0), 1.0, 1e-6);
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-6);
}

TEST(Sdp, PureLinearProgram) {
  SdpProblem p = empty_problem(2);
  p.objective << 1.0, 2.0;
  p.lower.setZero();
  p.upper.setOnes();
  sdp::LinearRow row;
  row.g = RVector::Ones(2);
  row.h = 1.0;
  p.rows.push_back(row);
  auto sol = sdp::solve(p);
  ASSERT_EQ(sol.status, SdpStatus::optimal);
  EXPECT_NEAR(sol.x(0), 1.0, 1e-6);
  EXPECT_NEAR(sol.x(1), 0.0, 1e-6);
}

TEST(Sdp, TwoByTwoGeometricMean) {
  // [[x1, 1], [1, x2]] >= 0 means x1 x2 >= 1; x1 + x2 is minimized at (1, 1).
  SdpProblem p = empty_problem(2);
  p.objective << 1.0, 1.0;
  LmiBlock b;
  b.constant = RMatrix{{0.0, 1.0}, {1.0, 0.0}};
  b.coefficients = {sp(RMatrix{{1.0, 0.0}, {0.0, 0.0}}), sp(RMatrix{{0.0, 0.0}, {0.0, 1.0}})};
  p.blocks.push_back(b);
  auto sol = sdp::solve(p);
  ASSERT_EQ(sol.status, SdpStatus::optimal);
  EXPECT_NEAR(sol.x(0), 1.0, 1e-5);
  EXPECT_NEAR(sol.x(1), 1.0, 1e-5);
  EXPECT_NEAR(sol.objective_value, 2.0, 1e-6);
}

TEST(Sdp, LargestEigenvalueMatchesEigensolver) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 5;
    RMatrix a = random_symmetric(n, rng);
    SdpProblem p = empty_problem(1);
    p.objective << 1.0;
    LmiBlock b;
    b.constant = -a;
    b.coefficients = {sp(RMatrix::Identity(n, n))};
    p.blocks.push_back(b);
    auto sol = sdp::solve(p);
    ASSERT_EQ(sol.status, SdpStatus::optimal);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(a);
    EXPECT_NEAR(sol.x(0), es.eigenvalues().maxCoeff(), 1e-6);
  }
}

TEST(Sdp, SpectralNormMatchesSvd) {
  // [[t I, A], [A^T, t I]] >= 0 exactly when t >= sigma_max(A).
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    const int r = 3, c = 4;
    RMatrix a(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) a(i, j) = nd(rng);
    SdpProblem p = empty_problem(1);
    p.objective << 1.0;
    LmiBlock b;
    b.constant = RMatrix::Zero(r + c, r + c);
    b.constant.topRightCorner(r, c) = a;
    b.constant.bottomLeftCorner(c, r) = a.transpose();
    b.coefficients = {sp(RMatrix::Identity(r + c, r + c))};
    p.blocks.push_back(b);
    auto sol = sdp::solve(p);
    ASSERT_EQ(sol.status, SdpStatus::optimal);
    Eigen::JacobiSVD<RMatrix> svd(a);
    EXPECT_NEAR(sol.x(0), svd.singularValues()(0), 1e-6);
  }
}

TEST(Sdp, SolutionSatisfiesConstraintsOnRandomProblems) {
  // min c.x over the box with a random LMI that holds at the box centre.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4, d = 5;
    SdpProblem p = empty_problem(n);
    for (int i = 0; i < n; ++i) p.objective(i) = ud(rng);
    p.lower.setZero();
    p.upper.setOnes();
    LmiBlock b;
    RMatrix sum = RMatrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      RMatrix f = random_symmetric(d, rng);
      b.coefficients.push_back(sp(f));
      sum += 0.5 * f;
    }
    b.constant = -sum + 0.1 * RMatrix::Identity(d, d);
    p.blocks.push_back(b);
    auto sol = sdp::solve(p);
    ASSERT_EQ(sol.status, SdpStatus::optimal) << "trial " << trial;
    EXPECT_LE(sdp::constraint_violation(p, sol.x), 1e-6);
    // The box centre is feasible, so the optimum cannot be worse.
    EXPECT_LE(sol.objective_value, p.objective.sum() * 0.5 + 1e-7);
  }
}

TEST(Sdp, DetectsInfeasibility) {
  SdpProblem p = empty_problem(1);
  p.objective << 1.0;
  p.lower << 0.0;
  p.upper << 1.0;
  LmiBlock b;
  b.constant = RMatrix::Constant(1, 1, -2.0);
  b.coefficients = {sp(RMatrix::Constant(1, 1, 1.0))};
  p.blocks.push_back(b);
  auto sol = sdp::solve(p);
  EXPECT_EQ(sol.status, SdpStatus::infeasible);
}

TEST(Sdp, ValidateRejectsAsymmetricCoefficient) {
  SdpProblem p = empty_problem(1);
  LmiBlock b;
  b.constant = RMatrix::Identity(2, 2);
  b.coefficients = {sp(RMatrix{{0.0, 1.0}, {0.0, 0.0}})};
  p.blocks.push_back(b);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Sdp, ConstraintViolationReportsWorstTerm) {
  SdpProblem p = empty_problem(1);
  p.lower << 0.0;
  p.upper << 1.0;
  LmiBlock b;
  b.constant = RMatrix::Constant(1, 1, -1.0);
  b.coefficients = {sp(RMatrix::Constant(1, 1, 1.0))};
  p.blocks.push_back(b);
  EXPECT_NEAR(sdp::constraint_violation(p, RVector::Constant(1, 0.25)), 0.75, 1e-15);
  EXPECT_NEAR(sdp::constraint_violation(p, RVector::Constant(1, 1.5)), 0.5, 1e-15);
  EXPECT_EQ(sdp::constraint_violation(p, RVector::Constant(1, 1.0)), 0.0);
}

TEST(Sdp, EmbeddingOfPauliY) {
  CMatrix y(2, 2);
  y << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  RMatrix e = sdp::embed_hermitian(y);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(e);
  RVector expected(4);
  expected << -1.0, -1.0, 1.0, 1.0;
  EXPECT_LE((es.eigenvalues() - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((e - e.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sdp, EmbeddingPreservesSpectrumWithDoubledMultiplicity) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  CMatrix h(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h(i, j) = cplx(nd(rng), nd(rng));
  h = linalg::hermitian_part(h);
  RVector ev = linalg::eigenvalues(h);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sdp::embed_hermitian(h));
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(es.eigenvalues()(2 * i), ev(i), 1e-10);
    EXPECT_NEAR(es.eigenvalues()(2 * i + 1), ev(i), 1e-10);
  }
}

TEST(Sdp, EmbeddingRejectsNonHermitian) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 1) = 1.0;
  EXPECT_THROW(sdp::embed_hermitian(h), std::invalid_argument);
}
