#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "micsel/types.hpp"

namespace micsel::sdp {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Constraint constant + sum_i x_i coefficients[i] >= 0 (PSD). An empty
// coefficient matrix stands for zero.
struct LmiBlock {
  RMatrix constant;
  std::vector<SparseMatrix> coefficients;

  int dim() const { return static_cast<int>(constant.rows()); }
};

// g . x >= h
struct LinearRow {
  RVector g;
  double h = 0.0;
};

// minimize objective . x subject to every LMI block, the box lower <= x <= upper
// (infinite entries allowed) and the linear rows.
struct SdpProblem {
  int num_vars = 0;
  RVector objective;
  std::vector<LmiBlock> blocks;
  RVector lower;
  RVector upper;
  std::vector<LinearRow> rows;

  // Throws std::invalid_argument on inconsistent dimensions, lower > upper,
  // or a coefficient matrix that is not symmetric to within 1e-10 (relative
  // to its largest entry).
  void validate() const;
};

enum class SdpStatus { optimal, infeasible, max_iter };

std::string to_string(SdpStatus status);

struct SdpSettings {
  double gap_tol = 1e-7;
  double feas_tol = 1e-6;
  int max_iter = 200;
};

struct SdpSolution {
  RVector x;
  double objective_value = 0.0;
  SdpStatus status = SdpStatus::max_iter;
  double max_violation = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
};

// Primal-dual interior-point method (HKM search direction with Mehrotra
// predictor-corrector) on the block-diagonal LMI formed by the blocks, the
// box and the linear rows. Deterministic for a given problem.
SdpSolution solve(const SdpProblem& problem, const SdpSettings& settings = {});

// constant + sum_i x_i coefficients[i].
RMatrix lmi_value(const LmiBlock& block, const RVector& x);

// Largest violation of any constraint at x: negated LMI minimum eigenvalues,
// box excess and row shortfall; zero when x is feasible.
double constraint_violation(const SdpProblem& problem, const RVector& x);

// [[Re H, -Im H], [Im H, Re H]]; PSD exactly when H is. Throws
// std::invalid_argument when H is not Hermitian to within 1e-10.
RMatrix embed_hermitian(const CMatrix& h);

}  // namespace micsel::sdp
