#include "micsel/select_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "micsel/linalg.hpp"

namespace micsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankTol = 1e-12;
constexpr double kDiagonalTol = 1e-10;
constexpr int kMaxBruteForce = 24;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
}

void check_costs(const SpectralModel& model, const CostVector& costs) {
  if (costs.size() != model.size()) throw std::invalid_argument("cost vector size mismatch");
}

double snr_target_for(const SpectralModel& model, double alpha) {
  check_alpha(alpha);
  return alpha * model.target_psd * mvdr_precision(model, linalg::all_indices(model.size()));
}

// Hermitian basis for r x r matrices: diagonal entries, then the real and
// imaginary parts of each upper off-diagonal entry.
std::vector<CMatrix> hermitian_basis(int r) {
  std::vector<CMatrix> basis;
  for (int j = 0; j < r; ++j) {
    CMatrix e = CMatrix::Zero(r, r);
    e(j, j) = 1.0;
    basis.push_back(std::move(e));
  }
  const cplx i1(0.0, 1.0);
  for (int j = 0; j < r; ++j)
    for (int l = j + 1; l < r; ++l) {
      CMatrix re = CMatrix::Zero(r, r);
      re(j, l) = 1.0;
      re(l, j) = 1.0;
      basis.push_back(std::move(re));
      CMatrix im = CMatrix::Zero(r, r);
      im(j, l) = i1;
      im(l, j) = -i1;
      basis.push_back(std::move(im));
    }
  return basis;
}

// LMI [[G^{-1} + diag(p)/lambda, G^{-1} W], [W^H G^{-1}, W^H G^{-1} W - S]] >= 0.
// With fixed_corner the r x r matrix S is the constant corner_value * I and
// only p is variable; otherwise S is parameterized by the Hermitian basis.
RelaxedProblem build_relaxation(const SpectralModel& model, const CostVector& costs,
                                const CMatrix& w, const CMatrix& z_basis, double snr_target,
                                bool fixed_corner) {
  check_costs(model, costs);
  if (!(snr_target >= 0.0)) throw std::invalid_argument("SNR target must be non-negative");
  const int m = model.size();
  const int r = static_cast<int>(w.cols());
  DecomposedNoise dn = decompose_noise(model.r_nn);
  CMatrix g_inv = linalg::hpd_inverse(dn.g);
  CMatrix g_inv_w = g_inv * w;

  CMatrix k0(m + r, m + r);
  k0.topLeftCorner(m, m) = g_inv;
  k0.topRightCorner(m, r) = g_inv_w;
  k0.bottomLeftCorner(r, m) = g_inv_w.adjoint();
  k0.bottomRightCorner(r, r) = linalg::hermitian_part(w.adjoint() * g_inv_w);
  if (fixed_corner) k0.bottomRightCorner(r, r).diagonal().array() -= snr_target / model.target_psd;
  k0 = linalg::hermitian_part(k0);

  std::vector<CMatrix> s_basis = fixed_corner ? std::vector<CMatrix>{} : hermitian_basis(r);
  const int nz = static_cast<int>(s_basis.size());
  const int n = m + nz;

  sdp::LmiBlock block;
  block.constant = sdp::embed_hermitian(k0);
  block.coefficients.resize(static_cast<size_t>(n));
  for (int i = 0; i < m; ++i) {
    CMatrix ki = CMatrix::Zero(m + r, m + r);
    ki(i, i) = 1.0 / dn.lambda;
    block.coefficients[static_cast<size_t>(i)] = sdp::embed_hermitian(ki).sparseView();
  }
  for (int k = 0; k < nz; ++k) {
    CMatrix kk = CMatrix::Zero(m + r, m + r);
    kk.bottomRightCorner(r, r) = -s_basis[static_cast<size_t>(k)];
    block.coefficients[static_cast<size_t>(m + k)] = sdp::embed_hermitian(kk).sparseView();
  }

  RelaxedProblem rp;
  rp.num_sensors = m;
  rp.snr_target = snr_target;
  rp.sdp.num_vars = n;
  rp.sdp.objective = RVector::Zero(n);
  rp.sdp.objective.head(m) = costs.values;
  rp.sdp.lower = RVector::Constant(n, -kInf);
  rp.sdp.upper = RVector::Constant(n, kInf);
  rp.sdp.lower.head(m).setZero();
  rp.sdp.upper.head(m).setOnes();
  rp.sdp.blocks.push_back(std::move(block));
  if (!fixed_corner) {
    rp.z_basis = z_basis;
    sdp::LinearRow trace_row;
    trace_row.g = RVector::Zero(n);
    trace_row.g.segment(m, r).setOnes();  // diagonal parameters come first
    trace_row.h = snr_target;
    rp.sdp.rows.push_back(std::move(trace_row));
  }
  return rp;
}

bool better_candidate(double cost, const IndexSet& idx, double best_cost, const IndexSet& best) {
  double tol = 1e-12 * std::max(1.0, std::abs(best_cost));
  if (cost < best_cost - tol) return true;
  if (cost > best_cost + tol) return false;
  if (idx.size() != best.size()) return idx.size() < best.size();
  return idx < best;
}

SelectionResult evaluate(const SpectralModel& model, const CostVector& costs, const IndexSet& idx,
                         double snr_target) {
  SelectionResult res;
  res.selection = SelectionVector::from_indices(model.size(), idx);
  res.cost = costs.total(idx);
  double prec = mvdr_precision(model, idx);
  res.snr = model.target_psd * prec;
  res.noise_power = prec > 0.0 ? 1.0 / prec : kInf;
  res.snr_target = snr_target;
  res.feasible = meets_snr(res.snr, snr_target);
  return res;
}

// Growing selection that keeps, for every outside sensor j, the whitened
// column L^{-1} R_{S,j}, the residual variance and the projected steering
// entry, so all marginal gains are available after an O(M K) update.
class GainTracker {
 public:
  explicit GainTracker(const SpectralModel& model)
      : model_(model),
        in_(static_cast<size_t>(model.size()), 0),
        cols_(CMatrix::Zero(model.size(), model.size())),
        resid_(model.r_nn.diagonal().real()),
        proj_(model.a) {}

  double precision() const { return precision_; }
  bool contains(int j) const { return in_[static_cast<size_t>(j)] != 0; }
  double gain(int j) const { return resid_(j) > 0.0 ? std::norm(proj_(j)) / resid_(j) : 0.0; }
  IndexSet members() const {
    IndexSet idx = members_;
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  void add(int i) {
    const int m = model_.size();
    const int k = static_cast<int>(members_.size());
    if (!(resid_(i) > 0.0)) throw SolverError("noise covariance lost positive definiteness");
    const double d = std::sqrt(resid_(i));
    const cplx y = proj_(i) / d;
    for (int j = 0; j < m; ++j) {
      if (contains(j) || j == i) continue;
      cplx e = (model_.r_nn(i, j) - cols_.row(i).head(k).dot(cols_.row(j).head(k))) / d;
      cols_(j, k) = e;
      resid_(j) -= std::norm(e);
      proj_(j) -= std::conj(e) * y;
    }
    precision_ += std::norm(y);
    in_[static_cast<size_t>(i)] = 1;
    members_.push_back(i);
  }

 private:
  const SpectralModel& model_;
  std::vector<char> in_;
  std::vector<int> members_;
  CMatrix cols_;   // row j: L^{-1} R_{S,j} for the current S
  RVector resid_;  // R_jj - |L^{-1} R_{S,j}|^2
  CVector proj_;   // a_j - (L^{-1} R_{S,j})^H L^{-1} a_S
  double precision_ = 0.0;
};

// Adds sensors by largest precision gain per unit cost until the target is met.
// Returns false when every sensor is in and the target is still missed.
bool repair(GainTracker& tr, const CostVector& costs, double required_precision) {
  const int m = costs.size();
  while (!meets_snr(tr.precision(), required_precision)) {
    int best = -1;
    double best_ratio = -1.0;
    double best_gain = -1.0;
    for (int j = 0; j < m; ++j) {
      if (tr.contains(j)) continue;
      double gain = tr.gain(j);
      double ratio = costs[j] > 0.0 ? gain / costs[j] : (gain > 0.0 ? kInf : 0.0);
      if (ratio > best_ratio || (ratio == best_ratio && gain > best_gain)) {
        best = j;
        best_ratio = ratio;
        best_gain = gain;
      }
    }
    if (best < 0) return false;
    tr.add(best);
  }
  return true;
}

}  // namespace

DecomposedNoise decompose_noise(const CMatrix& r_nn) {
  if (r_nn.rows() != r_nn.cols() || r_nn.rows() == 0)
    throw std::invalid_argument("noise covariance must be square and non-empty");
  CMatrix h = linalg::hermitian_part(r_nn);
  double lmin = linalg::min_eigenvalue(h);
  if (!(lmin > 0.0)) throw SolverError("noise covariance is not positive definite");
  DecomposedNoise dn;
  dn.lambda = 0.5 * lmin;
  dn.g = h;
  dn.g.diagonal().array() -= dn.lambda;
  Eigen::LLT<CMatrix> llt(dn.g);
  if (llt.info() != Eigen::Success) throw SolverError("G is not positive definite");
  return dn;
}

bool meets_snr(double snr, double target) {
  if (target <= 0.0) return true;
  return snr >= target * (1.0 - kSnrRelTol);
}

RVector RelaxedProblem::selection(const RVector& x) const {
  return x.head(num_sensors).cwiseMax(0.0).cwiseMin(1.0);
}

CMatrix RelaxedProblem::decode_z(const RVector& x) const {
  const int r = static_cast<int>(z_basis.cols());
  if (r == 0) throw std::logic_error("relaxation has no Z variable");
  std::vector<CMatrix> basis = hermitian_basis(r);
  CMatrix s = CMatrix::Zero(r, r);
  for (size_t k = 0; k < basis.size(); ++k) s += x(num_sensors + static_cast<int>(k)) * basis[k];
  return z_basis * s * z_basis.adjoint();
}

RVector RelaxedProblem::encode(const RVector& p, const CMatrix& z) const {
  const int r = static_cast<int>(z_basis.cols());
  if (p.size() != num_sensors) throw std::invalid_argument("selection size mismatch");
  RVector x(sdp.num_vars);
  x.head(num_sensors) = p;
  if (r == 0) return x;
  CMatrix s = z_basis.adjoint() * z * z_basis;
  int k = num_sensors;
  for (int j = 0; j < r; ++j) x(k++) = s(j, j).real();
  for (int j = 0; j < r; ++j)
    for (int l = j + 1; l < r; ++l) {
      x(k++) = s(j, l).real();
      x(k++) = s(j, l).imag();
    }
  return x;
}

RelaxedProblem build_sdp_rxx(const SpectralModel& model, const CostVector& costs, double alpha,
                             ZParameterization z) {
  return build_sdp_rxx_for_snr(model, costs, snr_target_for(model, alpha), z);
}

RelaxedProblem build_sdp_rxx_for_snr(const SpectralModel& model, const CostVector& costs,
                                     double snr_target, ZParameterization z) {
  const int m = model.size();
  CMatrix rxx = linalg::hermitian_part(model.r_xx);
  if (rxx.rows() != m) throw std::invalid_argument("R_xx size mismatch");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rxx);
  const RVector& ev = es.eigenvalues();
  double scale = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (ev(0) < -1e-10 * scale) throw std::invalid_argument("R_xx is not positive semidefinite");

  CMatrix w;
  CMatrix basis;
  if (z == ZParameterization::full) {
    w = linalg::psd_sqrt(rxx);
    basis = CMatrix::Identity(m, m);
  } else {
    std::vector<int> keep;
    for (int i = 0; i < m; ++i)
      if (ev(i) > kRankTol * scale) keep.push_back(i);
    if (keep.empty()) throw std::invalid_argument("R_xx is zero");
    basis = es.eigenvectors()(Eigen::all, keep);
    RVector root = ev(keep).cwiseSqrt();
    // R_xx^{1/2} U = U D^{1/2}; the LMI is compressed onto range(R_xx).
    w = basis * root.cast<cplx>().asDiagonal();
  }
  return build_relaxation(model, costs, w, basis, snr_target, false);
}

RelaxedProblem build_sdp_steering(const SpectralModel& model, const CostVector& costs,
                                  double alpha) {
  return build_sdp_steering_for_snr(model, costs, snr_target_for(model, alpha));
}

RelaxedProblem build_sdp_steering_for_snr(const SpectralModel& model, const CostVector& costs,
                                          double snr_target) {
  if (!(model.target_psd > 0.0)) throw std::invalid_argument("target PSD must be positive");
  CMatrix w = model.a;
  return build_relaxation(model, costs, w, CMatrix(), snr_target, true);
}

SelectionResult round_selection(const RVector& relaxed_p, const SpectralModel& model,
                                const CostVector& costs, double alpha,
                                const RoundingOptions& options) {
  return round_selection_for_snr(relaxed_p, model, costs, snr_target_for(model, alpha), options);
}

SelectionResult round_selection_for_snr(const RVector& relaxed_p, const SpectralModel& model,
                                        const CostVector& costs, double snr_target,
                                        const RoundingOptions& options) {
  const int m = model.size();
  check_costs(model, costs);
  if (relaxed_p.size() != m) throw std::invalid_argument("relaxed selection size mismatch");
  if (options.num_draws < 1) throw std::invalid_argument("num_draws must be at least 1");
  for (int i = 0; i < m; ++i)
    if (!(relaxed_p(i) >= 0.0 && relaxed_p(i) <= 1.0))
      throw std::invalid_argument("relaxed selection entries must lie in [0, 1]");
  if (!(model.target_psd > 0.0)) throw std::invalid_argument("target PSD must be positive");
  const double required = snr_target / model.target_psd;

  std::set<IndexSet> candidates;
  std::vector<double> levels(relaxed_p.data(), relaxed_p.data() + m);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  candidates.insert(IndexSet{});
  for (double t : levels) {
    if (t <= 0.0) continue;
    IndexSet idx;
    for (int i = 0; i < m; ++i)
      if (relaxed_p(i) >= t) idx.push_back(i);
    candidates.insert(std::move(idx));
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int d = 0; d < options.num_draws; ++d) {
    IndexSet idx;
    for (int i = 0; i < m; ++i)
      if (unif(rng) < relaxed_p(i)) idx.push_back(i);
    candidates.insert(std::move(idx));
  }

  std::set<IndexSet> repaired;
  for (const IndexSet& c : candidates) {
    GainTracker tr(model);
    for (int i : c) tr.add(i);
    if (!repair(tr, costs, required)) continue;
    repaired.insert(tr.members());
  }

  bool found = false;
  SelectionResult best;
  IndexSet best_idx;
  for (const IndexSet& idx : repaired) {
    SelectionResult res = evaluate(model, costs, idx, snr_target);
    if (!res.feasible) continue;
    if (!found || better_candidate(res.cost, idx, best.cost, best_idx)) {
      best = std::move(res);
      best_idx = idx;
      found = true;
    }
  }
  if (!found) throw SolverError("alpha infeasible");
  best.relaxed_p = relaxed_p;
  best.relaxed_cost = relaxed_p.dot(costs.values);
  return best;
}

SelectionResult select_uncorrelated(const SpectralModel& model, const CostVector& costs,
                                    double alpha) {
  const int m = model.size();
  check_costs(model, costs);
  check_alpha(alpha);
  CMatrix off = model.r_nn;
  off.diagonal().setZero();
  if (off.norm() > kDiagonalTol * std::max(1.0, model.r_nn.norm()))
    throw std::invalid_argument("noise covariance is not diagonal");

  RVector contrib(m);
  RVector v(m);
  for (int i = 0; i < m; ++i) {
    double sigma2 = model.r_nn(i, i).real();
    if (!(sigma2 > 0.0)) throw SolverError("noise variance must be positive");
    double a2 = std::norm(model.a(i));
    contrib(i) = a2 / sigma2;
    v(i) = a2 > 0.0 ? costs[i] * sigma2 / a2 : kInf;
  }
  const double target = alpha * contrib.sum();

  std::vector<int> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return v(i) < v(j); });

  IndexSet idx;
  double acc = 0.0;
  for (int i : order) {
    if (meets_snr(acc, target)) break;
    idx.push_back(i);
    acc += contrib(i);
  }
  std::sort(idx.begin(), idx.end());

  SelectionResult res;
  res.selection = SelectionVector::from_indices(m, idx);
  res.relaxed_p = res.selection.values();
  res.cost = costs.total(idx);
  res.relaxed_cost = res.cost;
  double prec = 0.0;
  for (int i : idx) prec += contrib(i);
  res.snr = model.target_psd * prec;
  res.noise_power = prec > 0.0 ? 1.0 / prec : kInf;
  res.snr_target = model.target_psd * target;
  res.feasible = meets_snr(prec, target);
  return res;
}

SelectionResult select_model_driven(const SpectralModel& model, const CostVector& costs,
                                    double alpha, const ModelDrivenOptions& options) {
  return select_model_driven_for_snr(model, costs, snr_target_for(model, alpha), options);
}

SelectionResult select_model_driven_for_snr(const SpectralModel& model, const CostVector& costs,
                                            double snr_target, const ModelDrivenOptions& options) {
  RelaxedProblem rp = options.form == RelaxationForm::rxx
                          ? build_sdp_rxx_for_snr(model, costs, snr_target, options.z)
                          : build_sdp_steering_for_snr(model, costs, snr_target);
  sdp::SdpSolution sol = sdp::solve(rp.sdp, options.solver);
  if (sol.status == sdp::SdpStatus::infeasible) throw SolverError("relaxation is infeasible");
  SelectionResult res =
      round_selection_for_snr(rp.selection(sol.x), model, costs, snr_target, options.rounding);
  res.solver_status = sol.status;
  res.solver_iterations = sol.iterations;
  return res;
}

SelectionResult brute_force_select(const SpectralModel& model, const CostVector& costs,
                                   double alpha) {
  return brute_force_select_for_snr(model, costs, snr_target_for(model, alpha));
}

SelectionResult brute_force_select_for_snr(const SpectralModel& model, const CostVector& costs,
                                           double snr_target) {
  const int m = model.size();
  check_costs(model, costs);
  if (m > kMaxBruteForce) throw std::invalid_argument("too many microphones for brute force");

  bool found = false;
  double best_cost = kInf;
  IndexSet best_idx;
  const std::uint64_t count = std::uint64_t{1} << m;
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    IndexSet idx;
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      if (mask >> i & 1U) {
        idx.push_back(i);
        cost += costs[i];
      }
    if (found && !better_candidate(cost, idx, best_cost, best_idx)) continue;
    double snr = model.target_psd * mvdr_precision(model, idx);
    if (!meets_snr(snr, snr_target)) continue;
    found = true;
    best_cost = cost;
    best_idx = std::move(idx);
  }
  if (!found) throw SolverError("alpha infeasible");
  SelectionResult res = evaluate(model, costs, best_idx, snr_target);
  res.relaxed_p = res.selection.values();
  res.relaxed_cost = res.cost;
  return res;
}

}  // namespace micsel
