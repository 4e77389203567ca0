#include "micsel/beamform.hpp"

#include <cmath>

#include "micsel/linalg.hpp"

namespace micsel {

SelectionVector::SelectionVector(RVector p) : p_(std::move(p)) {
  for (int i = 0; i < p_.size(); ++i)
    if (!(p_(i) >= 0.0 && p_(i) <= 1.0))
      throw std::invalid_argument("selection entries must lie in [0, 1]");
}

SelectionVector SelectionVector::all(int m) { return SelectionVector(RVector::Ones(m)); }

SelectionVector SelectionVector::none(int m) { return SelectionVector(RVector::Zero(m)); }

SelectionVector SelectionVector::from_indices(int m, const IndexSet& idx) {
  RVector p = RVector::Zero(m);
  for (int i : idx) {
    if (i < 0 || i >= m) throw std::out_of_range("selection index out of range");
    p(i) = 1.0;
  }
  return SelectionVector(std::move(p));
}

bool SelectionVector::is_boolean() const {
  for (int i = 0; i < p_.size(); ++i)
    if (p_(i) != 0.0 && p_(i) != 1.0) return false;
  return true;
}

int SelectionVector::count() const {
  int k = 0;
  for (int i = 0; i < p_.size(); ++i) k += p_(i) != 0.0;
  return k;
}

IndexSet SelectionVector::indices() const {
  if (!is_boolean()) throw std::invalid_argument("selection is not boolean");
  IndexSet idx;
  for (int i = 0; i < p_.size(); ++i)
    if (p_(i) == 1.0) idx.push_back(i);
  return idx;
}

double SelectionVector::cost(const CostVector& costs) const {
  if (costs.size() != size()) throw std::invalid_argument("cost vector size mismatch");
  return p_.dot(costs.values);
}

namespace {

IndexSet checked_indices(const SpectralModel& model, const SelectionVector& sel) {
  if (sel.size() != model.size()) throw std::invalid_argument("selection size mismatch");
  IndexSet idx = sel.indices();
  if (idx.empty()) throw std::invalid_argument("no sensors selected");
  return idx;
}

// Cholesky of R_nn,p and the solve R_nn,p^{-1} a_p.
CVector solve_subset(const SpectralModel& model, const IndexSet& idx) {
  Eigen::LLT<CMatrix> llt(model.r_nn(idx, idx));
  if (llt.info() != Eigen::Success)
    throw SolverError("noise covariance of the selection is not positive definite");
  return llt.solve(CVector(model.a(idx)));
}

}  // namespace

BeamformerWeights mvdr_weights(const SpectralModel& model, const SelectionVector& sel) {
  IndexSet idx = checked_indices(model, sel);
  CVector z = solve_subset(model, idx);
  cplx denom = model.a(idx).dot(z);  // a^H R^{-1} a
  return {z / denom.real(), std::move(idx)};
}

double mvdr_precision(const SpectralModel& model, const IndexSet& idx) {
  if (idx.empty()) return 0.0;
  CVector z = solve_subset(model, idx);
  return model.a(idx).dot(z).real();
}

double output_noise_power(const SpectralModel& model, const SelectionVector& sel) {
  IndexSet idx = checked_indices(model, sel);
  double prec = mvdr_precision(model, idx);
  if (!(prec > 0.0)) throw SolverError("selected microphones carry no target signal");
  return 1.0 / prec;
}

double output_snr(const SpectralModel& model, const SelectionVector& sel) {
  IndexSet idx = checked_indices(model, sel);
  return model.target_psd * mvdr_precision(model, idx);
}

double full_noise_power(const SpectralModel& model) {
  return output_noise_power(model, SelectionVector::all(model.size()));
}

CMatrix rearranged_q(double lambda, const CMatrix& g, const SelectionVector& sel) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (g.rows() != sel.size()) throw std::invalid_argument("selection size mismatch");
  CMatrix g_inv = linalg::hpd_inverse(g);  // throws when G is not PD
  CMatrix inner = g_inv;
  inner.diagonal() += (sel.values() / lambda).cast<cplx>();
  Eigen::LLT<CMatrix> llt(linalg::hermitian_part(inner));
  if (llt.info() != Eigen::Success) throw SolverError("G^{-1} + diag(p)/lambda is not PD");
  return linalg::hermitian_part(g_inv - g_inv * llt.solve(g_inv));
}

CMatrix selection_q(double lambda, const CMatrix& g, const SelectionVector& sel) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const int m = sel.size();
  IndexSet idx = sel.indices();
  CMatrix q = CMatrix::Zero(m, m);
  if (idx.empty()) return q;
  CMatrix sub = g(idx, idx);
  sub.diagonal().array() += lambda;
  q(idx, idx) = linalg::hpd_inverse(sub);
  return q;
}

IncrementalMvdr::IncrementalMvdr(const SpectralModel& model)
    : model_(&model),
      member_flag_(static_cast<size_t>(model.size()), 0),
      chol_(CMatrix::Zero(model.size(), model.size())),
      whitened_(CVector::Zero(model.size())) {}

bool IncrementalMvdr::contains(int i) const { return member_flag_[static_cast<size_t>(i)] != 0; }

IncrementalMvdr::Extension IncrementalMvdr::extend(int i) const {
  const int k = size();
  CVector r(k);
  for (int j = 0; j < k; ++j) r(j) = model_->r_nn(members_[static_cast<size_t>(j)], i);
  CVector l = chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(r);
  ops_ += static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(k + 1) / 2 + k;
  double d2 = model_->r_nn(i, i).real() - l.squaredNorm();
  if (!(d2 > 0.0)) throw SolverError("noise covariance lost positive definiteness");
  double d = std::sqrt(d2);
  cplx y = (model_->a(i) - l.dot(whitened_.head(k))) / d;
  return {std::move(l), d, y};
}

double IncrementalMvdr::precision_with(int i) const {
  if (contains(i)) throw std::invalid_argument("microphone already selected");
  return precision_ + std::norm(extend(i).whitened);
}

void IncrementalMvdr::add(int i) {
  if (contains(i)) throw std::invalid_argument("microphone already selected");
  Extension e = extend(i);
  const int k = size();
  chol_.row(k).head(k) = e.column.adjoint();
  chol_(k, k) = e.diag;
  whitened_(k) = e.whitened;
  precision_ += std::norm(e.whitened);
  members_.push_back(i);
  member_flag_[static_cast<size_t>(i)] = 1;
}

}  // namespace micsel
