#include "micsel/linalg.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>

namespace micsel::linalg {

double hermitian_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("matrix is not square");
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

CMatrix hermitian_part(const CMatrix& h) { return 0.5 * (h + h.adjoint()); }

RVector eigenvalues(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("eigenvalue decomposition failed");
  return es.eigenvalues();
}

double min_eigenvalue(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  return eigenvalues(h)(0);
}

double min_eigenvalue(const RMatrix& s) {
  if (s.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("eigenvalue decomposition failed");
  return es.eigenvalues()(0);
}

CMatrix psd_sqrt(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  if (es.info() != Eigen::Success) throw SolverError("eigenvalue decomposition failed");
  RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix psd_projection(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  if (es.info() != Eigen::Success) throw SolverError("eigenvalue decomposition failed");
  RVector clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix hpd_inverse(const CMatrix& h) {
  Eigen::LLT<CMatrix> llt(hermitian_part(h));
  if (llt.info() != Eigen::Success) throw SolverError("matrix is not positive definite");
  return hermitian_part(llt.solve(CMatrix::Identity(h.rows(), h.cols())));
}

CMatrix principal_submatrix(const CMatrix& m, const IndexSet& idx) {
  return m(idx, idx);
}

CVector subvector(const CVector& v, const IndexSet& idx) { return v(idx); }

RVector subvector(const RVector& v, const IndexSet& idx) { return v(idx); }

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const IndexSet& inner, const IndexSet& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

IndexSet all_indices(int m) {
  IndexSet idx(static_cast<size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace micsel::linalg
