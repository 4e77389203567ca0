#pragma once

#include "micsel/types.hpp"

namespace micsel::linalg {

// Largest absolute entry of H - H^H.
double hermitian_defect(const CMatrix& h);

// (H + H^H) / 2.
CMatrix hermitian_part(const CMatrix& h);

// Ascending eigenvalues of a Hermitian matrix.
RVector eigenvalues(const CMatrix& h);
double min_eigenvalue(const CMatrix& h);
double min_eigenvalue(const RMatrix& s);

// Principal square root of a positive semidefinite matrix; eigenvalues below
// zero are clamped to zero.
CMatrix psd_sqrt(const CMatrix& h);

// Projection onto the PSD cone (negative eigenvalues dropped).
CMatrix psd_projection(const CMatrix& h);

// Inverse of a Hermitian positive definite matrix via Cholesky. Throws
// SolverError when the factorization fails.
CMatrix hpd_inverse(const CMatrix& h);

CMatrix principal_submatrix(const CMatrix& m, const IndexSet& idx);
CVector subvector(const CVector& v, const IndexSet& idx);
RVector subvector(const RVector& v, const IndexSet& idx);

IndexSet set_union(const IndexSet& a, const IndexSet& b);
bool is_subset(const IndexSet& inner, const IndexSet& outer);
IndexSet all_indices(int m);

}  // namespace micsel::linalg
