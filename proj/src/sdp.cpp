#include "micsel/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "micsel/linalg.hpp"

namespace micsel::sdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSymmetryTol = 1e-10;
constexpr double kStepFraction = 0.95;

double max_abs(const RMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
double max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

void check_symmetric(const RMatrix& m, const char* what) {
  if (m.size() == 0) return;
  double scale = std::max(1.0, max_abs(m));
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
    throw std::invalid_argument(std::string(what) + " is not symmetric");
}

RMatrix symmetrize(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

// Nonzero pattern of a symmetric coefficient matrix.
struct Sparse {
  std::vector<int> row;
  std::vector<int> col;
  std::vector<double> val;
  size_t nnz() const { return val.size(); }
};

Sparse to_sparse(const SparseMatrix& m) {
  Sparse s;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.value() != 0.0) {
        s.row.push_back(static_cast<int>(it.row()));
        s.col.push_back(static_cast<int>(it.col()));
        s.val.push_back(it.value());
      }
  return s;
}

struct Term {
  int var;
  double magnitude;
  RMatrix dense;
  Sparse sparse;
  bool use_sparse;
};

struct Block {
  RMatrix c0;
  std::vector<Term> terms;
  int dim() const { return static_cast<int>(c0.rows()); }
};

// Scaled standard form: blocks (F0 + sum x_i F_i >= 0) and an LP part
// (A x + b >= 0), objective f.
struct Standard {
  int n = 0;
  std::vector<Block> blocks;
  RMatrix lp_a;
  RVector lp_b;
  RVector f;
  RVector var_scale;  // x_original = x_scaled / var_scale
  double obj_scale = 1.0;
};

double trace_product(const Term& t, const RMatrix& m) {
  if (t.use_sparse) {
    double s = 0.0;
    for (size_t k = 0; k < t.sparse.nnz(); ++k) s += t.sparse.val[k] * m(t.sparse.col[k], t.sparse.row[k]);
    return s;
  }
  return t.dense.cwiseProduct(m.transpose()).sum();
}

// tr(F_i S^{-1} F_j X) for two sparse coefficient matrices.
double sparse_pair_trace(const Sparse& fi, const Sparse& fj, const RMatrix& si, const RMatrix& xd) {
  double s = 0.0;
  for (size_t r = 0; r < fi.nnz(); ++r)
    for (size_t q = 0; q < fj.nnz(); ++q)
      s += fi.val[r] * fj.val[q] * si(fi.col[r], fj.row[q]) * xd(fj.col[q], fi.row[r]);
  return s;
}

void add_scaled(RMatrix& out, const Term& t, double alpha) {
  if (alpha == 0.0) return;
  if (t.use_sparse) {
    for (size_t k = 0; k < t.sparse.nnz(); ++k) out(t.sparse.row[k], t.sparse.col[k]) += alpha * t.sparse.val[k];
  } else {
    out.noalias() += alpha * t.dense;
  }
}

Standard standardize(const SdpProblem& p) {
  Standard st;
  st.n = p.num_vars;
  const int n = p.num_vars;

  for (const auto& b : p.blocks) {
    Block blk;
    double scale = max_abs(b.constant);
    for (const auto& c : b.coefficients) scale = std::max(scale, max_abs(c));
    scale = scale > 0.0 ? 1.0 / scale : 1.0;
    blk.c0 = symmetrize(b.constant) * scale;
    for (int i = 0; i < n; ++i) {
      const SparseMatrix& c = b.coefficients[static_cast<size_t>(i)];
      if (c.size() == 0 || max_abs(c) == 0.0) continue;
      SparseMatrix sym = 0.5 * scale * (c + SparseMatrix(c.transpose()));
      Term t;
      t.var = i;
      t.sparse = to_sparse(sym);
      t.magnitude = max_abs(sym);
      t.use_sparse = t.sparse.nnz() * 4 <= static_cast<size_t>(sym.rows() * sym.cols());
      if (!t.use_sparse) t.dense = RMatrix(sym);
      blk.terms.push_back(std::move(t));
    }
    st.blocks.push_back(std::move(blk));
  }

  // Variable scaling from the LMI coefficients.
  st.var_scale = RVector::Ones(n);
  {
    RVector mag = RVector::Zero(n);
    for (const auto& blk : st.blocks)
      for (const auto& t : blk.terms) mag(t.var) = std::max(mag(t.var), t.magnitude);
    for (int i = 0; i < n; ++i)
      if (mag(i) > 0.0) st.var_scale(i) = mag(i);
  }
  for (auto& blk : st.blocks)
    for (auto& t : blk.terms) {
      double s = 1.0 / st.var_scale(t.var);
      t.dense *= s;
      for (auto& v : t.sparse.val) v *= s;
    }

  // LP rows in scaled variables: x_orig = x / scale.
  std::vector<RVector> rows_a;
  std::vector<double> rows_b;
  for (int i = 0; i < n; ++i) {
    double s = st.var_scale(i);
    if (std::isfinite(p.lower(i))) {
      RVector a = RVector::Zero(n);
      a(i) = 1.0 / s;
      rows_a.push_back(a);
      rows_b.push_back(-p.lower(i));
    }
    if (std::isfinite(p.upper(i))) {
      RVector a = RVector::Zero(n);
      a(i) = -1.0 / s;
      rows_a.push_back(a);
      rows_b.push_back(p.upper(i));
    }
  }
  for (const auto& r : p.rows) {
    rows_a.push_back(r.g.cwiseQuotient(st.var_scale));
    rows_b.push_back(-r.h);
  }
  const int m = static_cast<int>(rows_a.size());
  st.lp_a.resize(m, n);
  st.lp_b.resize(m);
  for (int r = 0; r < m; ++r) {
    double scale = std::max(rows_a[static_cast<size_t>(r)].cwiseAbs().maxCoeff(), std::abs(rows_b[static_cast<size_t>(r)]));
    scale = scale > 0.0 ? 1.0 / scale : 1.0;
    st.lp_a.row(r) = rows_a[static_cast<size_t>(r)].transpose() * scale;
    st.lp_b(r) = rows_b[static_cast<size_t>(r)] * scale;
  }

  st.f = p.objective.cwiseQuotient(st.var_scale);
  double fmax = st.f.size() ? st.f.cwiseAbs().maxCoeff() : 0.0;
  st.obj_scale = fmax > 0.0 ? 1.0 / fmax : 1.0;
  st.f *= st.obj_scale;
  return st;
}

// Largest step alpha with s + alpha ds >= 0 for PD s.
double max_step(const RMatrix& s, const RMatrix& ds) {
  if (s.size() == 0) return kInf;
  Eigen::LLT<RMatrix> llt(s);
  if (llt.info() != Eigen::Success) return 0.0;
  RMatrix tmp = llt.matrixL().solve(ds);
  RMatrix sym = llt.matrixL().solve(tmp.transpose());
  double lmin = linalg::min_eigenvalue(RMatrix(symmetrize(sym)));
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

double max_step(const RVector& s, const RVector& ds) {
  double a = kInf;
  for (int i = 0; i < s.size(); ++i)
    if (ds(i) < 0.0) a = std::min(a, -s(i) / ds(i));
  return a;
}

struct Iterate {
  RVector x;
  std::vector<RMatrix> s;  // block slacks
  std::vector<RMatrix> xd; // block duals
  RVector ls;              // LP slack
  RVector lz;              // LP dual
};

struct Direction {
  RVector dx;
  std::vector<RMatrix> ds;
  std::vector<RMatrix> dxd;
  RVector dls;
  RVector dlz;
};

RMatrix block_value(const Block& b, const RVector& x) {
  RMatrix v = b.c0;
  for (const auto& t : b.terms) add_scaled(v, t, x(t.var));
  return v;
}

}  // namespace

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  if (num_vars < 0) throw std::invalid_argument("negative variable count");
  if (objective.size() != num_vars) throw std::invalid_argument("objective size mismatch");
  if (lower.size() != num_vars || upper.size() != num_vars)
    throw std::invalid_argument("bound size mismatch");
  for (int i = 0; i < num_vars; ++i)
    if (lower(i) > upper(i)) throw std::invalid_argument("lower bound exceeds upper bound");
  for (const auto& b : blocks) {
    if (b.constant.rows() != b.constant.cols()) throw std::invalid_argument("LMI constant is not square");
    check_symmetric(b.constant, "LMI constant");
    if (static_cast<int>(b.coefficients.size()) != num_vars)
      throw std::invalid_argument("LMI coefficient count mismatch");
    for (const auto& c : b.coefficients) {
      if (c.size() == 0) continue;
      if (c.rows() != b.constant.rows() || c.cols() != b.constant.cols())
        throw std::invalid_argument("LMI coefficient dimension mismatch");
      SparseMatrix defect = c - SparseMatrix(c.transpose());
      if (max_abs(defect) > kSymmetryTol * std::max(1.0, max_abs(c)))
        throw std::invalid_argument("LMI coefficient is not symmetric");
    }
  }
  for (const auto& r : rows)
    if (r.g.size() != num_vars) throw std::invalid_argument("linear row size mismatch");
}

RMatrix lmi_value(const LmiBlock& block, const RVector& x) {
  RMatrix v = block.constant;
  for (size_t i = 0; i < block.coefficients.size(); ++i)
    if (block.coefficients[i].size() != 0) v += x(static_cast<Eigen::Index>(i)) * block.coefficients[i];
  return v;
}

double constraint_violation(const SdpProblem& problem, const RVector& x) {
  double worst = 0.0;
  for (const auto& b : problem.blocks)
    worst = std::max(worst, -linalg::min_eigenvalue(RMatrix(symmetrize(lmi_value(b, x)))));
  for (int i = 0; i < problem.num_vars; ++i) {
    if (std::isfinite(problem.lower(i))) worst = std::max(worst, problem.lower(i) - x(i));
    if (std::isfinite(problem.upper(i))) worst = std::max(worst, x(i) - problem.upper(i));
  }
  for (const auto& r : problem.rows) worst = std::max(worst, r.h - r.g.dot(x));
  return worst;
}

RMatrix embed_hermitian(const CMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("matrix is not square");
  double scale = h.size() ? std::max(1.0, h.cwiseAbs().maxCoeff()) : 1.0;
  if (linalg::hermitian_defect(h) > kSymmetryTol * scale)
    throw std::invalid_argument("matrix is not Hermitian");
  const auto d = h.rows();
  RMatrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = h.real();
  out.topRightCorner(d, d) = -h.imag();
  out.bottomLeftCorner(d, d) = h.imag();
  out.bottomRightCorner(d, d) = h.real();
  return out;
}

SdpSolution solve(const SdpProblem& problem, const SdpSettings& settings) {
  problem.validate();
  const Standard st = standardize(problem);
  const int n = st.n;
  const int nb = static_cast<int>(st.blocks.size());
  const int m = static_cast<int>(st.lp_b.size());

  int total_dim = m;
  for (const auto& b : st.blocks) total_dim += b.dim();

  // Starting point: box midpoint, slacks shifted to be PD, duals at identity.
  Iterate it;
  it.x = RVector::Zero(n);
  for (int i = 0; i < n; ++i) {
    double lo = problem.lower(i), hi = problem.upper(i);
    double x0 = 0.0;
    if (std::isfinite(lo) && std::isfinite(hi)) x0 = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) x0 = lo + 1.0;
    else if (std::isfinite(hi)) x0 = hi - 1.0;
    it.x(i) = x0 * st.var_scale(i);
  }
  for (const auto& b : st.blocks) {
    RMatrix f = block_value(b, it.x);
    double shift = std::max(0.0, -linalg::min_eigenvalue(RMatrix(symmetrize(f)))) + 1.0;
    it.s.push_back(symmetrize(f) + shift * RMatrix::Identity(b.dim(), b.dim()));
    it.xd.push_back(RMatrix::Identity(b.dim(), b.dim()));
  }
  it.ls = (st.lp_a * it.x + st.lp_b).cwiseMax(1.0);
  it.lz = RVector::Ones(m);

  SdpSolution sol;
  sol.status = SdpStatus::max_iter;
  const double f_norm = 1.0 + (n ? st.f.cwiseAbs().maxCoeff() : 0.0);

  std::vector<RMatrix> rp(static_cast<size_t>(nb)), s_inv(static_cast<size_t>(nb));
  RVector lrp;

  int iter = 0;
  for (; iter < settings.max_iter; ++iter) {
    // Residuals.
    double pinf = 0.0;
    for (int k = 0; k < nb; ++k) {
      rp[static_cast<size_t>(k)] = block_value(st.blocks[static_cast<size_t>(k)], it.x) - it.s[static_cast<size_t>(k)];
      pinf = std::max(pinf, max_abs(rp[static_cast<size_t>(k)]));
    }
    lrp = st.lp_a * it.x + st.lp_b - it.ls;
    if (m) pinf = std::max(pinf, lrp.cwiseAbs().maxCoeff());

    RVector aty = st.lp_a.transpose() * it.lz;
    double c0x = st.lp_b.dot(it.lz);
    double gap = it.ls.dot(it.lz);
    for (int k = 0; k < nb; ++k) {
      const auto& b = st.blocks[static_cast<size_t>(k)];
      const RMatrix& xd = it.xd[static_cast<size_t>(k)];
      for (const auto& t : b.terms) aty(t.var) += trace_product(t, xd);
      c0x += b.c0.cwiseProduct(xd).sum();
      gap += it.s[static_cast<size_t>(k)].cwiseProduct(xd).sum();
    }
    RVector rd = aty - st.f;
    double dinf = n ? rd.cwiseAbs().maxCoeff() / f_norm : 0.0;
    double pobj = st.f.dot(it.x);
    double dobj = -c0x;
    double rel_gap = std::max(gap, std::abs(pobj - dobj)) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.relative_gap = rel_gap;

    if (rel_gap <= settings.gap_tol && pinf <= 0.1 * settings.feas_tol && dinf <= settings.feas_tol) {
      sol.status = SdpStatus::optimal;
      break;
    }

    // Farkas certificate for an empty feasible set: dual direction with
    // A^*(X) ~ 0 and a negative constant pairing.
    {
      double eta = it.lz.sum();
      for (const auto& xd : it.xd) eta += xd.trace();
      if (eta > 1e6) {
        double pairing = c0x / eta;
        double residual = n ? aty.cwiseAbs().maxCoeff() / eta : 0.0;
        if (pairing < -1e-8 && residual <= 1e-6 * -pairing) {
          sol.status = SdpStatus::infeasible;
          break;
        }
      }
    }

    const double mu = gap / total_dim;

    // Schur complement matrix H_ij = sum tr(F_i S^{-1} F_j X) + LP part.
    RMatrix h = RMatrix::Zero(n, n);
    for (int k = 0; k < nb; ++k) {
      const auto& b = st.blocks[static_cast<size_t>(k)];
      Eigen::LLT<RMatrix> llt(it.s[static_cast<size_t>(k)]);
      if (llt.info() != Eigen::Success) throw SolverError("slack lost positive definiteness");
      s_inv[static_cast<size_t>(k)] = symmetrize(llt.solve(RMatrix::Identity(b.dim(), b.dim())));
      const RMatrix& si = s_inv[static_cast<size_t>(k)];
      const RMatrix& xd = it.xd[static_cast<size_t>(k)];
      const bool any_dense =
          std::any_of(b.terms.begin(), b.terms.end(), [](const Term& t) { return !t.use_sparse; });
      for (const auto& tj : b.terms) {
        RMatrix prod;
        if (!tj.use_sparse) {
          prod = si * tj.dense * xd;
        } else if (any_dense) {
          prod = RMatrix::Zero(b.dim(), b.dim());
          for (size_t q = 0; q < tj.sparse.nnz(); ++q)
            prod.noalias() += tj.sparse.val[q] * si.col(tj.sparse.row[q]) * xd.row(tj.sparse.col[q]);
        }
        for (const auto& ti : b.terms)
          h(ti.var, tj.var) += ti.use_sparse && tj.use_sparse ? sparse_pair_trace(ti.sparse, tj.sparse, si, xd)
                                                              : trace_product(ti, prod);
      }
    }
    if (m) h.noalias() += st.lp_a.transpose() * (it.lz.cwiseQuotient(it.ls)).asDiagonal() * st.lp_a;
    h = symmetrize(h);
    Eigen::LLT<RMatrix> h_llt(h);
    if (h_llt.info() != Eigen::Success) {
      double reg = 1e-12 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
      h.diagonal().array() += reg;
      h_llt.compute(h);
      if (h_llt.info() != Eigen::Success) throw SolverError("Schur complement matrix is singular");
    }

    // Solves for a direction given the complementarity target: per block
    // C_k (symmetric) and LP c.
    auto direction = [&](const std::vector<RMatrix>& target, const RVector& lp_target) {
      Direction d;
      RVector rhs = -st.f;
      std::vector<RMatrix> e(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto& b = st.blocks[static_cast<size_t>(k)];
        e[static_cast<size_t>(k)] = target[static_cast<size_t>(k)] -
                                    symmetrize(s_inv[static_cast<size_t>(k)] * rp[static_cast<size_t>(k)] * it.xd[static_cast<size_t>(k)]);
        for (const auto& t : b.terms) rhs(t.var) += trace_product(t, e[static_cast<size_t>(k)]);
      }
      if (m) rhs += st.lp_a.transpose() * (lp_target - lrp.cwiseProduct(it.lz).cwiseQuotient(it.ls));
      d.dx = h_llt.solve(rhs);
      for (int k = 0; k < nb; ++k) {
        const auto& b = st.blocks[static_cast<size_t>(k)];
        RMatrix ds = rp[static_cast<size_t>(k)];
        for (const auto& t : b.terms) add_scaled(ds, t, d.dx(t.var));
        ds = symmetrize(ds);
        RMatrix dxd = target[static_cast<size_t>(k)] - it.xd[static_cast<size_t>(k)] -
                      symmetrize(s_inv[static_cast<size_t>(k)] * ds * it.xd[static_cast<size_t>(k)]);
        d.ds.push_back(std::move(ds));
        d.dxd.push_back(symmetrize(dxd));
      }
      if (m) {
        d.dls = st.lp_a * d.dx + lrp;
        d.dlz = lp_target - it.lz - it.lz.cwiseProduct(d.dls).cwiseQuotient(it.ls);
      } else {
        d.dls.resize(0);
        d.dlz.resize(0);
      }
      return d;
    };

    auto step_lengths = [&](const Direction& d) {
      double ap = kInf, ad = kInf;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(it.s[static_cast<size_t>(k)], d.ds[static_cast<size_t>(k)]));
        ad = std::min(ad, max_step(it.xd[static_cast<size_t>(k)], d.dxd[static_cast<size_t>(k)]));
      }
      if (m) {
        ap = std::min(ap, max_step(it.ls, d.dls));
        ad = std::min(ad, max_step(it.lz, d.dlz));
      }
      return std::pair{ap, ad};
    };

    // Predictor.
    std::vector<RMatrix> zero_target(static_cast<size_t>(nb));
    for (int k = 0; k < nb; ++k) zero_target[static_cast<size_t>(k)] = RMatrix::Zero(st.blocks[static_cast<size_t>(k)].dim(), st.blocks[static_cast<size_t>(k)].dim());
    Direction aff = direction(zero_target, RVector::Zero(m));
    auto [ap_aff, ad_aff] = step_lengths(aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double gap_aff = 0.0;
    for (int k = 0; k < nb; ++k)
      gap_aff += (it.s[static_cast<size_t>(k)] + ap_aff * aff.ds[static_cast<size_t>(k)])
                     .cwiseProduct(it.xd[static_cast<size_t>(k)] + ad_aff * aff.dxd[static_cast<size_t>(k)])
                     .sum();
    if (m) gap_aff += (it.ls + ap_aff * aff.dls).dot(it.lz + ad_aff * aff.dlz);
    double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

    // Corrector with the second-order term.
    std::vector<RMatrix> target(static_cast<size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const RMatrix& si = s_inv[static_cast<size_t>(k)];
      target[static_cast<size_t>(k)] =
          symmetrize(sigma * mu * si - aff.dxd[static_cast<size_t>(k)] * aff.ds[static_cast<size_t>(k)] * si);
    }
    RVector lp_target(m);
    if (m) lp_target = (RVector::Constant(m, sigma * mu) - aff.dlz.cwiseProduct(aff.dls)).cwiseQuotient(it.ls);
    Direction dir = direction(target, lp_target);
    auto [ap, ad] = step_lengths(dir);
    ap = std::min(1.0, kStepFraction * ap);
    ad = std::min(1.0, kStepFraction * ad);

    it.x += ap * dir.dx;
    for (int k = 0; k < nb; ++k) {
      it.s[static_cast<size_t>(k)] = symmetrize(it.s[static_cast<size_t>(k)] + ap * dir.ds[static_cast<size_t>(k)]);
      it.xd[static_cast<size_t>(k)] = symmetrize(it.xd[static_cast<size_t>(k)] + ad * dir.dxd[static_cast<size_t>(k)]);
    }
    if (m) {
      it.ls += ap * dir.dls;
      it.lz += ad * dir.dlz;
    }
  }

  sol.iterations = iter;
  sol.x = it.x.cwiseQuotient(st.var_scale);
  sol.objective_value = problem.objective.dot(sol.x);
  sol.max_violation = constraint_violation(problem, sol.x);
  return sol;
}

}  // namespace micsel::sdp
