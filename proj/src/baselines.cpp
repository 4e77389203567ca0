#include "micsel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "micsel/linalg.hpp"

namespace micsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Complex soft threshold: x scaled towards zero by t in magnitude.
cplx shrink(cplx x, double t) {
  double r = std::abs(x);
  return r > t ? x * (1.0 - t / r) : cplx(0.0);
}

struct AdmmState {
  CVector w;
  CVector z;
  int iterations = 0;
  double kkt = 0.0;
  bool converged = false;
};

// z rescaled onto a^H w = 1, keeping its support.
CVector feasible_on_support(const CVector& z, const CVector& a) {
  cplx s = a.dot(z);
  if (std::abs(s) == 0.0) return z;
  return z / s;
}

double weighted_kkt(const CMatrix& r, const CVector& a, const RVector& weight, const CVector& w) {
  const int m = static_cast<int>(a.size());
  CVector g = r * w;
  CVector h = g;
  cplx num = 0.0;
  double den = 0.0;
  for (int i = 0; i < m; ++i) {
    double mag = std::abs(w(i));
    if (mag == 0.0) continue;
    h(i) += 0.5 * weight(i) * w(i) / mag;
    num += std::conj(a(i)) * h(i);
    den += std::norm(a(i));
  }
  cplx eta = den > 0.0 ? num / den : cplx(0.0);
  double res2 = 0.0;
  for (int i = 0; i < m; ++i) {
    if (std::abs(w(i)) > 0.0)
      res2 += std::norm(h(i) - eta * a(i));
    else
      res2 += std::pow(std::max(0.0, std::abs(g(i) - eta * a(i)) - 0.5 * weight(i)), 2);
  }
  double scale = std::max(g.norm(), 1e-300);
  return std::sqrt(res2) / scale + std::abs(a.dot(w) - cplx(1.0));
}

// ADMM for min w^H R w + sum_i weight_i |w_i| s.t. a^H w = 1 with R and the
// weights already normalized, starting from z0. Stops once the KKT residual
// of z (rescaled onto the constraint) is below tol.
AdmmState admm(const CMatrix& r, const CVector& a, const RVector& weight, const CVector& z0,
               int max_iter, double tol) {
  const int m = static_cast<int>(a.size());
  double rho = 2.0 * r.diagonal().real().mean();
  AdmmState st;
  st.z = z0;
  CVector u = CVector::Zero(m);

  Eigen::LLT<CMatrix> llt;
  CVector k_inv_a;
  double a_k_inv_a = 0.0;
  auto factor = [&]() {
    CMatrix k = r;
    k.diagonal().array() += 0.5 * rho;
    llt.compute(k);
    if (llt.info() != Eigen::Success) throw SolverError("ADMM system is not positive definite");
    k_inv_a = llt.solve(a);
    a_k_inv_a = a.dot(k_inv_a).real();
  };
  factor();

  for (int it = 1; it <= max_iter; ++it) {
    CVector x0 = llt.solve(0.5 * rho * (st.z - u));
    cplx eta = (cplx(1.0) - a.dot(x0)) / a_k_inv_a;
    st.w = x0 + eta * k_inv_a;

    CVector z_old = st.z;
    CVector v = st.w + u;
    for (int i = 0; i < m; ++i) st.z(i) = shrink(v(i), weight(i) / rho);
    u += st.w - st.z;
    st.iterations = it;

    if (it % 10 == 0) {
      st.kkt = weighted_kkt(r, a, weight, feasible_on_support(st.z, a));
      if (st.kkt <= tol) {
        st.converged = true;
        break;
      }
    }
    // Residual balancing.
    if (it % 50 == 0) {
      double primal = (st.w - st.z).norm();
      double dual = rho * (st.z - z_old).norm();
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u *= 0.5;
        factor();
      } else if (dual > 10.0 * primal) {
        rho *= 0.5;
        u *= 2.0;
        factor();
      }
    }
  }
  return st;
}

CVector mvdr_full(const SpectralModel& model) {
  return mvdr_weights(model, SelectionVector::all(model.size())).w;
}

void check_sizes(const SpectralModel& model, const CostVector& costs) {
  if (costs.size() != model.size()) throw std::invalid_argument("cost vector size mismatch");
}

}  // namespace

double sparse_objective(const SpectralModel& model, const CostVector& costs, double mu,
                        const CVector& w) {
  check_sizes(model, costs);
  return w.dot(model.r_nn * w).real() + mu * costs.values.dot(w.cwiseAbs());
}

double sparse_kkt_residual(const SpectralModel& model, const CostVector& costs, double mu,
                           const CVector& w) {
  check_sizes(model, costs);
  return weighted_kkt(model.r_nn, model.a, mu * costs.values, w);
}

double sparse_mu_scale(const SpectralModel& model, const CostVector& costs) {
  check_sizes(model, costs);
  CVector w = mvdr_full(model);
  double penalty = costs.values.dot(w.cwiseAbs());
  double beta = w.dot(model.r_nn * w).real();
  if (!(penalty > 0.0)) throw std::invalid_argument("all transmission costs are zero");
  return beta / penalty;
}

SparseBeamformerResult sparse_mvdr(const SpectralModel& model, const CostVector& costs,
                                   const SparseBeamformerConfig& config) {
  check_sizes(model, costs);
  if (!(config.mu >= 0.0)) throw std::invalid_argument("mu must be non-negative");
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (config.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  const int m = model.size();

  SparseBeamformerResult res;
  CVector w_mvdr = mvdr_full(model);
  if (config.mu == 0.0) {
    res.w = w_mvdr;
    res.converged = true;
  } else {
    // Normalize so that the MVDR objective is 1.
    const double beta = w_mvdr.dot(model.r_nn * w_mvdr).real();
    const CMatrix r = model.r_nn / beta;
    const double mu = config.mu / beta;
    RVector weight = mu * costs.values;
    const int rounds = config.relaxation == SparseRelaxation::log_sum ? config.log_sum_rounds : 1;
    CVector z = w_mvdr;
    for (int round = 0; round < rounds; ++round) {
      if (round > 0) {
        double delta = 0.1 * z.cwiseAbs().maxCoeff();
        for (int i = 0; i < m; ++i) weight(i) = mu * costs[i] * delta / (std::abs(z(i)) + delta);
      }
      AdmmState st = admm(r, model.a, weight, z, config.max_iter, config.kkt_tol);
      res.iterations += st.iterations;
      z = feasible_on_support(st.z, model.a);
      res.kkt_residual = weighted_kkt(r, model.a, weight, z);
      res.converged = res.kkt_residual <= config.kkt_tol;
    }
    res.w = z;
  }
  if (config.mu == 0.0) res.kkt_residual = sparse_kkt_residual(model, costs, 0.0, res.w);

  IndexSet support;
  CVector thresholded = CVector::Zero(m);
  for (int i = 0; i < m; ++i)
    if (std::abs(res.w(i)) >= config.epsilon) {
      support.push_back(i);
      thresholded(i) = res.w(i);
    }
  if (support.empty()) throw SolverError("sparse beamformer selected no microphone");
  res.selection = SelectionVector::from_indices(m, support);
  res.cost = costs.total(support);
  res.thresholded_noise_power = thresholded.dot(model.r_nn * thresholded).real();
  res.noise_power = 1.0 / mvdr_precision(model, support);
  res.objective = sparse_objective(model, costs, config.mu, res.w);
  return res;
}

RadiusResult radius_select(const Scene& scene, const SpectralModel& model, const CostVector& costs,
                           double gamma) {
  check_sizes(model, costs);
  if (scene.size() != model.size()) throw std::invalid_argument("scene and model disagree");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  IndexSet idx;
  for (int i = 0; i < scene.size(); ++i)
    if ((scene.mics[static_cast<size_t>(i)] - scene.fc).norm() <= gamma) idx.push_back(i);
  if (idx.empty()) throw std::invalid_argument("no sensors within radius");
  RadiusResult res;
  res.selection = SelectionVector::from_indices(model.size(), idx);
  res.cost = costs.total(idx);
  res.noise_power = 1.0 / mvdr_precision(model, idx);
  return res;
}

UtilityResult utility_greedy(const Scene& scene, const SpectralModel& model,
                             const CostVector& costs, double c_t, const Point2& z0, double r0) {
  check_sizes(model, costs);
  if (scene.size() != model.size()) throw std::invalid_argument("scene and model disagree");
  if (!(c_t > 0.0)) throw std::invalid_argument("cost budget must be positive");

  IndexSet s1 = initial_candidates(scene, z0, r0);
  IncrementalMvdr inc(model);
  UtilityResult res;
  double cost = 0.0;
  int iteration = 0;
  while (cost < c_t) {
    const double k = inc.size();
    int best = -1;
    double best_utility = -1.0;
    double best_gain = -1.0;
    int outside = 0;
    for (int j : s1) {
      if (inc.contains(j)) continue;
      ++outside;
      double prec = inc.precision_with(j);
      // Noise power reduction; from the empty set, the single-sensor
      // precision ranks candidates the same way.
      double gain = inc.size() == 0 ? prec : 1.0 / inc.precision() - 1.0 / prec;
      double utility = costs[j] > 0.0 ? gain / costs[j] : (gain > 0.0 ? kInf : 0.0);
      if (utility > best_utility || (utility == best_utility && gain > best_gain)) {
        best = j;
        best_utility = utility;
        best_gain = gain;
      }
    }
    if (best < 0) break;
    res.quadratic_proxy += k * k * outside;
    inc.add(best);
    cost += costs[best];
    IndexSet s2 = inc.members();
    std::sort(s2.begin(), s2.end());
    TraceRecord rec;
    rec.iteration = ++iteration;
    rec.phase = GreedyPhase::addition;
    rec.s1_size = static_cast<int>(s1.size());
    rec.s2_size = inc.size();
    rec.cost = cost;
    rec.noise_power = 1.0 / inc.precision();
    res.trace.records.push_back(rec);
    s1 = expand_candidates(scene, s2, r0);
  }

  IndexSet s2 = inc.members();
  std::sort(s2.begin(), s2.end());
  res.selection = SelectionVector::from_indices(model.size(), s2);
  res.cost = costs.total(s2);
  res.noise_power = 1.0 / mvdr_precision(model, s2);
  res.operation_count = inc.operation_count();
  return res;
}

}  // namespace micsel
