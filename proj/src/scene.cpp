#include "micsel/scene.hpp"

#include <cmath>
#include <random>

#include "micsel/linalg.hpp"

namespace micsel {

namespace {

double mean_squared_magnitude(const CVector& v) { return v.squaredNorm() / double(v.size()); }

void require_finite(const Point2& p, const char* what) {
  if (!p.allFinite()) throw std::invalid_argument(std::string(what) + " position is not finite");
}

// Squared-magnitude ratio of received target power to self-noise power.
double noise_floor_for(const CVector& a, double target_psd, double snr_db) {
  return mean_squared_magnitude(a) * target_psd * std::pow(10.0, -snr_db / 10.0);
}

CVector circular_gaussian(std::mt19937_64& rng, int n, double variance) {
  if (variance <= 0.0) return CVector::Zero(n);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CVector v(n);
  for (int i = 0; i < n; ++i) {
    double re = normal(rng);
    double im = normal(rng);
    v(i) = cplx(re, im);
  }
  return v;
}

}  // namespace

double Scene::device_cost_of(int i) const {
  return device_cost.empty() ? 0.0 : device_cost[static_cast<size_t>(i)];
}

void Scene::validate() const {
  if (mics.empty()) throw std::invalid_argument("scene has no microphones");
  for (const auto& m : mics) require_finite(m, "microphone");
  require_finite(target, "target");
  require_finite(fc, "fusion center");
  for (const auto& q : interferers) require_finite(q, "interferer");
  if (!(target_psd > 0.0)) throw std::invalid_argument("target PSD must be positive");
  if (interferer_psds.size() != interferers.size())
    throw std::invalid_argument("interferer PSD count does not match interferer count");
  for (double p : interferer_psds)
    if (!(p >= 0.0)) throw std::invalid_argument("interferer PSD must be nonnegative");
  if (!(speed_of_sound > 0.0)) throw std::invalid_argument("speed of sound must be positive");
  if (!std::isfinite(self_noise_snr_db))
    throw std::invalid_argument("self-noise SNR must be finite");
  if (!device_cost.empty()) {
    if (device_cost.size() != mics.size())
      throw std::invalid_argument("device cost count does not match microphone count");
    for (double c : device_cost)
      if (!(c >= 0.0)) throw std::invalid_argument("device cost must be nonnegative");
  }
  auto check_source = [&](const Point2& s) {
    for (const auto& m : mics)
      if ((m - s).norm() <= kMinSourceDistance)
        throw std::invalid_argument("source coincides with microphone");
  };
  check_source(target);
  for (const auto& q : interferers) check_source(q);
}

std::vector<Point2> grid_positions(int nx, int ny, double width, double height) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid needs at least one node per axis");
  std::vector<Point2> out;
  out.reserve(static_cast<size_t>(nx * ny));
  double dx = nx > 1 ? width / (nx - 1) : 0.0;
  double dy = ny > 1 ? height / (ny - 1) : 0.0;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) out.emplace_back(ix * dx, iy * dy);
  return out;
}

void set_interferer_sir(Scene& scene, double sir_db) {
  // Amplitudes are 1/d, so the ratio is frequency independent.
  const double omega = 1.0;
  double target_power = mean_squared_magnitude(steering_vector(scene, scene.target, omega));
  scene.interferer_psds.clear();
  for (const auto& q : scene.interferers) {
    double received = mean_squared_magnitude(steering_vector(scene, q, omega));
    scene.interferer_psds.push_back(scene.target_psd * target_power / received *
                                    std::pow(10.0, -sir_db / 10.0));
  }
}

Scene paper_like_scene(bool full_size) {
  Scene s;
  int n = full_size ? 13 : 7;
  s.mics = grid_positions(n, n, 12.0, 12.0);
  s.target = {2.4, 9.6};
  s.interferers = {{2.4, 2.4}, {9.6, 9.6}};
  s.fc = {9.0, 3.0};
  s.target_psd = 1.0;
  s.self_noise_snr_db = 50.0;
  set_interferer_sir(s, 0.0);
  return s;
}

SpectralModel model_from_covariance(const CVector& a, const CMatrix& r_nn, double target_psd,
                                    double omega) {
  if (r_nn.rows() != a.size() || r_nn.cols() != a.size())
    throw std::invalid_argument("covariance size does not match steering vector");
  SpectralModel m;
  m.omega = omega;
  m.target_psd = target_psd;
  m.a = a;
  m.r_nn = linalg::hermitian_part(r_nn);
  m.r_xx = target_psd * a * a.adjoint();
  m.r_yy = m.r_xx + m.r_nn;
  return m;
}

SpectralModel restrict_model(const SpectralModel& model, const IndexSet& idx) {
  SpectralModel m;
  m.omega = model.omega;
  m.target_psd = model.target_psd;
  m.a = model.a(idx);
  for (const auto& b : model.interferer_steering) m.interferer_steering.push_back(b(idx));
  m.interferer_psds = model.interferer_psds;
  m.noise_floor = model.noise_floor;
  m.r_nn = model.r_nn(idx, idx);
  m.r_xx = model.r_xx(idx, idx);
  m.r_yy = model.r_yy(idx, idx);
  return m;
}

double CostVector::total(const IndexSet& idx) const {
  double sum = 0.0;
  for (int i : idx) sum += values(i);
  return sum;
}

CostVector CostVector::restricted(const IndexSet& idx) const { return {values(idx)}; }

CVector steering_vector(const Scene& scene, const Point2& source, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  const int m = scene.size();
  CVector a(m);
  for (int k = 0; k < m; ++k) {
    double d = (scene.mics[static_cast<size_t>(k)] - source).norm();
    if (d < kMinSourceDistance) throw std::invalid_argument("source coincides with microphone");
    a(k) = std::polar(1.0 / d, -omega * d / scene.speed_of_sound);
  }
  return a;
}

SpectralModel build_spectral_model(const Scene& scene, double omega) {
  scene.validate();
  SpectralModel m;
  m.omega = omega;
  m.target_psd = scene.target_psd;
  m.a = steering_vector(scene, scene.target, omega);
  const int n = scene.size();
  m.noise_floor = noise_floor_for(m.a, scene.target_psd, scene.self_noise_snr_db);
  m.r_nn = m.noise_floor * CMatrix::Identity(n, n);
  for (size_t q = 0; q < scene.interferers.size(); ++q) {
    CVector b = steering_vector(scene, scene.interferers[q], omega);
    m.r_nn += scene.interferer_psds[q] * b * b.adjoint();
    m.interferer_steering.push_back(std::move(b));
    m.interferer_psds.push_back(scene.interferer_psds[q]);
  }
  m.r_nn = linalg::hermitian_part(m.r_nn);
  m.r_xx = scene.target_psd * m.a * m.a.adjoint();
  m.r_yy = m.r_xx + m.r_nn;
  return m;
}

CostVector transmission_costs(const Scene& scene) {
  const int m = scene.size();
  RVector raw(m);
  for (int i = 0; i < m; ++i)
    raw(i) = (scene.mics[static_cast<size_t>(i)] - scene.fc).squaredNorm() + scene.device_cost_of(i);
  double total = raw.sum();
  if (!(total > 0.0))
    throw std::invalid_argument("all transmission costs are zero; cannot normalize");
  return {raw / total};
}

CMatrix estimate_sample_covariance(std::span<const CVector> snapshots) {
  if (snapshots.empty()) throw std::invalid_argument("no snapshots");
  const auto m = snapshots.front().size();
  CMatrix r = CMatrix::Zero(m, m);
  for (const auto& y : snapshots) {
    if (y.size() != m) throw std::invalid_argument("snapshot length mismatch");
    r.selfadjointView<Eigen::Lower>().rankUpdate(y);
  }
  r = r.selfadjointView<Eigen::Lower>();
  return r / double(snapshots.size());
}

std::vector<CVector> generate_snapshots(const SpectralModel& model, int count,
                                        std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("snapshot count must be at least 1");
  const int m = model.size();
  std::mt19937_64 rng(seed);
  const bool structured = model.noise_floor > 0.0 &&
                          model.interferer_steering.size() == model.interferer_psds.size();
  Eigen::LLT<CMatrix> noise_factor;
  if (!structured) {
    noise_factor.compute(model.r_nn);
    if (noise_factor.info() != Eigen::Success)
      throw std::invalid_argument("noise covariance is not positive definite");
  }
  std::vector<CVector> out;
  out.reserve(static_cast<size_t>(count));
  for (int l = 0; l < count; ++l) {
    CVector y = model.a * circular_gaussian(rng, 1, model.target_psd)(0);
    if (structured) {
      for (size_t q = 0; q < model.interferer_steering.size(); ++q)
        y += model.interferer_steering[q] * circular_gaussian(rng, 1, model.interferer_psds[q])(0);
      y += circular_gaussian(rng, m, model.noise_floor);
    } else {
      y += noise_factor.matrixL() * circular_gaussian(rng, m, 1.0);
    }
    out.push_back(std::move(y));
  }
  return out;
}

SpectralModel estimate_model(const SpectralModel& model, int count, std::uint64_t seed) {
  SpectralModel noise_only = model;
  noise_only.target_psd = 0.0;
  auto noise = generate_snapshots(noise_only, count, seed);
  auto noisy = generate_snapshots(model, count, seed ^ 0x9e3779b97f4a7c15ULL);
  SpectralModel est = model;
  est.r_nn = estimate_sample_covariance(noise);
  est.r_yy = estimate_sample_covariance(noisy);
  est.r_xx = linalg::psd_projection(est.r_yy - est.r_nn);
  return est;
}

}  // namespace micsel
