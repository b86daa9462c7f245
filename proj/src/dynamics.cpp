#include "replichain/dynamics.hpp"
#include "replichain/observables.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace replichain {

void enforce_spectrum(Mat& G, double tol, bool clip) {
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo >= 0.0 && hi <= 1.0) return;
  if (lo < -tol || hi > 1.0 + tol)
    throw NumericalError("correlation matrix spectrum left [0,1] by more than " +
                         std::to_string(std::max(-lo, hi - 1.0)));
  if (!clip) return;
  VecR ev = es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  G = es.eigenvectors() * ev.asDiagonal().toDenseMatrix().cast<Cplx>() *
      es.eigenvectors().adjoint();
}

void evolve_rk4(const SystemSpec& spec, Mat& G, double t0, double t1,
                const EvolveOptions& opt) {
  spec.check();
  if (t1 < t0) throw std::invalid_argument("evolve_rk4: t1 < t0");
  const DriftMatrices d = drift_matrices(spec);
  auto rhs = [&](const Mat& g) -> Mat { return d.W * g + g * d.W.adjoint() + d.Q; };
  const double dt0 = opt.dt > 0.0 ? opt.dt : default_dt(spec.gamma);
  double t = t0;
  while (t < t1 - 1e-15 * std::max(1.0, t1)) {
    const double dt = std::min(dt0, t1 - t);
    const Mat k1 = rhs(G);
    const Mat k2 = rhs(G + (0.5 * dt) * k1);
    const Mat k3 = rhs(G + (0.5 * dt) * k2);
    const Mat k4 = rhs(G + dt * k3);
    G += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    G = 0.5 * (G + G.adjoint()).eval();
    t += dt;
  }
  enforce_spectrum(G, opt.psd_tol, opt.clip_spectrum);
}

namespace {

// Eigendecomposition of the block-diagonal drift; fills lam, V, Vi.
void drift_eig(const SystemSpec& spec, Vec& lam, Mat& V, Mat& Vi, double& cond) {
  const int N = spec.N;
  const DriftMatrices d = drift_matrices(spec);
  lam.resize(2 * N);
  V = Mat::Zero(2 * N, 2 * N);
  Vi = Mat::Zero(2 * N, 2 * N);
  cond = 0.0;
  for (int c = 0; c < 2; ++c) {
    const int o = c * N;
    Eigen::ComplexEigenSolver<Mat> es(d.W.block(o, o, N, N));
    if (es.info() != Eigen::Success)
      throw NumericalError("drift eigendecomposition failed");
    lam.segment(o, N) = es.eigenvalues();
    V.block(o, o, N, N) = es.eigenvectors();
    Mat Viblk = es.eigenvectors().partialPivLu().inverse();
    Vi.block(o, o, N, N) = Viblk;
    const double c1 = es.eigenvectors().cwiseAbs().colwise().sum().maxCoeff();
    const double c2 = Viblk.cwiseAbs().colwise().sum().maxCoeff();
    cond = std::max(cond, c1 * c2);
  }
}

Mat lyapunov_from_eig(const SystemSpec& spec, const Vec& lam, const Mat& V,
                      const Mat& Vi) {
  // Q has rank one: Q = (gamma^2/2) u u^T with u = e_{c1} + e_{c2}.
  const int N = spec.N;
  const int n = 2 * N;
  Vec u = Vec::Zero(n);
  u[contact_site_1(N)] = 1.0;
  u[contact_site_2(N)] = 1.0;
  const Vec v = Vi * u;
  const double g2 = spec.gamma * spec.gamma;
  Mat Y(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Cplx den = lam[i] + std::conj(lam[j]);
      if (std::abs(den) < 1e-14)
        throw NumericalError("vanishing decay rate in steady-state solve");
      Y(i, j) = -(0.5 * g2) * v[i] * std::conj(v[j]) / den;
    }
  Mat X = V * Y * V.adjoint();
  return 0.5 * (X + X.adjoint()).eval();
}

} // namespace

ExactPropagator::ExactPropagator(const SystemSpec& spec) {
  spec.check();
  n_ = spec.sites();
  drift_eig(spec, lam_, V_, Vi_, cond_);
  gap_ = -lam_.real().maxCoeff();
  X_ = lyapunov_from_eig(spec, lam_, V_, Vi_);
  D0_ = Mat::Zero(n_, n_); // initial state = steady state until told otherwise
}

void ExactPropagator::set_initial(const Mat& G0) {
  D0_ = Vi_ * (G0 - X_) * Vi_.adjoint();
}

Mat ExactPropagator::at(double t) const {
  Mat E(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      E(i, j) = std::exp((lam_[i] + std::conj(lam_[j])) * t);
  Mat G = X_ + V_ * D0_.cwiseProduct(E) * V_.adjoint();
  return 0.5 * (G + G.adjoint()).eval();
}

Vec ExactPropagator::entry_series(int a, int b, const VecR& ts) const {
  // G_ab(t) = X_ab + (V_a o e^{lam t})^T D0 (conj(V_b) o e^{conj(lam) t}).
  const Eigen::Index T = ts.size();
  Vec out(T);
  for (Eigen::Index k = 0; k < T; ++k) {
    Vec e = (lam_.array() * ts[k]).exp();
    Vec left = V_.row(a).transpose().cwiseProduct(e);
    Vec right = V_.row(b).conjugate().transpose().cwiseProduct(e.conjugate());
    out[k] = X_(a, b) + (left.transpose() * (D0_ * right)).value();
  }
  return out;
}

Mat steady_state_mirror_form(int N) {
  const int n = 2 * N;
  Mat X = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i) X(i, n - 1 - i) += 1.0;
  return 0.5 * X;
}

Mat steady_state(const SystemSpec& spec) {
  spec.check();
  Vec lam;
  Mat V, Vi;
  double cond = 0.0;
  drift_eig(spec, lam, V, Vi, cond);
  if (cond <= 1e10) return lyapunov_from_eig(spec, lam, V, Vi);
  // Defective eigenbasis: integrate well past the slowest rate instead.
  const double gap = -lam.real().maxCoeff();
  if (!(gap > 0.0)) throw NumericalError("drift matrix is not dissipative");
  Mat G = initial_correlations(uniform_profile(spec.N, 0.0));
  evolve_rk4(spec, G, 0.0, 40.0 / gap);
  return G;
}

double spectral_gap(const SystemSpec& spec) {
  spec.check();
  const DriftMatrices d = drift_matrices(spec);
  const int N = spec.N;
  double maxre = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < 2; ++c) {
    Eigen::ComplexEigenSolver<Mat> es(d.W.block(c * N, c * N, N, N), false);
    maxre = std::max(maxre, es.eigenvalues().real().maxCoeff());
  }
  return -maxre;
}

namespace {

// One-collision rotation on system + ancilla pair. The fresh ancillas feel
// the same uniform field as the chains, which keeps the whole map exactly
// independent of field_h (the field only contributes a global phase).
Mat collision_unitary(const SystemSpec& spec, double tau) {
  const int n = spec.sites();
  const double g = spec.gamma / std::sqrt(tau);
  MatR Tf = MatR::Zero(n + 2, n + 2);
  Tf.topLeftCorner(n, n) = hopping_matrix(spec);
  const MatR Th = contact_ports(spec.N);
  Tf.topRightCorner(n, 2) = g * Th;
  Tf.bottomLeftCorner(2, n) = g * Th.transpose();
  Tf.bottomRightCorner(2, 2).diagonal().array() += spec.field_h;
  Eigen::SelfAdjointEigenSolver<MatR> es(Tf);
  return es.eigenvectors().cast<Cplx>() *
         (Cplx(0, -tau) * es.eigenvalues().cast<Cplx>().array()).exp().matrix().asDiagonal() *
         es.eigenvectors().transpose().cast<Cplx>();
}

void apply_collision(const Mat& U, Mat& G) {
  const int n = static_cast<int>(G.rows());
  Mat Gf = Mat::Zero(n + 2, n + 2);
  Gf.topLeftCorner(n, n) = G;
  Gf.bottomRightCorner(2, 2) = bath_correlations().cast<Cplx>();
  Gf = (U * Gf * U.adjoint()).eval();
  G = 0.5 * (Gf.topLeftCorner(n, n) + Gf.topLeftCorner(n, n).adjoint());
}

} // namespace

void collision_step(const SystemSpec& spec, Mat& G, double tau) {
  spec.check();
  if (tau <= 0.0) throw std::invalid_argument("collision duration must be > 0");
  apply_collision(collision_unitary(spec, tau), G);
}

void evolve_collisions(const SystemSpec& spec, Mat& G, double t, double tau) {
  spec.check();
  if (tau <= 0.0) throw std::invalid_argument("collision duration must be > 0");
  const int steps = static_cast<int>(std::llround(t / tau));
  const Mat U = collision_unitary(spec, tau);
  for (int s = 0; s < steps; ++s) apply_collision(U, G);
}

Eigen::Matrix2cd pair_correlations_closed_form(double gamma, double mu1,
                                               double mu4, double t) {
  const double e = std::exp(-gamma * gamma * t);
  Eigen::Matrix2cd G;
  G << (1 + mu1 * e) / 2.0, (1 - e) / 2.0,
       (1 - e) / 2.0, (1 + mu4 * e) / 2.0;
  return G;
}

double pair_concurrence_closed_form(double gamma, double mu1, double mu4,
                                    double t) {
  const double e = std::exp(-gamma * gamma * t);
  const double a = 2.0 * e + (mu1 * mu4 - 1.0) * e * e;
  const double rad = a * a - (mu1 + mu4) * (mu1 + mu4) * e * e;
  const double c = (1.0 - e) - 0.5 * std::sqrt(std::max(0.0, rad));
  return c > kConcurrenceFloor ? c : 0.0;
}

double delay_time_closed_form(double gamma, double mu) {
  return std::log(1.0 + std::sqrt((1.0 - mu * mu) / 2.0)) / (gamma * gamma);
}

double delay_time_measured(double gamma, double mu, double tol) {
  // Single pair, mu1 = -mu4 = mu, run through the actual propagator and
  // density-matrix pipeline; bracket the first positive concurrence.
  SystemSpec spec{.N = 1, .gamma = gamma};
  ExactPropagator prop(spec);
  VecR mu_init(2);
  mu_init << mu, -mu;
  prop.set_initial(initial_correlations(mu_init));
  auto conc_at = [&](double t) {
    return concurrence(two_site_rdm(prop.at(t), 0, 1));
  };
  double lo = 0.0, hi = 1.0 / (gamma * gamma);
  while (conc_at(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw NumericalError("no entanglement onset found");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (conc_at(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace replichain
