#include "replichain/model.hpp"

namespace replichain {

MatR hopping_matrix(const SystemSpec& spec) {
  spec.check();
  const int N = spec.N;
  MatR T = MatR::Zero(2 * N, 2 * N);
  for (int c = 0; c < 2; ++c) {
    const int o = c * N;
    for (int i = 0; i < N - 1; ++i) {
      T(o + i, o + i + 1) = -spec.K;
      T(o + i + 1, o + i) = -spec.K;
    }
  }
  T.diagonal().array() += spec.field_h;
  return T;
}

MatR contact_ports(int N) {
  MatR Th = MatR::Zero(2 * N, 2);
  Th(contact_site_1(N), 0) = -1.0;
  Th(contact_site_2(N), 1) = -1.0;
  return Th;
}

Eigen::Matrix2d bath_correlations() {
  return Eigen::Matrix2d::Constant(0.5);
}

Mat initial_correlations(const VecR& mu_per_site) {
  for (Eigen::Index i = 0; i < mu_per_site.size(); ++i)
    if (std::abs(mu_per_site[i]) > 1.0 + 1e-12)
      throw std::invalid_argument("site magnetization outside [-1, 1]");
  Mat G = Mat::Zero(mu_per_site.size(), mu_per_site.size());
  G.diagonal() = ((mu_per_site.array() + 1.0) / 2.0).cast<Cplx>();
  return G;
}

VecR uniform_profile(int N, double mu) {
  return VecR::Constant(2 * N, mu);
}

DriftMatrices drift_matrices(const SystemSpec& spec) {
  spec.check();
  const double g2 = spec.gamma * spec.gamma;
  const MatR T = hopping_matrix(spec);
  const MatR Th = contact_ports(spec.N);
  DriftMatrices d;
  d.W = Cplx(0, -1) * T.cast<Cplx>();
  d.W -= (0.5 * g2) * (Th * Th.transpose()).cast<Cplx>();
  d.Q = (g2 * (Th * bath_correlations() * Th.transpose())).cast<Cplx>();
  return d;
}

Mat master_rhs(const SystemSpec& spec, const Mat& G) {
  const DriftMatrices d = drift_matrices(spec);
  return d.W * G + G * d.W.adjoint() + d.Q;
}

} // namespace replichain
