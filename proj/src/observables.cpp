#include "replichain/observables.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace replichain {

double magnetization(const Mat& G, int site) {
  return 2.0 * G(site, site).real() - 1.0;
}

double bond_current(const Mat& G, int site, double K) {
  return (2.0 * K * Cplx(0, 1) * (G(site, site + 1) - G(site + 1, site))).real();
}

Mat gauge_fixed(const Mat& G) {
  const int n = static_cast<int>(G.rows());
  const int N = n / 2;
  Mat Gt = G;
  Gt.topRightCorner(N, N) *= -1.0;
  Gt.bottomLeftCorner(N, N) *= -1.0;
  return Gt;
}

Cplx string_determinant(const Mat& Gt, int a, int b) {
  const int L = b - a - 1;
  Mat M(L + 1, L + 1);
  for (int k = 0; k < L; ++k) M(0, k) = 2.0 * Gt(a, a + 1 + k);
  M(0, L) = Gt(a, b);
  for (int r = 0; r < L; ++r) {
    for (int k = 0; k < L; ++k)
      M(r + 1, k) = 2.0 * Gt(a + 1 + r, a + 1 + k) - (r == k ? 1.0 : 0.0);
    M(r + 1, L) = Gt(a + 1 + r, b);
  }
  if (L == 0) return M(0, 0);
  return Eigen::PartialPivLU<Mat>(M).determinant();
}

Cplx pfaffian(Mat A) {
  const int n = static_cast<int>(A.rows());
  if (n % 2 == 1) return 0.0;
  Cplx pf = 1.0;
  for (int k = 0; k + 1 < n; k += 2) {
    // pivot: largest entry in column k below the diagonal
    int kp = k + 1;
    double best = std::abs(A(k + 1, k));
    for (int r = k + 2; r < n; ++r)
      if (std::abs(A(r, k)) > best) { best = std::abs(A(r, k)); kp = r; }
    if (kp != k + 1) {
      A.row(k + 1).swap(A.row(kp));
      A.col(k + 1).swap(A.col(kp));
      pf = -pf;
    }
    const Cplx piv = A(k, k + 1);
    if (piv == 0.0) return 0.0;
    pf *= piv;
    if (k + 2 < n) {
      const int m = n - (k + 2);
      Vec tau = A.row(k).segment(k + 2, m).transpose() / piv;
      Vec col = A.col(k + 1).segment(k + 2, m);
      A.bottomRightCorner(m, m) += tau * col.transpose() - col * tau.transpose();
    }
  }
  return pf;
}

Cplx string_pfaffian(const Mat& Gt, int a, int b) {
  // Expand the string into Majorana pairs A_j = c_j + c^dag_j,
  // B_j = c_j - c^dag_j on the interior sites; the end operators enter in
  // both Majorana flavors, giving four Pfaffians.
  const int L = b - a - 1;
  const int m = 2 * L + 2;
  std::vector<int> sites(m);
  std::vector<char> kinds(m);
  sites[0] = a;
  for (int j = 0; j < L; ++j) {
    sites[1 + 2 * j] = a + 1 + j;
    sites[2 + 2 * j] = a + 1 + j;
    kinds[1 + 2 * j] = 'A';
    kinds[2 + 2 * j] = 'B';
  }
  sites[m - 1] = b;
  auto cov = [&](char ku, int u, char kv, int v) -> Cplx {
    const double d = (u == v) ? 1.0 : 0.0;
    if (ku == 'A' && kv == 'A') return Gt(u, v) - Gt(v, u);
    if (ku == 'A' && kv == 'B') return -Gt(u, v) - Gt(v, u) + d;
    if (ku == 'B' && kv == 'A') return Gt(u, v) + Gt(v, u) - d;
    return Gt(v, u) - Gt(u, v);
  };
  Cplx total = 0.0;
  for (char X : {'A', 'B'}) {
    for (char Y : {'A', 'B'}) {
      kinds[0] = X;
      kinds[m - 1] = Y;
      Mat M = Mat::Zero(m, m);
      for (int u = 0; u < m; ++u)
        for (int v = u + 1; v < m; ++v) {
          M(u, v) = cov(kinds[u], sites[u], kinds[v], sites[v]);
          M(v, u) = -M(u, v);
        }
      const double sign = (Y == 'B') ? -1.0 : 1.0;
      total += sign * pfaffian(std::move(M));
    }
  }
  return total / 4.0;
}

double zz_correlator(const Mat& G, int a, int b) {
  const double na = G(a, a).real();
  const double nb = G(b, b).real();
  return 4.0 * (na * nb - std::norm(G(a, b))) - 2.0 * na - 2.0 * nb + 1.0;
}

Eigen::Matrix4cd two_site_rdm(const Mat& G, int a, int b) {
  const double ma = magnetization(G, a);
  const double mb = magnetization(G, b);
  const double z = zz_correlator(G, a, b);
  const Cplx w = std::conj(string_determinant(gauge_fixed(G), a, b));
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  rho(0, 0) = (1 + ma + mb + z) / 4.0;
  rho(1, 1) = (1 + ma - mb - z) / 4.0;
  rho(2, 2) = (1 - ma + mb - z) / 4.0;
  rho(3, 3) = (1 - ma - mb + z) / 4.0;
  rho(2, 1) = w;
  rho(1, 2) = std::conj(w);
  return rho;
}

double concurrence(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix4cd F = Eigen::Matrix4cd::Zero(); // sigma_y x sigma_y
  F(0, 3) = -1.0;
  F(1, 2) = 1.0;
  F(2, 1) = 1.0;
  F(3, 0) = -1.0;
  const Eigen::Matrix4cd R = rho * F * rho.conjugate() * F;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(R, false);
  std::array<double, 4> lam;
  for (int i = 0; i < 4; ++i)
    lam[i] = std::sqrt(std::max(0.0, es.eigenvalues()[i].real()));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  const double c = lam[0] - lam[1] - lam[2] - lam[3];
  return c > kConcurrenceFloor ? c : 0.0;
}

double concurrence_x_state(const Eigen::Matrix4cd& rho) {
  const double inner = std::abs(rho(2, 1)) -
                       std::sqrt(std::max(0.0, rho(0, 0).real() * rho(3, 3).real()));
  const double outer = std::abs(rho(3, 0)) -
                       std::sqrt(std::max(0.0, rho(1, 1).real() * rho(2, 2).real()));
  const double c = 2.0 * std::max(inner, outer);
  return c > kConcurrenceFloor ? c : 0.0;
}

// The pipeline conserves particle number, so every two-site state it
// produces is an X state with its only coherence on the inner block; the
// closed-form X-state concurrence is then exact and avoids the sqrt(eps)
// noise of the spectral route near pure Bell pairs.
double cross_concurrence(const Mat& G, int N, int p) {
  return concurrence_x_state(two_site_rdm(G, cross_site_1(N, p), cross_site_2(N, p)));
}

double longitudinal_concurrence(const Mat& G, int N, int p, int chain) {
  auto [a, b] = longitudinal_pair(N, p, chain);
  return concurrence_x_state(two_site_rdm(G, a, b));
}

VecR magnetization_profile(const Mat& G, int N) {
  VecR out(N);
  for (int p = 0; p < N; ++p) out[p] = magnetization(G, cross_site_1(N, p));
  return out;
}

VecR current_profile(const Mat& G, int N, double K) {
  VecR out(N - 1);
  for (int b = 0; b < N - 1; ++b) out[b] = bond_current(G, bond_left_site(N, b), K);
  return out;
}

VecR cross_concurrence_profile(const Mat& G, int N) {
  VecR out(N);
  for (int p = 0; p < N; ++p) out[p] = cross_concurrence(G, N, p);
  return out;
}

VecR longitudinal_concurrence_profile(const Mat& G, int N) {
  VecR out(N - 1);
  for (int p = 0; p < N - 1; ++p) out[p] = longitudinal_concurrence(G, N, p);
  return out;
}

} // namespace replichain
