#include "brute_force.hpp"

#include <cmath>

namespace replichain::oracle {

Mat kron(const Mat& A, const Mat& B) {
  Mat out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

Mat op_at(const Eigen::Matrix2cd& op, int site, int nq) {
  Mat out = Mat::Identity(1, 1);
  for (int q = 0; q < nq; ++q)
    out = kron(out, q == site ? Mat(op) : Mat(Mat::Identity(2, 2)));
  return out;
}

Eigen::Matrix2cd sx() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
Eigen::Matrix2cd sy() {
  Eigen::Matrix2cd m;
  m << 0, Cplx(0, -1), Cplx(0, 1), 0;
  return m;
}
Eigen::Matrix2cd sz() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}
Eigen::Matrix2cd sp() {
  Eigen::Matrix2cd m;
  m << 0, 1, 0, 0;
  return m;
}
Eigen::Matrix2cd sm() { return sp().adjoint(); }

Mat spin_hamiltonian(const SystemSpec& spec) {
  const int N = spec.N;
  const int nq = 2 * N;
  const Eigen::Index dim = Eigen::Index(1) << nq;
  Mat H = Mat::Zero(dim, dim);
  std::vector<std::pair<int, int>> bonds;
  for (int i = 0; i + 1 < N; ++i) bonds.emplace_back(i, i + 1);
  for (int i = N; i + 1 < 2 * N; ++i) bonds.emplace_back(i, i + 1);
  for (auto [a, b] : bonds)
    H += -spec.K / 2.0 *
         (op_at(sx(), a, nq) * op_at(sx(), b, nq) +
          op_at(sy(), a, nq) * op_at(sy(), b, nq));
  for (int n = 0; n < nq; ++n) H += (spec.field_h / 2.0) * op_at(sz(), n, nq);
  return H;
}

std::vector<Mat> spin_jumps(const SystemSpec& spec) {
  const int N = spec.N;
  const int nq = 2 * N;
  const int L = N - 1, R = N;
  const Eigen::Index dim = Eigen::Index(1) << nq;
  Mat string = Mat::Identity(dim, dim);
  for (int q = 0; q <= N - 2; ++q) string = string * op_at(sz(), q, nq);
  const Mat ZL = op_at(sz(), L, nq);
  const double amp = spec.gamma / std::sqrt(2.0);
  const Mat Lp = amp * string * (op_at(sp(), L, nq) + ZL * op_at(sp(), R, nq));
  const Mat Lm = amp * string * (op_at(sm(), L, nq) - ZL * op_at(sm(), R, nq));
  return {Lp, Lm};
}

Mat spin_initial(const VecR& mu_per_site) {
  Mat rho = Mat::Identity(1, 1);
  for (Eigen::Index k = 0; k < mu_per_site.size(); ++k) {
    Mat site(2, 2);
    site << (1 + mu_per_site[k]) / 2, 0, 0, (1 - mu_per_site[k]) / 2;
    rho = kron(rho, site);
  }
  return rho;
}

namespace {

struct JumpTerms {
  Mat X;
  Mat Xd;
  Mat XdX;
};

Mat lindblad_rhs(const Mat& H, const std::vector<JumpTerms>& jumps, const Mat& rho) {
  Mat out = Cplx(0, -1) * (H * rho - rho * H);
  for (const JumpTerms& j : jumps)
    out += j.X * rho * j.Xd - 0.5 * (j.XdX * rho + rho * j.XdX);
  return out;
}

} // namespace

void evolve_lindblad(const Mat& H, const std::vector<Mat>& jumps, Mat& rho,
                     double t, double dt) {
  std::vector<JumpTerms> terms;
  terms.reserve(jumps.size());
  for (const Mat& X : jumps) terms.push_back({X, X.adjoint(), X.adjoint() * X});
  const long steps = std::lround(t / dt);
  for (long s = 0; s < steps; ++s) {
    const Mat k1 = lindblad_rhs(H, terms, rho);
    const Mat k2 = lindblad_rhs(H, terms, rho + 0.5 * dt * k1);
    const Mat k3 = lindblad_rhs(H, terms, rho + 0.5 * dt * k2);
    const Mat k4 = lindblad_rhs(H, terms, rho + dt * k3);
    rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

double spin_magnetization(const Mat& rho, int site, int nq) {
  return (rho * op_at(sz(), site, nq)).trace().real();
}

double spin_bond_current(const Mat& rho, int site, double K, int nq) {
  const Mat op = K * (op_at(sy(), site, nq) * op_at(sx(), site + 1, nq) -
                      op_at(sx(), site, nq) * op_at(sy(), site + 1, nq));
  return (rho * op).trace().real();
}

Eigen::Matrix4cd spin_pair_rdm(const Mat& rho, int a, int b, int nq) {
  // Site q occupies bit (nq - 1 - q) of the basis index; bit 0 means up.
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  const int bit_a = nq - 1 - a, bit_b = nq - 1 - b;
  const long rest = 1L << (nq - 2);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Cplx tot = 0;
      for (long r = 0; r < rest; ++r) {
        // distribute the rest bits around positions bit_a and bit_b
        long base = 0;
        int src = 0;
        for (int q = nq - 1; q >= 0; --q) {
          if (q == bit_a || q == bit_b) continue;
          base |= ((r >> src) & 1L) << q;
          ++src;
        }
        const long row = base | (long(i / 2) << bit_a) | (long(i % 2) << bit_b);
        const long col = base | (long(j / 2) << bit_a) | (long(j % 2) << bit_b);
        tot += rho(row, col);
      }
      out(i, j) = tot;
    }
  }
  return out;
}

} // namespace replichain::oracle
