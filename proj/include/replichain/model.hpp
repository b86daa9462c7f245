#pragma once
// Two open XX chains of N sites each, coupled at one end to a stream of
// maximally entangled two-spin ancillas. Everything downstream works on the
// fermionic one-body correlation matrix G (2N x 2N, complex Hermitian):
// chain 1 occupies rows/cols 0..N-1 with its driven end at N-1, chain 2
// occupies N..2N-1 with its driven end at N. "Distance" p always counts
// sites away from the driven contact into a chain.

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

namespace replichain {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

struct SystemSpec {
  int N = 0;          // sites per chain
  double gamma = 0.0; // coupling to the ancilla stream
  double K = 0.5;     // intra-chain hopping (sound velocity 2K)
  double field_h = 0.0; // uniform longitudinal field; dynamics must not depend on it

  void check() const {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    if (K == 0.0) throw std::invalid_argument("K must be nonzero");
  }
  int sites() const { return 2 * N; }
};

// Index bookkeeping. Mirror pair p faces site p of chain 1 with site p of
// chain 2; longitudinal pair p is the in-chain bond-adjacent pair at
// distances (p, p+1) from the contact.
inline int contact_site_1(int N) { return N - 1; }
inline int contact_site_2(int N) { return N; }
inline int cross_site_1(int N, int p) { return N - 1 - p; }
inline int cross_site_2(int N, int p) { return N + p; }
inline std::pair<int, int> longitudinal_pair(int N, int p, int chain = 0) {
  if (chain == 0) return {N - 2 - p, N - 1 - p};
  return {N + p, N + p + 1};
}
// Bond b on chain `chain` joins the sites at distances b and b+1 from the
// contact; returns the smaller site index (left end of the bond).
inline int bond_left_site(int N, int b, int chain = 0) {
  if (chain == 0) return N - 2 - b;
  return N + b;
}

// One-body hopping matrix of the two decoupled chains (no bond across the
// middle), plus the uniform field on the diagonal.
MatR hopping_matrix(const SystemSpec& spec);

// 2N x 2 port matrix: column k injects/extracts at the contact site of
// chain k+1.
MatR contact_ports(int N);

// Ancilla pair correlation matrix: entangled pure pair, all entries 1/2.
Eigen::Matrix2d bath_correlations();

// Product initial state with site magnetizations mu (2N entries, each in
// [-1, 1]): G = diag((1 + mu)/2).
Mat initial_correlations(const VecR& mu_per_site);
VecR uniform_profile(int N, double mu);

// Drift form of the master equation: dG/dt = W G + G W^dag + Q.
struct DriftMatrices {
  Mat W;
  Mat Q;
};
DriftMatrices drift_matrices(const SystemSpec& spec);

// Full right-hand side -i[T,G] - (gamma^2/2){P,G} + Q, P = Theta Theta^T.
Mat master_rhs(const SystemSpec& spec, const Mat& G);

} // namespace replichain
