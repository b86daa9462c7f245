#pragma once
// Physical observables extracted from the correlation matrix G: local
// magnetization, bond currents, two-site reduced density matrices through
// the Jordan-Wigner dictionary, and two-qubit concurrences.

#include "replichain/model.hpp"

namespace replichain {

// Values below this are reported as exactly zero (entanglement measures are
// max{0, ...} expressions evaluated in finite precision).
inline constexpr double kConcurrenceFloor = 1e-12;

double magnetization(const Mat& G, int site);

// Particle current on the intra-chain bond (site, site+1), positive for
// flow from site to site+1. It obeys d m_n/dt = j_{n-1} - j_n exactly.
double bond_current(const Mat& G, int site, double K);

// Gauge transform undoing the sign convention of chain 2: Gt = S G S with
// S = diag(I_N, -I_N). Spin correlators are evaluated on Gt.
Mat gauge_fixed(const Mat& G);

// <sigma^+_a sigma^-_b> fermionic string expectation by the determinant
// route on the gauge-fixed matrix, a < b. The physical spin value is the
// complex conjugate of this (the evolved G is the transpose of <c^dag c>).
Cplx string_determinant(const Mat& Gt, int a, int b);

// Same correlator through a sum of four Pfaffians of Majorana covariance
// matrices; used to cross-check the determinant route.
Cplx string_pfaffian(const Mat& Gt, int a, int b);

// Pfaffian of an even-dimensional antisymmetric matrix (skew elimination
// with row/column pivoting); consumes its argument.
Cplx pfaffian(Mat A);

// <sigma^z_a sigma^z_b> by Wick's theorem.
double zz_correlator(const Mat& G, int a, int b);

// Two-site reduced density matrix of sites (a, b), a < b, in the basis
// (uu, ud, du, dd). Valid for particle-number-conserving G (no anomalous
// correlations), which holds for every state reachable in this model.
Eigen::Matrix4cd two_site_rdm(const Mat& G, int a, int b);

// Wootters concurrence of an arbitrary two-qubit state.
double concurrence(const Eigen::Matrix4cd& rho);

// Closed form for X-shaped states (only diagonal and antidiagonal nonzero).
double concurrence_x_state(const Eigen::Matrix4cd& rho);

// Concurrence between mirror pair p (one spin per chain).
double cross_concurrence(const Mat& G, int N, int p);

// Concurrence between in-chain neighbors at distances (p, p+1).
double longitudinal_concurrence(const Mat& G, int N, int p, int chain = 0);

// Distance-indexed profiles on chain 1 (chain 2 is its mirror image).
VecR magnetization_profile(const Mat& G, int N);          // p = 0..N-1
VecR current_profile(const Mat& G, int N, double K);      // bond b = 0..N-2
VecR cross_concurrence_profile(const Mat& G, int N);      // p = 0..N-1
VecR longitudinal_concurrence_profile(const Mat& G, int N); // p = 0..N-2

} // namespace replichain
