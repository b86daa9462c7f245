#pragma once
// Time evolution of the correlation matrix: fixed-step RK4 on the master
// equation, an exact spectral propagator built from one eigendecomposition
// of the drift matrix, the stroboscopic ancilla-collision map, steady-state
// solvers, and closed forms for the single-pair (N = 1) problem.

#include "replichain/model.hpp"

#include <functional>
#include <optional>

namespace replichain {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Step size keeping the dissipator (rate ~ gamma^2) resolved.
inline double default_dt(double gamma) { return std::min(0.05, 0.5 / (gamma * gamma)); }

struct EvolveOptions {
  double dt = 0.0;        // 0 selects default_dt(gamma)
  double psd_tol = 1e-9;  // allowed eigenvalue excursion outside [0, 1]
  bool clip_spectrum = true; // clip small excursions instead of failing
};

// Integrate G in place from t0 to t1 (final partial step lands on t1
// exactly). G is re-Hermitized after every step; the spectrum is checked
// against [0 - tol, 1 + tol] at the end of the call.
void evolve_rk4(const SystemSpec& spec, Mat& G, double t0, double t1,
                const EvolveOptions& opt = {});

// Checks the spectrum of a correlation matrix; clips into [0, 1] when
// allowed, throws NumericalError beyond tolerance.
void enforce_spectrum(Mat& G, double tol, bool clip);

// G(t) = X + V (D0 o E(t)) V^dag from the eigendecomposition W = V L V^-1,
// where X solves W X + X W^dag = -Q and E_kl(t) = exp((l_k + conj(l_l)) t).
// The drift is block diagonal per chain, so the two N x N blocks are
// diagonalized independently.
class ExactPropagator {
 public:
  explicit ExactPropagator(const SystemSpec& spec);

  const Mat& steady() const { return X_; }
  double condition_estimate() const { return cond_; }
  double spectral_gap() const { return gap_; }

  void set_initial(const Mat& G0);
  Mat at(double t) const;

  // Single matrix entry over a whole time grid in O(n^2) per sample.
  Vec entry_series(int a, int b, const VecR& ts) const;

 private:
  int n_ = 0;
  Vec lam_;
  Mat V_, Vi_, X_, D0_;
  double cond_ = 0.0, gap_ = 0.0;
};

// Unique steady state. Solved spectrally; if the eigenbasis is too ill
// conditioned (estimate > 1e10) falls back to long-time integration.
Mat steady_state(const SystemSpec& spec);

// The steady state in closed form: (I + M)/2 with M the mirror-pair
// exchange (antidiagonal) matrix.
Mat steady_state_mirror_form(int N);

// Smallest decay rate of the drift matrix, -max Re(eigenvalue).
double spectral_gap(const SystemSpec& spec);

// One collision of duration tau with a fresh ancilla pair attached at the
// contacts with strength gamma/sqrt(tau): embed (G ⊕ G_B), rotate by
// exp(-i tau T_full), trace the ancillas back out.
void collision_step(const SystemSpec& spec, Mat& G, double tau);
void evolve_collisions(const SystemSpec& spec, Mat& G, double t, double tau);

// ---- Single pair (N = 1) closed forms ----

// Correlation matrix entries for initial magnetizations (mu1, mu4):
// G11 = (1 + mu1 e)/2, G22 = (1 + mu4 e)/2, G12 = G21 = (1 - e)/2,
// with e = exp(-gamma^2 t).
Eigen::Matrix2cd pair_correlations_closed_form(double gamma, double mu1,
                                               double mu4, double t);

// Concurrence of the pair at time t.
double pair_concurrence_closed_form(double gamma, double mu1, double mu4,
                                    double t);

// Waiting time before the concurrence becomes nonzero for opposite initial
// magnetizations mu1 = -mu4 = mu.
double delay_time_closed_form(double gamma, double mu);

// Delay time measured from the simulated pair (bisection on the first
// positive concurrence), for comparison against the closed form.
double delay_time_measured(double gamma, double mu, double tol = 1e-9);

} // namespace replichain
