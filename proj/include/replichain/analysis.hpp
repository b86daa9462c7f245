#pragma once
// Fits and closed-form evaluators for the transient steady-state regime:
// entanglement decay length, algebraic relaxation exponents, light-cone
// scaling collapse, the contact-pair concurrence-vs-magnetization curve,
// and the current/length proportionality sweep.

#include "replichain/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace replichain {

struct FitResult {
  double value = 0.0;    // the fitted quantity (length, exponent, slope)
  double plateau = 0.0;  // co-fitted asymptote, where applicable
  double r2 = 0.0;       // coefficient of determination of the final fit
  int points = 0;        // samples entering the final fit
  std::string method;    // "direct", "envelope", "loglog", ...
};

// Ordinary least squares y = a + b x; returns (a, b, r2).
struct LinearFit {
  double intercept = 0.0, slope = 0.0, r2 = 0.0;
};
LinearFit linear_fit(const VecR& x, const VecR& y);

// Decay length of a concurrence profile: least-squares slope of ln C(p)
// over the longest contiguous run of entries above `floor`; length = -1/slope.
// Throws std::invalid_argument when fewer than 4 entries qualify.
FitResult fit_entanglement_length(const VecR& cc, double floor = 1e-8);

// Exponent of |Q(t) - Q*| ~ t^s from a uniformly sampled series.
// Oscillatory approach (>= 8 interior extrema): the half peak-to-peak range
// between consecutive parabolic-refined extrema is fitted on log-log axes,
// which needs no plateau at all; the plateau is reported as the mean of
// consecutive-extrema midpoints. Monotone approach: three-parameter fit
// Q(t) = Q* + a t^s (golden-section search over s, linear solve for Q*, a);
// a supplied plateau switches this route to a plain log-log fit.
FitResult fit_algebraic_convergence(const VecR& ts, const VecR& qs,
                                    std::optional<double> plateau = {});

// Window [4p + 10, 0.9 N] (in units where the sound velocity is 1) used by
// the convergence fits; returns indices into ts.
std::vector<Eigen::Index> convergence_window(const VecR& ts, int p, int N);

// How well curves Q(p, t_k) collapse onto a single function of x = p/t:
// rebin every curve onto a common x grid in [x_lo, x_hi] and return the
// mean pairwise RMS distance normalized by the pooled amplitude.
// Throws std::invalid_argument unless every curve covers the x window and
// at least 3 curves are given.
double collapse_residual(const std::vector<VecR>& xs,
                         const std::vector<VecR>& ys, double x_lo = 0.05,
                         double x_hi = 0.95, int bins = 40);

// Contact-pair concurrence as a function of initial magnetization, given
// the transfer fraction alpha: max{0, alpha - sqrt(g)/2} with
// g = (1-a)^2 (1-mu^2) [(1+a)^2 - mu^2 (1-a)^2].
double contact_concurrence_curve(double alpha, double mu);

// Magnetization threshold below which the contact pair disentangles, from
// the closed-form curve; empty when alpha >= sqrt(2) - 1 (always entangled).
std::optional<double> threshold_closed_form(double alpha);

// Transient-NESS protocol: evolve from uniform magnetization mu to t = N
// with the exact propagator and read off the distance profiles there.
struct NessSummary {
  double xi = 0.0;      // entanglement decay length
  double xi_r2 = 0.0;
  double j_star = 0.0;  // current at the first bond of chain 1
  double beta = 0.0;    // xi * j_star
  double cc0 = 0.0;     // contact-pair concurrence
  VecR cc_profile;
  VecR m_profile;
  VecR j_profile;
};
NessSummary ness_summary(const SystemSpec& spec, double mu,
                         double t_ness = -1.0, double floor = 1e-8);

// Transfer fraction alpha(gamma) = steady contact concurrence at mu = 1.
double fit_alpha(double gamma, int N = 60);

// Coupling at which alpha crosses sqrt(2) - 1, by bisection to tol.
double alpha_crossing(double lo = 0.3, double hi = 1.2, double tol = 1e-3,
                      int N = 60);

// Magnetization threshold measured from the simulated NESS (bisection on
// the contact concurrence); empty when the pair stays entangled at mu = 0.
std::optional<double> threshold_measured(double gamma, int N = 60,
                                         double tol = 1e-10);

// beta = xi * j_star per coupling value; reports the relative spread
// max|beta - mean| / mean over the listed couplings.
struct BetaSweep {
  std::vector<double> gammas;
  std::vector<double> betas;
  double spread = 0.0;
};
BetaSweep xi_current_relation(const std::vector<double>& gammas, int N = 60);

} // namespace replichain
