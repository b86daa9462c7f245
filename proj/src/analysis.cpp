#include "replichain/analysis.hpp"
#include "replichain/dynamics.hpp"
#include "replichain/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace replichain {

LinearFit linear_fit(const VecR& x, const VecR& y) {
  const double n = static_cast<double>(x.size());
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = (y.array() - f.intercept - f.slope * x.array()).square().sum();
  const double syy = (y.array() - my).square().sum();
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  (void)n;
  return f;
}

FitResult fit_entanglement_length(const VecR& cc, double floor) {
  // longest contiguous run above the floor
  int best_lo = 0, best_len = 0, lo = -1;
  for (int i = 0; i <= cc.size(); ++i) {
    const bool above = i < cc.size() && cc[i] > floor;
    if (above && lo < 0) lo = i;
    if (!above && lo >= 0) {
      if (i - lo > best_len) { best_lo = lo; best_len = i - lo; }
      lo = -1;
    }
  }
  if (best_len < 4)
    throw std::invalid_argument("fewer than 4 profile entries above floor");
  VecR x(best_len), y(best_len);
  for (int i = 0; i < best_len; ++i) {
    x[i] = best_lo + i;
    y[i] = std::log(cc[best_lo + i]);
  }
  const LinearFit f = linear_fit(x, y);
  FitResult r;
  r.value = -1.0 / f.slope;
  r.r2 = f.r2;
  r.points = best_len;
  r.method = "loglinear";
  return r;
}

namespace {

struct Extremum {
  double t, q;
};

// Interior extrema with parabolic refinement through the three samples.
std::vector<Extremum> find_extrema(const VecR& ts, const VecR& qs) {
  std::vector<Extremum> out;
  for (Eigen::Index i = 1; i + 1 < qs.size(); ++i) {
    const double dl = qs[i] - qs[i - 1];
    const double dr = qs[i + 1] - qs[i];
    if (dl * dr < 0.0) {
      const double denom = qs[i - 1] - 2.0 * qs[i] + qs[i + 1];
      double s = denom != 0.0 ? 0.5 * (qs[i - 1] - qs[i + 1]) / denom : 0.0;
      s = std::clamp(s, -1.0, 1.0);
      const double h = ts[i + 1] - ts[i];
      out.push_back({ts[i] + s * h, qs[i] - 0.25 * (qs[i - 1] - qs[i + 1]) * s});
    }
  }
  return out;
}

// SSE of the best Q* + a t^s for fixed s (linear in the two coefficients).
double power_law_sse(const VecR& t, const VecR& q, double s, double* c0 = nullptr,
                     double* c1 = nullptr) {
  Eigen::MatrixXd B(t.size(), 2);
  B.col(0).setOnes();
  B.col(1) = t.array().pow(s);
  Eigen::Vector2d c = (B.transpose() * B).ldlt().solve(B.transpose() * q);
  if (c0) *c0 = c[0];
  if (c1) *c1 = c[1];
  return (B * c - q).squaredNorm();
}

} // namespace

FitResult fit_algebraic_convergence(const VecR& ts, const VecR& qs,
                                    std::optional<double> plateau) {
  if (ts.size() != qs.size() || ts.size() < 8)
    throw std::invalid_argument("convergence fit needs >= 8 samples");
  const auto ex = find_extrema(ts, qs);
  FitResult r;
  if (ex.size() >= 8) {
    // Oscillatory decay: half the peak-to-peak range between consecutive
    // extrema against their midpoint time, on log-log axes.
    std::vector<double> lt, lr;
    double mid_sum = 0.0;
    for (size_t k = 0; k + 1 < ex.size(); ++k) {
      const double range = 0.5 * std::abs(ex[k].q - ex[k + 1].q);
      mid_sum += 0.5 * (ex[k].q + ex[k + 1].q);
      if (range > 1e-300)
        lt.push_back(std::log(0.5 * (ex[k].t + ex[k + 1].t))),
        lr.push_back(std::log(range));
    }
    if (lt.size() >= 4) {
      const VecR x = Eigen::Map<const VecR>(lt.data(), lt.size());
      const VecR y = Eigen::Map<const VecR>(lr.data(), lr.size());
      const LinearFit f = linear_fit(x, y);
      r.value = f.slope;
      r.plateau = plateau.value_or(mid_sum / static_cast<double>(ex.size() - 1));
      r.r2 = f.r2;
      r.points = static_cast<int>(lt.size());
      r.method = "envelope";
      return r;
    }
  }
  if (plateau) {
    // Known asymptote: plain log-log fit of the residual.
    std::vector<double> lt, ld;
    for (Eigen::Index i = 0; i < ts.size(); ++i) {
      const double d = std::abs(qs[i] - *plateau);
      if (d > 1e-300) lt.push_back(std::log(ts[i])), ld.push_back(std::log(d));
    }
    if (lt.size() < 4)
      throw std::invalid_argument("series sits on the supplied plateau");
    const VecR x = Eigen::Map<const VecR>(lt.data(), lt.size());
    const VecR y = Eigen::Map<const VecR>(ld.data(), ld.size());
    const LinearFit f = linear_fit(x, y);
    r.value = f.slope;
    r.plateau = *plateau;
    r.r2 = f.r2;
    r.points = static_cast<int>(lt.size());
    r.method = "loglog";
    return r;
  }
  // Monotone approach: co-fit Q(t) = Q* + a t^s, golden section over s.
  const double s_lo = -4.5, s_hi = -0.8;
  double best_s = s_lo, best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 75; ++k) {
    const double s = s_lo + (s_hi - s_lo) * k / 74.0;
    const double sse = power_law_sse(ts, qs, s);
    if (sse < best_sse) { best_sse = sse; best_s = s; }
  }
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::max(s_lo, best_s - 0.06), b = std::min(s_hi, best_s + 0.06);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 60; ++it) {
    if (power_law_sse(ts, qs, c) < power_law_sse(ts, qs, d)) b = d;
    else a = c;
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  const double s = 0.5 * (a + b);
  double q0 = 0.0, amp = 0.0;
  const double sse = power_law_sse(ts, qs, s, &q0, &amp);
  const double syy = (qs.array() - qs.mean()).square().sum();
  r.value = s;
  r.plateau = q0;
  r.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  r.points = static_cast<int>(ts.size());
  r.method = "direct";
  return r;
}

std::vector<Eigen::Index> convergence_window(const VecR& ts, int p, int N) {
  const double lo = 4.0 * p + 10.0, hi = 0.9 * N;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < ts.size(); ++i)
    if (ts[i] >= lo && ts[i] <= hi) idx.push_back(i);
  return idx;
}

double collapse_residual(const std::vector<VecR>& xs,
                         const std::vector<VecR>& ys, double x_lo, double x_hi,
                         int bins) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw std::invalid_argument("collapse needs >= 3 curves");
  const size_t K = xs.size();
  Eigen::MatrixXd curves(K, bins);
  for (size_t k = 0; k < K; ++k) {
    if (xs[k].size() != ys[k].size() || xs[k].size() < 2)
      throw std::invalid_argument("collapse curve too short");
    // sort by x, then linearly interpolate onto the common grid
    std::vector<Eigen::Index> ord(xs[k].size());
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(),
              [&](auto i, auto j) { return xs[k][i] < xs[k][j]; });
    if (xs[k][ord.front()] > x_lo || xs[k][ord.back()] < x_hi)
      throw std::invalid_argument("curve does not cover the collapse window");
    for (int b = 0; b < bins; ++b) {
      const double x = x_lo + (x_hi - x_lo) * b / (bins - 1);
      auto it = std::lower_bound(ord.begin(), ord.end(), x, [&](auto i, double v) {
        return xs[k][i] < v;
      });
      if (it == ord.begin()) ++it;
      const Eigen::Index iR = *it, iL = *(it - 1);
      const double u = (x - xs[k][iL]) / (xs[k][iR] - xs[k][iL]);
      curves(k, b) = (1.0 - u) * ys[k][iL] + u * ys[k][iR];
    }
  }
  const double amp = curves.maxCoeff() - curves.minCoeff();
  if (amp <= 0.0) return 0.0;
  double total = 0.0;
  int count = 0;
  for (size_t i = 0; i < K; ++i)
    for (size_t j = i + 1; j < K; ++j) {
      total += std::sqrt((curves.row(i) - curves.row(j)).squaredNorm() / bins);
      ++count;
    }
  return total / count / amp;
}

double contact_concurrence_curve(double alpha, double mu) {
  const double a = alpha, m2 = mu * mu;
  const double g = (1 - a) * (1 - a) * (1 - m2) *
                   ((1 + a) * (1 + a) - m2 * (1 - a) * (1 - a));
  const double c = a - 0.5 * std::sqrt(std::max(0.0, g));
  return c > kConcurrenceFloor ? c : 0.0;
}

std::optional<double> threshold_closed_form(double alpha) {
  // contact_concurrence_curve = 0 solves to mu^2 = (1 + a^2 - 2 sqrt(2) a)/(1-a)^2.
  const double a = alpha;
  const double num = 1.0 + a * a - 2.0 * std::sqrt(2.0) * a;
  if (num <= 0.0) return std::nullopt;
  return std::sqrt(num) / (1.0 - a);
}

NessSummary ness_summary(const SystemSpec& spec, double mu, double t_ness,
                         double floor) {
  spec.check();
  const double t = t_ness > 0.0 ? t_ness : static_cast<double>(spec.N);
  ExactPropagator prop(spec);
  prop.set_initial(initial_correlations(uniform_profile(spec.N, mu)));
  const Mat G = prop.at(t);
  NessSummary s;
  s.cc_profile = cross_concurrence_profile(G, spec.N);
  s.m_profile = magnetization_profile(G, spec.N);
  s.j_profile = current_profile(G, spec.N, spec.K);
  s.j_star = s.j_profile[0];
  s.cc0 = s.cc_profile[0];
  // Below the disentanglement threshold the whole profile sits under the
  // floor and no length can be fitted; report the rest of the summary with
  // the fitted quantities marked unavailable.
  try {
    const FitResult f = fit_entanglement_length(s.cc_profile, floor);
    s.xi = f.value;
    s.xi_r2 = f.r2;
    s.beta = s.xi * s.j_star;
  } catch (const std::invalid_argument&) {
    s.xi = s.xi_r2 = s.beta = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

double fit_alpha(double gamma, int N) {
  SystemSpec spec{.N = N, .gamma = gamma};
  ExactPropagator prop(spec);
  prop.set_initial(initial_correlations(uniform_profile(N, 1.0)));
  return cross_concurrence(prop.at(static_cast<double>(N)), N, 0);
}

double alpha_crossing(double lo, double hi, double tol, int N) {
  const double target = std::sqrt(2.0) - 1.0;
  auto f = [&](double g) { return fit_alpha(g, N) - target; };
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0.0) throw std::invalid_argument("crossing not bracketed");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) * flo <= 0.0) hi = mid;
    else { lo = mid; flo = f(lo); }
  }
  (void)fhi;
  return 0.5 * (lo + hi);
}

std::optional<double> threshold_measured(double gamma, int N, double tol) {
  SystemSpec spec{.N = N, .gamma = gamma};
  ExactPropagator prop(spec);
  const double t = static_cast<double>(N);
  auto cc0_at = [&](double mu) {
    prop.set_initial(initial_correlations(uniform_profile(N, mu)));
    return cross_concurrence(prop.at(t), N, 0);
  };
  if (cc0_at(0.0) > 0.0) return std::nullopt; // entangled for every mu
  double lo = 0.0, hi = 1.0;
  if (!(cc0_at(1.0) > 0.0))
    throw NumericalError("contact pair not entangled even at mu = 1");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (cc0_at(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

BetaSweep xi_current_relation(const std::vector<double>& gammas, int N) {
  BetaSweep out;
  out.gammas = gammas;
  for (const double g : gammas) {
    SystemSpec spec{.N = N, .gamma = g};
    out.betas.push_back(ness_summary(spec, 1.0).beta);
  }
  const double mean =
      std::accumulate(out.betas.begin(), out.betas.end(), 0.0) / out.betas.size();
  double dev = 0.0;
  for (const double b : out.betas) dev = std::max(dev, std::abs(b - mean));
  out.spread = mean != 0.0 ? dev / std::abs(mean) : 0.0;
  return out;
}

} // namespace replichain
