#include <doctest.h>

#include "replichain/dynamics.hpp"
#include "replichain/observables.hpp"

#include <random>
#include <utility>
#include <vector>

using namespace replichain;

namespace {

// Random Hermitian matrix with spectrum inside [0, 1].
Mat random_physical_g(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = Cplx(dist(rng), dist(rng));
  Mat G = A * A.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  return G / (es.eigenvalues().maxCoeff() * 1.01);
}

} // namespace

TEST_CASE("pfaffian matches hand-computed small cases") {
  Mat A2 = Mat::Zero(2, 2);
  A2(0, 1) = Cplx(3.0, -1.0);
  A2(1, 0) = -A2(0, 1);
  CHECK(std::abs(pfaffian(A2) - Cplx(3.0, -1.0)) < 1e-14);

  std::mt19937 rng(42);
  std::normal_distribution<double> dist;
  Mat A(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = Cplx(dist(rng), dist(rng));
  A = (A - A.transpose()).eval();
  const Cplx want = A(0, 1) * A(2, 3) - A(0, 2) * A(1, 3) + A(0, 3) * A(1, 2);
  CHECK(std::abs(pfaffian(A) - want) < 1e-12);
}

TEST_CASE("pfaffian squared equals the determinant") {
  std::mt19937 rng(7);
  std::normal_distribution<double> dist;
  for (int n : {2, 4, 6, 8, 10}) {
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = Cplx(dist(rng), dist(rng));
    A = (A - A.transpose()).eval();
    const Cplx pf = pfaffian(A);
    const Cplx det = A.determinant();
    CHECK(std::abs(pf * pf - det) <= 1e-9 * std::max(1.0, std::abs(det)));
  }
}

TEST_CASE("string correlator: determinant and pfaffian routes agree") {
  const Mat G = random_physical_g(8, 11);
  const Mat Gt = gauge_fixed(G);
  const std::vector<std::pair<int, int>> pairs = {{0, 1}, {0, 4}, {1, 6}, {2, 7}, {0, 7}};
  for (auto [a, b] : pairs) {
    const Cplx d = string_determinant(Gt, a, b);
    const Cplx p = string_pfaffian(Gt, a, b);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(std::abs(d - p) < 1e-12);
  }
}

TEST_CASE("adjacent-pair string correlator reduces to the bare entry") {
  const Mat G = random_physical_g(6, 5);
  const Mat Gt = gauge_fixed(G);
  CHECK(std::abs(string_determinant(Gt, 2, 3) - Gt(2, 3)) < 1e-15);
}

TEST_CASE("gauge fixing is an involution that flips only cross-chain entries") {
  const Mat G = random_physical_g(6, 3); // N = 3
  const Mat Gt = gauge_fixed(G);
  CHECK((gauge_fixed(Gt) - G).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(Gt(0, 1) - G(0, 1)) == 0.0);  // within chain 1
  CHECK(std::abs(Gt(3, 5) - G(3, 5)) == 0.0);  // within chain 2
  CHECK(std::abs(Gt(1, 4) + G(1, 4)) == 0.0);  // across
}

TEST_CASE("zz correlator factorizes on product states") {
  VecR mu(6);
  mu << 0.7, -0.2, 0.9, -1.0, 0.4, 0.0;
  const Mat G = initial_correlations(mu);
  const std::vector<std::pair<int, int>> pairs = {{0, 3}, {1, 4}, {2, 5}};
  for (auto [a, b] : pairs)
    CHECK(zz_correlator(G, a, b) == doctest::Approx(mu[a] * mu[b]).epsilon(1e-12));
}

TEST_CASE("Werner state concurrence") {
  // rho = p |Psi-><Psi-| + (1-p) I/4, concurrence max(0, (3p-1)/2)
  Eigen::Matrix4cd psi = Eigen::Matrix4cd::Zero();
  psi(1, 1) = 0.5;
  psi(2, 2) = 0.5;
  psi(1, 2) = -0.5;
  psi(2, 1) = -0.5;
  for (double p : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const Eigen::Matrix4cd rho =
        p * psi + (1 - p) * 0.25 * Eigen::Matrix4cd::Identity();
    const double want = std::max(0.0, (3 * p - 1) / 2);
    CHECK(concurrence(rho) == doctest::Approx(want).epsilon(1e-10));
    CHECK(concurrence_x_state(rho) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("maximally entangled pairs have unit concurrence") {
  for (double sign : {1.0, -1.0}) {
    // |Phi+-> = (|uu> +- |dd>)/sqrt(2)
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    rho(0, 0) = 0.5;
    rho(3, 3) = 0.5;
    rho(0, 3) = sign * 0.5;
    rho(3, 0) = sign * 0.5;
    CHECK(concurrence(rho) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(concurrence_x_state(rho) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("X-state closed form equals the general formula on random states") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Vector4d d;
    d << u(rng), u(rng), u(rng), u(rng);
    d /= d.sum();
    const Cplx r14 = u(rng) * std::sqrt(d[0] * d[3]) *
                     std::exp(Cplx(0, 2 * 3.141592653589793 * u(rng)));
    const Cplx r23 = u(rng) * std::sqrt(d[1] * d[2]) *
                     std::exp(Cplx(0, 2 * 3.141592653589793 * u(rng)));
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    rho(0, 0) = d[0];
    rho(1, 1) = d[1];
    rho(2, 2) = d[2];
    rho(3, 3) = d[3];
    rho(0, 3) = r14;
    rho(3, 0) = std::conj(r14);
    rho(1, 2) = r23;
    rho(2, 1) = std::conj(r23);
    CHECK(std::abs(concurrence_x_state(rho) - concurrence(rho)) < 1e-10);
  }
}

TEST_CASE("sub-floor concurrence is reported as exactly zero") {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  rho(0, 0) = 0.2;
  rho(1, 1) = 0.3;
  rho(2, 2) = 0.3;
  rho(3, 3) = 0.2;
  rho(1, 2) = 0.2 + 2.5e-13; // inner branch excess 2.5e-13, doubled: 5e-13
  rho(2, 1) = rho(1, 2);
  CHECK(concurrence_x_state(rho) == 0.0);
  CHECK(concurrence(rho) == 0.0);
}

TEST_CASE("reduced density matrices from dynamics are physical") {
  SystemSpec spec{.N = 3, .gamma = 0.8};
  VecR mu(6);
  mu << 1, -0.5, 0.25, 0, 0.5, -1;
  ExactPropagator prop(spec);
  prop.set_initial(initial_correlations(mu));
  const Mat G = prop.at(1.7);
  const std::vector<std::pair<int, int>> pairs = {{0, 1}, {2, 3}, {0, 5}, {1, 4}, {2, 4}};
  for (auto [a, b] : pairs) {
    const Eigen::Matrix4cd rho = two_site_rdm(G, a, b);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(std::abs(rho.trace() - Cplx(1, 0)) < 1e-12);
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("profiles are indexed by distance from the contact") {
  const int N = 4;
  VecR mu(8);
  mu << 0.1, 0.2, 0.3, 0.4, -0.4, -0.3, -0.2, -0.1;
  const Mat G = initial_correlations(mu);
  const VecR m = magnetization_profile(G, N);
  REQUIRE(m.size() == N);
  // distance p on chain 1 is site N-1-p
  CHECK(m[0] == doctest::Approx(0.4));
  CHECK(m[3] == doctest::Approx(0.1));
  const VecR j = current_profile(G, N, 0.5);
  REQUIRE(j.size() == N - 1);
  CHECK(j.cwiseAbs().maxCoeff() == doctest::Approx(0.0)); // product state carries no current
  const VecR cc = cross_concurrence_profile(G, N);
  REQUIRE(cc.size() == N);
  const VecR cl = longitudinal_concurrence_profile(G, N);
  REQUIRE(cl.size() == N - 1);
}
