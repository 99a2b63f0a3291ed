#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hswme/model.hpp"
#include "oracles.hpp"

using namespace hswme;

TEST_SUITE("model") {

TEST_CASE("legendre_phi values") {
  CHECK(legendre_phi(1, 0.0) == 1.0);
  CHECK(legendre_phi(2, 0.5) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(legendre_phi(0, 0.7) == 1.0);
  for (int n = 0; n <= 12; ++n) {
    CHECK(legendre_phi(n, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double z : {0.1, 0.33, 0.5, 0.77, 1.0}) CHECK(std::abs(legendre_phi(n, z) - oracle::phi(n, z)) <= 1e-12);
  }
}

TEST_CASE("legendre_phi orthogonality on a composite rule") {
  const int m = 10000;
  for (int a = 0; a <= 10; ++a) {
    for (int b = 0; b <= 10; ++b) {
      // composite Simpson on m intervals
      double s = 0.0;
      for (int q = 0; q <= m; ++q) {
        const double z = static_cast<double>(q) / m;
        const double w = (q == 0 || q == m) ? 1.0 : (q % 2 ? 4.0 : 2.0);
        s += w * legendre_phi(a, z) * legendre_phi(b, z);
      }
      s /= 3.0 * m;
      CHECK(std::abs(s - (a == b ? 1.0 / (2 * b + 1) : 0.0)) <= 1e-8);
    }
  }
}

TEST_CASE("reconstruct_velocity") {
  const std::vector<double> zero(5, 0.0);
  for (double z : {0.0, 0.4, 1.0}) CHECK(reconstruct_velocity(0.25, zero, z) == 0.25);
  std::vector<double> a(5, 0.0);
  a[0] = -0.25;
  a[4] = 0.25;
  CHECK(reconstruct_velocity(0.25, a, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  const std::vector<double> one = {1.0};
  CHECK(reconstruct_velocity(1.0, one, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("OffdiagA entries") {
  const OffdiagA A(4);
  const Matrix d = A.dense();
  CHECK(d(1, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(d(0, 1) == doctest::Approx(3.0 / 5.0));
  CHECK(d(2, 3) == doctest::Approx(5.0 / 9.0));
  CHECK(d(3, 2) == doctest::Approx(3.0 / 7.0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(i - j) != 1) CHECK(d(i, j) == 0.0);
  const std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> y(4);
  A.apply(x, y);
  const Vector ref = matvec(d, x);
  for (int i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-15));
}

TEST_CASE("transport_blocks examples") {
  ModelParams p;
  p.n_moments = 3;
  SUBCASE("alpha_1 = 0 gives the SWE block") {
    const TransportBlocks b = transport_blocks(1.3, 0.7, 0.0, p);
    CHECK(b.uu(1, 0) == doctest::Approx(9.81 * 1.3 - 0.49));
    CHECK(max_abs(b.uv) == 0.0);
    CHECK(max_abs(b.vu) == 0.0);
    CHECK(b.vv_coupling == 0.0);
    CHECK(b.vv_diagonal == 0.7);
  }
  SUBCASE("N = 2, alpha_1 = 1, u = 0") {
    p.n_moments = 2;
    const Matrix vv = transport_blocks(1.0, 0.0, 1.0, p).dense_vv();
    CHECK(vv(0, 0) == 0.0);
    CHECK(vv(0, 1) == doctest::Approx(3.0 / 5.0));
    CHECK(vv(1, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(vv(1, 1) == 0.0);
  }
  SUBCASE("h = 1, u = 2") {
    const Matrix uu = transport_blocks(1.0, 2.0, 0.0, p).uu;
    CHECK(uu(0, 0) == 0.0);
    CHECK(uu(0, 1) == 1.0);
    CHECK(uu(1, 0) == doctest::Approx(5.81).epsilon(1e-15));
    CHECK(uu(1, 1) == 4.0);
  }
  CHECK_THROWS_AS(transport_blocks(0.0, 0.0, 0.0, p), std::invalid_argument);
}

TEST_CASE("transport blocks reassemble the full matrix") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int n = 1; n <= 6; ++n) {
    ModelParams p;
    p.n_moments = static_cast<std::size_t>(n);
    for (int trial = 0; trial < 5; ++trial) {
      const double h = 1.0 + 0.5 * d(rng), u = d(rng), a = d(rng);
      const TransportBlocks b = transport_blocks(h, u, a, p);
      oracle::Mat full(n + 2, n + 2);
      full.topLeftCorner(2, 2) = oracle::to_eigen(b.uu);
      full.topRightCorner(2, n) = oracle::to_eigen(b.uv);
      full.bottomLeftCorner(n, 2) = oracle::to_eigen(b.vu);
      full.bottomRightCorner(n, n) = oracle::to_eigen(b.dense_vv());
      CHECK((full - oracle::transport_matrix(h, u, a, n, p.g)).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
}

TEST_CASE("coefficient_a") {
  CHECK(coefficient_a(0, 1) == 0.0);
  CHECK(coefficient_a(2, 1) == 1.0);
  CHECK(coefficient_a(1, 2) == 0.0);
  CHECK(coefficient_a(3, 3) == 0.0);
  CHECK(coefficient_a(4, 3) == 6.0);
}

TEST_CASE("4 a_{i+1,j} is the derivative Gram matrix of the basis") {
  const oracle::Mat G = oracle::derivative_gram(10);
  for (int i = 0; i < 9; ++i)
    for (int j = 1; j < 10; ++j) CHECK(std::abs(4.0 * coefficient_a(i + 1, j) - G(i, j)) <= 1e-9);
}

TEST_CASE("source_term examples") {
  ModelParams p;
  p.nu = 1.0;
  p.lambda = 0.5;
  const std::vector<double> zero(3, 0.0);
  const Vector s = source_term(0.8, 1.0, zero, p);
  REQUIRE(s.size() == 5);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(-2.0));
  CHECK(s[2] == doctest::Approx(-6.0));
  for (double v : source_term(0.8, 0.0, zero, p)) CHECK(v == 0.0);

  // Moment 2 with alpha_1 = 1: slip part only; the viscous coupling of
  // moments 1 and 2 vanishes (phi_1' and phi_2' are orthogonal).
  p.lambda = 1.0;
  const std::vector<double> a1 = {1.0, 0.0, 0.0};
  CHECK(source_term(1.0, 0.0, a1, p)[3] == doctest::Approx(-5.0));
  CHECK_THROWS_AS(source_term(-1.0, 0.0, a1, p), std::invalid_argument);
}

TEST_CASE("source_term matches the vertically resolved model") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 8;
    ModelParams p;
    p.nu = 0.5 + d(rng) * 0.4;
    p.lambda = 0.7 + 0.3 * d(rng);
    const double h = 1.0 + 0.6 * d(rng), u = d(rng);
    oracle::Vec a(n);
    for (int k = 0; k < n; ++k) a(k) = d(rng);
    const Vector s = source_term(h, u, std::span<const double>(a.data(), n), p);
    const oracle::Vec ref = oracle::source(h, u, a, p.nu, p.lambda);
    CHECK(s[0] == 0.0);
    for (int i = 0; i <= n; ++i) CHECK(std::abs(s[i + 1] - ref(i)) <= 1e-10 * (1.0 + std::abs(ref(i))));
  }
}

TEST_CASE("friction operators") {
  ModelParams p;
  p.nu = 2.0;
  p.lambda = 0.5;
  p.n_moments = 5;
  const FrictionOperators f = build_friction_operators(p);
  const Matrix M1 = f.M1();
  const Vector b = f.b();
  CHECK(b[0] == doctest::Approx(-3.0 * p.nu / p.lambda));
  CHECK(b[4] == doctest::Approx(-11.0 * p.nu / p.lambda));
  CHECK(M1(0, 0) == doctest::Approx(-12.0 * p.nu));
  CHECK(M1(1, 0) == 0.0);
  CHECK(M1(1, 1) == doctest::Approx(-60.0 * p.nu));
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j < 5; ++j)
      if ((k + j) % 2) CHECK(M1(k, j) == 0.0);
  const Matrix M2 = f.M2();
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j < 5; ++j) CHECK(M2(k, j) == b[k]);

  ModelParams q = p;
  q.nu = 2.0 * p.nu;
  CHECK(max_abs_diff(build_friction_operators(q).M1(), 2.0 * M1) <= 1e-12);

  p.n_moments = 0;
  CHECK_THROWS_AS(build_friction_operators(p), std::invalid_argument);
}

TEST_CASE("M1 is symmetric negative definite in the weighted inner product") {
  ModelParams p;
  p.n_moments = 12;
  const FrictionOperators f = build_friction_operators(p);
  // diag(1/(2k+1)) M1 is the negative derivative Gram matrix restricted to moments.
  oracle::Mat M = oracle::to_eigen(f.M1());
  for (int k = 0; k < 12; ++k) M.row(k) /= (2.0 * (k + 1) + 1.0);
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(Eigen::SelfAdjointEigenSolver<oracle::Mat>(M).eigenvalues().maxCoeff() < 0.0);
}

TEST_CASE("friction operators reproduce source_term") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ModelParams p;
    p.n_moments = static_cast<std::size_t>(1 + trial % 8);
    p.nu = 1.0 + 0.9 * d(rng);
    p.lambda = 0.6 + 0.5 * d(rng);
    const FrictionOperators f = build_friction_operators(p);
    const double h = 1.0 + 0.7 * d(rng), u = d(rng);
    Vector hv(p.n_moments), a(p.n_moments);
    for (std::size_t k = 0; k < hv.size(); ++k) {
      a[k] = d(rng);
      hv[k] = h * a[k];
    }
    const Vector m1 = matvec(f.M1(), hv), m2 = matvec(f.M2(), hv), b = f.b();
    const Vector s = source_term(h, u, a, p);
    for (std::size_t k = 0; k < hv.size(); ++k) {
      const double got = m1[k] / (h * h) + m2[k] / h + u * b[k];
      CHECK(std::abs(got - s[k + 2]) <= 1e-12 * std::max(1.0, std::abs(s[k + 2])));
    }
  }
}

TEST_CASE("initial conditions") {
  Grid g;
  g.n_cells = 2000;
  ModelParams p;
  p.n_moments = 6;
  SUBCASE("dam break, bare formula at the left end") {
    const State s = initial_condition(TestCase::DamBreak, g, p, CaseOptions{1.0});
    const double x0 = g.center(0);
    CHECK(s.U.h(0) == doctest::Approx(0.3 + 0.35 * (std::tanh(x0) - std::tanh(x0 - 0.2))).epsilon(1e-15));
    CHECK(s.U.h(0) == doctest::Approx(0.3 + 0.35 * (std::tanh(-1.0) - std::tanh(-1.2))).epsilon(1e-4));
  }
  SUBCASE("dam break default profile is the column on [0, 0.2]") {
    const State s = initial_condition(TestCase::DamBreak, g, p);
    double hmax = 0.0;
    for (std::size_t j = 0; j < g.n_cells; ++j) {
      hmax = std::max(hmax, s.U.h(j));
      CHECK(s.U.hu(j) == 0.0);
      for (std::size_t k = 0; k < 6; ++k) CHECK(s.V(j, k) == 0.0);
    }
    CHECK(hmax == doctest::Approx(0.999936).epsilon(1e-5));
    CHECK(s.U.h(0) == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("smooth wave") {
    const State s = initial_condition(TestCase::SmoothWave, g, p);
    for (std::size_t j = 0; j < g.n_cells; j += 97) {
      const double x = g.center(j);
      const double h = 1.0 + std::exp(3.0 * std::cos(std::numbers::pi * (x + 0.5))) / std::exp(4.0);
      CHECK(s.U.h(j) == doctest::Approx(h).epsilon(1e-15));
      CHECK(s.U.velocity(j) == doctest::Approx(0.25).epsilon(1e-15));
      CHECK(s.V(j, 0) == doctest::Approx(-0.25 * h).epsilon(1e-15));
      CHECK(s.V(j, 5) == doctest::Approx(0.25 * h).epsilon(1e-15));
      for (std::size_t k = 1; k < 5; ++k) CHECK(s.V(j, k) == 0.0);
    }
  }
  CHECK_THROWS_AS(initial_condition(TestCase::DamBreak, g, p, CaseOptions{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(test_case_from_string("tsunami"), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  p.lambda = 0.0;
  CHECK_THROWS(p.validate());
  p = ModelParams{};
  p.cfl = 1.5;
  CHECK_THROWS(p.validate());
  Grid g;
  CHECK_THROWS(g.validate());
  CHECK(neighbor(0, -1, 5, BoundaryCondition::Periodic) == 4);
  CHECK(neighbor(4, 1, 5, BoundaryCondition::Periodic) == 0);
  CHECK(neighbor(0, -1, 5, BoundaryCondition::Outflow) == 0);
  CHECK(neighbor(4, 1, 5, BoundaryCondition::Outflow) == 4);
}

}  // TEST_SUITE
