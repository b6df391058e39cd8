#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"

#include "ergolab/katok.hpp"

using namespace ergolab;

namespace {

const double kLogPhi2 = 0.9624236501192069;  // log of the cat-map expansion rate

KatokMap cat_slow() { return build_katok_map(2, 1, 1, 1, 0.05, 0.15, 0.5); }

// finite-difference Jacobian of the glued map via minimal-lift differences
Mat2 fd_jacobian(const KatokMap& m, const TorusPoint& x, double h) {
  TorusPoint xp = katok_step(m, {x.x + h, x.y});
  TorusPoint xm = katok_step(m, {x.x - h, x.y});
  TorusPoint yp = katok_step(m, {x.x, x.y + h});
  TorusPoint ym = katok_step(m, {x.x, x.y - h});
  Vec2 dx = torus_diff(xp, xm);
  Vec2 dy = torus_diff(yp, ym);
  return Mat2{dx.x / (2 * h), dy.x / (2 * h), dx.y / (2 * h), dy.y / (2 * h)};
}

}  // namespace

TEST_CASE("construction validates radii, exponent, hyperbolicity") {
  CHECK_NOTHROW(cat_slow());
  CHECK_THROWS_AS(build_katok_map(2, 1, 1, 1, 0.15, 0.05, 0.5), ErgoError);  // r0 >= r1
  CHECK_THROWS_AS(build_katok_map(2, 1, 1, 1, 0.0, 0.15, 0.5), ErgoError);   // r0 = 0
  CHECK_THROWS_AS(build_katok_map(2, 1, 1, 1, 0.05, 0.30, 0.5), ErgoError);  // image leaves chart
  CHECK_THROWS_AS(build_katok_map(2, 1, 1, 1, 0.05, 0.15, 1.5), ErgoError);  // alpha out of range
  CHECK_THROWS_AS(build_katok_map(2, 1, 1, 1, 0.05, 0.15, 0.0), ErgoError);
  CHECK_THROWS_AS(build_katok_map(1, 0, 0, 1, 0.05, 0.15, 0.5), ErgoError);  // not hyperbolic

  // boundary trajectories can dip into the core when r1 < lambda * r0
  KatokMap tight = build_katok_map(2, 1, 1, 1, 0.10, 0.15, 0.5);
  CHECK(!tight.warnings.empty());
  CHECK(cat_slow().warnings.empty());
}

TEST_CASE("slowdown profile and its derivative") {
  KatokMap m = cat_slow();
  const double u0 = m.r0 * m.r0;
  CHECK(katok_psi(m, 0.0) == 0.0);
  CHECK(katok_psi(m, u0) == 1.0);
  CHECK(katok_psi(m, 2 * u0) == 1.0);
  CHECK(katok_psi(m, u0 / 4) == doctest::Approx(0.5).epsilon(1e-14));  // sqrt(1/4)
  CHECK(katok_dpsi(m, 2 * u0) == 0.0);
  for (double u : {u0 / 5, u0 / 2, 0.9 * u0}) {
    double h = u * 1e-6;
    double fd = (katok_psi(m, u + h) - katok_psi(m, u - h)) / (2 * h);
    CHECK(katok_dpsi(m, u) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("glued map is linear outside the disk") {
  KatokMap m = cat_slow();
  Rng rng(42);
  int outside = 0;
  for (int i = 0; i < 1000; ++i) {
    TorusPoint x{rng.uniform(), rng.uniform()};
    if (dist_to_origin(x) < m.r1) continue;
    ++outside;
    CHECK(torus_dist(katok_step(m, x), toral_apply(m.A, x, 1)) < 1e-15);
    Mat2 J = katok_dstep(m, x);
    Mat2 A = toral_derivative(m.A);
    CHECK(J.a == A.a);
    CHECK(J.d == A.d);
  }
  CHECK(outside > 900);  // the disk covers ~7% of the torus
}

TEST_CASE("step and step_back invert each other") {
  KatokMap m = cat_slow();
  // outside, annulus (r0 < |x| < r1), and slowdown core
  for (TorusPoint x : {TorusPoint{0.3, 0.4}, TorusPoint{0.08, 0.06}, TorusPoint{0.02, 0.01}}) {
    CHECK(torus_dist(katok_step_back(m, katok_step(m, x)), x) < 5e-9);
    CHECK(torus_dist(katok_step(m, katok_step_back(m, x)), x) < 5e-9);
  }
}

TEST_CASE("variational Jacobian matches finite differences") {
  KatokMap m = cat_slow();
  for (TorusPoint x : {TorusPoint{0.3, 0.4}, TorusPoint{0.08, 0.06}, TorusPoint{0.02, 0.01},
                       TorusPoint{0.10, 0.0}}) {
    Mat2 J = katok_dstep(m, x);
    Mat2 F = fd_jacobian(m, x, 1e-6);
    CHECK(std::fabs(J.a - F.a) < 1e-6);
    CHECK(std::fabs(J.b - F.b) < 1e-6);
    CHECK(std::fabs(J.c - F.c) < 1e-6);
    CHECK(std::fabs(J.d - F.d) < 1e-6);
  }
}

TEST_CASE("finite-time exponents on the linear map") {
  ToralAutomorphism T = make_toral(2, 1, 1, 1);
  LinearToralMap f(T);

  // one step from the standard frame: QR factors are ||A e1|| = sqrt(5), 1/sqrt(5)
  auto one = finite_lyapunov(f, {0.2, 0.7}, 1);
  CHECK(one.first == doctest::Approx(0.5 * std::log(5.0)).epsilon(1e-14));
  CHECK(one.first + one.second == doctest::Approx(0.0).epsilon(1e-13));

  // symmetric matrix: ||A^T||_2 = lambda_u^T exactly, so the top exponent sits in
  // [log(lambda_u) - cond_log/T, log(lambda_u)]
  double cond_log = 0;
  const int horizon = 200;
  auto chi = finite_lyapunov(f, {0.2, 0.7}, horizon, &cond_log);
  CHECK(chi.first <= kLogPhi2 + 1e-12);
  CHECK(chi.first >= kLogPhi2 - cond_log / horizon - 1e-12);
  CHECK(cond_log >= 0);
  CHECK(chi.first + chi.second == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("slowdown never raises the top exponent") {
  KatokMap m = cat_slow();
  KatokSurface f(m);
  auto chi = finite_lyapunov(f, {0.31, 0.64}, 150);
  CHECK(chi.first > 0);
  CHECK(chi.first < m.log_lambda + 0.05);
}

TEST_CASE("orbit series bookkeeping") {
  KatokMap m = cat_slow();
  auto rows = orbit_series(m, {0.31, 0.64}, 120);
  REQUIRE(rows.size() == 121);
  CHECK(rows[0].t == 0);
  CHECK(rows[0].chi_plus_run == 0.0);
  CHECK(rows[120].t == 120);
  for (const OrbitRow& r : rows) {
    CHECK(r.in_disk == (dist_to_origin({r.x, r.y}) < m.r1));
  }
  CHECK(rows[120].chi_plus_run > 0);
  CHECK(rows[120].chi_plus_run < m.log_lambda + 0.05);
}

TEST_CASE("hyperbolic block certificate: linear map needs no slack") {
  ToralAutomorphism T = make_toral(2, 1, 1, 1);
  LinearToralMap f(T);
  double beta = std::log(T.lambda_u);
  Rng rng(7);
  for (int i = 0; i < 5; ++i) {
    BlockCheckReport rep = pesin_block_check(f, {rng.uniform(), rng.uniform()}, 12, beta, beta, 0.01);
    CHECK(rep.resolved);
    CHECK(rep.min_k == 1);
    // orthogonal eigenbasis of the symmetric matrix
    CHECK(rep.min_angle == doctest::Approx(1.5707963267948966).epsilon(1e-9));
  }
}

TEST_CASE("frequency certificate: dense visits force N = 2") {
  std::vector<char> visits(5, 1);
  Rat p(1, 2), gamma(1, 10);
  CHECK(!frequency_check(visits, 0, 1, p, gamma));
  CHECK(frequency_check(visits, 0, 2, p, gamma));
  CHECK(frequency_min_n(visits, 0, p, gamma, 100) == 2);
  // no visits at all: N = 0 suffices
  std::vector<char> empty(16, 0);
  CHECK(frequency_min_n(empty, 8, p, gamma, 100) == 0);
}

TEST_CASE("window classification at the case boundary") {
  Rat gamma(1, 10), p0(1, 5), p1(1, 5);
  CaseBound c1 = case_bound_check(10, gamma, p0, p1, 49, 0);
  CHECK(c1.which == 1);
  CHECK(c1.k_bound.num == 50);
  CHECK(c1.k_bound.den == 1);
  CaseBound c2 = case_bound_check(10, gamma, p0, p1, 51, 0);
  CHECK(c2.which == 2);
  CHECK(c2.rate.num == 1);
  CHECK(c2.rate.den == 2);
  // a nonzero origin offset widens Case 1: slack 10 + 50/10 = 15, bound 75
  CaseBound c3 = case_bound_check(10, gamma, p0, p1, 60, -50);
  CHECK(c3.which == 1);
  CHECK(c3.k_bound.num == 75);
}

TEST_CASE("time to cross the slowdown core") {
  // for exponent 1/2 the profile integral is exactly 1 + r0^2
  KatokMap m = cat_slow();
  CHECK(slowdown_time_integral(m) == doctest::Approx(1.0 + m.r0 * m.r0).epsilon(1e-8));
}

TEST_CASE("measured expansion floor away from the disk equals lambda_u") {
  KatokMap m = cat_slow();
  double v = measure_lambda_v(m, m.r1, 500, 99);
  CHECK(v == doctest::Approx(m.A.lambda_u).epsilon(1e-12));
  // sampling into the disk can only lower the floor
  double v2 = measure_lambda_v(m, 0.0, 500, 99);
  CHECK(v2 <= v + 1e-12);
}
