#include "test_util.hpp"

#include <ehz/loop.hpp>

#include <doctest.h>

using namespace ehz;
using namespace ehz::testing;

namespace {

// r (cos t, sin t) in the (q1, p1) plane of R^{2n}
Loop circle(int n, double r, int modes = 4, int samples = 64) {
  Loop z(n, modes, samples);
  z.cos_coeffs()(0, 0) = r;
  z.sin_coeffs()(n, 0) = r;
  return z;
}

Loop random_loop(int n, int modes, int samples, std::mt19937_64& rng) {
  Loop z(n, modes, samples);
  std::normal_distribution<double> g;
  for (int k = 0; k < modes; ++k)
    for (int i = 0; i < 2 * n; ++i) {
      z.cos_coeffs()(i, k) = g(rng) / (k + 1);
      z.sin_coeffs()(i, k) = g(rng) / (k + 1);
    }
  return z;
}

}  // namespace

TEST_SUITE("loop") {

TEST_CASE("J is the standard complex structure") {
  const Vec x = vec({1, 2, 3, 4});
  CHECK((apply_J(x) - vec({-3, -4, 1, 2})).norm() == 0.0);
  CHECK((apply_J(apply_J(x)) + x).norm() == 0.0);
}

TEST_CASE("symplectic action of circles") {
  for (const double r : {0.5, 1.0, 2.0}) {
    const auto z = circle(1, r);
    CHECK(symplectic_action(z) == doctest::Approx(M_PI * r * r).epsilon(1e-14));
    CHECK(symplectic_action(z.reversed()) == doctest::Approx(-M_PI * r * r).epsilon(1e-14));
  }
}

TEST_CASE("exact action equals trapezoidal quadrature") {
  std::mt19937_64 rng(7);
  for (const int n : {1, 2, 3}) {
    const auto z = random_loop(n, 8, 40, rng);
    CHECK(symplectic_action(z) == doctest::Approx(symplectic_action_quadrature(z)).epsilon(1e-12));
  }
}

TEST_CASE("loop evaluation and derivative") {
  std::mt19937_64 rng(8);
  const auto z = random_loop(2, 5, 32, rng);
  for (const double t : {0.0, 0.3, 2.0, 5.5}) {
    const Vec fd = (z.eval(t + 1e-6) - z.eval(t - 1e-6)) / 2e-6;
    CHECK((fd - z.velocity(t)).norm() < 1e-7);
  }
  const Mat pts = z.sample_points();
  CHECK((pts.col(3) - z.eval(z.time(3))).norm() < 1e-13);
  // mean zero by construction
  CHECK(pts.rowwise().mean().norm() < 1e-13);
}

TEST_CASE("from_samples recovers the coefficients") {
  std::mt19937_64 rng(9);
  const auto z = random_loop(2, 6, 64, rng);
  const auto back = Loop::from_samples(z.sample_points(), 6, 64);
  CHECK(back.coefficient_distance(z) < 1e-12);
  // adding a constant does not change the loop
  const Mat shifted = z.sample_points().colwise() + Vec::Constant(4, 3.0);
  CHECK(Loop::from_samples(shifted, 6, 64).coefficient_distance(z) < 1e-12);
}

TEST_CASE("resized keeps the common modes") {
  std::mt19937_64 rng(10);
  const auto z = random_loop(1, 4, 32, rng);
  const auto big = z.resized(8, 64);
  CHECK(symplectic_action(big) == doctest::Approx(symplectic_action(z)));
  CHECK((big.eval(1.3) - z.eval(1.3)).norm() < 1e-13);
  CHECK_THROWS(Loop(1, 8, 20));
}

TEST_CASE("dual action examples") {
  // disk, z = (cos t, sin t) / sqrt(pi): |z'|^2 = 1/pi over 2 pi
  const auto z = circle(1, 1.0 / std::sqrt(M_PI));
  CHECK(symplectic_action(z) == doctest::Approx(1.0));
  CHECK(dual_action(ConvexBody::ball(2), z) == doctest::Approx(2.0).epsilon(1e-13));

  std::mt19937_64 rng(11);
  const auto w = random_loop(2, 5, 64, rng);
  const auto ell = ConvexBody::ellipsoid_axes(vec({2, 1, 1, 3}));
  CHECK(dual_action(ell, w.scaled(2.5)) == doctest::Approx(6.25 * dual_action(ell, w)).epsilon(1e-12));

  // cube in R^4, circle in the (q1,p1) plane with A = 1, against a dense quadrature
  const auto cube = ConvexBody::cube(4);
  const auto c4 = circle(2, 1.0 / std::sqrt(M_PI), 4, 64);
  double dense = 0.0;
  const int N = 1000000;
  for (int i = 0; i < N; ++i) {
    const double t = 2 * M_PI * i / N;
    const double h = (std::abs(std::sin(t)) + std::abs(std::cos(t))) / std::sqrt(M_PI);
    dense += h * h;
  }
  dense *= 2 * M_PI / N;
  CHECK(dense == doctest::Approx((2 * M_PI + 4) / M_PI).epsilon(1e-10));
  // the integrand 1 + |sin 2t| has kinks, so the trapezoidal rule converges
  // at O(N^-2): Euler-Maclaurin gives -(4 h^2 / 3) / pi with h = 2 pi / N
  for (const int samples : {64, 4096}) {
    const double h = 2 * M_PI / samples;
    const double predicted = -4 * h * h / 3 / M_PI;
    const double err = dual_action(cube, c4.resized(4, samples)) - dense;
    CHECK(err == doctest::Approx(predicted).epsilon(1e-2));
  }

  const LagrangianProduct P{ConvexBody::ball(1), ConvexBody::ball(1)};
  CHECK(dual_action(P, z) == doctest::Approx(dual_action(P.body(), z)).epsilon(1e-13));
  CHECK_THROWS_AS(dual_action(ConvexBody::ball(4), z), DimensionError);
}

}  // TEST_SUITE
