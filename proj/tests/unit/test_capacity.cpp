#include "test_util.hpp"

#include <ehz/billiards.hpp>
#include <ehz/capacity.hpp>
#include <ehz/loop.hpp>

#include <doctest.h>

using namespace ehz;
using namespace ehz::testing;

namespace {

SolverConfig quick(int starts = 4) {
  SolverConfig c;
  c.starts = starts;
  return c;
}

// Area of a planar body with smooth support: shoelace on grad h(u(t)).
double boundary_area(const ConvexBody& body, int points = 20000) {
  std::vector<Vec> pts;
  for (int i = 0; i < points; ++i) {
    const double t = 2 * M_PI * i / points;
    pts.push_back(body.support_gradient(vec({std::cos(t), std::sin(t)})));
  }
  return shoelace(pts);
}

Loop unit_circle_loop(int n, int modes = 24, int samples = 128) {
  Loop z(n, modes, samples);
  z.cos_coeffs()(0, 0) = 1.0 / std::sqrt(M_PI);
  z.sin_coeffs()(n, 0) = 1.0 / std::sqrt(M_PI);
  return z;
}

}  // namespace

TEST_SUITE("capacity") {

TEST_CASE("balls: c(B^{2n}(r)) = pi r^2") {
  for (const int dim : {2, 4, 6}) {
    CAPTURE(dim);
    const auto r = minimize_capacity(ConvexBody::ball(dim), quick());
    CHECK(r.value == doctest::Approx(M_PI).epsilon(0.01));
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(M_PI / 2 * r.lambda).epsilon(1e-14));
    CHECK(std::abs(symplectic_action(r.loop) - 1.0) <= 1e-9);
    CHECK(r.kkt_residual <= 1e-8);
  }
  CHECK(minimize_capacity(ConvexBody::ball(2, 2.0), quick()).value == doctest::Approx(4 * M_PI).epsilon(0.01));
  CHECK(minimize_capacity(ConvexBody::ball(4, 2.0), quick()).value == doctest::Approx(4 * M_PI).epsilon(0.01));
}

TEST_CASE("planar capacity equals area") {
  CHECK(minimize_capacity(ConvexBody::ellipsoid_axes(vec({2, 1})), quick()).value ==
        doctest::Approx(2 * M_PI).epsilon(0.01));
  const auto sq = ConvexBody::polytope(square_vertices(), 16.0);
  const double area = boundary_area(sq);
  CHECK(minimize_capacity(sq, quick()).value == doctest::Approx(area).epsilon(0.01));
  const auto pb = ConvexBody::pball(4.0, vec({1.5, 1}));
  CHECK(minimize_capacity(pb, quick()).value == doctest::Approx(boundary_area(pb)).epsilon(0.01));
}

TEST_CASE("product of discs matches the two-bounce orbit") {
  for (const auto& [r1, r2] : std::vector<std::pair<double, double>>{{1, 1}, {1, 2}}) {
    CAPTURE(r1);
    CAPTURE(r2);
    const auto K = ConvexBody::ball(2, r1);
    const auto T = ConvexBody::ball(2, r2);
    const double oracle = shortest_orbit_direct(K, T, 2).length;
    CHECK(oracle == doctest::Approx(4 * r1 * r2).epsilon(1e-9));
    const auto r = minimize_capacity(LagrangianProduct{K, T}, quick());
    CHECK(r.value == doctest::Approx(oracle).epsilon(0.02));
    CHECK(r.value >= oracle * (1 - 1e-6));  // the discretised value is an upper bound
    CHECK(std::abs(r.value - oracle) <= r.value_tolerance);
  }
}

TEST_CASE("KKT residual") {
  const auto ball = ConvexBody::ball(4);
  const auto z = unit_circle_loop(2);
  const auto k = kkt_residual(ball, z, 2.0);
  CHECK(k.residual <= 1e-8);
  CHECK(k.alpha.norm() <= 1e-8);
  CHECK(k.lambda_fit == doctest::Approx(2.0).epsilon(1e-3));

  // a loop far from critical
  Loop w = z;
  w.cos_coeffs()(1, 2) = 0.3;
  w.sin_coeffs()(3, 1) = -0.2;
  w = w.scaled(1.0 / std::sqrt(symplectic_action(w)));
  CHECK(kkt_residual(ball, w, dual_action(ball, w)).residual > 1e-2);
}

TEST_CASE("Euler formula: lambda agrees with the fitted multiplier") {
  // a Minkowski sum of two tilted ellipsoids is smooth but not an ellipsoid
  Mat a = Mat::Identity(4, 4), b = Mat::Identity(4, 4);
  a(0, 0) = 4.0;
  a(2, 2) = 2.25;
  a(0, 2) = a(2, 0) = 0.5;
  b(1, 1) = 3.0;
  b(3, 3) = 0.5;
  b(1, 3) = b(3, 1) = 0.3;
  const auto sum = ConvexBody::sum(ConvexBody::ellipsoid(a), ConvexBody::ellipsoid(b));
  for (const auto& body : {ConvexBody::ellipsoid_axes(vec({1, 2, 1.5, 1})), sum}) {
    const auto r = minimize_capacity(body, quick());
    CHECK(r.kkt_lambda == doctest::Approx(r.lambda).epsilon(1e-3));
    CHECK(r.kkt_residual <= 1e-4);
    CHECK(r.kkt_ok);
  }
}

TEST_CASE("KKT residual of product minimisers decreases with the truncation order") {
  // the minimiser of a product has velocity jumps at the bounces, so the
  // pointwise inclusion is only met in the limit of many modes
  const LagrangianProduct P{ConvexBody::ball(2), ConvexBody::ball(2)};
  SolverConfig lo = quick(2), hi = quick(2);
  lo.modes = 12;
  lo.samples = 64;
  hi.modes = 48;
  hi.samples = 256;
  const auto a = minimize_capacity(P, lo);
  const auto b = minimize_capacity(P, hi);
  CHECK(b.kkt_residual < a.kkt_residual);
  CHECK(std::abs(b.value - 4.0) < std::abs(a.value - 4.0));
}

TEST_CASE("homogeneity check") {
  const auto rep = capacity_homogeneity_check(ConvexBody::ball(4), 2.0, quick());
  CHECK(rep.relative_error <= 0.02);
  CHECK(rep.scaled_value == doctest::Approx(4 * M_PI).epsilon(0.01));
  const auto same = capacity_homogeneity_check(ConvexBody::ball(2), 1.0, quick());
  CHECK(same.relative_error == 0.0);
  const auto ell = capacity_homogeneity_check(ConvexBody::ellipsoid_axes(vec({2, 1})), 3.0, quick());
  CHECK(ell.relative_error <= 0.02);
  CHECK(ell.scaled_value == doctest::Approx(9 * 2 * M_PI).epsilon(0.01));
  // scaled_body keeps products as products
  const auto prod = scaled_body(ConvexBody::product(ConvexBody::ball(2), ConvexBody::ball(2)), 2.0);
  CHECK(prod.is_product());
}

TEST_CASE("Rayleigh quotient is scale invariant") {
  std::mt19937_64 rng(4);
  const auto body = ConvexBody::ellipsoid_axes(vec({1, 2, 3, 1}));
  Loop z(2, 6, 32);
  for (int k = 0; k < 6; ++k)
    for (int i = 0; i < 4; ++i) {
      z.cos_coeffs()(i, k) = random_vector(1, rng)(0);
      z.sin_coeffs()(i, k) = random_vector(1, rng)(0);
    }
  const double q = dual_action(body, z) / symplectic_action(z);
  for (const double c : {0.1, 3.0, 17.0}) {
    const auto w = z.scaled(c);
    CHECK(dual_action(body, w) / symplectic_action(w) == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("monotonicity and positivity at solver level") {
  const auto small = minimize_capacity(ConvexBody::ellipsoid_axes(vec({1, 1})), quick());
  const auto big = minimize_capacity(ConvexBody::ellipsoid_axes(vec({2, 1})), quick());
  CHECK(small.value > 0);
  CHECK(small.value <= big.value * (1 + 2 * 1e-2));
}

TEST_CASE("translated bodies are recentred and translation invariant") {
  const auto body = ConvexBody::translate(vec({3, 1, -2, 0.5}), ConvexBody::ball(4));
  const auto r = minimize_capacity(body, quick());
  CHECK(r.recentered);
  CHECK(r.value == doctest::Approx(M_PI).epsilon(0.01));
  const auto prod = ConvexBody::product(ConvexBody::translate(vec({2, 2}), ConvexBody::ball(2)), ConvexBody::ball(2));
  const auto rp = recenter_for_solver(prod);
  CHECK(rp.moved);
  CHECK(rp.body.is_product());
  CHECK(rp.body.origin_interior());
}

TEST_CASE("nonsmooth bodies: the cube") {
  // c([-1,1]^2) is the area 4; the polytope solver works on the nonsmooth support
  const auto r = minimize_capacity(ConvexBody::cube(2), quick());
  CHECK(r.value == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("determinism and reporting") {
  const auto body = ConvexBody::ellipsoid_axes(vec({1, 2, 1, 3}));
  const auto a = minimize_capacity(body, quick());
  const auto b = minimize_capacity(body, quick());
  CHECK(a.value == b.value);
  CHECK(a.loop.coefficient_distance(b.loop) == 0.0);
  CHECK(a.starts_used == 4);
  CHECK(a.starts.size() == 4);
  CHECK(!a.carriers.empty());
  const auto j = a.to_json(true);
  CHECK(j.at("value").get<double>() == a.value);
  CHECK(j.contains("loop"));
  CHECK_FALSE(a.to_json(false).contains("loop"));
}

TEST_CASE("refinement mode reports the polished value") {
  SolverConfig c = quick(2);
  c.refine = true;
  const auto r = minimize_capacity(LagrangianProduct{ConvexBody::ball(2), ConvexBody::ball(2)}, c);
  CHECK(r.refined);
  CHECK(r.value == r.fine_value);
  CHECK(r.fine_value <= r.coarse_value);
  CHECK(r.value == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("configuration") {
  SolverConfig c;
  CHECK(c.modes == 24);
  CHECK(c.samples == 128);
  CHECK(c.starts == 16);
  const auto j = c.to_json();
  const auto back = SolverConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK_THROWS_AS(SolverConfig::from_json(nlohmann::json{{"modes", 8}, {"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(SolverConfig::from_json(nlohmann::json{{"modes", 8}, {"samples", 16}}), ConfigError);
  CHECK_THROWS_AS(SolverConfig::from_json(nlohmann::json{{"starts", "many"}}), ConfigError);
  CHECK_THROWS_AS(minimize_capacity(ConvexBody::ball(3), quick()), DimensionError);
}

}  // TEST_SUITE
