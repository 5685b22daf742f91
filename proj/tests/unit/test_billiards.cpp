#include "test_util.hpp"

#include <ehz/billiards.hpp>

#include <doctest.h>

using namespace ehz;
using namespace ehz::testing;

namespace {

// A random valid state for T = unit ball: q on the boundary of K, p a unit
// vector pointing so that the ray q - t p enters K.
BilliardState random_inward_state(const ConvexBody& K, std::mt19937_64& rng) {
  while (true) {
    const Vec q = K.support_gradient(random_unit(K.dim(), rng));
    const Vec nq = K.gauge_gradient(q).normalized();
    const Vec p = random_unit(K.dim(), rng);
    if (p.dot(nq) > 0.1) return {q / K.gauge(q), p};
  }
}

}  // namespace

TEST_SUITE("billiards") {

TEST_CASE("disc: a diameter bounces back and forth") {
  const auto disc = ConvexBody::ball(2);
  const BilliardState s{vec({1, 0}), vec({1, 0})};
  const auto next = billiard_step(disc, disc, s);
  CHECK((next.q - vec({-1, 0})).norm() < 1e-12);
  CHECK((next.p - vec({-1, 0})).norm() < 1e-12);
  const auto back = billiard_step(disc, disc, next);
  CHECK((back.q - s.q).norm() < 1e-12);
  CHECK((back.p - s.p).norm() < 1e-12);
}

TEST_CASE("tangential and invalid states") {
  const auto disc = ConvexBody::ball(2);
  CHECK_THROWS_AS(billiard_step(disc, disc, {vec({1, 0}), vec({0, 1})}), GlidingConfigurationError);
  CHECK_THROWS_AS(billiard_step(disc, disc, {vec({0.5, 0}), vec({1, 0})}), Error);
  CHECK_THROWS_AS(billiard_step(disc, disc, {vec({1, 0}), vec({2, 0})}), Error);
  CHECK_THROWS_AS(billiard_step(disc, ConvexBody::ball(3), {vec({1, 0}), vec({1, 0, 0})}), DimensionError);
}

TEST_CASE("Euclidean momentum body gives specular reflection") {
  std::mt19937_64 rng(51);
  const auto ball = ConvexBody::ball(2);
  const std::vector<std::pair<std::string, ConvexBody>> tables{
      {"ellipse", ConvexBody::ellipsoid_axes(vec({2, 1}))},
      {"pball", ConvexBody::pball(4.0, vec({1.5, 1}))},
      {"ellipsoid3", ConvexBody::ellipsoid_axes(vec({1, 2, 3}))},
      {"pball3", ConvexBody::pball(3.0, Vec::Ones(3))}};
  for (const auto& [name, K] : tables) {
    CAPTURE(name);
    const auto T = ConvexBody::ball(K.dim());
    int checked = 0;
    for (int trial = 0; trial < 250; ++trial) {
      const auto s = random_inward_state(K, rng);
      const auto next = billiard_step(K, T, s);
      // q' is on the boundary, on the ray q - t p with t > 0
      CHECK(K.gauge(next.q) == doctest::Approx(1.0).epsilon(1e-9));
      const Vec chord = next.q - s.q;
      CHECK(chord.dot(-s.p) > 0);
      CHECK((chord - chord.dot(-s.p) * -s.p).norm() < 1e-9 * std::max(1.0, chord.norm()));
      // |p'| = 1 and p' is the mirror image of p in the tangent plane at q'
      const Vec n = K.gauge_gradient(next.q).normalized();
      const Vec mirror = s.p - 2 * s.p.dot(n) * n;
      CHECK(next.p.norm() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK((next.p - mirror).norm() < 1e-8);
      ++checked;
    }
    CHECK(checked == 250);
  }
}

TEST_CASE("trace: the major axis of an ellipse is a 2-periodic orbit") {
  const auto K = ConvexBody::ellipsoid_axes(vec({2, 1}));
  const auto T = ConvexBody::ball(2);
  const auto tr = trace(K, T, {vec({2, 0}), vec({1, 0})}, 4);
  REQUIRE(tr.completed);
  REQUIRE(tr.states.size() == 5);
  CHECK((tr.states[1].q - vec({-2, 0})).norm() < 1e-10);
  CHECK((tr.states[2].q - tr.states[0].q).norm() < 1e-10);
  CHECK((tr.states[4].p - tr.states[0].p).norm() < 1e-10);
  CHECK(tr.diagnostic.empty());

  // generic orbits stay on the boundaries
  std::mt19937_64 rng(52);
  const auto gen = trace(K, T, random_inward_state(K, rng), 50);
  REQUIRE(gen.completed);
  for (const auto& s : gen.states) {
    CHECK(K.gauge(s.q) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.p.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }

  // a tangential start stops the trace with a diagnostic
  const auto stop = trace(ConvexBody::ball(2), T, {vec({1, 0}), vec({0, 1})}, 3);
  CHECK_FALSE(stop.completed);
  CHECK(stop.states.size() == 1);
  CHECK_FALSE(stop.diagnostic.empty());
}

TEST_CASE("momentum towards the next bounce") {
  const auto T = ConvexBody::ball(2);
  CHECK((momentum_towards(T, vec({1, 0}), vec({-1, 0})) - vec({1, 0})).norm() < 1e-14);
  const Vec p = momentum_towards(ConvexBody::ellipsoid_axes(vec({2, 1})), vec({0, 1}), vec({0, -1}));
  CHECK((p - vec({0, 1})).norm() < 1e-12);
}

TEST_CASE("shortest orbits") {
  const auto disc = ConvexBody::ball(2);
  SUBCASE("disc in the Euclidean metric: a diameter of length 4") {
    const auto o = shortest_orbit_direct(disc, disc, 2);
    CHECK(o.length == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(o.effective_bounces == 2);
    CHECK(o.closure_error < 1e-6);
  }
  SUBCASE("ellipse: the minor axis") {
    const auto K = ConvexBody::ellipsoid_axes(vec({2, 1}));
    const auto o = shortest_orbit_range(K, disc, 2, 4);
    CHECK(o.length == doctest::Approx(4.0).epsilon(1e-8));
    for (const auto& q : o.points) CHECK(std::abs(q(0)) < 1e-3);
  }
  SUBCASE("smoothed triangle: the three-bounce orbit is shorter than any two-bounce orbit") {
    const auto tri = ConvexBody::regular_simplex(2);
    const auto K = ConvexBody::polytope(std::get<shapes::Polytope>(tri.variant()).vertices, 16.0);
    const auto two = shortest_orbit_direct(K, disc, 2);
    const auto three = shortest_orbit_direct(K, disc, 3);
    CHECK(three.length < two.length);
    CHECK(three.effective_bounces == 3);
    CHECK(three.closure_error < 1e-5);
    // the orbit of the unsmoothed triangle joins the edge midpoints: half the
    // perimeter, 3 sqrt(3) / 2 for unit circumradius; smoothing inflates it slightly
    CHECK(three.length > 3 * std::sqrt(3.0) / 2);
    CHECK(three.length < 1.1 * 3 * std::sqrt(3.0) / 2);
    CHECK(shortest_orbit_range(K, disc, 2, 3).length == three.length);
  }
  SUBCASE("search configuration") {
    OrbitSearchConfig c;
    c.starts = 0;
    CHECK_THROWS_AS(shortest_orbit_direct(disc, disc, 2, c), ConfigError);
    CHECK_THROWS_AS(shortest_orbit_direct(disc, disc, 1), Error);
    CHECK_THROWS_AS(shortest_orbit_range(disc, disc, 3, 2), Error);
    c.starts = 3;
    const auto a = shortest_orbit_direct(disc, disc, 2, c);
    const auto b = shortest_orbit_direct(disc, disc, 2, c);
    CHECK(a.length == b.length);
    CHECK(a.starts_used == 3);
  }
}

TEST_CASE("two-bounce width agrees with the m = 2 search") {
  const std::vector<std::pair<ConvexBody, ConvexBody>> pairs{
      {ConvexBody::ellipsoid_axes(vec({2, 1})), ConvexBody::ball(2)},
      {ConvexBody::ball(2), ConvexBody::ellipsoid_axes(vec({1, 3}))},
      {ConvexBody::pball(4.0, vec({1.5, 1})), ConvexBody::ellipsoid_axes(vec({2, 1}))},
      {ConvexBody::ellipsoid_axes(vec({1, 2, 1.5})), ConvexBody::ball(3)}};
  for (const auto& [K, T] : pairs) {
    const double tw = t_width_two_bounce(K, T);
    const double search = shortest_orbit_direct(K, T, 2).length;
    CHECK(tw == doctest::Approx(search).epsilon(1e-6));
  }
  // for T the unit ball this is twice the Euclidean width
  CHECK(t_width_two_bounce(ConvexBody::ellipsoid_axes(vec({2, 1})), ConvexBody::ball(2)) ==
        doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("gliding check") {
  const auto disc = ConvexBody::ball(2);
  const auto g = gliding_check(disc, disc, {vec({1, 0}), vec({0, 1})});
  CHECK(g.on_gliding_set);
  CHECK(g.ratio == doctest::Approx(1.0).epsilon(1e-12));
  const auto h = gliding_check(disc, disc, {vec({1, 0}), vec({1, 0})});
  CHECK_FALSE(h.on_gliding_set);
  CHECK(std::abs(h.inner) == doctest::Approx(1.0));
  // K the ellipse x^2/4 + y^2 <= 1 at q = (2, 0), T the unit disc at p = (0, 1):
  // a = (1/2, 0), b = (0, 1), Hess g_K(q) = diag(0, 1), Hess g_T(p) = diag(1, 0)
  const auto r = gliding_check(ConvexBody::ellipsoid_axes(vec({2, 1})), disc, {vec({2, 0}), vec({0, 1})});
  CHECK(r.on_gliding_set);
  CHECK(r.ratio == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(gliding_check(ConvexBody::cube(2), disc, {vec({1, 0}), vec({0, 1})}), CapabilityError);
}

TEST_CASE("orbit output") {
  const auto disc = ConvexBody::ball(2);
  const auto o = shortest_orbit_direct(disc, disc, 2);
  const auto csv = orbit_to_csv(disc, o);
  CHECK(csv.rfind("j,q1,q2,p1,p2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const auto j = o.to_json();
  CHECK(j.at("m") == 2);
  CHECK(j.at("points").size() == 2);
  CHECK(j.at("length").get<double>() == o.length);
}

}  // TEST_SUITE
