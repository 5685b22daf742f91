#include "test_util.hpp"

#include <ehz/body.hpp>
#include <ehz/body_json.hpp>
#include <ehz/geometry.hpp>

#include <doctest.h>

#include <cmath>

using namespace ehz;
using namespace ehz::testing;

TEST_SUITE("bodies") {

TEST_CASE("support: closed forms against brute force") {
  const auto ball = ConvexBody::ball(2);
  CHECK(ball.support(vec({3, 4})) == doctest::Approx(5.0));

  const auto square = ConvexBody::polytope(square_vertices());
  CHECK(square.support(vec({1, 0})) == doctest::Approx(1.0));

  // sup over a dense sample of the boundary {(2 cos t, sin t)}
  const auto ell = ConvexBody::ellipsoid(vec({4, 1}).asDiagonal().toDenseMatrix());
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec u = random_vector(2, rng);
    double best = -1e300;
    for (int i = 0; i < 200000; ++i) {
      const double t = 2 * M_PI * i / 200000.0;
      best = std::max(best, 2 * std::cos(t) * u(0) + std::sin(t) * u(1));
    }
    CHECK(ell.support(u) == doctest::Approx(best).epsilon(1e-8));
  }
  CHECK(ell.support(vec({1, 0})) == doctest::Approx(2.0));
}

TEST_CASE("support: p-ball dual norm against brute force") {
  const auto pb = ConvexBody::pball(4.0, vec({2.0, 1.0}));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec u = random_vector(2, rng);
    double best = -1e300;
    for (int i = 0; i < 200000; ++i) {
      const double t = 2 * M_PI * i / 200000.0;
      // boundary of {|x/2|^4 + |y|^4 <= 1}
      const double c = std::cos(t), s = std::sin(t);
      const double x = 2.0 * std::copysign(std::sqrt(std::abs(c)), c);
      const double y = std::copysign(std::sqrt(std::abs(s)), s);
      best = std::max(best, x * u(0) + y * u(1));
    }
    CHECK(pb.support(u) == doctest::Approx(best).epsilon(1e-7));
  }
}

TEST_CASE("support_gradient examples") {
  CHECK((ConvexBody::ball(2).support_gradient(vec({0, 2})) - vec({0, 1})).norm() < 1e-14);
  const auto square = ConvexBody::polytope(square_vertices());
  CHECK((square.support_gradient(vec({1, 0.5})) - vec({1, 1})).norm() < 1e-14);
  const auto ell = ConvexBody::ellipsoid(vec({4, 1}).asDiagonal().toDenseMatrix());
  const Vec expected = vec({4, 1}) / std::sqrt(5.0);
  CHECK((ell.support_gradient(vec({1, 1})) - expected).norm() < 1e-12);
  const Vec fd = fd_gradient([&](const Vec& u) { return ell.support(u); }, vec({1, 1}));
  CHECK((fd - expected).norm() < 1e-6);
}

TEST_CASE("polytope subgradient tie-break and subdifferential") {
  const auto square = ConvexBody::polytope(square_vertices());
  // u = (1,0): vertices (1,1) [index 0] and (1,-1) [index 3] tie
  CHECK((square.support_gradient(vec({1, 0})) - vec({1, 1})).norm() < 1e-14);
  const auto subs = square.support_subgradients(vec({1, 0}));
  CHECK(subs.size() == 2);
}

TEST_CASE("gauge examples") {
  const auto ball = ConvexBody::ball(2);
  CHECK(ball.gauge(vec({3, 4})) == doctest::Approx(5.0));
  CHECK(ConvexBody::dilate(2.0, ball).gauge(vec({3, 4})) == doctest::Approx(2.5));
  CHECK(ConvexBody::sum(ball, ball).gauge(vec({0, 1})) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(ball.gauge(Vec::Zero(2)) == 0.0);
}

TEST_CASE("gauge of sums agrees with the closed-form dilate") {
  std::mt19937_64 rng(9);
  for (const auto& [name, body] : variant_zoo(3)) {
    CAPTURE(name);
    const auto twice = ConvexBody::sum(body, body);
    const auto dil = ConvexBody::dilate(2.0, body);
    for (int t = 0; t < 5; ++t) {
      const Vec x = random_vector(3, rng);
      CHECK(twice.gauge(x) == doctest::Approx(dil.gauge(x)).epsilon(1e-8));
    }
  }
}

TEST_CASE("gauge membership matches an independent test") {
  std::mt19937_64 rng(11);
  const auto cube = ConvexBody::cube(3);
  const auto ell = ConvexBody::ellipsoid_axes(vec({2, 1, 0.5}));
  for (int t = 0; t < 200; ++t) {
    const Vec x = random_vector(3, rng);
    CHECK(cube.gauge(x) == doctest::Approx(x.cwiseAbs().maxCoeff()).epsilon(1e-12));
    const double q = std::sqrt(std::pow(x(0) / 2, 2) + std::pow(x(1), 2) + std::pow(x(2) / 0.5, 2));
    CHECK(ell.gauge(x) == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("gauge gradient and Hessian examples") {
  const auto ball = ConvexBody::ball(2);
  CHECK((ball.gauge_gradient(vec({1, 0})) - vec({1, 0})).norm() < 1e-14);
  Mat expected = Mat::Zero(2, 2);
  expected(1, 1) = 1.0;
  CHECK((ball.gauge_hessian(vec({1, 0})) - expected).norm() < 1e-14);
  const auto ell = ConvexBody::ellipsoid(vec({4, 1}).asDiagonal().toDenseMatrix());
  CHECK((ell.gauge_gradient(vec({2, 0})) - vec({0.5, 0})).norm() < 1e-12);
  const Vec fd = fd_gradient([&](const Vec& x) { return ell.gauge(x); }, vec({2, 0}));
  CHECK((fd - vec({0.5, 0})).norm() < 1e-6);
}

TEST_CASE("homogeneity and subadditivity on every variant") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> scale(1e-3, 10.0);
  for (const int n : {2, 3}) {
    for (const auto& [name, body] : variant_zoo(n)) {
      CAPTURE(name);
      for (int t = 0; t < 25; ++t) {
        const Vec u = random_vector(n, rng);
        const Vec v = random_vector(n, rng);
        const double c = scale(rng);
        const double hcu = body.support(c * u);
        CHECK(std::abs(hcu - c * body.support(u)) <= 1e-12 * (1 + std::abs(hcu)));
        CHECK(body.support(u + v) <= body.support(u) + body.support(v) + 1e-12);
        const double gcx = body.gauge(c * u);
        CHECK(std::abs(gcx - c * body.gauge(u)) <= 1e-9 * (1 + gcx));
      }
    }
  }
}

TEST_CASE("Euler identities and boundary property of support gradients") {
  std::mt19937_64 rng(17);
  for (const int n : {2, 3}) {
    for (const auto& [name, body] : variant_zoo(n)) {
      CAPTURE(name);
      for (int t = 0; t < 20; ++t) {
        const Vec u = random_vector(n, rng);
        const Vec g = body.support_gradient(u);
        CHECK(g.dot(u) == doctest::Approx(body.support(u)).epsilon(1e-9));
        if (body.smooth_support()) CHECK(body.gauge(g) == doctest::Approx(1.0).epsilon(1e-7));
        const Vec x = random_vector(n, rng);
        if (body.closed_form_gauge() && name.find("polytope") == std::string::npos) {
          CHECK(body.gauge_gradient(x).dot(x) == doctest::Approx(body.gauge(x)).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("derivative oracles match finite differences") {
  std::mt19937_64 rng(19);
  for (const int n : {2, 3}) {
    for (const auto& [name, body] : variant_zoo(n)) {
      if (!body.smooth_support()) continue;
      CAPTURE(name);
      for (int t = 0; t < 10; ++t) {
        const Vec u = random_unit(n, rng);
        const Vec fd = fd_gradient([&](const Vec& w) { return body.support(w); }, u);
        const Vec g = body.support_gradient(u);
        CHECK((fd - g).norm() <= 1e-6 * std::max(1.0, g.norm()));
        if (body.has_support_hessian()) {
          const Mat fh = fd_jacobian([&](const Vec& w) { return body.support_gradient(w); }, u);
          CHECK((fh - body.support_hessian(u)).norm() <= 1e-5 * std::max(1.0, fh.norm()));
        }
        if (body.has_gauge_hessian()) {
          const Vec x = random_vector(n, rng);
          const Vec gg = fd_gradient([&](const Vec& y) { return body.gauge(y); }, x);
          CHECK((gg - body.gauge_gradient(x)).norm() <= 1e-6 * std::max(1.0, gg.norm()));
          const Mat gh = fd_jacobian([&](const Vec& y) { return body.gauge_gradient(y); }, x);
          const Mat H = body.gauge_hessian(x);
          CHECK((gh - H).norm() <= 1e-5 * std::max(1.0, gh.norm()));
          CHECK((H * x).norm() <= 1e-9 * std::max(1.0, H.norm() * x.norm()));
        }
      }
    }
  }
}

TEST_CASE("gauge-support duality through the polar") {
  std::mt19937_64 rng(23);
  std::vector<ConvexBody> bodies{ConvexBody::ball(3), ConvexBody::ellipsoid_axes(vec({2, 1, 0.5})),
                                 ConvexBody::pball(3.0, vec({1, 2, 1})), ConvexBody::cube(3),
                                 ConvexBody::dilate(2.0, ConvexBody::ellipsoid_axes(vec({1, 3, 1}))),
                                 ConvexBody::linear(Mat::Identity(3, 3) * 1.5, ConvexBody::pball(4.0, Vec::Ones(3)))};
  for (const auto& body : bodies) {
    const auto pol = polar(body);
    for (int t = 0; t < 20; ++t) {
      const Vec x = random_vector(3, rng);
      CHECK(std::abs(body.gauge(x) - pol.support(x)) <= 1e-9 * (1 + body.gauge(x)));
      CHECK(std::abs(pol.gauge(x) - body.support(x)) <= 1e-9 * (1 + body.support(x)));
    }
  }
}

TEST_CASE("Lagrangian product identities") {
  const auto K = ConvexBody::ellipsoid_axes(vec({2, 1}));
  const auto T = ConvexBody::pball(4.0, vec({1, 1}));
  const LagrangianProduct P{K, T};
  const auto body = P.body();
  std::mt19937_64 rng(29);
  for (int t = 0; t < 20; ++t) {
    const Vec u = random_vector(4, rng);
    CHECK(P.support(u) == doctest::Approx(K.support(u.head(2)) + T.support(u.tail(2))));
    CHECK(body.support(u) == doctest::Approx(P.support(u)));
    CHECK(P.gauge(u) == doctest::Approx(std::max(K.gauge(u.head(2)), T.gauge(u.tail(2)))));
    CHECK(body.gauge(u) == doctest::Approx(P.gauge(u)));
  }
}

TEST_CASE("JSON round trip is lossless") {
  std::mt19937_64 rng(31);
  for (const auto& [name, body] : variant_zoo(3)) {
    CAPTURE(name);
    const auto j = body_to_json(body);
    const auto back = body_from_json(nlohmann::json::parse(j.dump()));
    CHECK(body_to_json(back) == j);
    for (int t = 0; t < 5; ++t) {
      const Vec u = random_vector(3, rng);
      CHECK(back.support(u) == body.support(u));
    }
  }
  const auto prod = ConvexBody::product(ConvexBody::ball(2), ConvexBody::cube(2));
  CHECK(body_to_json(body_from_json(body_to_json(prod))) == body_to_json(prod));
  const auto ball = body_from_json(nlohmann::json{{"type", "ball"}, {"dim", 2}, {"radius", 3.0}});
  CHECK(ball.support(vec({0, 1})) == doctest::Approx(3.0));
}

TEST_CASE("errors") {
  const auto ball = ConvexBody::ball(2);
  CHECK_THROWS_AS((void)ball.support(vec({1, 2, 3})), DimensionError);
  CHECK_THROWS_AS((void)ball.support_gradient(Vec::Zero(2)), UndefinedDirectionError);
  const auto off = ConvexBody::translate(vec({5, 0}), ball);
  CHECK_THROWS_AS((void)off.gauge(vec({1, 0})), OriginNotInteriorError);
  CHECK_THROWS_AS((void)ConvexBody::cube(2).gauge_hessian(vec({1, 0.3})), CapabilityError);
  CHECK_THROWS_AS((void)ConvexBody::cube(2).support_hessian(vec({1, 0.3})), CapabilityError);
  CHECK_THROWS_AS(body_from_json(nlohmann::json{{"type", "torus"}}), ConfigError);
  CHECK_THROWS_AS(body_from_json(nlohmann::json{{"type", "ellipsoid"}}), ConfigError);
  CHECK_THROWS(ConvexBody::pball(1.0, vec({1, 1})));
  CHECK_THROWS(ConvexBody::dilate(-1.0, ball));
  CHECK_THROWS_AS(ConvexBody::sum(ball, ConvexBody::ball(3)), DimensionError);
}

}  // TEST_SUITE
