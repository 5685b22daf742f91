#include <ehz/geometry.hpp>

#include "sphere_search.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ehz {

namespace {

int grid_size(int n, const GeometryOptions& opts) { return opts.grid > 0 ? opts.grid : detail::default_grid_size(n); }

const shapes::Polytope* plain_polytope(const ConvexBody& body) {
  const auto* p = std::get_if<shapes::Polytope>(&body.variant());
  return (p != nullptr && p->smoothing == 0.0) ? p : nullptr;
}

std::vector<Vec> directions_for(const ConvexBody& body, const GeometryOptions& opts) {
  auto dirs = detail::direction_grid(body.dim(), grid_size(body.dim(), opts), opts.seed);
  if (const auto* p = std::get_if<shapes::Polytope>(&body.variant())) {
    for (const auto& a : p->facets->normals) dirs.push_back(a);
  }
  return dirs;
}

// Maximise F(x) = min_k (h_k - <x, u_k>) over x with the central-cut ellipsoid
// method. F is concave and piecewise linear with supergradient -u_{k*}.
struct CutResult {
  Vec x;
  double value;
};

CutResult chebyshev_cutting(const std::vector<Vec>& dirs, const Vec& hvals, Vec x0, double radius) {
  const auto n = x0.size();
  Mat u(n, static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t k = 0; k < dirs.size(); ++k) u.col(static_cast<Eigen::Index>(k)) = dirs[k];
  auto eval = [&](const Vec& x, Eigen::Index& arg) {
    const Vec slack = hvals - u.transpose() * x;
    return slack.minCoeff(&arg);
  };
  Vec x = std::move(x0);
  Mat p = Mat::Identity(n, n) * radius * radius;
  Eigen::Index arg = 0;
  CutResult best{x, eval(x, arg)};
  const double nn = static_cast<double>(n);
  const int iters = static_cast<int>(70.0 * nn * (nn + 1.0)) + 200;
  for (int it = 0; it < iters; ++it) {
    const double val = eval(x, arg);
    if (val > best.value) best = {x, val};
    const Vec a = u.col(arg);
    const Vec pa = p * a;
    const double apa = a.dot(pa);
    if (!(apa > 1e-300)) break;
    const Vec b = pa / std::sqrt(apa);
    x -= b / (nn + 1.0);
    p = nn * nn / (nn * nn - 1.0) * (p - 2.0 / (nn + 1.0) * b * b.transpose());
    p = 0.5 * (p + p.transpose());
    if (std::sqrt(p.trace()) < 1e-13 * radius) break;
  }
  return best;
}

}  // namespace

ConvexBody polar(const ConvexBody& body) {
  if (!body.origin_interior()) throw OriginNotInteriorError("polar: origin is not interior to the body");
  return std::visit(
      [&](const auto& s) -> ConvexBody {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, shapes::Ellipsoid>) {
          return ConvexBody::ellipsoid(s.shape_inv);
        } else if constexpr (std::is_same_v<S, shapes::PBall>) {
          return ConvexBody::pball(s.p / (s.p - 1.0), s.radii.cwiseInverse());
        } else if constexpr (std::is_same_v<S, shapes::Polytope>) {
          if (s.smoothing != 0.0) throw CapabilityError("polar: smoothed polytope has no closed-form polar");
          std::vector<Vec> verts;
          for (std::size_t j = 0; j < s.facets->normals.size(); ++j)
            verts.push_back(s.facets->normals[j] / s.facets->offsets[j]);
          return ConvexBody::polytope(std::move(verts));
        } else if constexpr (std::is_same_v<S, shapes::Dilate>) {
          return ConvexBody::dilate(1.0 / s.factor, polar(s.body));
        } else if constexpr (std::is_same_v<S, shapes::Linear>) {
          return ConvexBody::linear(s.inverse.transpose(), polar(s.body));
        } else if constexpr (std::is_same_v<S, shapes::Product>) {
          throw CapabilityError("polar: products have no closed-form polar in this library");
        } else {
          throw CapabilityError("polar: no closed-form polar for this body variant");
        }
      },
      body.variant());
}

WidthResult width(const ConvexBody& body, const GeometryOptions& opts) {
  auto f = [&](const Vec& u) { return body.support(u) + body.support(-u); };
  const auto dirs = directions_for(body, opts);
  const auto best = detail::minimize_on_sphere(f, dirs, 8, 1e-12);
  return {best.value, best.u};
}

InradiusResult inradius(const ConvexBody& body, const GeometryOptions& opts) {
  const int n = body.dim();
  Vec lo(n);
  Vec hi(n);
  for (int i = 0; i < n; ++i) {
    hi(i) = body.support(Vec::Unit(n, i));
    lo(i) = -body.support(-Vec::Unit(n, i));
  }
  if (n == 1) return {0.5 * (hi(0) - lo(0)), Vec::Constant(1, 0.5 * (hi(0) + lo(0)))};

  std::vector<Vec> dirs;
  if (const auto* p = plain_polytope(body)) {
    dirs = p->facets->normals;
    Vec h(static_cast<Eigen::Index>(dirs.size()));
    for (std::size_t k = 0; k < dirs.size(); ++k) h(static_cast<Eigen::Index>(k)) = p->facets->offsets[k];
    auto r = chebyshev_cutting(dirs, h, 0.5 * (lo + hi), (hi - lo).norm());
    return {r.value, r.x};
  }

  dirs = directions_for(body, opts);
  Vec x = 0.5 * (lo + hi);
  double radius = (hi - lo).norm();
  double value = 0.0;
  for (int round = 0; round < 4; ++round) {
    Vec h(static_cast<Eigen::Index>(dirs.size()));
    for (std::size_t k = 0; k < dirs.size(); ++k) h(static_cast<Eigen::Index>(k)) = body.support(dirs[k]);
    auto cut = chebyshev_cutting(dirs, h, x, radius);
    x = cut.x;
    // True inner minimum at x: refine the most active directions on the sphere.
    auto f = [&](const Vec& u) { return body.support(u) - x.dot(u); };
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t k = 0; k < dirs.size(); ++k) scored.emplace_back(h(static_cast<Eigen::Index>(k)) - x.dot(dirs[k]), k);
    const std::size_t keep = std::min<std::size_t>(2 * static_cast<std::size_t>(n) + 2, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end());
    const double step = 2.0 * std::pow(static_cast<double>(dirs.size()), -1.0 / (n - 1.0));
    double true_min = cut.value;
    for (std::size_t i = 0; i < keep; ++i) {
      const auto r = detail::refine_on_sphere(f, dirs[scored[i].second], step, 1e-12);
      true_min = std::min(true_min, r.value);
      dirs.push_back(r.u);
    }
    value = true_min;
    if (cut.value - true_min <= 1e-12 * (1.0 + std::abs(cut.value))) break;
    radius = std::max(4.0 * (cut.value - true_min), 1e-6 * (hi - lo).norm());
  }
  return {value, x};
}

ConvexBody minkowski_symmetral(const ConvexBody& body) {
  const int n = body.dim();
  const ConvexBody neg = ConvexBody::linear(-Mat::Identity(n, n), body);
  return ConvexBody::sum(ConvexBody::dilate(0.5, body), ConvexBody::dilate(0.5, neg));
}

VolumeEstimate volume_mc(const ConvexBody& body, long samples, std::uint64_t seed) {
  if (samples <= 0) throw Error("volume_mc: sample count must be positive");
  const ConvexBody b = recenter(body).body;
  const int n = b.dim();
  Vec lo(n);
  Vec hi(n);
  for (int i = 0; i < n; ++i) {
    hi(i) = b.support(Vec::Unit(n, i));
    lo(i) = -b.support(-Vec::Unit(n, i));
  }
  const double box = (hi - lo).prod();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long hits = 0;
  Vec x(n);
  for (long s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unif(rng);
    if (b.gauge(x) <= 1.0) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), samples};
}

Recentered recenter(const ConvexBody& body, const GeometryOptions& opts) {
  if (body.origin_interior()) return {body, Vec::Zero(body.dim()), false};
  const auto in = inradius(body, opts);
  if (!(in.value > 0)) throw Error("recenter: body has empty interior");
  return {ConvexBody::translate(-in.center, body), -in.center, true};
}

bool nested(const ConvexBody& inner, const ConvexBody& outer, double rel_tol, const GeometryOptions& opts) {
  require_dim(outer.dim(), inner.dim(), "nested");
  auto dirs = directions_for(inner, opts);
  for (const auto& u : directions_for(outer, opts)) dirs.push_back(u);
  for (const auto& u : dirs) {
    const double ho = outer.support(u);
    if (inner.support(u) > ho + rel_tol * (1.0 + std::abs(ho))) return false;
  }
  return true;
}

Vec project_onto(const ConvexBody& body, const Vec& y, const GeometryOptions& opts) {
  require_dim(body.dim(), y.size(), "project_onto");
  const int n = body.dim();
  if (n == 1) {
    const double hi = body.support(Vec::Constant(1, 1.0));
    const double lo = -body.support(Vec::Constant(1, -1.0));
    return Vec::Constant(1, std::clamp(y(0), lo, hi));
  }
  auto f = [&](const Vec& w) { return body.support(w) - y.dot(w); };
  const int count = opts.grid > 0 ? opts.grid : (n == 2 ? 64 : 48 * n * n);
  const auto grid = detail::direction_grid(n, count, opts.seed);
  const auto best = detail::minimize_on_sphere(f, grid, 2, 1e-12);
  const double dist = -best.value;
  if (dist <= 0.0) return y;
  return y - dist * best.u;
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

}  // namespace ehz
