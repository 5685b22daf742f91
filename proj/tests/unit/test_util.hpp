#pragma once

#include <ehz/body.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ehz::testing {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const double x : xs) v(i++) = x;
  return v;
}

inline Vec random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * g(rng);
  return v;
}

inline Vec random_unit(int n, std::mt19937_64& rng) {
  Vec v = random_vector(n, rng);
  return v / v.norm();
}

/// Central finite-difference gradient.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

/// Central finite-difference Jacobian of a vector field (columns = partials).
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    J.col(i) = (f(a) - f(b)) / (2 * h);
  }
  return J;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Polygon area by the shoelace formula (points in order).
inline double shoelace(const std::vector<Vec>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec& p = pts[i];
    const Vec& q = pts[(i + 1) % pts.size()];
    a += p(0) * q(1) - p(1) * q(0);
  }
  return 0.5 * std::abs(a);
}

inline std::vector<Vec> square_vertices(double s = 1.0) {
  return {vec({s, s}), vec({-s, s}), vec({-s, -s}), vec({s, -s})};
}

/// One body of every variant (all containing the origin in the interior).
inline std::vector<std::pair<std::string, ConvexBody>> variant_zoo(int n) {
  std::vector<std::pair<std::string, ConvexBody>> out;
  Mat q = Mat::Identity(n, n);
  q(0, 0) = 4.0;
  if (n > 1) q(0, 1) = q(1, 0) = 0.5;
  const auto ell = ConvexBody::ellipsoid(q);
  Vec radii = Vec::Ones(n);
  radii(0) = 2.0;
  const auto pb = ConvexBody::pball(3.0, radii);
  const auto cube = ConvexBody::cube(n);
  Mat map = Mat::Identity(n, n);
  map(0, n - 1) = 0.7;
  map(n - 1, n - 1) = 1.5;
  Vec shift = Vec::Constant(n, 0.1);
  out.emplace_back("ellipsoid", ell);
  out.emplace_back("pball", pb);
  out.emplace_back("polytope", cube);
  out.emplace_back("polytope-smoothed", ConvexBody::polytope(std::get<shapes::Polytope>(cube.variant()).vertices, 12.0));
  out.emplace_back("sum", ConvexBody::sum(ell, pb));
  out.emplace_back("dilate", ConvexBody::dilate(1.7, pb));
  out.emplace_back("translate", ConvexBody::translate(shift, ell));
  out.emplace_back("linear", ConvexBody::linear(map, ell));
  return out;
}

}  // namespace ehz::testing
