#pragma once

#include <ehz/types.hpp>

#include <memory>
#include <variant>
#include <vector>

namespace ehz {

namespace detail {
struct BodyNode;
}

namespace shapes {
struct Ellipsoid;
struct PBall;
struct Polytope;
struct Sum;
struct Dilate;
struct Translate;
struct Linear;
struct Product;
}  // namespace shapes

using BodyVariant = std::variant<shapes::Ellipsoid, shapes::PBall, shapes::Polytope, shapes::Sum,
                                 shapes::Dilate, shapes::Translate, shapes::Linear, shapes::Product>;

/// A compact convex body in R^n described by its support function.
///
/// Bodies are immutable values with shared structure: copying a ConvexBody
/// copies a pointer, and every oracle is a pure function that is safe to call
/// from concurrent threads.
///
/// The support function h(u) = sup_{x in K} <x,u> is always available. The
/// gauge g(x) = inf{r > 0 : x in rK} requires the origin in the interior; it
/// is closed-form for ellipsoids, p-balls, polytopes (via facets) and affine
/// images of those, and otherwise computed as 1 / min{h(u) : <x,u> = 1}.
class ConvexBody {
 public:
  // -- constructors -------------------------------------------------------

  /// {x : x^T Q^{-1} x <= 1}; Q symmetric positive definite.
  static ConvexBody ellipsoid(const Mat& shape);
  /// Axis-aligned ellipsoid with the given semi-axes.
  static ConvexBody ellipsoid_axes(const Vec& semi_axes);
  /// {x : sum |x_i / r_i|^p <= 1} for p in (1, inf).
  static ConvexBody pball(double p, const Vec& radii);
  static ConvexBody ball(int dim, double radius = 1.0);
  /// conv(vertices). `smoothing` > 0 replaces max_i <v_i,u> by the p-norm of
  /// the positive parts (exponent = smoothing), which gives a strictly convex
  /// outer approximation; requires the origin in the interior.
  static ConvexBody polytope(std::vector<Vec> vertices, double smoothing = 0.0);
  static ConvexBody cube(int dim, double half_side = 1.0);
  /// Regular simplex inscribed in the unit sphere, centred at the origin.
  static ConvexBody regular_simplex(int dim);
  static ConvexBody sum(const ConvexBody& a, const ConvexBody& b);
  static ConvexBody dilate(double factor, const ConvexBody& body);
  static ConvexBody translate(const Vec& shift, const ConvexBody& body);
  /// Image A(K) for invertible A.
  static ConvexBody linear(const Mat& map, const ConvexBody& body);
  /// Cartesian product K x T in R^{dim K + dim T}.
  static ConvexBody product(const ConvexBody& q_body, const ConvexBody& p_body);

  // -- structure ----------------------------------------------------------

  [[nodiscard]] int dim() const;
  [[nodiscard]] const BodyVariant& variant() const;
  [[nodiscard]] bool is_product() const;
  /// Support function differentiable on R^n \ {0}.
  [[nodiscard]] bool smooth_support() const;
  /// Gauge (and its derivatives) available in closed form.
  [[nodiscard]] bool closed_form_gauge() const;
  /// Gauge Hessian available (closed-form gauge over twice differentiable variants).
  [[nodiscard]] bool has_gauge_hessian() const;
  [[nodiscard]] bool has_support_hessian() const;
  /// Cached test that the origin lies in the interior.
  [[nodiscard]] bool origin_interior() const;

  // -- oracles ------------------------------------------------------------

  [[nodiscard]] double support(const Vec& u) const;
  /// Gradient of h at u != 0: the boundary point with outward normal u. For
  /// nonsmooth variants an element of the subdifferential (polytopes: the
  /// lowest-index maximising vertex).
  [[nodiscard]] Vec support_gradient(const Vec& u) const;
  [[nodiscard]] Mat support_hessian(const Vec& u) const;
  /// Generators whose convex hull is the subdifferential of h at u. Vertices
  /// within `rel_tol * (1 + |h(u)|)` of the maximum count as active.
  [[nodiscard]] std::vector<Vec> support_subgradients(const Vec& u, double rel_tol = 1e-9) const;

  [[nodiscard]] double gauge(const Vec& x) const;
  [[nodiscard]] Vec gauge_gradient(const Vec& x) const;
  [[nodiscard]] Mat gauge_hessian(const Vec& x) const;

  [[nodiscard]] bool contains(const Vec& x, double tol = 0.0) const { return gauge(x) <= 1.0 + tol; }

 private:
  explicit ConvexBody(std::shared_ptr<const detail::BodyNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::BodyNode> node_;
};

namespace shapes {

struct Ellipsoid {
  Mat shape;
  Mat shape_inv;
};

struct PBall {
  double p;
  Vec radii;
};

/// Facet description {x : <a_j, x> <= b_j}, unit normals.
struct Facets {
  std::vector<Vec> normals;
  std::vector<double> offsets;
};

struct Polytope {
  std::vector<Vec> vertices;
  double smoothing = 0.0;
  std::shared_ptr<const Facets> facets;
};

struct Sum {
  ConvexBody a;
  ConvexBody b;
};

struct Dilate {
  double factor;
  ConvexBody body;
};

struct Translate {
  Vec shift;
  ConvexBody body;
};

struct Linear {
  Mat map;
  Mat inverse;
  ConvexBody body;
};

struct Product {
  ConvexBody q_body;
  ConvexBody p_body;
};

}  // namespace shapes

/// Facets of conv(vertices) by enumeration of affinely independent vertex
/// subsets. Throws CapabilityError when the enumeration would be too large
/// and Error when the hull is not full dimensional.
shapes::Facets polytope_facets(const std::vector<Vec>& vertices);

/// The body K x T in R^{2n} with K in configuration space and T in momentum space.
struct LagrangianProduct {
  ConvexBody K;
  ConvexBody T;

  LagrangianProduct(ConvexBody k, ConvexBody t);

  [[nodiscard]] int n() const { return K.dim(); }
  [[nodiscard]] ConvexBody body() const { return ConvexBody::product(K, T); }
  [[nodiscard]] double support(const Vec& u) const;
  [[nodiscard]] double gauge(const Vec& x) const;
};

}  // namespace ehz
