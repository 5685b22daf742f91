#include <ehz/body.hpp>

#include "sphere_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

namespace ehz {

namespace detail {

struct BodyNode {
  int dim = 0;
  BodyVariant variant;
  bool smooth = false;
  bool closed_gauge = false;
  bool gauge_hess = false;
  mutable std::once_flag origin_once;
  mutable bool origin_interior = false;

  BodyNode(int d, BodyVariant v) : dim(d), variant(std::move(v)) {}
};

}  // namespace detail

namespace {

using detail::BodyNode;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kTiny = 1e-300;

bool is_spd(const Mat& q) {
  if (q.rows() != q.cols() || q.rows() == 0) return false;
  if (!q.isApprox(q.transpose(), 1e-12)) return false;
  Eigen::LLT<Mat> llt(q);
  return llt.info() == Eigen::Success;
}

// p-norm style function f(w) = (sum |w_i|^e)^{1/e} with e in (1, inf) and its
// derivatives, evaluated in a scale-safe way.
double pnorm(const Vec& w, double e) {
  if (e == 2.0) return w.norm();
  const double m = w.cwiseAbs().maxCoeff();
  if (m <= 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) s += std::pow(std::abs(w(i)) / m, e);
  return m * std::pow(s, 1.0 / e);
}

Vec pnorm_gradient(const Vec& w, double e, double f) {
  if (e == 2.0) return w / f;
  Vec g(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double r = std::abs(w(i)) / f;
    g(i) = (w(i) >= 0 ? 1.0 : -1.0) * (r > 0 ? std::pow(r, e - 1.0) : 0.0);
  }
  return g;
}

Mat pnorm_hessian(const Vec& w, double e, double f, const Vec& grad) {
  Mat h = -grad * grad.transpose();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double r = std::abs(w(i)) / f;
    if (r > 0 || e == 2.0) h(i, i) += std::pow(r, e - 2.0);  // pow(0, 0) = 1
    else if (e < 2.0) h(i, i) = std::numeric_limits<double>::infinity();
  }
  return (e - 1.0) / f * h;
}

// -- smoothed polytope support ---------------------------------------------

double smooth_poly_support(const shapes::Polytope& p, const Vec& u) {
  double m = 0.0;
  for (const auto& v : p.vertices) m = std::max(m, v.dot(u));
  if (m <= 0.0) return 0.0;
  double s = 0.0;
  for (const auto& v : p.vertices) {
    const double a = std::max(v.dot(u), 0.0) / m;
    if (a > 0) s += std::pow(a, p.smoothing);
  }
  return m * std::pow(s, 1.0 / p.smoothing);
}

Vec smooth_poly_gradient(const shapes::Polytope& p, const Vec& u, double h) {
  Vec g = Vec::Zero(u.size());
  for (const auto& v : p.vertices) {
    const double a = std::max(v.dot(u), 0.0) / h;
    if (a > 0) g += std::pow(a, p.smoothing - 1.0) * v;
  }
  return g;
}

Mat smooth_poly_hessian(const shapes::Polytope& p, const Vec& u, double h, const Vec& g) {
  Mat m = -g * g.transpose();
  for (const auto& v : p.vertices) {
    const double a = std::max(v.dot(u), 0.0) / h;
    if (a > 0) m += std::pow(a, p.smoothing - 2.0) * v * v.transpose();
  }
  return (p.smoothing - 1.0) / h * m;
}

// -- generic gauge via convex minimisation on a hyperplane ------------------
//
// For a body with the origin in its interior, g(x) = 1 / min{h(u) : <x,u> = 1}
// and the minimiser u* is a normal at the boundary point x / g(x), so
// grad g(x) = u* / h(u*).

struct HyperplaneMin {
  double value;
  Vec u;
};

HyperplaneMin minimize_support_on_hyperplane(const ConvexBody& body, const Vec& x) {
  const Eigen::Index n = x.size();
  const double xn2 = x.squaredNorm();
  const Vec u0 = x / xn2;
  if (n == 1) return {body.support(u0), u0};
  const Mat basis = detail::tangent_basis(x);
  const bool newton = body.has_support_hessian();
  Vec w = Vec::Zero(n - 1);
  auto point = [&](const Vec& ww) -> Vec { return u0 + basis * ww; };
  Vec u = point(w);
  double f = body.support(u);
  Vec grad = basis.transpose() * body.support_gradient(u);
  Mat hinv = Mat::Identity(n - 1, n - 1) * (1.0 / std::max(f, kTiny)) * xn2;
  const double scale = 1.0 / std::sqrt(xn2);
  for (int it = 0; it < 200; ++it) {
    if (grad.norm() <= 1e-15 * (1.0 + std::abs(f) / scale)) break;
    Vec dir;
    if (newton) {
      const Mat hess = basis.transpose() * body.support_hessian(u) * basis;
      Eigen::LDLT<Mat> ldlt(hess + 1e-14 * (1.0 + hess.norm()) * Mat::Identity(n - 1, n - 1));
      dir = -ldlt.solve(grad);
      if (!dir.allFinite() || dir.dot(grad) >= 0) dir = -grad;
    } else {
      dir = -hinv * grad;
      if (dir.dot(grad) >= 0) {
        hinv.setIdentity();
        dir = -grad;
      }
    }
    double t = 1.0;
    const double slope = grad.dot(dir);
    Vec wn;
    double fn = f;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      wn = w + t * dir;
      fn = body.support(point(wn));
      if (fn <= f + 1e-4 * t * slope) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) break;
    const Vec un = point(wn);
    const Vec gn = basis.transpose() * body.support_gradient(un);
    if (!newton) {
      const Vec s = wn - w;
      const Vec y = gn - grad;
      const double sy = s.dot(y);
      if (sy > 1e-300) {
        const double rho = 1.0 / sy;
        const Mat eye = Mat::Identity(n - 1, n - 1);
        hinv = (eye - rho * s * y.transpose()) * hinv * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
      }
    }
    const double decrease = f - fn;
    w = wn;
    u = un;
    f = fn;
    grad = gn;
    if (decrease <= 1e-16 * std::abs(f) && t * dir.norm() <= 1e-14 * (1.0 + w.norm())) break;
  }
  return {f, u};
}

// -- translate gauge: the root of r = g_B(x - r v) ----------------------------

struct TranslateRoot {
  double r;
  Vec y;
};

TranslateRoot translate_gauge_root(const shapes::Translate& t, const Vec& x) {
  const ConvexBody& b = t.body;
  const Vec& v = t.shift;
  const double gx = b.gauge(x);
  if (gx <= 0.0) return {0.0, x};
  const double gmv = b.gauge(-v);
  const double gv = b.gauge(v);
  double lo = gx / (1.0 + gv);
  double hi = gx / (1.0 - gmv);
  // phi(r) = g_B(x - r v) - r is strictly decreasing with phi(lo) >= 0 >= phi(hi).
  double r = hi;
  for (int it = 0; it < 200; ++it) {
    const Vec y = x - r * v;
    const double phi = b.gauge(y) - r;
    if (phi > 0) lo = r; else hi = r;
    if (std::abs(phi) <= 1e-15 * (1.0 + r) || hi - lo <= 1e-15 * hi) break;
    const double slope = -b.gauge_gradient(y).dot(v) - 1.0;
    double rn = r - phi / slope;
    if (!(rn > lo && rn < hi)) rn = 0.5 * (lo + hi);
    r = rn;
  }
  return {r, x - r * v};
}

std::vector<Vec> cartesian_sums(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  std::vector<Vec> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x + y);
  return out;
}

bool generic_origin_interior(const ConvexBody& body) {
  const int n = body.dim();
  const auto grid = detail::direction_grid(n, detail::default_grid_size(n));
  double hmax = 0.0;
  for (const auto& u : grid) hmax = std::max(hmax, std::abs(body.support(u)));
  auto f = [&](const Vec& u) { return body.support(u); };
  const auto best = detail::minimize_on_sphere(f, grid, 4, 1e-10);
  return best.value > 1e-10 * std::max(hmax, kTiny);
}

std::shared_ptr<BodyNode> make_node(int dim, BodyVariant v) { return std::make_shared<BodyNode>(dim, std::move(v)); }

}  // namespace

// ---------------------------------------------------------------------------
// constructors

ConvexBody ConvexBody::ellipsoid(const Mat& shape) {
  if (!is_spd(shape)) throw Error("ellipsoid: shape matrix must be symmetric positive definite");
  const Mat sym = 0.5 * (shape + shape.transpose());
  Mat inv = sym.inverse();
  inv = 0.5 * (inv + inv.transpose());
  auto node = make_node(static_cast<int>(shape.rows()), shapes::Ellipsoid{sym, inv});
  node->smooth = node->closed_gauge = node->gauge_hess = true;
  return ConvexBody(node);
}

ConvexBody ConvexBody::ellipsoid_axes(const Vec& semi_axes) {
  if (semi_axes.size() == 0 || (semi_axes.array() <= 0).any()) throw Error("ellipsoid: semi-axes must be positive");
  return ellipsoid(semi_axes.array().square().matrix().asDiagonal());
}

ConvexBody ConvexBody::pball(double p, const Vec& radii) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error("pball: exponent must lie in (1, inf)");
  if (radii.size() == 0 || (radii.array() <= 0).any()) throw Error("pball: radii must be positive");
  auto node = make_node(static_cast<int>(radii.size()), shapes::PBall{p, radii});
  node->smooth = node->closed_gauge = node->gauge_hess = true;
  return ConvexBody(node);
}

ConvexBody ConvexBody::ball(int dim, double radius) {
  if (dim <= 0) throw DimensionError("ball: dimension must be positive");
  return pball(2.0, Vec::Constant(dim, radius));
}

ConvexBody ConvexBody::polytope(std::vector<Vec> vertices, double smoothing) {
  if (vertices.empty()) throw Error("polytope: no vertices");
  const auto n = vertices.front().size();
  if (n == 0) throw DimensionError("polytope: zero-dimensional vertices");
  for (const auto& v : vertices) require_dim(n, v.size(), "polytope vertex");
  if (smoothing != 0.0 && !(smoothing > 1.0)) throw Error("polytope: smoothing exponent must be > 1 (or 0 for none)");
  auto facets = std::make_shared<const shapes::Facets>(polytope_facets(vertices));
  if (smoothing > 0.0) {
    for (double b : facets->offsets)
      if (b <= 0.0) throw OriginNotInteriorError("polytope: smoothing requires the origin in the interior");
  }
  auto node = make_node(static_cast<int>(n), shapes::Polytope{std::move(vertices), smoothing, facets});
  node->smooth = smoothing > 0.0;
  node->closed_gauge = smoothing == 0.0;
  node->gauge_hess = false;
  return ConvexBody(node);
}

ConvexBody ConvexBody::cube(int dim, double half_side) {
  if (dim <= 0 || dim > 20) throw DimensionError("cube: dimension out of range");
  if (!(half_side > 0)) throw Error("cube: half side must be positive");
  std::vector<Vec> verts;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = (mask >> i & 1) ? half_side : -half_side;
    verts.push_back(v);
  }
  return polytope(std::move(verts));
}

ConvexBody ConvexBody::regular_simplex(int dim) {
  if (dim <= 0) throw DimensionError("regular_simplex: dimension must be positive");
  // Standard basis of R^{n+1}, centred and expressed in an orthonormal basis of
  // the hyperplane sum x_i = 0, then scaled to unit circumradius.
  const int m = dim + 1;
  Mat e = Mat::Identity(m, m) - Mat::Constant(m, m, 1.0 / m);
  const Vec ones = Vec::Ones(m) / std::sqrt(static_cast<double>(m));
  const Mat basis = detail::tangent_basis(ones);  // m x dim
  std::vector<Vec> verts;
  for (int i = 0; i < m; ++i) {
    Vec v = basis.transpose() * e.col(i);
    verts.push_back(v / v.norm());
  }
  return polytope(std::move(verts));
}

ConvexBody ConvexBody::sum(const ConvexBody& a, const ConvexBody& b) {
  require_dim(a.dim(), b.dim(), "sum");
  auto node = make_node(a.dim(), shapes::Sum{a, b});
  node->smooth = a.smooth_support() && b.smooth_support();
  node->closed_gauge = false;
  node->gauge_hess = false;
  return ConvexBody(node);
}

ConvexBody ConvexBody::dilate(double factor, const ConvexBody& body) {
  if (!(factor > 0) || !std::isfinite(factor)) throw Error("dilate: factor must be positive");
  auto node = make_node(body.dim(), shapes::Dilate{factor, body});
  node->smooth = body.smooth_support();
  node->closed_gauge = body.closed_form_gauge();
  node->gauge_hess = body.has_gauge_hessian();
  return ConvexBody(node);
}

ConvexBody ConvexBody::translate(const Vec& shift, const ConvexBody& body) {
  require_dim(body.dim(), shift.size(), "translate");
  auto node = make_node(body.dim(), shapes::Translate{shift, body});
  node->smooth = body.smooth_support();
  node->closed_gauge = body.closed_form_gauge();
  node->gauge_hess = body.has_gauge_hessian();
  return ConvexBody(node);
}

ConvexBody ConvexBody::linear(const Mat& map, const ConvexBody& body) {
  require_dim(body.dim(), map.cols(), "linear");
  require_dim(body.dim(), map.rows(), "linear");
  Eigen::FullPivLU<Mat> lu(map);
  if (!lu.isInvertible()) throw Error("linear: map must be invertible");
  auto node = make_node(body.dim(), shapes::Linear{map, lu.inverse(), body});
  node->smooth = body.smooth_support();
  node->closed_gauge = body.closed_form_gauge();
  node->gauge_hess = body.has_gauge_hessian();
  return ConvexBody(node);
}

ConvexBody ConvexBody::product(const ConvexBody& q_body, const ConvexBody& p_body) {
  auto node = make_node(q_body.dim() + p_body.dim(), shapes::Product{q_body, p_body});
  node->smooth = false;
  node->closed_gauge = q_body.closed_form_gauge() && p_body.closed_form_gauge();
  node->gauge_hess = false;
  return ConvexBody(node);
}

// ---------------------------------------------------------------------------
// structure

int ConvexBody::dim() const { return node_->dim; }
const BodyVariant& ConvexBody::variant() const { return node_->variant; }
bool ConvexBody::is_product() const { return std::holds_alternative<shapes::Product>(node_->variant); }
bool ConvexBody::smooth_support() const { return node_->smooth; }
bool ConvexBody::closed_form_gauge() const { return node_->closed_gauge; }
bool ConvexBody::has_gauge_hessian() const { return node_->gauge_hess; }
bool ConvexBody::has_support_hessian() const { return node_->smooth; }

bool ConvexBody::origin_interior() const {
  std::call_once(node_->origin_once, [this] {
    node_->origin_interior = std::visit(
        Overloaded{
            [](const shapes::Ellipsoid&) { return true; },
            [](const shapes::PBall&) { return true; },
            [](const shapes::Polytope& p) {
              return std::all_of(p.facets->offsets.begin(), p.facets->offsets.end(),
                                 [](double b) { return b > 1e-12; });
            },
            [this](const shapes::Sum& s) {
              if (s.a.origin_interior() && s.b.origin_interior()) return true;
              return generic_origin_interior(*this);
            },
            [](const shapes::Dilate& d) { return d.body.origin_interior(); },
            [this](const shapes::Translate& t) {
              if (!t.body.origin_interior()) return generic_origin_interior(*this);
              return t.body.gauge(-t.shift) < 1.0 - 1e-12;
            },
            [](const shapes::Linear& l) { return l.body.origin_interior(); },
            [](const shapes::Product& p) { return p.q_body.origin_interior() && p.p_body.origin_interior(); },
        },
        node_->variant);
  });
  return node_->origin_interior;
}

// ---------------------------------------------------------------------------
// support oracles

double ConvexBody::support(const Vec& u) const {
  require_dim(dim(), u.size(), "support");
  return std::visit(
      Overloaded{
          [&](const shapes::Ellipsoid& e) { return std::sqrt(std::max(0.0, u.dot(e.shape * u))); },
          [&](const shapes::PBall& b) {
            return pnorm(b.radii.cwiseProduct(u), b.p / (b.p - 1.0));
          },
          [&](const shapes::Polytope& p) {
            if (p.smoothing > 0) return smooth_poly_support(p, u);
            double m = -std::numeric_limits<double>::infinity();
            for (const auto& v : p.vertices) m = std::max(m, v.dot(u));
            return m;
          },
          [&](const shapes::Sum& s) { return s.a.support(u) + s.b.support(u); },
          [&](const shapes::Dilate& d) { return d.factor * d.body.support(u); },
          [&](const shapes::Translate& t) { return t.body.support(u) + t.shift.dot(u); },
          [&](const shapes::Linear& l) { return l.body.support(l.map.transpose() * u); },
          [&](const shapes::Product& p) {
            const int n = p.q_body.dim();
            return p.q_body.support(u.head(n)) + p.p_body.support(u.tail(p.p_body.dim()));
          },
      },
      node_->variant);
}

Vec ConvexBody::support_gradient(const Vec& u) const {
  require_dim(dim(), u.size(), "support_gradient");
  if (u.squaredNorm() == 0.0) throw UndefinedDirectionError("support_gradient: zero direction");
  return std::visit(
      Overloaded{
          [&](const shapes::Ellipsoid& e) -> Vec {
            const Vec qu = e.shape * u;
            return qu / std::sqrt(u.dot(qu));
          },
          [&](const shapes::PBall& b) -> Vec {
            const double q = b.p / (b.p - 1.0);
            const Vec w = b.radii.cwiseProduct(u);
            return b.radii.cwiseProduct(pnorm_gradient(w, q, pnorm(w, q)));
          },
          [&](const shapes::Polytope& p) -> Vec {
            if (p.smoothing > 0) return smooth_poly_gradient(p, u, smooth_poly_support(p, u));
            std::size_t best = 0;
            double m = p.vertices[0].dot(u);
            for (std::size_t i = 1; i < p.vertices.size(); ++i) {
              const double val = p.vertices[i].dot(u);
              if (val > m) {
                m = val;
                best = i;
              }
            }
            return p.vertices[best];
          },
          [&](const shapes::Sum& s) -> Vec { return s.a.support_gradient(u) + s.b.support_gradient(u); },
          [&](const shapes::Dilate& d) -> Vec { return d.factor * d.body.support_gradient(u); },
          [&](const shapes::Translate& t) -> Vec { return t.body.support_gradient(u) + t.shift; },
          [&](const shapes::Linear& l) -> Vec { return l.map * l.body.support_gradient(l.map.transpose() * u); },
          [&](const shapes::Product& p) -> Vec {
            // A zero block contributes the subgradient 0 (valid when 0 lies in that factor).
            const int n = p.q_body.dim();
            const int m = p.p_body.dim();
            Vec g(n + m);
            const Vec uq = u.head(n);
            const Vec up = u.tail(m);
            g.head(n) = uq.squaredNorm() > 0 ? p.q_body.support_gradient(uq) : Vec::Zero(n);
            g.tail(m) = up.squaredNorm() > 0 ? p.p_body.support_gradient(up) : Vec::Zero(m);
            return g;
          },
      },
      node_->variant);
}

Mat ConvexBody::support_hessian(const Vec& u) const {
  require_dim(dim(), u.size(), "support_hessian");
  if (!has_support_hessian()) throw CapabilityError("support_hessian: variant has no twice differentiable support");
  if (u.squaredNorm() == 0.0) throw UndefinedDirectionError("support_hessian: zero direction");
  return std::visit(
      Overloaded{
          [&](const shapes::Ellipsoid& e) -> Mat {
            const Vec qu = e.shape * u;
            const double h = std::sqrt(u.dot(qu));
            return (e.shape - qu * qu.transpose() / (h * h)) / h;
          },
          [&](const shapes::PBall& b) -> Mat {
            const double q = b.p / (b.p - 1.0);
            const Vec w = b.radii.cwiseProduct(u);
            const double f = pnorm(w, q);
            const Mat hw = pnorm_hessian(w, q, f, pnorm_gradient(w, q, f));
            return b.radii.asDiagonal() * hw * b.radii.asDiagonal();
          },
          [&](const shapes::Polytope& p) -> Mat {
            const double h = smooth_poly_support(p, u);
            return smooth_poly_hessian(p, u, h, smooth_poly_gradient(p, u, h));
          },
          [&](const shapes::Sum& s) -> Mat { return s.a.support_hessian(u) + s.b.support_hessian(u); },
          [&](const shapes::Dilate& d) -> Mat { return d.factor * d.body.support_hessian(u); },
          [&](const shapes::Translate& t) -> Mat { return t.body.support_hessian(u); },
          [&](const shapes::Linear& l) -> Mat {
            return l.map * l.body.support_hessian(l.map.transpose() * u) * l.map.transpose();
          },
          [&](const shapes::Product&) -> Mat { throw CapabilityError("support_hessian: product"); },
      },
      node_->variant);
}

std::vector<Vec> ConvexBody::support_subgradients(const Vec& u, double rel_tol) const {
  require_dim(dim(), u.size(), "support_subgradients");
  if (u.squaredNorm() == 0.0) throw UndefinedDirectionError("support_subgradients: zero direction");
  constexpr std::size_t kCap = 256;
  return std::visit(
      Overloaded{
          [&](const shapes::Polytope& p) -> std::vector<Vec> {
            if (p.smoothing > 0) return {support_gradient(u)};
            double m = -std::numeric_limits<double>::infinity();
            for (const auto& v : p.vertices) m = std::max(m, v.dot(u));
            const double tol = rel_tol * (1.0 + std::abs(m));
            std::vector<Vec> out;
            for (const auto& v : p.vertices)
              if (v.dot(u) >= m - tol) out.push_back(v);
            return out;
          },
          [&](const shapes::Sum& s) -> std::vector<Vec> {
            auto out = cartesian_sums(s.a.support_subgradients(u, rel_tol), s.b.support_subgradients(u, rel_tol));
            if (out.size() > kCap) out.resize(kCap);
            return out;
          },
          [&](const shapes::Dilate& d) -> std::vector<Vec> {
            auto out = d.body.support_subgradients(u, rel_tol);
            for (auto& g : out) g *= d.factor;
            return out;
          },
          [&](const shapes::Translate& t) -> std::vector<Vec> {
            auto out = t.body.support_subgradients(u, rel_tol);
            for (auto& g : out) g += t.shift;
            return out;
          },
          [&](const shapes::Linear& l) -> std::vector<Vec> {
            auto out = l.body.support_subgradients(l.map.transpose() * u, rel_tol);
            for (auto& g : out) g = l.map * g;
            return out;
          },
          [&](const shapes::Product& p) -> std::vector<Vec> {
            const int n = p.q_body.dim();
            const int m = p.p_body.dim();
            const Vec uq = u.head(n);
            const Vec up = u.tail(m);
            const std::vector<Vec> gq =
                uq.squaredNorm() > 0 ? p.q_body.support_subgradients(uq, rel_tol) : std::vector<Vec>{Vec::Zero(n)};
            const std::vector<Vec> gp =
                up.squaredNorm() > 0 ? p.p_body.support_subgradients(up, rel_tol) : std::vector<Vec>{Vec::Zero(m)};
            std::vector<Vec> out;
            for (const auto& a : gq)
              for (const auto& b : gp) {
                Vec g(n + m);
                g << a, b;
                out.push_back(std::move(g));
                if (out.size() >= kCap) return out;
              }
            return out;
          },
          [&](const auto&) -> std::vector<Vec> { return {support_gradient(u)}; },
      },
      node_->variant);
}

// ---------------------------------------------------------------------------
// gauge oracles

namespace {

void require_origin(const ConvexBody& b, const char* what) {
  if (!b.origin_interior()) throw OriginNotInteriorError(std::string(what) + ": origin is not interior to the body");
}

}  // namespace

double ConvexBody::gauge(const Vec& x) const {
  require_dim(dim(), x.size(), "gauge");
  require_origin(*this, "gauge");
  if (x.squaredNorm() == 0.0) return 0.0;
  return std::visit(
      Overloaded{
          [&](const shapes::Ellipsoid& e) { return std::sqrt(std::max(0.0, x.dot(e.shape_inv * x))); },
          [&](const shapes::PBall& b) { return pnorm(x.cwiseQuotient(b.radii), b.p); },
          [&](const shapes::Polytope& p) {
            if (p.smoothing > 0) return 1.0 / minimize_support_on_hyperplane(*this, x).value;
            double m = 0.0;
            for (std::size_t j = 0; j < p.facets->normals.size(); ++j)
              m = std::max(m, p.facets->normals[j].dot(x) / p.facets->offsets[j]);
            return m;
          },
          [&](const shapes::Sum&) { return 1.0 / minimize_support_on_hyperplane(*this, x).value; },
          [&](const shapes::Dilate& d) { return d.body.gauge(x) / d.factor; },
          [&](const shapes::Translate& t) {
            if (!t.body.origin_interior()) return 1.0 / minimize_support_on_hyperplane(*this, x).value;
            return translate_gauge_root(t, x).r;
          },
          [&](const shapes::Linear& l) { return l.body.gauge(l.inverse * x); },
          [&](const shapes::Product& p) {
            const int n = p.q_body.dim();
            return std::max(p.q_body.gauge(x.head(n)), p.p_body.gauge(x.tail(p.p_body.dim())));
          },
      },
      node_->variant);
}

Vec ConvexBody::gauge_gradient(const Vec& x) const {
  require_dim(dim(), x.size(), "gauge_gradient");
  require_origin(*this, "gauge_gradient");
  if (x.squaredNorm() == 0.0) throw UndefinedDirectionError("gauge_gradient: zero point");
  auto generic = [&]() -> Vec {
    const auto r = minimize_support_on_hyperplane(*this, x);
    return r.u / r.value;
  };
  return std::visit(
      Overloaded{
          [&](const shapes::Ellipsoid& e) -> Vec {
            const Vec qx = e.shape_inv * x;
            return qx / std::sqrt(x.dot(qx));
          },
          [&](const shapes::PBall& b) -> Vec {
            const Vec y = x.cwiseQuotient(b.radii);
            return pnorm_gradient(y, b.p, pnorm(y, b.p)).cwiseQuotient(b.radii);
          },
          [&](const shapes::Polytope& p) -> Vec {
            if (p.smoothing > 0) return generic();
            std::size_t best = 0;
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < p.facets->normals.size(); ++j) {
              const double val = p.facets->normals[j].dot(x) / p.facets->offsets[j];
              if (val > m) {
                m = val;
                best = j;
              }
            }
            return p.facets->normals[best] / p.facets->offsets[best];
          },
          [&](const shapes::Sum&) -> Vec { return generic(); },
          [&](const shapes::Dilate& d) -> Vec { return d.body.gauge_gradient(x) / d.factor; },
          [&](const shapes::Translate& t) -> Vec {
            if (!t.body.origin_interior()) return generic();
            const auto root = translate_gauge_root(t, x);
            const Vec a = t.body.gauge_gradient(root.y);
            return a / (1.0 + a.dot(t.shift));
          },
          [&](const shapes::Linear& l) -> Vec {
            return l.inverse.transpose() * l.body.gauge_gradient(l.inverse * x);
          },
          [&](const shapes::Product& p) -> Vec {
            const int n = p.q_body.dim();
            const int m = p.p_body.dim();
            const Vec xq = x.head(n);
            const Vec xp = x.tail(m);
            Vec g = Vec::Zero(n + m);
            const double gq = p.q_body.gauge(xq);
            const double gp = p.p_body.gauge(xp);
            if (gq >= gp) g.head(n) = p.q_body.gauge_gradient(xq);
            else g.tail(m) = p.p_body.gauge_gradient(xp);
            return g;
          },
      },
      node_->variant);
}

Mat ConvexBody::gauge_hessian(const Vec& x) const {
  require_dim(dim(), x.size(), "gauge_hessian");
  if (!has_gauge_hessian()) throw CapabilityError("gauge_hessian: not available for this body variant");
  require_origin(*this, "gauge_hessian");
  if (x.squaredNorm() == 0.0) throw UndefinedDirectionError("gauge_hessian: zero point");
  return std::visit(
      Overloaded{
          [&](const shapes::Ellipsoid& e) -> Mat {
            const Vec qx = e.shape_inv * x;
            const double g = std::sqrt(x.dot(qx));
            return (e.shape_inv - qx * qx.transpose() / (g * g)) / g;
          },
          [&](const shapes::PBall& b) -> Mat {
            const Vec y = x.cwiseQuotient(b.radii);
            const double f = pnorm(y, b.p);
            const Mat hy = pnorm_hessian(y, b.p, f, pnorm_gradient(y, b.p, f));
            const Vec inv = b.radii.cwiseInverse();
            return inv.asDiagonal() * hy * inv.asDiagonal();
          },
          [&](const shapes::Dilate& d) -> Mat { return d.body.gauge_hessian(x) / d.factor; },
          [&](const shapes::Translate& t) -> Mat {
            const auto root = translate_gauge_root(t, x);
            const Vec a = t.body.gauge_gradient(root.y);
            const double den = 1.0 + a.dot(t.shift);
            const Vec grad = a / den;
            const Mat proj = Mat::Identity(dim(), dim()) - t.shift * grad.transpose();
            return proj.transpose() * t.body.gauge_hessian(root.y) * proj / den;
          },
          [&](const shapes::Linear& l) -> Mat {
            return l.inverse.transpose() * l.body.gauge_hessian(l.inverse * x) * l.inverse;
          },
          [&](const auto&) -> Mat { throw CapabilityError("gauge_hessian: not available for this body variant"); },
      },
      node_->variant);
}

// ---------------------------------------------------------------------------

LagrangianProduct::LagrangianProduct(ConvexBody k, ConvexBody t) : K(std::move(k)), T(std::move(t)) {
  require_dim(K.dim(), T.dim(), "LagrangianProduct");
}

double LagrangianProduct::support(const Vec& u) const {
  require_dim(2 * n(), u.size(), "LagrangianProduct::support");
  return K.support(u.head(n())) + T.support(u.tail(n()));
}

double LagrangianProduct::gauge(const Vec& x) const {
  require_dim(2 * n(), x.size(), "LagrangianProduct::gauge");
  return std::max(K.gauge(x.head(n())), T.gauge(x.tail(n())));
}

}  // namespace ehz
