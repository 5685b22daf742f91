#include <ehz/billiards.hpp>

#include <ehz/body_json.hpp>
#include <ehz/characteristics.hpp>
#include <ehz/parallel.hpp>

#include "sphere_search.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <sstream>

namespace ehz {

using nlohmann::json;

namespace {

// Consecutive vertices closer than this (relative to the diameter of K) are
// one bounce: the search may converge to a polygon with fewer vertices.
constexpr double kCollapseTolerance = 1e-4;

double box_radius(const ConvexBody& body) {
  double r = 0.0;
  for (int i = 0; i < body.dim(); ++i) {
    r = std::max(r, std::abs(body.support(Vec::Unit(body.dim(), i))));
    r = std::max(r, std::abs(body.support(-Vec::Unit(body.dim(), i))));
  }
  return r * std::sqrt(static_cast<double>(body.dim()));
}

// Far intersection of the ray x + t d (t > 0) with the boundary, for x on
// the boundary and d pointing into the body. phi(t) = g(x + t d) - 1 is convex
// with phi(0) = 0 and phi'(0) < 0, so Newton's method started to the right of
// the root converges monotonically; bisection guards the rare failures.
Vec ray_exit(const ConvexBody& body, const Vec& x, const Vec& d) {
  const double dn = d.norm();
  double hi = 4.0 * box_radius(body) / dn;
  for (int k = 0; k < 60 && body.gauge(x + hi * d) <= 1.0; ++k) hi *= 2.0;
  double lo = 0.0;
  double t = hi;
  for (int it = 0; it < 200; ++it) {
    const Vec y = x + t * d;
    const double phi = body.gauge(y) - 1.0;
    if (phi > 0) hi = t;
    else lo = t;
    if (std::abs(phi) <= 1e-15) break;
    const double slope = body.gauge_gradient(y).dot(d);
    double tn = slope > 0 ? t - phi / slope : -1.0;
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (std::abs(tn - t) <= 1e-13 * t) {
      t = tn;
      break;
    }
    t = tn;
  }
  return x + t * d;
}

void require_state(const ConvexBody& K, const ConvexBody& T, const BilliardState& s) {
  require_dim(K.dim(), s.q.size(), "billiard state (q)");
  require_dim(T.dim(), s.p.size(), "billiard state (p)");
  const double gq = K.gauge(s.q);
  const double gp = T.gauge(s.p);
  if (std::abs(gq - 1.0) > kStateTolerance || std::abs(gp - 1.0) > kStateTolerance) {
    std::ostringstream msg;
    msg << "billiard state off the boundary: |g_K(q) - 1| = " << std::abs(gq - 1.0)
        << ", |g_T(p) - 1| = " << std::abs(gp - 1.0);
    throw Error(msg.str());
  }
}

// -- quasi-Newton with finite-difference gradients ----------------------------

using Objective = std::function<double(const Vec&)>;

Vec fd_gradient(const Objective& f, const Vec& x, double fx) {
  Vec g(x.size());
  Vec y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    y(i) = x(i) + h;
    const double fp = f(y);
    y(i) = x(i) - h;
    const double fm = f(y);
    y(i) = x(i);
    if (std::isfinite(fp) && std::isfinite(fm)) g(i) = (fp - fm) / (2.0 * h);
    else if (std::isfinite(fp)) g(i) = (fp - fx) / h;
    else if (std::isfinite(fm)) g(i) = (fx - fm) / h;
    else g(i) = 0.0;
  }
  return g;
}

double lbfgs_fd(const Objective& f, Vec& x, int max_iter, double tol) {
  double fx = f(x);
  Vec g = fd_gradient(f, x, fx);
  std::deque<std::pair<Vec, Vec>> mem;
  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    Vec d = -g;
    std::vector<double> alpha(mem.size());
    for (std::size_t j = mem.size(); j-- > 0;) {
      alpha[j] = mem[j].first.dot(d) / mem[j].second.dot(mem[j].first);
      d -= alpha[j] * mem[j].second;
    }
    if (!mem.empty()) d *= mem.back().first.dot(mem.back().second) / mem.back().second.squaredNorm();
    for (std::size_t j = 0; j < mem.size(); ++j) {
      const double beta = mem[j].second.dot(d) / mem[j].second.dot(mem[j].first);
      d += (alpha[j] - beta) * mem[j].first;
    }
    double slope = g.dot(d);
    if (!(slope < 0)) {
      mem.clear();
      d = -g;
      slope = -g.squaredNorm();
      if (slope == 0) break;
    }
    double t = mem.empty() ? std::min(1.0, 0.1 * std::max(1.0, x.norm()) / d.norm()) : 1.0;
    Vec xn;
    double fn = fx;
    bool ok = false;
    for (int ls = 0; ls < 50; ++ls) {
      xn = x + t * d;
      fn = f(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * t * slope) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      if (!mem.empty()) {
        mem.clear();
        continue;
      }
      break;
    }
    const Vec gn = fd_gradient(f, xn, fn);
    const Vec s = xn - x;
    const Vec y = gn - g;
    const double rel = (fx - fn) / std::max(std::abs(fx), 1e-300);
    x = xn;
    g = gn;
    fx = fn;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      mem.emplace_back(s, y);
      if (mem.size() > 10) mem.pop_front();
    }
    stall = rel < tol ? stall + 1 : 0;
    if (stall >= 5) break;
  }
  return fx;
}

// Derivative-free polish: coordinate compass search with step halving.
double compass(const Objective& f, Vec& x, double fx, double tol) {
  double step = 1e-2 * std::max(1.0, x.cwiseAbs().maxCoeff());
  const double floor = tol * std::max(1.0, x.cwiseAbs().maxCoeff());
  int evals = 0;
  while (step > floor && evals < 200000) {
    bool moved = false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      for (const double sgn : {1.0, -1.0}) {
        Vec y = x;
        y(i) += sgn * step;
        const double fy = f(y);
        ++evals;
        if (std::isfinite(fy) && fy < fx) {
          x = y;
          fx = fy;
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return fx;
}

// Normals u_1..u_m from parameters: u_j = v_j / |v_j| for j < m with weights
// theta_j^2, and u_m = -s / |s| where s = sum_j theta_j^2 u_j, so that
// 0 = sum_j theta_j^2 u_j + |s| u_m lies in the convex hull.
bool decode_normals(const Vec& x, int n, int m, std::vector<Vec>& u) {
  u.assign(static_cast<std::size_t>(m), Vec());
  Vec s = Vec::Zero(n);
  double wsum = 0.0;
  for (int j = 0; j < m - 1; ++j) {
    const Vec v = x.segment(j * (n + 1), n);
    const double vn = v.norm();
    if (!(vn > 1e-12)) return false;
    const double w = x(j * (n + 1) + n) * x(j * (n + 1) + n);
    u[static_cast<std::size_t>(j)] = v / vn;
    s += w * u[static_cast<std::size_t>(j)];
    wsum += w;
  }
  const double sn = s.norm();
  if (!(sn > 1e-12 * std::max(wsum, 1e-300))) return false;
  u[static_cast<std::size_t>(m - 1)] = -s / sn;
  return true;
}

std::vector<Vec> dedupe_cyclic(const std::vector<Vec>& pts, double tol) {
  std::vector<Vec> out;
  for (const auto& p : pts)
    if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
  while (out.size() > 1 && (out.front() - out.back()).norm() <= tol) out.pop_back();
  return out;
}

}  // namespace

BilliardState billiard_step(const ConvexBody& K, const ConvexBody& T, const BilliardState& state) {
  require_state(K, T, state);
  const Vec a = K.gauge_gradient(state.q);
  const Vec b = T.gauge_gradient(state.p);
  const double inner = a.dot(b) / (a.norm() * b.norm());
  if (std::abs(inner) < kTangencyTolerance) {
    throw GlidingConfigurationError("billiard_step: tangential configuration (grad g_K(q) orthogonal to grad g_T(p))");
  }
  const Vec d = -b;
  if (a.dot(d) >= 0) throw Error("billiard_step: the motion direction -grad g_T(p) points out of K");
  BilliardState next;
  next.q = ray_exit(K, state.q, d);
  const Vec a_next = K.gauge_gradient(next.q);
  if (a_next.dot(b) >= 0) throw GlidingConfigurationError("billiard_step: grazing exit from K");
  next.p = ray_exit(T, state.p, a_next);
  return next;
}

TraceResult trace(const ConvexBody& K, const ConvexBody& T, const BilliardState& start, int bounces) {
  TraceResult r;
  r.states.push_back(start);
  for (int k = 0; k < bounces; ++k) {
    try {
      r.states.push_back(billiard_step(K, T, r.states.back()));
    } catch (const GlidingConfigurationError& e) {
      r.diagnostic = "gliding configuration at bounce " + std::to_string(k) + ": " + e.what();
      return r;
    } catch (const Error& e) {
      r.diagnostic = "invalid state at bounce " + std::to_string(k) + ": " + e.what();
      return r;
    }
  }
  r.completed = true;
  return r;
}

Vec momentum_towards(const ConvexBody& T, const Vec& from, const Vec& to) {
  const Vec w = from - to;
  if (w.squaredNorm() == 0.0) throw UndefinedDirectionError("momentum_towards: coincident points");
  return T.support_gradient(w);
}

double orbit_closure_error(const ConvexBody& K, const ConvexBody& T, const std::vector<Vec>& points) {
  const double diam = 2.0 * box_radius(K);
  const auto pts = dedupe_cyclic(points, kCollapseTolerance * diam);
  const auto m = pts.size();
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  // time order is the reverse of the listing
  std::vector<Vec> time(pts.rbegin(), pts.rend());
  BilliardState s{time[0], momentum_towards(T, time[0], time[1])};
  double err = 0.0;
  try {
    for (std::size_t k = 1; k <= m; ++k) {
      s = billiard_step(K, T, s);
      err = std::max(err, (s.q - time[k % m]).norm() / diam);
    }
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return err;
}

OrbitResult shortest_orbit_direct(const ConvexBody& K, const ConvexBody& T, int m, const OrbitSearchConfig& config) {
  if (m < 2) throw Error("shortest_orbit_direct: need at least 2 bounces");
  require_dim(K.dim(), T.dim(), "shortest_orbit_direct");
  if (config.starts < 1) throw ConfigError("shortest_orbit_direct: starts must be >= 1");
  if (config.screen < 1) throw ConfigError("shortest_orbit_direct: screen must be >= 1");
  if (config.hops < 0 || !(config.hop_size > 0)) throw ConfigError("shortest_orbit_direct: invalid hop settings");
  const int n = K.dim();
  const int dim = (m - 1) * (n + 1);

  auto points_of = [&](const Vec& x, std::vector<Vec>& pts) -> bool {
    std::vector<Vec> u;
    if (!decode_normals(x, n, m, u)) return false;
    pts.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) pts[static_cast<std::size_t>(j)] = K.support_gradient(u[static_cast<std::size_t>(j)]);
    return true;
  };
  const Objective length = [&](const Vec& x) {
    std::vector<Vec> pts;
    if (!points_of(x, pts)) return std::numeric_limits<double>::infinity();
    return polygon_length(T, pts);
  };
  const double scale = box_radius(K);

  struct Run {
    double value = std::numeric_limits<double>::infinity();
    Vec x;
  };
  std::vector<Vec> simplex_normals;
  if (m == n + 1 && n >= 3) simplex_normals = std::get<shapes::Polytope>(ConvexBody::regular_simplex(n).variant()).vertices;
  std::vector<Run> runs(static_cast<std::size_t>(config.starts));
  parallel_for(config.starts, [&](int s) {
    std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(s)));
    std::normal_distribution<double> gauss;
    // even starts draw random normals; odd ones spread them evenly over a
    // random 2-plane (which seeds convex polygons that random draws rarely
    // hit) or, for m = n + 1, over a randomly rotated regular simplex
    const bool simplex_kind = s % 2 == 1 && m == n + 1 && n >= 3 && (s / 2) % 2 == 1;
    const bool plane_kind = s % 2 == 1 && !simplex_kind;
    auto draw = [&](Vec& x) {
      if (simplex_kind) {
        Mat g(n, n);
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) g(i, k) = gauss(rng);
        const Mat rot = Eigen::HouseholderQR<Mat>(g).householderQ();
        for (int j = 0; j < m - 1; ++j) {
          x.segment(j * (n + 1), n) = rot * simplex_normals[static_cast<std::size_t>(j)];
          x(j * (n + 1) + n) = 1.0;
        }
      } else if (plane_kind) {
        Vec e1(n), e2(n);
        for (int k = 0; k < n; ++k) e1(k) = gauss(rng);
        for (int k = 0; k < n; ++k) e2(k) = gauss(rng);
        e1.normalize();
        e2 -= e2.dot(e1) * e1;
        if (n == 1 || !(e2.norm() > 1e-8)) e2 = Vec::Zero(n);
        else e2.normalize();
        const double phase = 2 * M_PI * std::uniform_real_distribution<double>()(rng);
        const double turn = (s % 4 == 1 ? 1.0 : -1.0) * 2 * M_PI / m;
        for (int j = 0; j < m - 1; ++j) {
          x.segment(j * (n + 1), n) = std::cos(phase + turn * j) * e1 + std::sin(phase + turn * j) * e2;
          x(j * (n + 1) + n) = 1.0;
        }
      } else {
        for (int j = 0; j < m - 1; ++j) {
          for (int k = 0; k < n; ++k) x(j * (n + 1) + k) = gauss(rng);
          x(j * (n + 1) + n) = 1.0 + 0.25 * gauss(rng);
        }
      }
    };
    // screen several cheap draws and descend from the shortest polygon
    Vec x(dim), trial(dim);
    double best_start = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 100 * config.screen; ++attempt) {
      draw(trial);
      const double len = length(trial);
      if (len < best_start) {
        best_start = len;
        x = trial;
      }
      if (attempt + 1 >= config.screen && std::isfinite(best_start)) break;
    }
    if (!std::isfinite(best_start)) x = trial;
    double v = lbfgs_fd(length, x, config.max_iter, config.tol);
    v = compass(length, x, v, config.tol);
    runs[static_cast<std::size_t>(s)] = {v, x};
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < runs.size(); ++s)
    if (runs[s].value < runs[best].value) best = s;

  // basin hopping from the best polygon: perturb the normals, descend again
  // and keep the result if it is shorter
  if (std::isfinite(runs[best].value) && config.hops > 0) {
    std::vector<Run> hops(static_cast<std::size_t>(config.hops));
    parallel_for(config.hops, [&](int h) {
      std::mt19937_64 rng(derive_seed(config.seed ^ 0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(h)));
      std::normal_distribution<double> gauss;
      const double size = config.hop_size * (0.5 + (h % 4) / 2.0);
      Vec x = runs[best].x;
      for (int j = 0; j < m - 1; ++j) {
        const double w = x.segment(j * (n + 1), n).norm();
        for (int k = 0; k < n; ++k) x(j * (n + 1) + k) += size * w * gauss(rng);
      }
      double v = lbfgs_fd(length, x, config.max_iter, config.tol);
      v = compass(length, x, v, config.tol);
      hops[static_cast<std::size_t>(h)] = {v, x};
    });
    for (auto& hop : hops)
      if (hop.value < runs[best].value) runs[best] = std::move(hop);
  }

  OrbitResult r;
  r.m = m;
  r.length = runs[best].value;
  r.starts_used = config.starts;
  if (!std::isfinite(r.length) || !points_of(runs[best].x, r.points)) {
    throw Error("shortest_orbit_direct: no valid polygon found");
  }
  const double diam = 2.0 * scale;
  r.effective_bounces = static_cast<int>(dedupe_cyclic(r.points, kCollapseTolerance * diam).size());
  r.closure_error = orbit_closure_error(K, T, r.points);
  return r;
}

OrbitResult shortest_orbit_range(const ConvexBody& K, const ConvexBody& T, int m_min, int m_max,
                                 const OrbitSearchConfig& config) {
  if (m_min < 2 || m_max < m_min) throw Error("shortest_orbit_range: need 2 <= m_min <= m_max");
  OrbitResult best;
  best.length = std::numeric_limits<double>::infinity();
  for (int m = m_min; m <= m_max; ++m) {
    auto r = shortest_orbit_direct(K, T, m, config);
    if (r.length < best.length * (1.0 - 1e-12)) best = std::move(r);
  }
  return best;
}

double t_width_two_bounce(const ConvexBody& K, const ConvexBody& T) {
  require_dim(K.dim(), T.dim(), "t_width_two_bounce");
  const int n = K.dim();
  auto f = [&](const Vec& u) {
    const Vec w = K.support_gradient(u) - K.support_gradient(-u);
    return T.support(w) + T.support(-w);
  };
  const auto grid = detail::direction_grid(n, n == 2 ? 720 : 60 * n * n);
  return detail::minimize_on_sphere(f, grid, 8, 1e-13).value;
}

GlidingCheck gliding_check(const ConvexBody& K, const ConvexBody& T, const BilliardState& state) {
  if (!K.has_gauge_hessian() || !T.has_gauge_hessian())
    throw CapabilityError("gliding_check: gauge Hessians are required for both bodies");
  const Vec a = K.gauge_gradient(state.q);
  const Vec b = T.gauge_gradient(state.p);
  GlidingCheck out;
  out.inner = a.dot(b) / (a.norm() * b.norm());
  out.on_gliding_set = std::abs(out.inner) <= kTangencyTolerance;
  const double num = a.dot(T.gauge_hessian(state.p) * a);
  const double den = b.dot(K.gauge_hessian(state.q) * b);
  out.ratio = std::abs(den) > 1e-300 ? num / den : std::numeric_limits<double>::quiet_NaN();
  return out;
}

json OrbitResult::to_json() const {
  json pts = json::array();
  for (const auto& q : points) pts.push_back(vec_to_json(q));
  return {{"m", m},
          {"length", length},
          {"closure_error", std::isfinite(closure_error) ? json(closure_error) : json(nullptr)},
          {"effective_bounces", effective_bounces},
          {"points", pts}};
}

std::string orbit_to_csv(const ConvexBody& T, const OrbitResult& orbit) {
  std::ostringstream out;
  out.precision(17);
  const int n = T.dim();
  out << "j";
  for (int k = 0; k < n; ++k) out << ",q" << (k + 1);
  for (int k = 0; k < n; ++k) out << ",p" << (k + 1);
  out << "\n";
  const auto m = orbit.points.size();
  for (std::size_t j = 0; j < m; ++j) {
    const Vec& q = orbit.points[j];
    const Vec w = orbit.points[(j + 1) % m] - q;
    const Vec p = w.squaredNorm() > 0 ? T.support_gradient(w) : Vec::Constant(n, std::nan(""));
    out << j;
    for (int k = 0; k < n; ++k) out << "," << q(k);
    for (int k = 0; k < n; ++k) out << "," << p(k);
    out << "\n";
  }
  return out.str();
}

}  // namespace ehz
