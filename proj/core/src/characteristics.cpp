#include <ehz/characteristics.hpp>

#include <ehz/body_json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ehz {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double angle_between(const Vec& a, const Vec& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return std::numbers::pi;
  return std::acos(std::clamp(a.dot(b) / (na * nb), -1.0, 1.0));
}

// Smallest angle between u and the cone {s a + t b : s, t >= 0}.
double angle_to_cone(const Vec& u, const Vec& a, const Vec& b) {
  Mat m(u.size(), 2);
  m.col(0) = a;
  m.col(1) = b;
  const Eigen::Vector2d coef = (m.transpose() * m).ldlt().solve(m.transpose() * u);
  if (coef.allFinite() && coef(0) >= 0 && coef(1) >= 0) return angle_between(u, m * coef);
  return std::min(angle_between(u, a), angle_between(u, b));
}

enum class Label { P, Q, X };

struct Run {
  Label label;
  int start;
  int length;
};

// Maximal cyclic runs of equal labels, starting at a label change (if any).
std::vector<Run> cyclic_runs(const std::vector<Label>& labels) {
  const int n = static_cast<int>(labels.size());
  int first = 0;
  while (first < n && labels[static_cast<std::size_t>(first)] == labels[0]) ++first;
  if (first == n) return {{labels[0], 0, n}};
  std::vector<Run> runs;
  int i = first;
  int covered = 0;
  while (covered < n) {
    const Label l = labels[static_cast<std::size_t>(i % n)];
    int len = 0;
    while (covered < n && labels[static_cast<std::size_t>((i + len) % n)] == l) {
      ++len;
      ++covered;
    }
    runs.push_back({l, i % n, len});
    i += len;
  }
  return runs;
}

}  // namespace

Loop Characteristic::as_loop() const {
  const Vec mean = samples.rowwise().mean();
  return Loop::from_samples(samples.colwise() - mean, modes, size());
}

Mat Characteristic::velocities() const { return as_loop().sample_velocities(); }

Characteristic reconstruct(const ConvexBody& sigma, const Loop& z, double lambda, const Vec& alpha, double hard_cap) {
  require_dim(sigma.dim(), z.dim(), "reconstruct");
  require_dim(sigma.dim(), alpha.size(), "reconstruct (alpha)");
  if (!(lambda > 0)) throw Error("reconstruct: lambda must be positive");
  const double c = std::sqrt(std::numbers::pi / (2.0 * lambda));
  Characteristic g;
  g.samples = (c * (lambda * apply_J(z.sample_points()))).colwise() + c * alpha;
  g.modes = z.modes();
  g.lambda = lambda;
  g.alpha = alpha;
  g.action = symplectic_action(g.as_loop());
  double sum = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double dev = std::abs(sigma.gauge(g.samples.col(i)) - 1.0);
    g.boundary_deviation = std::max(g.boundary_deviation, dev);
    sum += dev * dev;
  }
  g.boundary_rms = std::sqrt(sum / g.size());
  if (g.boundary_deviation > hard_cap) {
    std::ostringstream msg;
    msg << "reconstruct: curve leaves the boundary (max |g - 1| = " << g.boundary_deviation << ", cap " << hard_cap
        << ")";
    throw ReconstructionError(msg.str());
  }
  return g;
}

Loop inverse_map(const Characteristic& gamma, double d, int modes) {
  if (!(d > 0)) throw Error("inverse_map: speed constant must be positive");
  const int m = modes > 0 ? modes : gamma.modes;
  const Vec mean = gamma.samples.rowwise().mean();
  // J^{-1} = -J
  const Mat z = -apply_J(Mat(gamma.samples.colwise() - mean)) / std::sqrt(kTwoPi * d);
  return Loop::from_samples(z, m, std::max(gamma.size(), 4 * m + 1));
}

double estimate_speed_constant(const ConvexBody& sigma, const Characteristic& gamma) {
  const Mat v = gamma.velocities();
  const auto* prod = std::get_if<shapes::Product>(&sigma.variant());
  double sum_all = 0.0;
  double sum_smooth = 0.0;
  int n_smooth = 0;
  for (int i = 0; i < gamma.size(); ++i) {
    const Vec x = gamma.samples.col(i);
    const double g = sigma.gauge(x);
    const Vec dg2 = 2.0 * g * sigma.gauge_gradient(x);
    const double ratio = v.col(i).norm() / dg2.norm();
    sum_all += ratio;
    bool smooth = true;
    if (prod != nullptr) {
      const int nq = prod->q_body.dim();
      const double gq = prod->q_body.gauge(x.head(nq));
      const double gp = prod->p_body.gauge(x.tail(prod->p_body.dim()));
      smooth = std::abs(gq - gp) > 1e-2 * std::max(gq, gp);
    }
    if (smooth) {
      sum_smooth += ratio;
      ++n_smooth;
    }
  }
  return n_smooth > 0 ? sum_smooth / n_smooth : sum_all / gamma.size();
}

InclusionDefect inclusion_defect(const ConvexBody& sigma, const Characteristic& gamma) {
  InclusionDefect out;
  const int n = gamma.size();
  const double dt = kTwoPi / n;
  const auto* prod = std::get_if<shapes::Product>(&sigma.variant());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec x = gamma.samples.col(i);
    const Vec v = (gamma.samples.col((i + 1) % n) - gamma.samples.col((i + n - 1) % n)) / (2.0 * dt);
    const Vec u = -apply_J(v);  // J^{-1} v, to be compared with the normal cone
    double angle = 0.0;
    if (prod != nullptr) {
      const int nq = prod->q_body.dim();
      const int np = prod->p_body.dim();
      const Vec q = x.head(nq);
      const Vec p = x.tail(np);
      const double gq = prod->q_body.gauge(q);
      const double gp = prod->p_body.gauge(p);
      Vec a = Vec::Zero(nq + np);
      Vec b = Vec::Zero(nq + np);
      if (q.squaredNorm() > 0) a.head(nq) = prod->q_body.gauge_gradient(q);
      if (p.squaredNorm() > 0) b.tail(np) = prod->p_body.gauge_gradient(p);
      const double top = std::max(gq, gp);
      const bool q_active = gq >= top - 1e-2 * top;
      const bool p_active = gp >= top - 1e-2 * top;
      if (q_active && p_active) angle = angle_to_cone(u, a, b);
      else angle = angle_between(u, q_active ? a : b);
    } else {
      angle = angle_between(u, sigma.gauge_gradient(x));
    }
    out.max_angle = std::max(out.max_angle, angle);
    sum += angle * angle;
    ++out.checked;
  }
  out.rms_angle = std::sqrt(sum / std::max(out.checked, 1));
  return out;
}

std::string to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::Proper:
      return "proper";
    case TrajectoryKind::Gliding:
      return "gliding";
    case TrajectoryKind::MixedUndetermined:
      return "mixed-undetermined";
  }
  return "unknown";
}

double polygon_length(const ConvexBody& T, const std::vector<Vec>& points) {
  double len = 0.0;
  const std::size_t m = points.size();
  for (std::size_t j = 0; j < m; ++j) len += T.support(points[(j + 1) % m] - points[j]);
  return len;
}

BilliardTrajectory extract_bounces(const Characteristic& gamma, const LagrangianProduct& product,
                                   const BounceThresholds& th) {
  const int n = product.n();
  require_dim(2 * n, gamma.dim(), "extract_bounces");
  const int count = gamma.size();
  BilliardTrajectory traj;

  double worst = 0.0;
  std::vector<double> orth(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Vec q = gamma.samples.col(i).head(n);
    const Vec p = gamma.samples.col(i).tail(n);
    worst = std::max(worst, std::abs(std::max(product.K.gauge(q), product.T.gauge(p)) - 1.0));
    if (q.squaredNorm() > 0 && p.squaredNorm() > 0) {
      const Vec a = product.K.gauge_gradient(q);
      const Vec b = product.T.gauge_gradient(p);
      orth[static_cast<std::size_t>(i)] = std::abs(a.dot(b)) / (a.norm() * b.norm());
    } else {
      orth[static_cast<std::size_t>(i)] = 1.0;
    }
  }
  if (worst > th.boundary) {
    std::ostringstream msg;
    msg << "extract_bounces: curve is not on the boundary of K x T (max |g - 1| = " << worst << ")";
    throw Error(msg.str());
  }
  traj.max_orthogonality = *std::max_element(orth.begin(), orth.end());

  // label samples by which half of the curve is (nearly) at rest
  const Mat v = gamma.velocities();
  double vmax = 0.0;
  for (int i = 0; i < count; ++i) vmax = std::max(vmax, v.col(i).norm());
  std::vector<Label> labels(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double sq = v.col(i).head(n).norm();
    const double sp = v.col(i).tail(n).norm();
    const bool q_rest = sq < th.moving_fraction * vmax;
    const bool p_rest = sp < th.moving_fraction * vmax;
    Label l = Label::X;
    if (q_rest && p_rest) l = sq <= sp ? Label::P : Label::Q;
    else if (q_rest) l = Label::P;
    else if (p_rest) l = Label::Q;
    labels[static_cast<std::size_t>(i)] = l;
  }

  if (traj.max_orthogonality <= th.orthogonality) {
    traj.kind = TrajectoryKind::Gliding;
    traj.diagnostic = "gradients orthogonal at every sample";
    return traj;
  }

  // merge same-type runs separated by short gaps
  bool changed = true;
  while (changed) {
    changed = false;
    auto runs = cyclic_runs(labels);
    const auto r = static_cast<int>(runs.size());
    if (r < 3) break;
    for (int k = 0; k < r; ++k) {
      const Run& prev = runs[static_cast<std::size_t>((k + r - 1) % r)];
      const Run& cur = runs[static_cast<std::size_t>(k)];
      const Run& next = runs[static_cast<std::size_t>((k + 1) % r)];
      if (prev.label == next.label && prev.label != Label::X && cur.label != prev.label &&
          cur.length < th.merge_cells) {
        for (int j = 0; j < cur.length; ++j) labels[static_cast<std::size_t>((cur.start + j) % count)] = prev.label;
        changed = true;
        break;
      }
    }
  }

  auto runs = cyclic_runs(labels);
  const int transition_cap = th.transition_cells > 0 ? th.transition_cells
                                                     : std::max(1, count / std::max(gamma.modes, 1));
  std::vector<Run> segments;
  for (const auto& run : runs) {
    if (run.label == Label::X) traj.longest_transition = std::max(traj.longest_transition, run.length);
    else segments.push_back(run);
  }
  // rotate so that the first segment is p-moving (a bounce)
  auto first_p = std::find_if(segments.begin(), segments.end(), [](const Run& r) { return r.label == Label::P; });
  if (first_p != segments.end()) std::rotate(segments.begin(), first_p, segments.end());

  bool alternating = segments.size() >= 4 && segments.size() % 2 == 0;
  for (std::size_t k = 0; alternating && k < segments.size(); ++k)
    alternating = segments[k].label == (k % 2 == 0 ? Label::P : Label::Q);

  // bounce points (time order) from p-moving segments; momenta from q-moving ones
  std::vector<Vec> q_time;
  std::vector<Vec> p_time;
  for (const auto& seg : segments) {
    // average over the central half of the segment, away from the ripples
    // that the truncated series shows next to each switch
    const int skip = seg.length / 4;
    const int used = std::max(1, seg.length - 2 * skip);
    Vec mean = Vec::Zero(2 * n);
    for (int j = 0; j < used; ++j) mean += gamma.samples.col((seg.start + skip + j) % count);
    mean /= used;
    if (seg.label == Label::P) q_time.push_back(mean.head(n));
    else p_time.push_back(mean.tail(n));
  }
  // reverse so that length = sum h_T(q_{j+1} - q_j)
  traj.bounce_points.assign(q_time.rbegin(), q_time.rend());
  if (alternating) {
    const std::size_t m = q_time.size();
    for (std::size_t j = 0; j < m; ++j) traj.momenta.push_back(p_time[(2 * m - 2 - j) % m]);
  }
  if (traj.bounce_points.size() >= 2) traj.length = polygon_length(product.T, traj.bounce_points);

  if (alternating && traj.longest_transition <= transition_cap) {
    traj.kind = TrajectoryKind::Proper;
    traj.diagnostic = std::to_string(q_time.size()) + " bounces";
  } else {
    traj.kind = TrajectoryKind::MixedUndetermined;
    std::ostringstream msg;
    msg << (alternating ? "alternating segments" : "segments do not alternate") << ", longest transition "
        << traj.longest_transition << " cells (cap " << transition_cap << "), max normalised <grad g_T, grad g_K> "
        << traj.max_orthogonality;
    traj.diagnostic = msg.str();
  }
  return traj;
}

json BilliardTrajectory::to_json() const {
  json pts = json::array();
  for (const auto& q : bounce_points) pts.push_back(vec_to_json(q));
  json moms = json::array();
  for (const auto& p : momenta) moms.push_back(vec_to_json(p));
  return {{"classification", to_string(kind)},
          {"bounces", bounce_points.size()},
          {"bounce_points", pts},
          {"momenta", moms},
          {"length", length},
          {"longest_transition", longest_transition},
          {"max_orthogonality", max_orthogonality},
          {"diagnostic", diagnostic}};
}

json characteristic_to_json(const Characteristic& gamma) {
  return {{"samples", mat_to_json(gamma.samples.transpose())},
          {"modes", gamma.modes},
          {"lambda", gamma.lambda},
          {"alpha", vec_to_json(gamma.alpha)},
          {"action", gamma.action},
          {"boundary_deviation", gamma.boundary_deviation},
          {"boundary_rms", gamma.boundary_rms}};
}

std::string characteristic_to_csv(const Characteristic& gamma) {
  std::ostringstream out;
  out.precision(17);
  out << "t";
  for (int k = 0; k < gamma.dim(); ++k) out << ",x" << (k + 1);
  out << "\n";
  for (int i = 0; i < gamma.size(); ++i) {
    out << kTwoPi * i / gamma.size();
    for (int k = 0; k < gamma.dim(); ++k) out << "," << gamma.samples(k, i);
    out << "\n";
  }
  return out.str();
}

}  // namespace ehz
