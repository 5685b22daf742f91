#include <ehz/capacity.hpp>

#include <ehz/body_json.hpp>
#include <ehz/geometry.hpp>
#include <ehz/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

namespace ehz {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// The Rayleigh objective R = I / A in velocity coordinates.
//
// The optimiser works with the Fourier coefficients of z' rather than z:
//     z'(t) = sum_k C_k cos(kt) + S_k sin(kt),   a_k = -S_k / k,  b_k = C_k / k.
// I is then a well-conditioned function of (C, S) independently of k, which
// removes the k^2 spread in curvature that the position coefficients carry.

class Rayleigh {
 public:
  Rayleigh(ConvexBody sigma, int dim, int modes, int samples)
      : sigma_(std::move(sigma)), dim_(dim), modes_(modes), samples_(samples) {
    cos_.resize(modes, samples);
    sin_.resize(modes, samples);
    for (int i = 0; i < samples; ++i) {
      const double t = kTwoPi * i / samples;
      for (int k = 1; k <= modes; ++k) {
        cos_(k - 1, i) = std::cos(k * t);
        sin_(k - 1, i) = std::sin(k * t);
      }
    }
    inv_k_ = Vec::LinSpaced(modes, 1.0, modes).cwiseInverse();
  }

  [[nodiscard]] Eigen::Index size() const { return 2 * static_cast<Eigen::Index>(dim_) * modes_; }

  [[nodiscard]] Eigen::Map<const Mat> c_part(const Vec& x) const { return {x.data(), dim_, modes_}; }
  [[nodiscard]] Eigen::Map<const Mat> s_part(const Vec& x) const {
    return {x.data() + static_cast<Eigen::Index>(dim_) * modes_, dim_, modes_};
  }

  [[nodiscard]] double action(const Vec& x) const {
    const auto c = c_part(x);
    const auto s = s_part(x);
    double a = 0.0;
    for (int k = 0; k < modes_; ++k) a += inv_k_(k) * apply_J(Vec(c.col(k))).dot(s.col(k));
    return kPi * a;
  }

  /// I and its gradient; returns I.
  double dual(const Vec& x, Vec* grad) const {
    const Mat v = c_part(x) * cos_ + s_part(x) * sin_;
    Mat g(dim_, samples_);
    double sum = 0.0;
    for (int i = 0; i < samples_; ++i) {
      const Vec u = v.col(i);
      if (u.squaredNorm() == 0.0) {
        g.col(i).setZero();
        continue;
      }
      const Vec dh = sigma_.support_gradient(u);
      const double h = dh.dot(u);
      sum += h * h;
      g.col(i) = 2.0 * h * dh;
    }
    const double w = kTwoPi / samples_;
    if (grad != nullptr) {
      grad->resize(size());
      Eigen::Map<Mat> gc(grad->data(), dim_, modes_);
      Eigen::Map<Mat> gs(grad->data() + static_cast<Eigen::Index>(dim_) * modes_, dim_, modes_);
      gc = w * g * cos_.transpose();
      gs = w * g * sin_.transpose();
    }
    return w * sum;
  }

  void action_gradient(const Vec& x, Vec& grad) const {
    const auto c = c_part(x);
    const auto s = s_part(x);
    grad.resize(size());
    Eigen::Map<Mat> gc(grad.data(), dim_, modes_);
    Eigen::Map<Mat> gs(grad.data() + static_cast<Eigen::Index>(dim_) * modes_, dim_, modes_);
    for (int k = 0; k < modes_; ++k) {
      // A = pi sum (1/k) <J C_k, S_k>;  dA/dC_k = -(pi/k) J S_k,  dA/dS_k = (pi/k) J C_k
      gc.col(k) = -kPi * inv_k_(k) * apply_J(Vec(s.col(k)));
      gs.col(k) = kPi * inv_k_(k) * apply_J(Vec(c.col(k)));
    }
  }

  [[nodiscard]] Vec from_loop(const Loop& z) const {
    Vec x(size());
    Eigen::Map<Mat> c(x.data(), dim_, modes_);
    Eigen::Map<Mat> s(x.data() + static_cast<Eigen::Index>(dim_) * modes_, dim_, modes_);
    for (int k = 1; k <= modes_; ++k) {
      c.col(k - 1) = k * z.sin_coeffs().col(k - 1);
      s.col(k - 1) = -k * z.cos_coeffs().col(k - 1);
    }
    return x;
  }

  [[nodiscard]] Loop to_loop(const Vec& x) const {
    const auto c = c_part(x);
    const auto s = s_part(x);
    Mat a(dim_, modes_);
    Mat b(dim_, modes_);
    for (int k = 1; k <= modes_; ++k) {
      a.col(k - 1) = -s.col(k - 1) / k;
      b.col(k - 1) = c.col(k - 1) / k;
    }
    return Loop(std::move(a), std::move(b), samples_);
  }

 private:
  ConvexBody sigma_;
  int dim_;
  int modes_;
  int samples_;
  Mat cos_;
  Mat sin_;
  Vec inv_k_;
};

struct DescentOutcome {
  Vec x;
  double value;  ///< R at the final point
  int iterations;
  bool converged;
  std::string message;
};

// L-BFGS on R = I / A restricted to A > 0. Steps leaving the positive-action
// cone are rejected by the line search. Termination: `stall_window`
// consecutive iterations with relative decrease below tol_obj, or a line
// search that fails from a steepest-descent direction (numerical
// stationarity), or the iteration cap (not converged).
DescentOutcome lbfgs_rayleigh(const Rayleigh& obj, Vec x, double tol_obj, int max_iter) {
  constexpr int kMemory = 20;
  constexpr int kStallWindow = 5;
  auto evaluate = [&](const Vec& p, double& r, Vec& g) -> bool {
    const double a = obj.action(p);
    if (!(a > 0.0) || !std::isfinite(a)) return false;
    Vec gi;
    const double i = obj.dual(p, &gi);
    Vec ga;
    obj.action_gradient(p, ga);
    r = i / a;
    g = (gi - r * ga) / a;
    return std::isfinite(r) && g.allFinite();
  };

  // normalise to A = 1
  {
    const double a = obj.action(x);
    if (!(a > 0.0)) return {x, std::numeric_limits<double>::infinity(), 0, false, "start has non-positive action"};
    x /= std::sqrt(a);
  }
  double f = 0.0;
  Vec g;
  if (!evaluate(x, f, g)) return {x, std::numeric_limits<double>::infinity(), 0, false, "objective not finite at start"};

  std::deque<std::pair<Vec, Vec>> memory;
  int stall = 0;
  int it = 0;
  bool converged = false;
  std::string message = "iteration cap reached";
  for (; it < max_iter; ++it) {
    // two-loop recursion
    Vec d = -g;
    {
      std::vector<double> alpha(memory.size());
      for (std::size_t j = memory.size(); j-- > 0;) {
        const auto& [s, y] = memory[j];
        alpha[j] = s.dot(d) / y.dot(s);
        d -= alpha[j] * y;
      }
      if (!memory.empty()) {
        const auto& [s, y] = memory.back();
        d *= s.dot(y) / y.squaredNorm();
      }
      for (std::size_t j = 0; j < memory.size(); ++j) {
        const auto& [s, y] = memory[j];
        const double beta = y.dot(d) / y.dot(s);
        d += (alpha[j] - beta) * s;
      }
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      memory.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    if (slope == 0.0) {
      converged = true;
      message = "zero gradient";
      break;
    }
    double t = memory.empty() ? std::min(1.0, 0.1 * x.norm() / d.norm()) : 1.0;
    Vec xn;
    Vec gn;
    double fn = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + t * d;
      if (evaluate(xn, fn, gn) && fn <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      converged = true;
      message = "line search stalled at a stationary point";
      break;
    }
    const Vec s = xn - x;
    const Vec y = gn - g;
    const double rel = (f - fn) / std::max(std::abs(f), 1e-300);
    x = std::move(xn);
    g = std::move(gn);
    f = fn;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      memory.emplace_back(s, y);
      if (memory.size() > kMemory) memory.pop_front();
    }
    // keep A near 1; R is scale invariant but the memory pairs are not
    const double a = obj.action(x);
    if (a < 0.5 || a > 2.0) {
      const double c = 1.0 / std::sqrt(a);
      x *= c;
      g /= c;
      memory.clear();
    }
    stall = rel < tol_obj ? stall + 1 : 0;
    if (stall >= kStallWindow) {
      converged = true;
      message = "relative decrease below tolerance";
      ++it;
      break;
    }
  }
  const double a = obj.action(x);
  x /= std::sqrt(a);
  return {x, f, it, converged, message};
}

Loop random_start(int dim, int modes, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int low = std::min(3, modes);
  for (int attempt = 0; attempt < 32; ++attempt) {
    Loop z(dim / 2, modes, samples);
    double norm2 = 0.0;
    for (int k = 1; k <= low; ++k) {
      const double scale = 1.0 / (static_cast<double>(k) * k);
      for (int r = 0; r < dim; ++r) {
        z.cos_coeffs()(r, k - 1) = scale * gauss(rng);
        z.sin_coeffs()(r, k - 1) = scale * gauss(rng);
      }
      norm2 += z.cos_coeffs().col(k - 1).squaredNorm() + z.sin_coeffs().col(k - 1).squaredNorm();
    }
    const double a = symplectic_action(z);
    if (std::abs(a) < 1e-6 * norm2) continue;
    if (a < 0) z = z.reversed();
    return z;
  }
  throw Error("capacity solver: could not draw a start loop with non-zero action");
}

// Per-mode energy profile, invariant under time shifts; used to tell carriers apart.
Vec mode_profile(const Loop& z) {
  Vec p(z.modes());
  for (int k = 0; k < z.modes(); ++k) p(k) = z.cos_coeffs().col(k).squaredNorm() + z.sin_coeffs().col(k).squaredNorm();
  return p;
}

// ---------------------------------------------------------------------------
// KKT residual machinery

// Projection of y onto conv(generators) by Frank-Wolfe with exact line search.
Vec project_hull(const std::vector<Vec>& gens, const Vec& y) {
  if (gens.size() == 1) return gens.front();
  Vec x = gens.front();
  double best = (x - y).squaredNorm();
  for (const auto& g : gens) {
    const double d = (g - y).squaredNorm();
    if (d < best) {
      best = d;
      x = g;
    }
  }
  for (int it = 0; it < 500; ++it) {
    const Vec grad = x - y;
    std::size_t arg = 0;
    double m = gens[0].dot(grad);
    for (std::size_t j = 1; j < gens.size(); ++j) {
      const double v = gens[j].dot(grad);
      if (v < m) {
        m = v;
        arg = j;
      }
    }
    const Vec dir = gens[arg] - x;
    const double gap = -grad.dot(dir);
    if (gap <= 1e-16 * (1.0 + y.squaredNorm())) break;
    const double step = std::clamp(gap / std::max(dir.squaredNorm(), 1e-300), 0.0, 1.0);
    x += step * dir;
  }
  return x;
}

// The set d(h^2)(u) = 2 h(u) dh(u) at one sample, stored blockwise so that
// products project factor by factor.
struct SampleSet {
  struct Block {
    Eigen::Index offset;
    Eigen::Index size;
    double scale;              ///< 2 h(u)
    std::vector<Vec> gens;     ///< unscaled generators of dh_block
    const ConvexBody* whole = nullptr;  ///< set = scale * whole body (block velocity ~ 0)
  };
  std::vector<Block> blocks;
};

// A product block whose velocity is below this fraction of the full velocity
// is treated as resting, so its subdifferential is the whole factor body.
constexpr double kRestingFraction = 0.05;

std::vector<SampleSet> build_sets(const ConvexBody& sigma, const Mat& v) {
  std::vector<SampleSet> sets(static_cast<std::size_t>(v.cols()));
  const auto* prod = std::get_if<shapes::Product>(&sigma.variant());
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    const Vec u = v.col(i);
    auto& set = sets[static_cast<std::size_t>(i)];
    if (u.squaredNorm() == 0.0) {
      set.blocks.push_back({0, u.size(), 0.0, {Vec::Zero(u.size())}, nullptr});
      continue;
    }
    const double h = sigma.support(u);
    if (prod == nullptr) {
      set.blocks.push_back({0, u.size(), 2.0 * h, sigma.support_subgradients(u), nullptr});
      continue;
    }
    const int nq = prod->q_body.dim();
    const int np = prod->p_body.dim();
    const std::pair<const ConvexBody*, std::pair<Eigen::Index, Eigen::Index>> parts[2] = {
        {&prod->q_body, {0, nq}}, {&prod->p_body, {nq, np}}};
    for (const auto& [body, range] : parts) {
      const Vec ub = u.segment(range.first, range.second);
      if (ub.norm() <= kRestingFraction * u.norm()) {
        set.blocks.push_back({range.first, range.second, 2.0 * h, {}, body});
      } else {
        set.blocks.push_back({range.first, range.second, 2.0 * h, body->support_subgradients(ub), nullptr});
      }
    }
  }
  return sets;
}

Vec project_set(const SampleSet& set, const Vec& y) {
  Vec out(y.size());
  for (const auto& b : set.blocks) {
    const Vec yb = y.segment(b.offset, b.size);
    if (b.scale == 0.0) {
      out.segment(b.offset, b.size).setZero();
    } else if (b.whole != nullptr) {
      out.segment(b.offset, b.size) = b.scale * project_onto(*b.whole, yb / b.scale);
    } else {
      std::vector<Vec> gens = b.gens;
      for (auto& g : gens) g *= b.scale;
      out.segment(b.offset, b.size) = project_hull(gens, yb);
    }
  }
  return out;
}

struct FitOutcome {
  double mu;
  Vec alpha;
  double residual;  ///< RMS distance (not normalised)
};

// Alternating least squares for (mu, alpha) (or alpha alone when fix_mu):
// targets P_i = proj_{S_i}(mu J z_i + alpha).
FitOutcome fit_multipliers(const std::vector<SampleSet>& sets, const Mat& jz, double mu, bool fix_mu) {
  const Eigen::Index dim = jz.rows();
  const auto count = static_cast<double>(jz.cols());
  const Vec jz_mean = jz.rowwise().mean();
  const Mat jz_c = jz.colwise() - jz_mean;
  const double jz_norm2 = jz_c.squaredNorm();
  Mat p(dim, jz.cols());
  Vec alpha = Vec::Zero(dim);
  // initial targets: the first generator of each set (exact for smooth bodies)
  for (Eigen::Index i = 0; i < jz.cols(); ++i) p.col(i) = project_set(sets[static_cast<std::size_t>(i)], mu * jz.col(i));
  double prev = std::numeric_limits<double>::infinity();
  double residual = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Vec p_mean = p.rowwise().mean();
    if (!fix_mu && jz_norm2 > 0) mu = ((p.colwise() - p_mean).cwiseProduct(jz_c)).sum() / jz_norm2;
    alpha = p_mean - mu * jz_mean;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < jz.cols(); ++i) {
      const Vec y = mu * jz.col(i) + alpha;
      p.col(i) = project_set(sets[static_cast<std::size_t>(i)], y);
      sum += (y - p.col(i)).squaredNorm();
    }
    residual = std::sqrt(sum / count);
    if (prev - residual <= 1e-12 * (1.0 + residual)) break;
    prev = residual;
  }
  return {mu, alpha, residual};
}

}  // namespace

// ---------------------------------------------------------------------------
// SolverConfig

void SolverConfig::validate() const {
  if (modes < 1) throw ConfigError("solver config: modes must be >= 1");
  if (samples < 4 * modes + 1) throw ConfigError("solver config: samples must be >= 4 * modes + 1");
  if (starts < 1) throw ConfigError("solver config: starts must be >= 1");
  if (!(tol_obj > 0)) throw ConfigError("solver config: tol_obj must be positive");
  if (!(tol_kkt > 0)) throw ConfigError("solver config: tol_kkt must be positive");
  if (max_iter < 1) throw ConfigError("solver config: max_iter must be >= 1");
}

SolverConfig SolverConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("solver config must be a JSON object");
  SolverConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "modes") c.modes = value.get<int>();
      else if (key == "samples") c.samples = value.get<int>();
      else if (key == "starts") c.starts = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "tol_obj") c.tol_obj = value.get<double>();
      else if (key == "tol_kkt") c.tol_kkt = value.get<double>();
      else if (key == "max_iter") c.max_iter = value.get<int>();
      else if (key == "refine") c.refine = value.get<bool>();
      else throw ConfigError("solver config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("solver config: bad value for '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

json SolverConfig::to_json() const {
  return {{"modes", modes}, {"samples", samples}, {"starts", starts},     {"seed", seed},
          {"tol_obj", tol_obj}, {"tol_kkt", tol_kkt}, {"max_iter", max_iter}, {"refine", refine}};
}

// ---------------------------------------------------------------------------

ConvexBody scaled_body(const ConvexBody& sigma, double c) {
  if (const auto* p = std::get_if<shapes::Product>(&sigma.variant())) {
    return ConvexBody::product(ConvexBody::dilate(c, p->q_body), ConvexBody::dilate(c, p->p_body));
  }
  return ConvexBody::dilate(c, sigma);
}

RecenteredBody recenter_for_solver(const ConvexBody& sigma) {
  if (const auto* p = std::get_if<shapes::Product>(&sigma.variant())) {
    const auto k = recenter(p->q_body);
    const auto t = recenter(p->p_body);
    if (!k.moved && !t.moved) return {sigma, Vec::Zero(sigma.dim()), false};
    Vec shift(sigma.dim());
    shift << k.shift, t.shift;
    return {ConvexBody::product(k.body, t.body), shift, true};
  }
  const auto r = recenter(sigma);
  return {r.body, r.shift, r.moved};
}

KktResult kkt_residual(const ConvexBody& sigma, const Loop& z, double lambda) {
  require_dim(sigma.dim(), z.dim(), "kkt_residual");
  if (!(lambda > 0)) throw Error("kkt_residual: lambda must be positive");
  const Mat v = z.sample_velocities();
  const Mat jz = apply_J(z.sample_points());
  const auto sets = build_sets(sigma, v);
  const auto fixed = fit_multipliers(sets, jz, lambda, true);
  const auto free = fit_multipliers(sets, jz, lambda, false);
  KktResult r;
  r.residual = fixed.residual / lambda;
  r.alpha = fixed.alpha;
  r.lambda_fit = free.mu;
  r.residual_fit = free.residual / std::max(std::abs(free.mu), 1e-300);
  return r;
}

CapacityResult minimize_capacity(const ConvexBody& input, const SolverConfig& config) {
  config.validate();
  if (input.dim() % 2 != 0) throw DimensionError("minimize_capacity: body must live in an even-dimensional space");
  const auto centred = recenter_for_solver(input);
  const ConvexBody& sigma = centred.body;
  const int dim = sigma.dim();

  const Rayleigh coarse(sigma, dim, config.modes, config.samples);
  struct StartRun {
    StartSummary summary;
    Vec x;
  };
  std::vector<StartRun> runs(static_cast<std::size_t>(config.starts));
  parallel_for(config.starts, [&](int s) {
    auto& run = runs[static_cast<std::size_t>(s)];
    run.summary.index = s;
    run.summary.seed = derive_seed(config.seed, static_cast<std::uint64_t>(s));
    const Loop z0 = random_start(dim, config.modes, config.samples, run.summary.seed);
    auto out = lbfgs_rayleigh(coarse, coarse.from_loop(z0), config.tol_obj, config.max_iter);
    run.summary.ok = std::isfinite(out.value);
    run.summary.value = 0.5 * kPi * out.value;
    run.summary.iterations = out.iterations;
    run.summary.converged = out.converged;
    run.summary.message = out.message;
    run.x = std::move(out.x);
  });

  // Deterministic merge: lowest value; near-ties prefer the lower KKT residual, then the lower index.
  int best = -1;
  int succeeded = 0;
  for (int s = 0; s < config.starts; ++s) {
    const auto& sum = runs[static_cast<std::size_t>(s)].summary;
    if (!sum.ok) continue;
    ++succeeded;
    if (best < 0 || sum.value < runs[static_cast<std::size_t>(best)].summary.value) best = s;
  }
  if (best < 0) throw Error("minimize_capacity: no start reached a loop of positive action");
  {
    const double v0 = runs[static_cast<std::size_t>(best)].summary.value;
    std::vector<int> ties;
    for (int s = 0; s < config.starts; ++s) {
      const auto& sum = runs[static_cast<std::size_t>(s)].summary;
      if (sum.ok && std::abs(sum.value - v0) <= 1e-12 * v0) ties.push_back(s);
    }
    if (ties.size() > 1) {
      double best_kkt = std::numeric_limits<double>::infinity();
      for (int s : ties) {
        const auto& run = runs[static_cast<std::size_t>(s)];
        const double k = kkt_residual(sigma, coarse.to_loop(run.x), 2.0 * run.summary.value / kPi).residual;
        if (k < best_kkt) {
          best_kkt = k;
          best = s;
        }
      }
    }
  }
  const auto& winner = runs[static_cast<std::size_t>(best)];
  const Loop coarse_loop = coarse.to_loop(winner.x);

  // Polish with doubled modes and samples; the change in value estimates the
  // truncation error (which decays at least like 1/M).
  const Rayleigh fine(sigma, dim, 2 * config.modes, 2 * config.samples);
  const auto polished = lbfgs_rayleigh(fine, fine.from_loop(coarse_loop.resized(2 * config.modes, 2 * config.samples)),
                                       config.tol_obj, config.max_iter);
  const double coarse_value = winner.summary.value;
  const double fine_value = std::isfinite(polished.value) ? std::min(0.5 * kPi * polished.value, coarse_value) : coarse_value;
  const double gap = coarse_value - fine_value;

  CapacityResult r{sigma};
  r.coarse_value = coarse_value;
  r.fine_value = fine_value;
  r.refined = config.refine;
  if (config.refine && std::isfinite(polished.value) && 0.5 * kPi * polished.value <= coarse_value) {
    r.loop = fine.to_loop(polished.x);
    r.value_tolerance = gap + 1e-9 * fine_value;
    r.iterations = winner.summary.iterations + polished.iterations;
    r.converged = winner.summary.converged && polished.converged;
  } else {
    r.loop = coarse_loop;
    r.value_tolerance = 2.0 * gap + 1e-9 * coarse_value;
    r.iterations = winner.summary.iterations;
    r.converged = winner.summary.converged;
  }
  // normalise exactly and evaluate the multipliers at the reported loop
  r.loop = r.loop.scaled(1.0 / std::sqrt(symplectic_action(r.loop)));
  r.lambda = dual_action(sigma, r.loop);
  r.value = 0.5 * kPi * r.lambda;
  const auto kkt = kkt_residual(sigma, r.loop, r.lambda);
  r.alpha = kkt.alpha;
  r.kkt_residual = kkt.residual;
  r.kkt_lambda = kkt.lambda_fit;
  r.kkt_ok = kkt.residual <= config.tol_kkt;
  r.starts_used = config.starts;
  r.starts_succeeded = succeeded;
  r.shift = centred.shift;
  r.recentered = centred.moved;

  // carriers: converged near-optimal loops with distinct mode profiles
  const double window = std::max(r.value_tolerance, 1e-6 * coarse_value);
  std::vector<Vec> profiles;
  for (int s = 0; s < config.starts; ++s) {
    const auto& run = runs[static_cast<std::size_t>(s)];
    if (!run.summary.ok || !run.summary.converged || run.summary.value > coarse_value + window) continue;
    const Loop z = coarse.to_loop(run.x);
    const Vec prof = mode_profile(z);
    const bool seen = std::any_of(profiles.begin(), profiles.end(), [&](const Vec& p) {
      return (p - prof).norm() <= 1e-3 * (1.0 + prof.norm());
    });
    if (!seen) {
      profiles.push_back(prof);
      r.carriers.push_back(z);
    }
  }
  for (auto& run : runs) r.starts.push_back(run.summary);
  return r;
}

CapacityResult minimize_capacity(const LagrangianProduct& sigma, const SolverConfig& config) {
  return minimize_capacity(sigma.body(), config);
}

HomogeneityReport capacity_homogeneity_check(const ConvexBody& sigma, double c, const SolverConfig& config) {
  if (!(c > 0)) throw Error("capacity_homogeneity_check: factor must be positive");
  HomogeneityReport rep;
  rep.factor = c;
  rep.value = minimize_capacity(sigma, config).value;
  rep.scaled_value = c == 1.0 ? rep.value : minimize_capacity(scaled_body(sigma, c), config).value;
  rep.relative_error = std::abs(rep.scaled_value - c * c * rep.value) / rep.scaled_value;
  return rep;
}

json CapacityResult::to_json(bool with_loop) const {
  json starts_json = json::array();
  for (const auto& s : starts) {
    starts_json.push_back({{"index", s.index},
                           {"seed", s.seed},
                           {"ok", s.ok},
                           {"value", s.ok ? json(s.value) : json(nullptr)},
                           {"iterations", s.iterations},
                           {"converged", s.converged},
                           {"message", s.message}});
  }
  json out = {{"value", value},
              {"value_tolerance", value_tolerance},
              {"lambda", lambda},
              {"alpha", vec_to_json(alpha)},
              {"kkt_residual", kkt_residual},
              {"kkt_lambda", kkt_lambda},
              {"kkt_ok", kkt_ok},
              {"converged", converged},
              {"iterations", iterations},
              {"starts_used", starts_used},
              {"starts_succeeded", starts_succeeded},
              {"refined", refined},
              {"coarse_value", coarse_value},
              {"fine_value", fine_value},
              {"recentered", recentered},
              {"shift", vec_to_json(shift)},
              {"carrier_count", carriers.size()},
              {"starts", starts_json}};
  if (with_loop) {
    out["loop"] = {{"modes", loop.modes()},
                   {"samples", loop.samples()},
                   {"cos", mat_to_json(loop.cos_coeffs())},
                   {"sin", mat_to_json(loop.sin_coeffs())}};
  }
  return out;
}

}  // namespace ehz
