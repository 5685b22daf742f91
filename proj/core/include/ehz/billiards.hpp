#pragma once

#include <ehz/body.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ehz {

/// The state is on (or numerically at) the gliding set, where the ray of the
/// billiard map is tangent to the table.
class GlidingConfigurationError : public Error {
 public:
  using Error::Error;
};

/// q on the boundary of the table K, p on the boundary of the momentum body T.
struct BilliardState {
  Vec q;
  Vec p;
};

/// Tolerance on |g_K(q) - 1| and |g_T(p) - 1| for a valid state.
inline constexpr double kStateTolerance = 1e-9;
/// Normalised |<grad g_K(q), grad g_T(p)>| below which a state counts as tangential.
inline constexpr double kTangencyTolerance = 1e-8;

/// One (K,T)-billiard bounce. q moves along -grad g_T(p) until it meets the
/// boundary of K again at q'; then p moves along grad g_K(q') until it leaves
/// T at p'. With T the Euclidean unit ball this is specular reflection.
/// Requires the origin interior to K and T.
BilliardState billiard_step(const ConvexBody& K, const ConvexBody& T, const BilliardState& state);

struct TraceResult {
  std::vector<BilliardState> states;  ///< the start state followed by one state per completed bounce
  bool completed = false;
  std::string diagnostic;  ///< why the trace stopped early (empty when completed)
};

/// Iterate billiard_step `bounces` times. A tangential (gliding) or invalid
/// state stops the trace and is reported in the diagnostic.
TraceResult trace(const ConvexBody& K, const ConvexBody& T, const BilliardState& start, int bounces);

/// Momentum for a bounce at `from` heading to `to`: the point of the boundary
/// of T with outward normal from - to.
Vec momentum_towards(const ConvexBody& T, const Vec& from, const Vec& to);

struct OrbitSearchConfig {
  int starts = 16;
  /// Candidate polygons drawn per start; the descent begins at the shortest.
  int screen = 32;
  /// Perturbed restarts from the best polygon after the multistart phase.
  int hops = 16;
  /// Relative size of the hop perturbation of the normals.
  double hop_size = 0.5;
  std::uint64_t seed = 7;
  int max_iter = 4000;
  double tol = 1e-12;  ///< relative stopping tolerance on the length
};

struct OrbitResult {
  int m = 0;
  double length = 0.0;
  /// Listed so that length = sum_j h_T(q_{j+1} - q_j); the billiard map visits
  /// them in reverse order.
  std::vector<Vec> points;
  /// Number of distinct consecutive points (a search for m bounces may
  /// converge to a polygon with fewer vertices).
  int effective_bounces = 0;
  /// Max distance (relative to the diameter of K) between the stored points
  /// and the images under billiard_step; NaN when the step could not be
  /// evaluated (e.g. tangency).
  double closure_error = 0.0;
  int starts_used = 0;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Minimise sum_j h_T(q_{j+1} - q_j) over m-gons with vertices
/// q_j = grad h_K(u_j) on the boundary of K whose normals u_j contain the
/// origin in their convex hull (so the polygon cannot be translated into
/// the interior of K). Multi-start quasi-Newton descent followed by a
/// compass-search polish.
OrbitResult shortest_orbit_direct(const ConvexBody& K, const ConvexBody& T, int m, const OrbitSearchConfig& config = {});

/// min over m in [m_min, m_max] of shortest_orbit_direct.
OrbitResult shortest_orbit_range(const ConvexBody& K, const ConvexBody& T, int m_min, int m_max,
                                 const OrbitSearchConfig& config = {});

/// Closure defect of a polygon under billiard_step (see OrbitResult::closure_error).
double orbit_closure_error(const ConvexBody& K, const ConvexBody& T, const std::vector<Vec>& points);

/// min over unit u of h_T(w) + h_T(-w), w = grad h_K(u) - grad h_K(-u).
double t_width_two_bounce(const ConvexBody& K, const ConvexBody& T);

struct GlidingCheck {
  bool on_gliding_set = false;
  /// <Hess g_T(p) a, a> / <Hess g_K(q) b, b> with a = grad g_K(q), b = grad g_T(p);
  /// NaN when the denominator vanishes.
  double ratio = 0.0;
  double inner = 0.0;  ///< normalised <grad g_T(p), grad g_K(q)>
};

/// Requires gauge Hessians for both bodies (CapabilityError otherwise).
GlidingCheck gliding_check(const ConvexBody& K, const ConvexBody& T, const BilliardState& state);

/// CSV with header "j,q1..qn,p1..pn" of bounce points and their momenta.
std::string orbit_to_csv(const ConvexBody& T, const OrbitResult& orbit);

}  // namespace ehz
